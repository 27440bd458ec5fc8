"""Greedy matching, precision/recall curves, average precision, and reports.

Matching is greedy in confidence order: detections are visited by descending
score (ties keep input order) and each one claims the unmatched same-class
ground-truth box with the highest IoU at or above the threshold, else it is a
false positive. Cross-class matches are never allowed. Curves pool detections
across images sorted by (score desc, image_id asc, input index asc) so results
are bit-reproducible regardless of file ordering.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .annotate_io import DatasetManifest, Detection, DetectionSet, GroundTruthBox
from .boxmath import iou_matrix
from .errors import (
    EmptyManifestError,
    OverlappingStrataError,
    UnknownClassError,
    UnknownImageIdError,
)

__all__ = [
    "EvalConfig",
    "DetectionVerdict",
    "MatchOutcome",
    "PRPoint",
    "PRCurve",
    "OperatingPoint",
    "ClassEval",
    "EvalReport",
    "StratifiedReport",
    "match_image",
    "pr_curve",
    "average_precision",
    "operating_point",
    "evaluate",
    "stratified_evaluate",
    "INTERP_GRID",
]

AP_MODES = ("all_points", "interp_101")
OPERATING_POINT_RULES = ("max_f1",)

# Fixed recall grid used by interp_101: k/100 for k in 0..100. The grid
# definition is part of the contract so independent evaluations agree exactly.
INTERP_GRID = tuple(k / 100.0 for k in range(101))


@dataclass(frozen=True)
class EvalConfig:
    """Evaluation knobs, echoed verbatim into every report."""

    iou_threshold: float = 0.50
    ap_mode: str = "all_points"
    operating_point_rule: str = "max_f1"
    class_filter: frozenset[int] | None = None

    def __post_init__(self) -> None:
        if not (0.0 < self.iou_threshold <= 1.0):
            raise ValueError(f"iou_threshold must lie in (0, 1], got {self.iou_threshold}")
        if self.ap_mode not in AP_MODES:
            raise ValueError(f"ap_mode must be one of {AP_MODES}, got {self.ap_mode!r}")
        if self.operating_point_rule not in OPERATING_POINT_RULES:
            raise ValueError(f"operating_point_rule must be one of {OPERATING_POINT_RULES}")
        if self.class_filter is not None:
            object.__setattr__(self, "class_filter", frozenset(self.class_filter))


@dataclass(frozen=True)
class DetectionVerdict:
    """One detection's fate after matching."""

    det_index: int  # index into the input detection list
    score: float
    is_tp: bool
    gt_index: int | None  # matched ground-truth index, None for false positives


@dataclass(frozen=True)
class MatchOutcome:
    """Matching result for one (image, class) pair."""

    image_id: str
    class_id: int
    num_gt: int
    verdicts: tuple[DetectionVerdict, ...]  # descending score order

    @property
    def tp(self) -> int:
        return sum(1 for v in self.verdicts if v.is_tp)

    @property
    def fp(self) -> int:
        return sum(1 for v in self.verdicts if not v.is_tp)

    @property
    def fn(self) -> int:
        return self.num_gt - self.tp


@dataclass(frozen=True)
class PRPoint:
    confidence: float
    precision: float
    recall: float


@dataclass(frozen=True)
class PRCurve:
    """Cumulative precision/recall, one point per pooled detection.

    Empty when there is no ground truth: precision/recall are undefined then.
    """

    points: tuple[PRPoint, ...]
    total_gt: int


@dataclass(frozen=True)
class OperatingPoint:
    precision: float
    recall: float
    confidence: float
    f1: float


@dataclass(frozen=True)
class ClassEval:
    class_id: int
    name: str
    num_gt: int
    num_det: int
    ap: float | None  # None when the class has no ground truth
    op: OperatingPoint
    curve: PRCurve


@dataclass(frozen=True)
class EvalReport:
    config: EvalConfig
    num_images: int
    num_gt: int
    num_det: int
    map_value: float
    empty: bool  # no ground truth anywhere in the evaluated set
    pooled_op: OperatingPoint
    pooled_curve: PRCurve
    classes: tuple[ClassEval, ...]


@dataclass(frozen=True)
class StratifiedReport:
    """Per-stratum reports; "all" always present and always first."""

    config: EvalConfig
    strata: tuple[tuple[str, EvalReport], ...]

    def by_name(self) -> dict[str, EvalReport]:
        return dict(self.strata)


def match_image(
    gts: Sequence[GroundTruthBox],
    dets: Sequence[Detection],
    class_id: int,
    iou_threshold: float,
) -> MatchOutcome:
    """Greedily match one image's detections of one class to its ground truth.

    Inputs must already be filtered to a single image and class. Ties in IoU go
    to the lowest ground-truth index; ties in score keep input order.
    """
    image_id = dets[0].image_id if dets else ""
    order = sorted(range(len(dets)), key=lambda i: (-dets[i].score, i))
    matrix = iou_matrix([g.box for g in gts], [d.box for d in dets])
    matched = np.zeros(len(gts), dtype=bool)
    verdicts = []
    for i in order:
        gt_index: int | None = None
        if len(gts):
            col = matrix[:, i].copy()
            col[matched] = -1.0
            j = int(np.argmax(col))
            if col[j] >= iou_threshold:
                gt_index = j
                matched[j] = True
        verdicts.append(DetectionVerdict(i, dets[i].score, gt_index is not None, gt_index))
    return MatchOutcome(image_id, class_id, len(gts), tuple(verdicts))


def pr_curve(outcomes: Iterable[MatchOutcome], total_gt: int) -> PRCurve:
    """Pool matched detections across images into one cumulative PR curve.

    The pooled order is (score desc, image_id asc, input index asc). With zero
    ground truth the curve is empty by definition.
    """
    if total_gt == 0:
        return PRCurve((), 0)
    entries = [
        (-v.score, o.image_id, v.det_index, v.is_tp)
        for o in outcomes
        for v in o.verdicts
    ]
    entries.sort(key=lambda e: e[:3])
    points = []
    tp = 0
    for rank, (neg_score, _image_id, _idx, is_tp) in enumerate(entries, start=1):
        tp += 1 if is_tp else 0
        points.append(PRPoint(-neg_score, tp / rank, tp / total_gt))
    return PRCurve(tuple(points), total_gt)


def average_precision(curve: PRCurve, mode: str = "all_points") -> float:
    """Area under the monotone precision envelope of a PR curve.

    all_points integrates the envelope exactly over recall; interp_101 averages
    the envelope on the fixed 101-point recall grid. An empty curve scores 0.
    """
    if mode not in AP_MODES:
        raise ValueError(f"mode must be one of {AP_MODES}, got {mode!r}")
    if not curve.points:
        return 0.0
    recalls = np.array([p.recall for p in curve.points])
    precisions = np.array([p.precision for p in curve.points])
    if mode == "all_points":
        mrec = np.concatenate(([0.0], recalls))
        mpre = np.concatenate(([0.0], precisions))
        env = np.maximum.accumulate(mpre[::-1])[::-1]
        steps = np.flatnonzero(mrec[1:] != mrec[:-1])
        return float(np.sum((mrec[steps + 1] - mrec[steps]) * env[steps + 1]))
    # interp_101: recall is non-decreasing along the pooled order already, but
    # sort defensively before building the suffix maximum.
    order = np.argsort(recalls, kind="stable")
    recalls = recalls[order]
    suffix_max = np.maximum.accumulate(precisions[order][::-1])[::-1]
    idx = np.searchsorted(recalls, np.array(INTERP_GRID), side="left")
    env = np.where(idx < len(recalls), suffix_max[np.minimum(idx, len(recalls) - 1)], 0.0)
    return float(np.sum(env) / len(INTERP_GRID))


def operating_point(curve: PRCurve) -> OperatingPoint:
    """Max-F1 point of a curve; ties resolve toward higher confidence.

    An empty curve yields the all-zero operating point.
    """
    best = OperatingPoint(0.0, 0.0, 0.0, 0.0)
    for p in curve.points:  # descending confidence, so first max wins ties
        denom = p.precision + p.recall
        f1 = 2.0 * p.precision * p.recall / denom if denom > 0.0 else 0.0
        if f1 > best.f1:
            best = OperatingPoint(p.precision, p.recall, p.confidence, f1)
    return best


def _check_detections(manifest: DatasetManifest, dets: DetectionSet) -> None:
    known = set(manifest.image_ids())
    unknown = sorted(set(dets.groups) - known)
    if unknown:
        raise UnknownImageIdError(f"detections reference unknown image ids: {unknown}")
    k = len(manifest.vocabulary)
    for group in dets.groups.values():
        for d in group:
            if d.class_id >= k:
                raise UnknownClassError(
                    f"detection class_id {d.class_id} outside vocabulary of size {k}"
                )


def _evaluate_subset(
    manifest: DatasetManifest,
    dets: DetectionSet,
    image_ids: set[str],
    config: EvalConfig,
) -> EvalReport:
    records = [rec for rec in manifest.images if rec.image_id in image_ids]
    class_ids = [
        c
        for c in range(len(manifest.vocabulary))
        if config.class_filter is None or c in config.class_filter
    ]
    class_evals = []
    pooled_entries = []  # (-score, image_id, class_id, det_index, is_tp)
    total_gt_all = 0
    total_det_all = 0
    aps = []
    for c in class_ids:
        outcomes = []
        num_gt = 0
        num_det = 0
        for rec in records:
            gts_c = [g for g in rec.boxes if g.class_id == c]
            dets_c = [d for d in dets.for_image(rec.image_id) if d.class_id == c]
            num_gt += len(gts_c)
            num_det += len(dets_c)
            if gts_c or dets_c:
                outcomes.append(match_image(gts_c, dets_c, c, config.iou_threshold))
        curve = pr_curve(outcomes, num_gt)
        ap = average_precision(curve, config.ap_mode) if num_gt > 0 else None
        if ap is not None:
            aps.append(ap)
        class_evals.append(
            ClassEval(
                c,
                manifest.vocabulary.name_of(c),
                num_gt,
                num_det,
                ap,
                operating_point(curve),
                curve,
            )
        )
        pooled_entries.extend(
            (-v.score, o.image_id, o.class_id, v.det_index, v.is_tp)
            for o in outcomes
            for v in o.verdicts
        )
        total_gt_all += num_gt
        total_det_all += num_det

    # Pooled curve over every evaluated class; zero-ground-truth classes still
    # contribute their false positives here.
    if total_gt_all > 0:
        pooled_entries.sort(key=lambda e: e[:4])
        tp = 0
        pts = []
        for rank, entry in enumerate(pooled_entries, start=1):
            tp += 1 if entry[4] else 0
            pts.append(PRPoint(-entry[0], tp / rank, tp / total_gt_all))
        pooled_curve = PRCurve(tuple(pts), total_gt_all)
    else:
        pooled_curve = PRCurve((), 0)

    map_value = float(np.mean(aps)) if aps else 0.0
    return EvalReport(
        config=config,
        num_images=len(records),
        num_gt=total_gt_all,
        num_det=total_det_all,
        map_value=map_value,
        empty=total_gt_all == 0,
        pooled_op=operating_point(pooled_curve),
        pooled_curve=pooled_curve,
        classes=tuple(class_evals),
    )


def evaluate(
    manifest: DatasetManifest,
    dets: DetectionSet,
    config: EvalConfig = EvalConfig(),
) -> EvalReport:
    """Evaluate a detection set against a manifest.

    mAP is the unweighted mean of per-class APs over classes with at least one
    ground-truth box; classes without ground truth are reported with a null AP
    and their detections count as pooled false positives.
    """
    if not manifest.images:
        raise EmptyManifestError("manifest contains no images")
    _check_detections(manifest, dets)
    return _evaluate_subset(manifest, dets, set(manifest.image_ids()), config)


def stratified_evaluate(
    manifest: DatasetManifest,
    dets: DetectionSet,
    strata: Mapping[str, Iterable[str]],
    config: EvalConfig = EvalConfig(),
) -> StratifiedReport:
    """Evaluate per stratum plus the mandatory "all" stratum.

    Strata must be pairwise disjoint subsets of the manifest's image ids. Images
    not covered by any stratum are grouped into an implicit "unassigned" stratum
    so the strata always partition the full set.
    """
    if not manifest.images:
        raise EmptyManifestError("manifest contains no images")
    _check_detections(manifest, dets)
    known = set(manifest.image_ids())
    named: dict[str, set[str]] = {}
    claimed: dict[str, str] = {}
    for name in strata:
        if name == "all":
            raise ValueError('stratum name "all" is reserved')
        ids = set(strata[name])
        unknown = sorted(ids - known)
        if unknown:
            raise UnknownImageIdError(f"stratum {name!r} references unknown image ids: {unknown}")
        for image_id in sorted(ids):
            if image_id in claimed:
                raise OverlappingStrataError(
                    f"image {image_id!r} appears in strata {claimed[image_id]!r} and {name!r}"
                )
            claimed[image_id] = name
        named[name] = ids
    leftover = known - set(claimed)
    if leftover:
        named["unassigned"] = leftover
    entries = [("all", _evaluate_subset(manifest, dets, known, config))]
    for name in sorted(named):
        entries.append((name, _evaluate_subset(manifest, dets, named[name], config)))
    return StratifiedReport(config, tuple(entries))
