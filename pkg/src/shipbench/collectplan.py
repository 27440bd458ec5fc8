"""Half-dome collection planning.

Poses are sampled on the upper hemisphere around a vessel with a golden-angle
spiral, classified into elevation strata, and each labeled 3D component is
projected through a pinhole camera into image-space ground truth.

Vessel frame convention (right-handed): +Z up, +X toward the bow, +Y toward
starboard. Azimuth is measured in the XY plane from +X toward +Y, so 0 deg
looks at the bow quarter, 90 deg at starboard, 270 deg at port. Elevation is
the angle above the XY plane; 90 deg is straight overhead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .annotate_io import (
    ClassVocabulary,
    DatasetManifest,
    GroundTruthBox,
    ImageRecord,
    _as_document,
    _require,
)
from .boxmath import Box2D, ImageDims, area, clip_to_image
from .errors import EmptySceneError, MalformedRecordError

__all__ = [
    "GOLDEN_ANGLE_DEG",
    "CameraPose",
    "Intrinsics",
    "LabeledComponent",
    "SceneSpec",
    "CameraFrame",
    "PlannedView",
    "CollectionPlan",
    "sample_half_dome",
    "classify_stratum",
    "camera_frame",
    "transform_frame",
    "component_corners",
    "project_corners",
    "project_component",
    "auto_intrinsics",
    "generate_plan",
    "plan_to_manifest",
    "scene_from_json",
    "scene_to_json",
    "plan_to_json",
    "plan_from_json",
]

GOLDEN_ANGLE_DEG = 137.50776405  # azimuth step of the spiral
SCENE_SCHEMA = "shipbench/scene/v1"
PLAN_SCHEMA = "shipbench/plan/v1"
DEFAULT_NADIR_CUTOFF_DEG = 70.0
DEFAULT_SPHERE_FILL = 1.0 / 1.2  # bounding sphere fills 1/1.2 of the short image side


def _vec3(v, what: str) -> tuple[float, float, float]:
    seq = tuple(float(x) for x in v)
    if len(seq) != 3 or not all(math.isfinite(x) for x in seq):
        raise ValueError(f"{what} must be 3 finite numbers, got {v!r}")
    return seq


@dataclass(frozen=True)
class CameraPose:
    """A viewpoint on the collection hemisphere, looking at look_at."""

    pose_id: str
    azimuth_deg: float
    elevation_deg: float
    radius_m: float
    look_at: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if not self.pose_id:
            raise ValueError("pose_id must be non-empty")
        if not (0.0 <= self.azimuth_deg < 360.0):
            raise ValueError(f"azimuth must lie in [0, 360), got {self.azimuth_deg}")
        if not (0.0 <= self.elevation_deg <= 90.0):
            raise ValueError(f"elevation must lie in [0, 90], got {self.elevation_deg}")
        if not (self.radius_m > 0.0):
            raise ValueError(f"radius must be positive, got {self.radius_m}")
        object.__setattr__(self, "look_at", _vec3(self.look_at, "look_at"))

    def position(self) -> np.ndarray:
        az = math.radians(self.azimuth_deg)
        el = math.radians(self.elevation_deg)
        direction = np.array(
            [math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)]
        )
        return np.asarray(self.look_at) + self.radius_m * direction


@dataclass(frozen=True)
class Intrinsics:
    """Pinhole intrinsics; the principal point is the image centre."""

    focal_px: float
    dims: ImageDims

    def __post_init__(self) -> None:
        if not (self.focal_px > 0.0 and math.isfinite(self.focal_px)):
            raise ValueError(f"focal length must be positive, got {self.focal_px}")

    @property
    def cx(self) -> float:
        return self.dims.width / 2.0

    @property
    def cy(self) -> float:
        return self.dims.height / 2.0


@dataclass(frozen=True)
class LabeledComponent:
    """An axis-aligned 3D box in the vessel frame, tagged with a class.

    facing_normal, when present, marks one-sided mountings (e.g. a panel array
    on a deckhouse face): the component is only visible from viewpoints in
    front of that face.
    """

    class_id: int
    center: tuple[float, float, float]
    half_extents: tuple[float, float, float]
    facing_normal: tuple[float, float, float] | None = None

    def __post_init__(self) -> None:
        if not isinstance(self.class_id, int) or isinstance(self.class_id, bool) or self.class_id < 0:
            raise ValueError(f"class_id must be a non-negative integer, got {self.class_id!r}")
        object.__setattr__(self, "center", _vec3(self.center, "center"))
        he = _vec3(self.half_extents, "half_extents")
        if not all(v > 0.0 for v in he):
            raise ValueError(f"half_extents must be positive, got {he}")
        object.__setattr__(self, "half_extents", he)
        if self.facing_normal is not None:
            n = _vec3(self.facing_normal, "facing_normal")
            if abs(math.sqrt(sum(v * v for v in n)) - 1.0) > 1e-9:
                raise ValueError(f"facing_normal must be a unit vector, got {n}")
            object.__setattr__(self, "facing_normal", n)


@dataclass(frozen=True)
class SceneSpec:
    """A vessel: its class vocabulary, labeled components, and bounding sphere."""

    vessel: str
    vocabulary: ClassVocabulary
    components: tuple[LabeledComponent, ...]
    bounding_radius_m: float

    def __post_init__(self) -> None:
        if not self.vessel:
            raise ValueError("vessel name must be non-empty")
        if not (self.bounding_radius_m > 0.0):
            raise ValueError("bounding radius must be positive")
        object.__setattr__(self, "components", tuple(self.components))
        for c in self.components:
            if not self.vocabulary.contains_id(c.class_id):
                raise ValueError(
                    f"component class_id {c.class_id} outside vocabulary of size {len(self.vocabulary)}"
                )


@dataclass(frozen=True)
class CameraFrame:
    """World-to-camera transform: rows of rotation are (right, down, forward)."""

    position: tuple[float, float, float]
    rotation: tuple[tuple[float, float, float], ...]

    def rotation_array(self) -> np.ndarray:
        return np.array(self.rotation, dtype=float)

    def position_array(self) -> np.ndarray:
        return np.array(self.position, dtype=float)


@dataclass(frozen=True)
class PlannedView:
    pose: CameraPose
    stratum: str
    boxes: tuple[GroundTruthBox, ...]


@dataclass(frozen=True)
class CollectionPlan:
    scene_name: str
    vocabulary: ClassVocabulary
    intrinsics: Intrinsics
    nadir_cutoff_deg: float
    views: tuple[PlannedView, ...]

    def strata_sets(self) -> dict[str, list[str]]:
        """Pose ids per stratum; both strata always present, possibly empty."""
        out: dict[str, list[str]] = {"oblique": [], "near_nadir": []}
        for view in self.views:
            out.setdefault(view.stratum, []).append(view.pose.pose_id)
        return out


def sample_half_dome(
    n: int,
    radius_m: float,
    min_elevation_deg: float = 0.0,
    jitter_seed: int | None = None,
) -> list[CameraPose]:
    """Sample n quasi-uniform poses on the upper hemisphere cap.

    The sine of elevation interpolates (sin(min_elevation), 1] at (i + 0.5)/n
    while azimuth advances by the golden angle, which spreads poses evenly over
    the cap. With a jitter seed, each pose is perturbed by up to half the local
    sample spacing (deterministically for a fixed seed); elevations stay within
    [min_elevation, 90].
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if not (0.0 <= min_elevation_deg < 90.0):
        raise ValueError(f"min elevation must lie in [0, 90), got {min_elevation_deg}")
    if not (radius_m > 0.0):
        raise ValueError(f"radius must be positive, got {radius_m}")
    sin_min = math.sin(math.radians(min_elevation_deg))
    span = 1.0 - sin_min
    rng = np.random.default_rng(jitter_seed) if jitter_seed is not None else None
    band = span / n if n else 0.0
    az_halfstep_deg = math.degrees(math.sqrt(2.0 * math.pi * span / n) / 2.0) if n else 0.0
    poses = []
    for i in range(n):
        s = sin_min + (i + 0.5) / n * span
        az = math.fmod(i * GOLDEN_ANGLE_DEG, 360.0)
        if rng is not None:
            s = min(max(s + (rng.random() * 2.0 - 1.0) * band / 2.0, sin_min), 1.0)
            az = math.fmod(az + (rng.random() * 2.0 - 1.0) * az_halfstep_deg + 360.0, 360.0)
        elevation = math.degrees(math.asin(min(s, 1.0)))
        poses.append(CameraPose(f"pose_{i:04d}", az, min(elevation, 90.0), radius_m))
    return poses


def classify_stratum(pose: CameraPose, nadir_cutoff_deg: float = DEFAULT_NADIR_CUTOFF_DEG) -> str:
    """"near_nadir" at or above the cutoff elevation, else "oblique"."""
    if not (0.0 < nadir_cutoff_deg < 90.0):
        raise ValueError(f"nadir cutoff must lie in (0, 90), got {nadir_cutoff_deg}")
    return "near_nadir" if pose.elevation_deg >= nadir_cutoff_deg else "oblique"


def camera_frame(pose: CameraPose) -> CameraFrame:
    """Build the camera frame for a pose.

    The camera looks at look_at; image up is world +Z projected onto the image
    plane. Looking straight down leaves that projection undefined, so +X (the
    bow) becomes image up in that case.
    """
    position = pose.position()
    forward = np.asarray(pose.look_at) - position
    forward = forward / np.linalg.norm(forward)
    up_ref = np.array([0.0, 0.0, 1.0])
    right = np.cross(forward, up_ref)
    norm = np.linalg.norm(right)
    if norm < 1e-12:
        up_ref = np.array([1.0, 0.0, 0.0])
        right = np.cross(forward, up_ref)
        norm = np.linalg.norm(right)
    right = right / norm
    down = np.cross(forward, right)  # -(right x forward)
    rotation = (tuple(right), tuple(down), tuple(forward))
    return CameraFrame(tuple(position), rotation)


def transform_frame(frame: CameraFrame, rotation: np.ndarray, translation: np.ndarray) -> CameraFrame:
    """Apply a rigid world transform p -> R p + t to a camera frame."""
    rot = np.asarray(rotation, dtype=float)
    pos = rot @ frame.position_array() + np.asarray(translation, dtype=float)
    new_rows = frame.rotation_array() @ rot.T
    return CameraFrame(tuple(pos), tuple(tuple(row) for row in new_rows))


def component_corners(c: LabeledComponent) -> np.ndarray:
    """The 8 corners of a component box, shape (8, 3), fixed sign order."""
    center = np.asarray(c.center)
    he = np.asarray(c.half_extents)
    signs = np.array(
        [
            [-1, -1, -1],
            [-1, -1, 1],
            [-1, 1, -1],
            [-1, 1, 1],
            [1, -1, -1],
            [1, -1, 1],
            [1, 1, -1],
            [1, 1, 1],
        ],
        dtype=float,
    )
    return center + signs * he


def project_corners(corners: np.ndarray, frame: CameraFrame, k: Intrinsics) -> Box2D | None:
    """Project world points and take their axis-aligned image hull.

    Returns None when any point lies at or behind the camera plane or when the
    hull clipped to the image is degenerate.
    """
    rel = np.asarray(corners, dtype=float) - frame.position_array()
    cam = rel @ frame.rotation_array().T  # columns: right, down, depth
    depths = cam[:, 2]
    if np.any(depths <= 0.0):
        return None
    u = k.cx + k.focal_px * cam[:, 0] / depths
    v = k.cy + k.focal_px * cam[:, 1] / depths
    box = clip_to_image(
        Box2D(float(u.min()), float(v.min()), float(u.max()), float(v.max())), k.dims
    )
    if area(box) == 0.0:
        return None
    return box


def project_component(c: LabeledComponent, pose: CameraPose, k: Intrinsics) -> GroundTruthBox | None:
    """Project one component through a pose; None when absent from the view.

    Absence cases: the component faces away (facing normal against the line of
    sight, back-face at dot <= 0 exactly), any corner at or behind the camera
    plane, or a hull that clips to zero area.
    """
    frame = camera_frame(pose)
    if c.facing_normal is not None:
        to_camera = frame.position_array() - np.asarray(c.center)
        if float(np.dot(np.asarray(c.facing_normal), to_camera)) <= 0.0:
            return None
    box = project_corners(component_corners(c), frame, k)
    if box is None:
        return None
    return GroundTruthBox(c.class_id, box, source_encoding="pixel")


def auto_intrinsics(
    scene: SceneSpec,
    radius_m: float,
    dims: ImageDims = ImageDims(640, 640),
    fill: float = DEFAULT_SPHERE_FILL,
) -> Intrinsics:
    """Choose a focal length so the vessel's bounding sphere fills `fill` of the
    smaller image dimension from the given stand-off radius."""
    if radius_m <= scene.bounding_radius_m:
        raise ValueError(
            f"stand-off radius {radius_m} must exceed the bounding radius {scene.bounding_radius_m}"
        )
    if not (0.0 < fill <= 1.0):
        raise ValueError(f"fill must lie in (0, 1], got {fill}")
    half_angle = math.asin(scene.bounding_radius_m / radius_m)
    focal = (min(dims.width, dims.height) * fill / 2.0) / math.tan(half_angle)
    return Intrinsics(focal, dims)


def generate_plan(
    scene: SceneSpec,
    n_poses: int,
    radius_m: float,
    min_elevation_deg: float = 10.0,
    nadir_cutoff_deg: float = DEFAULT_NADIR_CUTOFF_DEG,
    intrinsics: Intrinsics | None = None,
    jitter_seed: int | None = None,
) -> CollectionPlan:
    """Sample poses over the scene and project every component per pose."""
    if not scene.components:
        raise EmptySceneError(f"scene {scene.vessel!r} has no components")
    if n_poses < 1:
        raise ValueError("a plan needs at least one pose")
    k = intrinsics if intrinsics is not None else auto_intrinsics(scene, radius_m)
    views = []
    for pose in sample_half_dome(n_poses, radius_m, min_elevation_deg, jitter_seed):
        boxes = tuple(
            box
            for c in scene.components
            if (box := project_component(c, pose, k)) is not None
        )
        views.append(PlannedView(pose, classify_stratum(pose, nadir_cutoff_deg), boxes))
    return CollectionPlan(scene.vessel, scene.vocabulary, k, nadir_cutoff_deg, tuple(views))


def plan_to_manifest(plan: CollectionPlan) -> DatasetManifest:
    """One ImageRecord per pose; image_id is the pose id, pose_ref set.

    Paths point at where an external renderer would drop frames. The stratum
    map travels separately (strata_sets / the strata.json file).
    """
    records = tuple(
        ImageRecord(
            view.pose.pose_id,
            f"renders/{view.pose.pose_id}.png",
            plan.intrinsics.dims,
            view.boxes,
            pose_ref=view.pose.pose_id,
        )
        for view in plan.views
    )
    return DatasetManifest(plan.vocabulary, records, split_name="synthetic")


def scene_from_json(document: str | bytes | Mapping) -> SceneSpec:
    """Parse a scene document (see docs/FORMATS.md)."""
    doc = _as_document(document)
    if doc.get("schema") != SCENE_SCHEMA:
        raise MalformedRecordError(f"expected schema {SCENE_SCHEMA!r}, got {doc.get('schema')!r}")
    try:
        vocabulary = ClassVocabulary.from_names(
            str(n) for n in _require(doc, "classes", "scene")
        )
    except ValueError as exc:
        raise MalformedRecordError(f"bad classes: {exc}") from None
    components = []
    for i, comp in enumerate(_require(doc, "components", "scene")):
        where = f"components[{i}]"
        name = str(_require(comp, "class", where))
        if name not in vocabulary.names:
            raise MalformedRecordError(f"{where}: unknown class {name!r}")
        try:
            components.append(
                LabeledComponent(
                    vocabulary.names.index(name),
                    tuple(_require(comp, "center", where)),
                    tuple(_require(comp, "half_extents", where)),
                    tuple(comp["facing_normal"]) if comp.get("facing_normal") is not None else None,
                )
            )
        except ValueError as exc:
            raise MalformedRecordError(f"{where}: {exc}") from None
    try:
        return SceneSpec(
            str(_require(doc, "vessel", "scene")),
            vocabulary,
            tuple(components),
            float(_require(doc, "bounding_radius_m", "scene")),
        )
    except ValueError as exc:
        raise MalformedRecordError(str(exc)) from None


def scene_to_json(scene: SceneSpec) -> str:
    doc = {
        "schema": SCENE_SCHEMA,
        "vessel": scene.vessel,
        "bounding_radius_m": scene.bounding_radius_m,
        "classes": list(scene.vocabulary),
        "components": [
            {
                "class": scene.vocabulary.name_of(c.class_id),
                "center": list(c.center),
                "half_extents": list(c.half_extents),
                "facing_normal": list(c.facing_normal) if c.facing_normal else None,
            }
            for c in scene.components
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def plan_to_json(plan: CollectionPlan) -> str:
    """Serialize a plan for the renderer (pose transforms) and the evaluator
    (ground truth and strata). The occluded flag is reserved for a renderer
    with visibility testing; projection alone never sets it."""
    views = []
    for view in plan.views:
        frame = camera_frame(view.pose)
        views.append(
            {
                "pose_id": view.pose.pose_id,
                "azimuth_deg": view.pose.azimuth_deg,
                "elevation_deg": view.pose.elevation_deg,
                "radius_m": view.pose.radius_m,
                "look_at": list(view.pose.look_at),
                "position": list(frame.position),
                "rotation": [list(row) for row in frame.rotation],
                "stratum": view.stratum,
                "boxes": [
                    {
                        "class_id": gt.class_id,
                        "bbox": list(gt.box.as_tuple()),
                        "occluded": False,
                    }
                    for gt in view.boxes
                ],
            }
        )
    doc = {
        "schema": PLAN_SCHEMA,
        "scene": plan.scene_name,
        "classes": list(plan.vocabulary),
        "intrinsics": {
            "focal_px": plan.intrinsics.focal_px,
            "width": plan.intrinsics.dims.width,
            "height": plan.intrinsics.dims.height,
            "cx": plan.intrinsics.cx,
            "cy": plan.intrinsics.cy,
        },
        "nadir_cutoff_deg": plan.nadir_cutoff_deg,
        "poses": views,
    }
    return json.dumps(doc, indent=2) + "\n"


def plan_from_json(document: str | bytes | Mapping) -> CollectionPlan:
    doc = _as_document(document)
    if doc.get("schema") != PLAN_SCHEMA:
        raise MalformedRecordError(f"expected schema {PLAN_SCHEMA!r}, got {doc.get('schema')!r}")
    try:
        vocabulary = ClassVocabulary.from_names(str(n) for n in _require(doc, "classes", "plan"))
        kdoc = _require(doc, "intrinsics", "plan")
        intrinsics = Intrinsics(
            float(_require(kdoc, "focal_px", "intrinsics")),
            ImageDims(_require(kdoc, "width", "intrinsics"), _require(kdoc, "height", "intrinsics")),
        )
        views = []
        for i, v in enumerate(_require(doc, "poses", "plan")):
            where = f"poses[{i}]"
            pose = CameraPose(
                str(_require(v, "pose_id", where)),
                float(_require(v, "azimuth_deg", where)),
                float(_require(v, "elevation_deg", where)),
                float(_require(v, "radius_m", where)),
                tuple(_require(v, "look_at", where)),
            )
            boxes = tuple(
                GroundTruthBox(
                    _require(b, "class_id", f"{where}.boxes[{j}]"),
                    Box2D(*(float(x) for x in _require(b, "bbox", f"{where}.boxes[{j}]"))),
                    source_encoding="pixel",
                )
                for j, b in enumerate(_require(v, "boxes", where))
            )
            views.append(PlannedView(pose, str(_require(v, "stratum", where)), boxes))
        return CollectionPlan(
            str(_require(doc, "scene", "plan")),
            vocabulary,
            intrinsics,
            float(_require(doc, "nadir_cutoff_deg", "plan")),
            tuple(views),
        )
    except (TypeError, ValueError) as exc:
        raise MalformedRecordError(str(exc)) from None
