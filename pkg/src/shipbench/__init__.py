"""shipbench: detection-assessment toolkit for vessel-component datasets.

Pure-function core: box algebra, dataset/detection I/O, matching and mAP
evaluation with geometry strata, half-dome collection planning, and a small
CLI tying the file formats together.
"""

__version__ = "0.1.0"

from .boxmath import (  # noqa: E402
    Box2D,
    ImageDims,
    NormBox,
    area,
    clip_to_image,
    iou,
    iou_matrix,
    norm_to_pixel,
    pixel_to_norm,
    remap_resize,
)
from .annotate_io import (  # noqa: E402
    ClassVocabulary,
    DatasetManifest,
    Detection,
    DetectionSet,
    GroundTruthBox,
    ImageRecord,
    Violation,
    encode_yolo_line,
    load_yolo_dataset,
    manifest_from_json,
    manifest_to_json,
    parse_coco,
    parse_detections,
    parse_yolo_line,
    validate_manifest,
    write_coco,
    write_detections,
)
from .metrics import (  # noqa: E402
    EvalConfig,
    EvalReport,
    MatchOutcome,
    OperatingPoint,
    PRCurve,
    PRPoint,
    StratifiedReport,
    average_precision,
    evaluate,
    match_image,
    operating_point,
    pr_curve,
    stratified_evaluate,
)
from .collectplan import (  # noqa: E402
    CameraPose,
    CollectionPlan,
    Intrinsics,
    LabeledComponent,
    SceneSpec,
    auto_intrinsics,
    classify_stratum,
    generate_plan,
    plan_to_manifest,
    project_component,
    sample_half_dome,
    scene_from_json,
    scene_to_json,
)
from .recipe import TrainingRecipe, recipe_from_json, recipe_to_json  # noqa: E402
