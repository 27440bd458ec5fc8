"""
Evaluating detections against a labeled split
==============================================

"""

# A manifest is the ground-truth side: images, dimensions, labeled boxes.
from shipbench import (
    Box2D,
    ClassVocabulary,
    DatasetManifest,
    Detection,
    DetectionSet,
    GroundTruthBox,
    ImageDims,
    ImageRecord,
)

vocabulary = ClassVocabulary.from_names(["spy_radar", "vls"])
dims = ImageDims(640, 640)
manifest = DatasetManifest(
    vocabulary,
    (
        ImageRecord(
            "frame_000",
            "images/frame_000.png",
            dims,
            (
                GroundTruthBox(0, Box2D(100, 100, 200, 200)),
                GroundTruthBox(1, Box2D(300, 300, 400, 380)),
            ),
        ),
        ImageRecord(
            "frame_001",
            "images/frame_001.png",
            dims,
            (GroundTruthBox(0, Box2D(50, 50, 150, 150)),),
        ),
    ),
    "demo",
)

# The detector side: scored boxes per image. One is a near miss, one a
# duplicate, one a stray.
detections = DetectionSet.from_detections(
    [
        Detection("frame_000", 0, Box2D(102, 98, 198, 205), 0.92),
        Detection("frame_000", 0, Box2D(110, 110, 200, 200), 0.80),  # duplicate
        Detection("frame_000", 1, Box2D(300, 300, 400, 380), 0.75),
        Detection("frame_001", 0, Box2D(52, 50, 150, 148), 0.88),
        Detection("frame_001", 1, Box2D(500, 500, 600, 600), 0.30),  # stray
    ]
)

# evaluate() greedily matches per image and class (highest score first, at
# least 50% overlap), pools the curves, and averages AP over classes with
# ground truth.
from shipbench import evaluate

report = evaluate(manifest, detections)
print("mAP:", round(report.map_value, 4))
for entry in report.classes:
    ap = "n/a" if entry.ap is None else round(entry.ap, 4)
    print(f"  {entry.name}: AP={ap} gt={entry.num_gt} det={entry.num_det}")

op = report.pooled_op
print(f"operating point: P={op.precision:.4f} R={op.recall:.4f} @ conf {op.confidence}")

# The same report serializes to a JSON document and renders as markdown.
from shipbench.reporting import render_markdown, report_to_json

print()
print(render_markdown(report_to_json(report)))
