"""
Stratified self-consistency: plan, detect perfectly, evaluate
=============================================================

"""

# Reuse the planning demo's vessel.
from shipbench import ClassVocabulary, LabeledComponent, SceneSpec, generate_plan

scene = SceneSpec(
    "destroyer",
    ClassVocabulary.from_names(["spy_radar", "vls"]),
    (
        LabeledComponent(0, (20.0, -9.0, 14.0), (1.9, 0.3, 1.9), (0.0, -1.0, 0.0)),
        LabeledComponent(0, (20.0, 9.0, 14.0), (1.9, 0.3, 1.9), (0.0, 1.0, 0.0)),
        LabeledComponent(1, (50.0, 0.0, 7.0), (4.0, 3.0, 0.3), (0.0, 0.0, 1.0)),
        LabeledComponent(1, (-45.0, 0.0, 7.0), (5.0, 4.0, 0.3), (0.0, 0.0, 1.0)),
    ),
    bounding_radius_m=80.0,
)
plan = generate_plan(scene, n_poses=64, radius_m=300.0)

# The plan's manifest is the ground truth. Copying its boxes back as
# detections simulates a perfect detector, so every stratum must score 1.
from shipbench import Detection, DetectionSet, plan_to_manifest, stratified_evaluate

manifest = plan_to_manifest(plan)
perfect = DetectionSet.from_detections(
    [
        Detection(record.image_id, gt.class_id, gt.box, 1.0)
        for record in manifest.images
        for gt in record.boxes
    ]
)

report = stratified_evaluate(manifest, perfect, plan.strata_sets())
for name, stratum_report in report.strata:
    marker = " (no ground truth)" if stratum_report.empty else ""
    print(
        f"{name:>12}: images={stratum_report.num_images:3d} "
        f"mAP={stratum_report.map_value:.4f}{marker}"
    )

# Degrade the detector: drop every second detection and watch recall fall
# while precision holds.
halved = DetectionSet.from_detections(
    [
        det
        for i, det in enumerate(
            d for group in perfect.groups.values() for d in group
        )
        if i % 2 == 0
    ]
)
degraded = stratified_evaluate(manifest, halved, plan.strata_sets())
all_report = degraded.by_name()["all"]
print(
    f"\nafter dropping half the detections: mAP={all_report.map_value:.4f} "
    f"P={all_report.pooled_op.precision:.4f} R={all_report.pooled_op.recall:.4f}"
)
