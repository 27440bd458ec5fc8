"""
Planning a half-dome collection over a vessel scene
===================================================

"""

# A scene is a vessel with labeled 3D components. The frame is +Z up,
# +X bow, +Y starboard; the two radar panels face port and starboard.
from shipbench import ClassVocabulary, LabeledComponent, SceneSpec

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

# Poses spiral over the upper hemisphere by the golden angle, so any count
# spreads evenly. Each pose is classified oblique or near_nadir by elevation.
from shipbench import generate_plan

plan = generate_plan(scene, n_poses=64, radius_m=300.0, min_elevation_deg=10.0)
sets = plan.strata_sets()
print("strata sizes:", {name: len(ids) for name, ids in sets.items()})
print("auto focal length:", round(plan.intrinsics.focal_px, 1), "px")

# Each view projects the components it can see into image-space boxes. A
# beam-on pose sees one radar panel; a steep pose sees the deck cells best.
for view in plan.views[:6]:
    pose = view.pose
    names = [plan.vocabulary.name_of(gt.class_id) for gt in view.boxes]
    print(
        f"{pose.pose_id}: az={pose.azimuth_deg:7.2f} el={pose.elevation_deg:5.2f} "
        f"{view.stratum:>10} -> {names}"
    )

# The plan serializes for an external renderer (camera transforms included)
# and converts to a manifest for evaluation once frames exist.
from shipbench import plan_to_manifest
from shipbench.collectplan import plan_to_json

manifest = plan_to_manifest(plan)
print("manifest images:", len(manifest.images), "boxes:", manifest.total_boxes())
print("plan document bytes:", len(plan_to_json(plan)))
