# How far the grip center drifts when every DH variable carries a tolerance.
#
# Each band shifts the joint angles by up to m degrees and the actuator length
# by up to m mm.  Corner directions push all variables to the band edge with a
# shared sign pattern, which is where the errors add up the most.
import numpy as np

from hexakin import store
from hexakin.fk import recover_many
from hexakin.geometry import build_joint_layout, tiger_config
from hexakin.ik import GridSteps, MotionLimits, workspace_table
from hexakin.sensitivity import sweep

config = tiger_config()
layout = build_joint_layout(config)
ws = workspace_table(layout, config, MotionLimits.about_home(config), GridSteps())
records = store.sample_poses(ws, 10, seed=3)
results = [r for r in recover_many(records, layout, config) if r.solved]
nominal = {r.pose_id: r.pose for r in records}

bands = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5]
report = sweep(results, nominal, bands, n_random=50, seed=0, config=config)
print(f"{len(results)} solved poses")
for band in bands:
    print(f"  +-{band:.1f}: worst corner {report.max_dist(band):6.2f} mm, "
          f"worst random {report.max_dist(band, 'random'):6.2f} mm")
print("ratio of the +-0.5 and +-0.1 maxima:", round(report.linearity_ratio(), 2))

print("\nextremes at +-0.5 (stat, sample, |dx|, |dy|, |dz|, distance, pose):")
for row in report.table_rows()[-6:]:
    print("  ", row[1], row[2], *np.round(row[3:7], 2), row[7])
