# Recovering the joint variables of every leg for a handful of workspace poses.
#
# Each leg is modelled as an eight-frame DH chain from the world to the grip
# center.  Given the pose and the actuator length, a coarse-to-fine grid search
# finds the universal-joint and spherical-joint angles.
import time

import numpy as np

from hexakin import store
from hexakin.dh import build_leg_table
from hexakin.fk import grip_positions, implied_pose, recover_pose
from hexakin.geometry import build_joint_layout, tiger_config
from hexakin.ik import GridSteps, MotionLimits, workspace_table

config = tiger_config()
layout = build_joint_layout(config)
ws = workspace_table(layout, config, MotionLimits.about_home(config), GridSteps())

for record in store.sample_poses(ws, 3, seed=7):
    t0 = time.perf_counter()
    result = recover_pose(record, layout, config)
    print(f"\npose {record.pose_id}: {np.round(record.pose.as_array(), 1)} "
          f"solved={result.solved} in {time.perf_counter() - t0:.2f} s")
    print("  leg  theta2   theta3      d4   theta5  theta6  theta7  residual")
    for fit in result.fits:
        s = fit.solution
        print(f"  {s.leg_index:3d} " + " ".join(f"{v:7.2f}" for v in s.values()) + f"  {fit.residual_mm:6.3f} mm")
    spread = grip_positions(result.solutions, config)
    print("  grip predicted by each leg spans", np.round(np.ptp(spread, axis=0), 3), "mm")
    print("  pose implied by the six chains:", np.round(implied_pose(result.solutions, layout, config).as_array(), 2))

print("\nDH rows of leg 1 for the last pose (a_prev, alpha_prev, r, theta):")
print(np.round(build_leg_table(1, result.solutions[0], config).as_array(), 3))
