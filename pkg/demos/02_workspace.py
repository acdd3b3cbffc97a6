# Building the reference machine and enumerating its workspace.
#
# Every grid pose is pushed through inverse kinematics.  A pose survives when
# all six legs stay inside the actuator stroke and the force Jacobian is not
# singular.
import time

import numpy as np

from hexakin.geometry import build_joint_layout, tiger_config, validate_geometry
from hexakin.ik import GridSteps, MotionLimits, pose_valid, workspace_table
from hexakin.transforms import Pose

config = tiger_config()
for check in validate_geometry(config):
    print(f"{check.name:28s} {'ok' if check.passed else 'FAILED'}  residual {check.residual:+.4f}")

layout = build_joint_layout(config)
print("leg pairing (base joint, platform joint):", layout.pairing)

home = Pose(0, 0, config.home_grip_z)
print("home:", pose_valid(home, layout, config), np.round(pose_valid(home, layout, config).record.leg_lengths, 3))
print("raised 150 mm:", pose_valid(Pose(0, 0, config.home_grip_z + 150), layout, config))

limits = MotionLimits.about_home(config)
t0 = time.perf_counter()
ws = workspace_table(layout, config, limits, GridSteps(15, 10, 10))
print(f"{len(ws)} valid poses out of {ws.grid_size} ({len(ws) / ws.grid_size:.2%}) "
      f"in {time.perf_counter() - t0:.1f} s")

# how the valid set thins out with tilt
tilt = np.abs(ws.poses[:, 3:5]).max(axis=1)
for t in np.unique(tilt):
    print(f"  max |roll|,|pitch| = {t:4.0f} deg: {np.sum(tilt == t):6d} poses")
