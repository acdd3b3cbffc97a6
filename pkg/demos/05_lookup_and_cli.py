# Using the stored workspace as a lookup table, then driving the same steps
# through the command line.
import subprocess
import sys
import tempfile
from pathlib import Path

import numpy as np

from hexakin import store
from hexakin.geometry import build_joint_layout, tiger_config, tiger_config_path
from hexakin.ik import GridSteps, MotionLimits, leg_lengths, workspace_table
from hexakin.transforms import Pose

config = tiger_config()
layout = build_joint_layout(config)
ws = workspace_table(layout, config, MotionLimits.about_home(config), GridSteps())

# measured lengths for a pose that is not on the grid
query = leg_lengths(Pose(3.0, 12.0, 925.0, 4.0, -2.0, 7.0), layout, config)
for rec, dist in store.nearest_by_lengths(ws, query, k=3):
    print(f"pose {rec.pose_id}: {np.round(rec.pose.as_array(), 1)} at {dist:.2f} mm in length space", flush=True)

out = Path(tempfile.mkdtemp())
cfg = str(tiger_config_path())
cli = [sys.executable, "-m", "hexakin.cli"]
for args in (
    ["workspace", "--config", cfg, "--out", str(out / "ws.csv")],
    ["fk", "--config", cfg, "--db", str(out / "ws.csv"), "--sample", "2", "--seed", "1", "--out", str(out / "dh.csv")],
    ["sensitivity", "--config", cfg, "--dh-db", str(out / "dh.csv"), "--samples", "20", "--out", str(out / "sens.csv")],
    ["export", "--db", str(out / "ws.csv"), "--format", "svg-points", "--out", str(out / "ws.svg")],
):
    print("$ hexakin", args[0], "...", flush=True)
    subprocess.run(cli + args, check=True)
print("files:", sorted(p.name for p in out.iterdir()))
