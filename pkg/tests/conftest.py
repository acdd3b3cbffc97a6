import time

import pytest

from hexakin import store
from hexakin.fk import SearchParams, recover_many
from hexakin.geometry import build_joint_layout, tiger_config
from hexakin.ik import GridSteps, MotionLimits, workspace_table

FK_SAMPLE = 100
FK_SEED = 1


@pytest.fixture(scope="session")
def config():
    return tiger_config()


@pytest.fixture(scope="session")
def layout(config):
    return build_joint_layout(config)


@pytest.fixture(scope="session")
def workspace_run(config, layout):
    """Full Tiger workspace at 15/10/10 steps, with its wall time."""
    t0 = time.perf_counter()
    ws = workspace_table(layout, config, MotionLimits.about_home(config), GridSteps())
    return ws, time.perf_counter() - t0


@pytest.fixture(scope="session")
def workspace(workspace_run):
    return workspace_run[0]


@pytest.fixture(scope="session")
def fk_run(workspace, layout, config):
    """FK on a seeded 100-pose sample; returns (records, results, seconds per pose)."""
    records = store.sample_poses(workspace, FK_SAMPLE, FK_SEED)
    t0 = time.perf_counter()
    results = recover_many(records, layout, config, SearchParams(), jobs=1)
    return records, results, (time.perf_counter() - t0) / len(records)
