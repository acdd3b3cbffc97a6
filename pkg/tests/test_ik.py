import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hexakin.errors import DegenerateLeg
from hexakin.ik import (
    GridSteps,
    MotionLimits,
    force_jacobian,
    generate_workspace,
    grid_axes,
    leg_lengths,
    platform_joints_world,
    pose_valid,
    workspace_table,
)
from hexakin.transforms import Pose, rotation_zyx


def home(config):
    return Pose(0.0, 0.0, config.home_grip_z)


def test_home_lengths_from_first_principles(config, layout):
    # platform center sits d below the grip, base center sits a above the world origin
    rise = config.home_grip_z - config.grip_offset - config.base_center_height
    assert rise == pytest.approx(495.46)
    expected = []
    for b, p in zip(layout.base_joints, layout.leg_platform_joints):
        planar = math.dist(b[:2], p[:2])
        expected.append(math.hypot(planar, rise))
    got = leg_lengths(home(config), layout, config)
    assert got == pytest.approx(expected, abs=1e-9)
    assert np.ptp(got) < 1e-9
    assert config.actuator_min_length <= got[0] <= config.actuator_max_length


def test_home_is_valid(config, layout):
    verdict = pose_valid(home(config), layout, config)
    assert verdict.valid and str(verdict) == "Valid"
    assert verdict.record.jacobian_det == pytest.approx(np.linalg.det(force_jacobian(home(config), layout, config)))


def test_stroke_violation_names_leg(config, layout):
    verdict = pose_valid(Pose(0, 0, config.home_grip_z + 150.0), layout, config)
    assert not verdict.valid
    assert verdict.reason == "StrokeViolation"
    assert str(verdict).startswith("Invalid: StrokeViolation(leg ")


def test_singular_threshold(config, layout):
    det = abs(np.linalg.det(force_jacobian(home(config), layout, config)))
    verdict = pose_valid(home(config), layout, config, threshold=det * 1.01)
    assert str(verdict) == "Invalid: Singular"


def test_stroke_check_can_be_disabled(config, layout):
    pose = Pose(0, 0, config.home_grip_z + 150.0)
    assert not pose_valid(pose, layout, config).valid
    assert pose_valid(pose, layout, config, check_limits=False).valid


def test_jacobian_rows(config, layout):
    pose = Pose(20, -10, config.home_grip_z + 20, 5, -3, 12)
    J = force_jacobian(pose, layout, config)
    assert J.shape == (6, 6)
    assert np.allclose(np.linalg.norm(J[:, :3], axis=1), 1.0)
    # the moment part is (R p x s) scaled by the base radius
    R = rotation_zyx(pose.alpha, pose.beta, pose.gamma)
    s = J[0, :3]
    assert J[0, 3:] == pytest.approx(np.cross(R @ layout.leg_platform_joints[0], s) / config.base_joint_radius)


def test_degenerate_leg_raises(config, layout):
    # put the platform joints of leg 1 exactly onto its base joint
    b = layout.base_joints[0] + [0, 0, config.base_center_height]
    p = layout.leg_platform_joints[0]
    pose = Pose(*(b - p + [0, 0, config.grip_offset]))
    assert leg_lengths(pose, layout, config)[0] == pytest.approx(0.0, abs=1e-9)
    with pytest.raises(DegenerateLeg):
        force_jacobian(pose, layout, config)


def test_platform_joints_move_with_pose(config, layout):
    a = platform_joints_world(home(config), layout, config)
    b = platform_joints_world(Pose(10, 0, config.home_grip_z), layout, config)
    assert np.allclose(b - a, [10, 0, 0])


def test_grid_axes_sizes(config):
    axes = grid_axes(MotionLimits.about_home(config), GridSteps())
    assert [len(a) for a in axes] == [22, 22, 6, 7, 7, 12]
    assert axes[0][0] == -158.0 and axes[0][-1] == 157.0


@pytest.mark.parametrize("steps", [(0, 1, 1), (1, -1, 1)])
def test_grid_steps_must_be_positive(steps):
    with pytest.raises(ValueError):
        GridSteps(*steps)


def test_limits_reject_reversed_range():
    with pytest.raises(ValueError):
        MotionLimits((1, 0), (0, 0), (0, 0), (0, 0), (0, 0), (0, 0))


def test_single_point_limits(config, layout):
    ws = workspace_table(layout, config, MotionLimits.point(home(config)), GridSteps())
    assert ws.grid_size == 1 and len(ws) == 1
    assert ws.lengths[0] == pytest.approx(leg_lengths(home(config), layout, config))


small_limits = st.builds(
    lambda x, z, t: (x, z, t),
    st.floats(5.0, 60.0), st.floats(0.0, 30.0), st.floats(0.0, 20.0),
)


@settings(max_examples=15, deadline=None)
@given(small_limits)
def test_batch_matches_scalar_predicate(config, layout, spans):
    xy, z, tilt = spans
    limits = MotionLimits.about_home(config, xy=xy, z_travel=z, tilt=tilt, yaw=tilt)
    steps = GridSteps(max(xy / 2, 1.0), max(z / 2, 1.0), max(tilt / 2, 1.0))
    ws = workspace_table(layout, config, limits, steps)
    valid_ids = set(ws.pose_id.tolist())
    axes = grid_axes(limits, steps)
    shape = [len(a) for a in axes]
    assert ws.grid_size == int(np.prod(shape))
    for flat in range(ws.grid_size):
        idx = np.unravel_index(flat, shape)
        pose = Pose(*[axes[k][i] for k, i in enumerate(idx)])
        verdict = pose_valid(pose, layout, config)
        assert verdict.valid == (flat in valid_ids)
        if verdict.valid:
            i = ws.index_of(flat)
            assert ws.lengths[i] == pytest.approx(verdict.record.leg_lengths, abs=1e-9)


def test_generate_workspace_yields_records(config, layout):
    limits = MotionLimits.about_home(config, xy=15, z_travel=10, tilt=10, yaw=10)
    recs = list(generate_workspace(layout, config, limits, GridSteps()))
    assert recs and all(config.actuator_min_length <= min(r.leg_lengths) for r in recs)
    assert [r.pose_id for r in recs] == sorted(r.pose_id for r in recs)


def test_tiger_workspace_shape(workspace, config):
    assert workspace.grid_size == 1_707_552
    assert np.all(workspace.lengths >= config.actuator_min_length - 1e-9)
    assert np.all(workspace.lengths <= config.actuator_max_length + 1e-9)
    assert np.all(np.abs(workspace.jdet) > 1e-6)
    assert np.all(np.diff(workspace.pose_id) > 0)
