"""Iterative forward kinematics over the per-leg DH chains.

For a workspace pose with known actuator lengths, every leg's joint angles are
recovered by deterministic grid search:

1. ``theta2, theta3`` (universal joint) place the actuator top on the platform
   joint, scanning the full bounds at ``coarse_step`` and refining locally with
   halving steps down to ``fine_step``.
2. ``theta5, theta6`` align the spherical joint's z-axis with the platform
   normal, then ``theta7`` fixes the remaining roll; the three are refined
   together against the full rotation residual.
3. If the grip-center error still exceeds ``error_limit``, a local five-angle
   scan at ``fine_step`` polishes the solution until it meets the limit or
   ``max_refinements`` passes are spent.

Ties are always broken by scan order (ascending theta2, theta3, theta5,
theta6, theta7), so a given input yields exactly one solution.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import store
from .dh import LegSolution, chain_batch, dh_matrices, theta1
from .errors import DegenerateLeg
from .geometry import JointLayout, MachineConfig
from .ik import Workspace, WorkspaceRecord, leg_lengths, platform_joints_world
from .transforms import Pose, axis_rotation, euler_from_rotation, nearest_rotation, rotation_angle, rotation_zyx

# Observed joint ranges of the reference machine, padded by 20 degrees.  The
# theta7 window is centered on 180: with a_7 = +c the x7 axis must point from
# the platform joint toward the platform center.
DEFAULT_BOUNDS = {
    "theta2": (-103.2, -18.0),
    "theta3": (-138.8, -43.4),
    "theta5": (70.0, 290.0),
    "theta6": (72.0, 251.0),
    "theta7": (70.0, 290.0),
}


@dataclass(frozen=True)
class SearchParams:
    coarse_step: float = 1.0
    fine_step: float = 0.1
    error_limit: float = 1.0
    angle_bounds: dict = field(default_factory=lambda: dict(DEFAULT_BOUNDS))
    max_refinements: int = 20

    def __post_init__(self):
        if not 0 < self.fine_step <= self.coarse_step:
            raise ValueError("need 0 < fine_step <= coarse_step")
        if self.error_limit <= 0:
            raise ValueError("error_limit must be positive")
        for name, (lo, hi) in self.angle_bounds.items():
            if lo > hi:
                raise ValueError(f"bounds for {name} are reversed")

    def bounds(self, *names: str) -> list[tuple[float, float]]:
        return [tuple(self.angle_bounds[n]) for n in names]


@dataclass(frozen=True)
class LegFit:
    """Result of :func:`recover_leg`; ``solution`` is the best found even if unsolved."""

    solution: LegSolution
    solved: bool
    residual_mm: float
    orientation_deg: float
    evaluations: int


@dataclass(frozen=True)
class FkResult:
    pose_id: int
    fits: tuple[LegFit, ...]

    @property
    def solved(self) -> bool:
        return all(f.solved for f in self.fits)

    @property
    def solutions(self) -> tuple[LegSolution, ...]:
        return tuple(f.solution for f in self.fits)

    @property
    def residual_mm(self) -> np.ndarray:
        return np.array([f.residual_mm for f in self.fits])

    @property
    def iterations(self) -> int:
        return sum(f.evaluations for f in self.fits)


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    n = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return lo + step * np.arange(n)


def _mesh(axes: list[np.ndarray]) -> np.ndarray:
    return np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)


def _local_axes(center, step, bounds, half_width):
    axes = []
    for c, (lo, hi) in zip(center, bounds):
        pts = c + step * np.arange(-half_width, half_width + 1)
        axes.append(np.unique(np.clip(pts, lo, hi)))
    return axes


def grid_search(objective, bounds, params: SearchParams, start=None, stop: float | None = None, fine_only=False):
    """Coarse full-range scan followed by local refinement with halving steps.

    ``objective`` maps an ``(n, k)`` array to ``n`` costs.  Returns
    ``(best_point, best_cost, evaluations)``.  With ``start`` the coarse scan is
    skipped and refinement begins around ``start`` at ``fine_step``
    (``fine_only``) or ``coarse_step``.
    """
    fine = params.fine_step
    if start is None:
        pts = _mesh([_axis(lo, hi, params.coarse_step) for lo, hi in bounds])
        step = params.coarse_step
    else:
        step = fine if fine_only else params.coarse_step
        pts = _mesh(_local_axes(np.asarray(start, float), step, bounds, 2))
    costs = objective(pts)
    i = int(np.argmin(costs))
    best, best_cost, evaluations = pts[i], float(costs[i]), len(pts)
    for _ in range(params.max_refinements):
        if stop is not None and best_cost <= stop:
            break
        new_step = max(step / 2.0, fine)
        half_width = 2 if new_step < step else 1
        step = new_step
        pts = _mesh(_local_axes(best, step, bounds, half_width))
        costs = objective(pts)
        evaluations += len(pts)
        i = int(np.argmin(costs))
        improved = costs[i] < best_cost
        if improved:
            best, best_cost = pts[i], float(costs[i])
        if step == fine and not improved:
            break
    return best, best_cost, evaluations


def leg_targets(pose: Pose, leg_index: int, layout: JointLayout, config: MachineConfig):
    """World platform joint, grip position and frame-{7} rotation for one leg."""
    joint = platform_joints_world(pose, layout, config)[leg_index - 1]
    R = rotation_zyx(pose.alpha, pose.beta, pose.gamma)
    phi = layout.leg_platform_angles[leg_index - 1]
    return joint, pose.position, R @ axis_rotation("z", phi + 180.0)


def seed_angles(target_pose: Pose, leg_index: int, layout: JointLayout, config: MachineConfig):
    """Closed-form universal-joint angles pointing the actuator at its platform joint.

    The actuator axis in frame {1} is ``(cos t2 sin t3, cos t3, sin t2 sin t3)``;
    the branch with ``sin t3 < 0`` is returned.
    """
    joint, _, _ = leg_targets(target_pose, leg_index, layout, config)
    base = np.append(layout.base_joints[leg_index - 1, :2], config.base_center_height)
    leg = joint - base
    length = float(np.linalg.norm(leg))
    if length < 1e-9:
        raise DegenerateLeg(f"leg {leg_index} has zero length")
    u = axis_rotation("z", theta1(config, leg_index)).T @ (leg / length)
    t3 = -math.acos(max(-1.0, min(1.0, u[1])))
    s3 = math.sin(t3)
    t2 = math.atan2(u[2] / s3, u[0] / s3)
    return math.degrees(t2), math.degrees(t3)


def _wrist_rotations(t5, t6, t7) -> np.ndarray:
    zeros = np.zeros_like(t5)
    mats = dh_matrices(zeros[:, None], [0.0, 90.0, 90.0], zeros[:, None], np.stack([t5, t6, t7], axis=1))
    return (mats[:, 0] @ mats[:, 1] @ mats[:, 2])[:, :3, :3]


def recover_leg(
    target_pose: Pose,
    leg_index: int,
    leg_length: float,
    layout: JointLayout,
    config: MachineConfig,
    params: SearchParams = SearchParams(),
    warm_start: bool = False,
) -> LegFit:
    """Find the leg's DH variables that reproduce ``target_pose`` with ``d4 = leg_length``."""
    if not (config.actuator_min_length - 1e-9 <= leg_length <= config.actuator_max_length + 1e-9):
        return LegFit(LegSolution(leg_index, d4=leg_length), False, math.inf, math.inf, 0)

    joint, grip, R07 = leg_targets(target_pose, leg_index, layout, config)

    def top_error(pts):
        vals = np.zeros((len(pts), 6))
        vals[:, :2], vals[:, 2] = pts, leg_length
        T = chain_batch(config, leg_index, vals, upto=5)
        return np.linalg.norm(T[:, :3, 3] - joint, axis=1)

    start = seed_angles(target_pose, leg_index, layout, config) if warm_start else None
    (t2, t3), _, evals = grid_search(
        top_error, params.bounds("theta2", "theta3"), params, start=start, fine_only=warm_start
    )

    R04 = chain_batch(config, leg_index, [[t2, t3, leg_length, 0, 0, 0]], upto=4)[0, :3, :3]
    R47_target = R04.T @ R07
    z_target = R47_target[:, 2]

    def normal_error(pts):
        t5, t6 = np.radians(pts[:, 0]), np.radians(pts[:, 1])
        z7 = np.stack([np.cos(t5) * np.sin(t6), np.sin(t5) * np.sin(t6), -np.cos(t6)], axis=1)
        return np.degrees(np.arccos(np.clip(z7 @ z_target, -1.0, 1.0)))

    def wrist_error(pts):
        return rotation_angle(_wrist_rotations(pts[:, 0], pts[:, 1], pts[:, 2]), R47_target)

    b5, b6, b7 = params.bounds("theta5", "theta6", "theta7")
    (_, t6), _, n = grid_search(normal_error, [b5, b6], params)
    evals += n
    # z7 is shared by (t5, t6, t7) and (t5 + 180, 360 - t6, t7 + 180), and near
    # t6 = 180 only t5 + t7 is determined, so scan (t5, t7) on both branches.
    best = None
    for cand in sorted({t6, 360.0 - t6}):
        if not b6[0] <= cand <= b6[1]:
            continue
        pts = _mesh([_axis(*b5, params.coarse_step), _axis(*b7, params.coarse_step)])
        pts = np.insert(pts, 1, cand, axis=1)
        costs = wrist_error(pts)
        evals += len(pts)
        i = int(np.argmin(costs))
        if best is None or costs[i] < best[1]:
            best = (pts[i], costs[i])
    wrist, _, n = grid_search(wrist_error, [b5, b6, b7], params, start=best[0])
    evals += n

    bounds5 = params.bounds("theta2", "theta3") + [b5, b6, b7]

    def full(pts):
        vals = np.insert(pts, 2, leg_length, axis=1)
        T = chain_batch(config, leg_index, vals)
        return np.linalg.norm(T[:, :3, 3] - grip, axis=1), rotation_angle(T[:, :3, :3], R07)

    x = np.array([t2, t3, *wrist])
    err, _ = full(x[None])
    if err[0] > params.error_limit:
        x, _, n = grid_search(
            lambda p: full(p)[0], bounds5, params, start=x, stop=params.error_limit, fine_only=True
        )
        evals += n
    err, ang = full(x[None])
    solution = LegSolution.from_values(leg_index, np.insert(x, 2, leg_length))
    return LegFit(solution, bool(err[0] <= params.error_limit), float(err[0]), float(ang[0]), evals)


def recover_pose(
    record: WorkspaceRecord,
    layout: JointLayout,
    config: MachineConfig,
    params: SearchParams = SearchParams(),
    warm_start: bool = False,
) -> FkResult:
    fits = tuple(
        recover_leg(record.pose, i + 1, record.leg_lengths[i], layout, config, params, warm_start)
        for i in range(6)
    )
    return FkResult(record.pose_id, fits)


def _recover_task(args):
    return recover_pose(*args)


def recover_many(records, layout, config, params=SearchParams(), jobs: int = 1) -> list[FkResult]:
    """Solve several poses; output order follows ``records`` regardless of ``jobs``."""
    tasks = [(r, layout, config, params) for r in records]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_recover_task, tasks))
    return [_recover_task(t) for t in tasks]


def grip_positions(solutions, config: MachineConfig) -> np.ndarray:
    """``(6, 3)`` grip centers predicted by each leg chain."""
    return np.stack([chain_batch(config, s.leg_index, s.values()[None])[0, :3, 3] for s in solutions])


def implied_pose(solutions, layout: JointLayout, config: MachineConfig) -> Pose:
    """Pose implied by six leg chains: mean grip position, chordal-mean rotation."""
    positions, rotations = [], []
    for s in solutions:
        T = chain_batch(config, s.leg_index, s.values()[None])[0]
        phi = layout.leg_platform_angles[s.leg_index - 1]
        positions.append(T[:3, 3])
        rotations.append(T[:3, :3] @ axis_rotation("z", phi + 180.0).T)
    R = nearest_rotation(np.sum(rotations, axis=0))
    return Pose(*np.mean(positions, axis=0), *euler_from_rotation(R))


def roundtrip_lengths(result: FkResult, layout: JointLayout, config: MachineConfig) -> np.ndarray:
    return leg_lengths(implied_pose(result.solutions, layout, config), layout, config)


def fk_lookup(lengths, db: Workspace, k: int = 1):
    """Nearest stored poses in actuator-length space; see :func:`store.nearest_by_lengths`."""
    return store.nearest_by_lengths(db, lengths, k)

