"""Inverse kinematics, singularity screening and grid workspace generation.

Poses are grip-center poses in the world frame: the base center sits
``base_center_height`` above the world origin and the grip center sits
``grip_offset`` above the platform center along the platform z-axis.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import DegenerateLeg
from .geometry import JointLayout, MachineConfig
from .transforms import Pose, rotation_zyx

DEFAULT_THRESHOLD = 1e-6
CHUNK = 50_000


@dataclass(frozen=True)
class MotionLimits:
    """Absolute (min, max) ranges: mm for translations, degrees for rotations."""

    x_range: tuple[float, float]
    y_range: tuple[float, float]
    z_range: tuple[float, float]
    roll_range: tuple[float, float]
    pitch_range: tuple[float, float]
    yaw_range: tuple[float, float]

    def __post_init__(self):
        for name in self.names():
            lo, hi = (float(v) for v in getattr(self, name))
            if lo > hi:
                raise ValueError(f"{name}: min {lo} exceeds max {hi}")
            object.__setattr__(self, name, (lo, hi))

    @staticmethod
    def names() -> tuple[str, ...]:
        return ("x_range", "y_range", "z_range", "roll_range", "pitch_range", "yaw_range")

    @classmethod
    def about_home(
        cls,
        config: MachineConfig,
        xy: float = 158.0,
        z_travel: float = 50.0,
        tilt: float = 30.0,
        yaw: float = 55.0,
    ) -> "MotionLimits":
        """Ranges centered on the home pose; z sweeps upward from home.

        Defaults are the Tiger 66.1 test limits.
        """
        z0 = config.home_grip_z
        return cls((-xy, xy), (-xy, xy), (z0, z0 + z_travel), (-tilt, tilt), (-tilt, tilt), (-yaw, yaw))

    @classmethod
    def point(cls, pose: Pose) -> "MotionLimits":
        v = pose.as_array()
        return cls(*[(x, x) for x in v])

    def as_dict(self) -> dict:
        return {n: list(getattr(self, n)) for n in self.names()}

    @classmethod
    def from_dict(cls, d: dict) -> "MotionLimits":
        return cls(*[tuple(d[n]) for n in cls.names()])


@dataclass(frozen=True)
class GridSteps:
    step_xy: float = 15.0
    step_z: float = 10.0
    step_rot: float = 10.0

    def __post_init__(self):
        if min(self.step_xy, self.step_z, self.step_rot) <= 0:
            raise ValueError("grid steps must be strictly positive")

    def per_axis(self) -> tuple[float, ...]:
        return (self.step_xy, self.step_xy, self.step_z, self.step_rot, self.step_rot, self.step_rot)


@dataclass(frozen=True)
class WorkspaceRecord:
    pose_id: int
    pose: Pose
    leg_lengths: tuple[float, ...]
    jacobian_det: float


@dataclass(frozen=True)
class Verdict:
    """Outcome of :func:`pose_valid`; ``record`` is set only when valid."""

    valid: bool
    record: WorkspaceRecord | None = None
    reason: str | None = None
    leg: int | None = None

    def __str__(self):
        if self.valid:
            return "Valid"
        if self.reason == "StrokeViolation":
            return f"Invalid: StrokeViolation(leg {self.leg})"
        return f"Invalid: {self.reason}"


def leg_vectors(poses: np.ndarray, layout: JointLayout, config: MachineConfig):
    """Leg vectors ``h + R p_i - b_i`` for a batch of poses.

    ``poses`` has shape ``(n, 6)``.  Returns ``(legs, Rp)``, both ``(n, 6, 3)``,
    where ``Rp`` are the rotated platform joint vectors (moment arms).
    """
    poses = np.atleast_2d(np.asarray(poses, dtype=float))
    R = rotation_zyx(poses[:, 3], poses[:, 4], poses[:, 5])
    center = poses[:, :3] - config.grip_offset * R[:, :, 2]
    center[:, 2] -= config.base_center_height
    Rp = np.einsum("nij,kj->nki", R, layout.leg_platform_joints)
    legs = center[:, None, :] + Rp - layout.base_joints[None, :, :]
    return legs, Rp


def leg_lengths(pose: Pose, layout: JointLayout, config: MachineConfig) -> np.ndarray:
    legs, _ = leg_vectors(pose.as_array(), layout, config)
    return np.linalg.norm(legs[0], axis=1)


def platform_joints_world(pose: Pose, layout: JointLayout, config: MachineConfig) -> np.ndarray:
    """World coordinates of the six (leg-ordered) platform joints."""
    legs, _ = leg_vectors(pose.as_array(), layout, config)
    base = layout.base_joints + [0.0, 0.0, config.base_center_height]
    return legs[0] + base


def _jacobians(legs: np.ndarray, Rp: np.ndarray, scale: float) -> np.ndarray:
    unit = legs / np.linalg.norm(legs, axis=-1, keepdims=True)
    return np.concatenate([unit, np.cross(Rp, unit) / scale], axis=-1)


def force_jacobian(pose: Pose, layout: JointLayout, config: MachineConfig) -> np.ndarray:
    """6x6 force Jacobian, row ``i = [s_i, (R p_i x s_i) / base_joint_radius]``."""
    legs, Rp = leg_vectors(pose.as_array(), layout, config)
    lengths = np.linalg.norm(legs[0], axis=1)
    if lengths.min() < 1e-9:
        raise DegenerateLeg(f"leg {int(lengths.argmin()) + 1} has length {lengths.min():.3g} mm")
    return _jacobians(legs, Rp, config.base_joint_radius)[0]


def pose_valid(
    pose: Pose,
    layout: JointLayout,
    config: MachineConfig,
    threshold: float = DEFAULT_THRESHOLD,
    check_limits: bool = True,
    pose_id: int = 0,
) -> Verdict:
    lengths = leg_lengths(pose, layout, config)
    if check_limits:
        bad = (lengths < config.actuator_min_length) | (lengths > config.actuator_max_length)
        if bad.any():
            return Verdict(False, reason="StrokeViolation", leg=int(np.argmax(bad)) + 1)
    if lengths.min() < 1e-9:
        return Verdict(False, reason="Singular")
    det = float(np.linalg.det(force_jacobian(pose, layout, config)))
    if not abs(det) > threshold:
        return Verdict(False, reason="Singular")
    record = WorkspaceRecord(pose_id, pose, tuple(float(v) for v in lengths), det)
    return Verdict(True, record=record)


def grid_axes(limits: MotionLimits, steps: GridSteps) -> list[np.ndarray]:
    """Per-axis samples ``min + k*step`` up to ``max``; no endpoint snapping."""
    axes = []
    for name, step in zip(MotionLimits.names(), steps.per_axis()):
        lo, hi = getattr(limits, name)
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        axes.append(lo + step * np.arange(n))
    return axes


@dataclass
class Workspace:
    """Columnar set of valid workspace poses (one row per record)."""

    pose_id: np.ndarray
    poses: np.ndarray
    lengths: np.ndarray
    jdet: np.ndarray
    grid_size: int = 0

    def __len__(self):
        return len(self.pose_id)

    def records(self) -> Iterator[WorkspaceRecord]:
        for i in range(len(self)):
            yield self.record(i)

    def record(self, i: int) -> WorkspaceRecord:
        return WorkspaceRecord(
            int(self.pose_id[i]),
            Pose.from_array(self.poses[i]),
            tuple(float(v) for v in self.lengths[i]),
            float(self.jdet[i]),
        )

    def index_of(self, pose_id: int) -> int:
        hits = np.flatnonzero(self.pose_id == pose_id)
        if not len(hits):
            raise KeyError(pose_id)
        return int(hits[0])


def _evaluate_chunk(args) -> tuple[np.ndarray, ...]:
    start, stop, axes, layout, config, threshold = args
    shape = tuple(len(a) for a in axes)
    ids = np.arange(start, stop)
    idx = np.unravel_index(ids, shape)
    poses = np.stack([a[i] for a, i in zip(axes, idx)], axis=1)
    legs, Rp = leg_vectors(poses, layout, config)
    lengths = np.linalg.norm(legs, axis=-1)
    ok = np.all((lengths >= config.actuator_min_length) & (lengths <= config.actuator_max_length), axis=1)
    ids, poses, lengths, legs, Rp = ids[ok], poses[ok], lengths[ok], legs[ok], Rp[ok]
    det = np.linalg.det(_jacobians(legs, Rp, config.base_joint_radius))
    ok = np.abs(det) > threshold
    return ids[ok], poses[ok], lengths[ok], det[ok]


def workspace_table(
    layout: JointLayout,
    config: MachineConfig,
    limits: MotionLimits,
    steps: GridSteps,
    threshold: float = DEFAULT_THRESHOLD,
    jobs: int = 1,
) -> Workspace:
    """Evaluate the full six-axis grid and keep only valid poses.

    ``pose_id`` is the flat (C-order) index of the pose in the grid, so the
    result is identical for any ``jobs``.
    """
    axes = grid_axes(limits, steps)
    total = int(np.prod([len(a) for a in axes]))
    tasks = [
        (s, min(s + CHUNK, total), axes, layout, config, threshold) for s in range(0, total, CHUNK)
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(_evaluate_chunk, tasks))
    else:
        parts = [_evaluate_chunk(t) for t in tasks]
    if not parts:
        parts = [(np.zeros(0, int), np.zeros((0, 6)), np.zeros((0, 6)), np.zeros(0))]
    ids, poses, lengths, det = (np.concatenate(p) for p in zip(*parts))
    return Workspace(ids, poses, lengths, det, grid_size=total)


def generate_workspace(
    layout: JointLayout,
    config: MachineConfig,
    limits: MotionLimits,
    steps: GridSteps,
    threshold: float = DEFAULT_THRESHOLD,
    jobs: int = 1,
) -> Iterator[WorkspaceRecord]:
    """Yield every valid grid pose as a :class:`WorkspaceRecord`."""
    yield from workspace_table(layout, config, limits, steps, threshold, jobs).records()
