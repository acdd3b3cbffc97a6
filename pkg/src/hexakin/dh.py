"""Modified Denavit-Hartenberg transforms and the eight-frame leg chain.

Each leg runs from the world frame {0} to the grip-center frame {8}:

====  ========  =========  ======  ========
row   a_{i-1}   alpha_{i-1} r_i    theta_i
====  ========  =========  ======  ========
1     0         0          a       theta1 (fixed per leg)
2     b         90         0       theta2
3     0         90         0       theta3
4     0         90         0       -90
5     0         0          d4      theta5
6     0         90         0       theta6
7     0         90         0       theta7
8     c         0          d       0
====  ========  =========  ======  ========

with ``a = base_center_height``, ``b = base_joint_radius``,
``c = platform_joint_radius`` and ``d = grip_offset``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import reduce

import numpy as np

from .geometry import MachineConfig

VARIABLES = ("theta2", "theta3", "d4", "theta5", "theta6", "theta7")


@dataclass(frozen=True)
class DhRow:
    a_prev: float
    alpha_prev: float
    r: float
    theta: float


@dataclass(frozen=True)
class LegSolution:
    """Joint variables of one leg; angles in degrees, ``d4`` in mm."""

    leg_index: int
    theta2: float = 0.0
    theta3: float = 0.0
    d4: float = 0.0
    theta5: float = 0.0
    theta6: float = 0.0
    theta7: float = 0.0

    def values(self) -> np.ndarray:
        return np.array([getattr(self, v) for v in VARIABLES])

    @classmethod
    def from_values(cls, leg_index: int, values) -> "LegSolution":
        return cls(leg_index, *(float(v) for v in values))

    def with_values(self, values) -> "LegSolution":
        return replace(self, **{k: float(v) for k, v in zip(VARIABLES, values)})


@dataclass(frozen=True)
class LegDhTable:
    leg_index: int
    rows: tuple[DhRow, ...]

    def as_array(self) -> np.ndarray:
        """``(8, 4)`` array of ``(a_prev, alpha_prev, r, theta)``."""
        return np.array([[r.a_prev, r.alpha_prev, r.r, r.theta] for r in self.rows])


def dh_matrices(a_prev, alpha_prev, r, theta) -> np.ndarray:
    """Vectorised modified-DH transform; angles in degrees, returns ``(..., 4, 4)``."""
    a_prev, alpha_prev, r, theta = np.broadcast_arrays(
        *(np.asarray(v, dtype=float) for v in (a_prev, alpha_prev, r, theta))
    )
    ct, st = np.cos(np.radians(theta)), np.sin(np.radians(theta))
    ca, sa = np.cos(np.radians(alpha_prev)), np.sin(np.radians(alpha_prev))
    T = np.zeros(theta.shape + (4, 4))
    T[..., 0, 0] = ct
    T[..., 0, 1] = -st
    T[..., 0, 3] = a_prev
    T[..., 1, 0] = st * ca
    T[..., 1, 1] = ct * ca
    T[..., 1, 2] = -sa
    T[..., 1, 3] = -r * sa
    T[..., 2, 0] = st * sa
    T[..., 2, 1] = ct * sa
    T[..., 2, 2] = ca
    T[..., 2, 3] = r * ca
    T[..., 3, 3] = 1.0
    return T


def dh_transform(row: DhRow) -> np.ndarray:
    return dh_matrices(row.a_prev, row.alpha_prev, row.r, row.theta)


def theta1(config: MachineConfig, leg_index: int) -> float:
    return config.theta1_normalized[leg_index - 1]


def build_leg_table(leg_index: int, solution: LegSolution, config: MachineConfig) -> LegDhTable:
    if not 1 <= leg_index <= 6:
        raise ValueError(f"leg_index must be in 1..6, got {leg_index}")
    s = solution
    rows = (
        DhRow(0.0, 0.0, config.base_center_height, theta1(config, leg_index)),
        DhRow(config.base_joint_radius, 90.0, 0.0, s.theta2),
        DhRow(0.0, 90.0, 0.0, s.theta3),
        DhRow(0.0, 90.0, 0.0, -90.0),
        DhRow(0.0, 0.0, s.d4, s.theta5),
        DhRow(0.0, 90.0, 0.0, s.theta6),
        DhRow(0.0, 90.0, 0.0, s.theta7),
        DhRow(config.platform_joint_radius, 0.0, config.grip_offset, 0.0),
    )
    return LegDhTable(leg_index, rows)


def chain_pose(table: LegDhTable, upto: int = 8) -> np.ndarray:
    """Frame ``{upto}`` expressed in the world frame {0}."""
    return reduce(np.matmul, (dh_transform(r) for r in table.rows[:upto]), np.eye(4))


def leg_joint_position(table: LegDhTable) -> np.ndarray:
    """World position of the actuator top (origin of frame {5})."""
    return chain_pose(table, upto=5)[:3, 3]


def grip_position(solution: LegSolution, config: MachineConfig) -> np.ndarray:
    return chain_pose(build_leg_table(solution.leg_index, solution, config))[:3, 3]


def chain_jacobian(table: LegDhTable) -> np.ndarray:
    """``(3, 6)`` derivative of the grip position w.r.t. the leg variables.

    Columns follow ``VARIABLES``; angle columns are per degree, ``d4`` per mm.
    """
    frames = [np.eye(4)]
    for row in table.rows:
        frames.append(frames[-1] @ dh_transform(row))
    tip = frames[8][:3, 3]
    cols = []
    for frame_no in (2, 3, 5, 5, 6, 7):
        axis = frames[frame_no][:3, 2]
        origin = frames[frame_no][:3, 3]
        cols.append(np.cross(axis, tip - origin) * (math.pi / 180.0))
    cols[2] = frames[5][:3, 2]
    return np.stack(cols, axis=1)


def _row_params(config: MachineConfig, leg_index: int):
    a = np.array([0.0, config.base_joint_radius, 0.0, 0.0, 0.0, 0.0, 0.0, config.platform_joint_radius])
    alpha = np.array([0.0, 90.0, 90.0, 90.0, 0.0, 90.0, 90.0, 0.0])
    r = np.array([config.base_center_height, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, config.grip_offset])
    theta = np.array([theta1(config, leg_index), 0.0, 0.0, -90.0, 0.0, 0.0, 0.0, 0.0])
    return a, alpha, r, theta


def chain_batch(config: MachineConfig, leg_index: int, values: np.ndarray, upto: int = 8) -> np.ndarray:
    """Frame ``{upto}`` in world for a batch of ``(n, 6)`` variable vectors."""
    values = np.atleast_2d(np.asarray(values, dtype=float))
    n = len(values)
    a, alpha, r, theta = (np.broadcast_to(p, (n, 8)).copy() for p in _row_params(config, leg_index))
    theta[:, 1], theta[:, 2] = values[:, 0], values[:, 1]
    r[:, 4] = values[:, 2]
    theta[:, 4], theta[:, 5], theta[:, 6] = values[:, 3], values[:, 4], values[:, 5]
    mats = dh_matrices(a[:, :upto], alpha[:, :upto], r[:, :upto], theta[:, :upto])
    out = mats[:, 0]
    for k in range(1, upto):
        out = out @ mats[:, k]
    return out
