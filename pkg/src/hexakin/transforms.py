"""Poses, Euler rotations and 4x4 homogeneous transforms.

Angles are degrees at every public boundary and radians only inside the
trigonometry.  Transforms are plain ``numpy`` arrays of shape ``(4, 4)``;
rotations are ``(3, 3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


def normalize_angle(deg: float) -> float:
    """Wrap an angle in degrees into (-180, 180]."""
    wrapped = math.fmod(deg, 360.0)
    if wrapped <= -180.0:
        wrapped += 360.0
    elif wrapped > 180.0:
        wrapped -= 360.0
    return wrapped + 0.0


@dataclass(frozen=True)
class Pose:
    """Grip-center pose: translation in mm, roll/pitch/yaw in degrees."""

    dx: float = 0.0
    dy: float = 0.0
    dz: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        values = (self.dx, self.dy, self.dz, self.alpha, self.beta, self.gamma)
        if not all(math.isfinite(v) for v in values):
            raise ValueError(f"pose components must be finite, got {values}")
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, normalize_angle(float(getattr(self, name))))
        for name in ("dx", "dy", "dz"):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def from_array(cls, values) -> "Pose":
        dx, dy, dz, alpha, beta, gamma = (float(v) for v in values)
        return cls(dx, dy, dz, alpha, beta, gamma)

    @property
    def position(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dz])

    def as_array(self) -> np.ndarray:
        return np.array([self.dx, self.dy, self.dz, self.alpha, self.beta, self.gamma])


def axis_rotation(axis: str, angle: float) -> np.ndarray:
    """Elementary rotation about ``x``, ``y`` or ``z`` by ``angle`` degrees."""
    t = math.radians(angle)
    c, s = math.cos(t), math.sin(t)
    if axis == "x":
        return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
    if axis == "y":
        return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])
    if axis == "z":
        return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    raise ValueError(f"axis must be one of 'x', 'y', 'z', got {axis!r}")


def rotation_zyx(alpha, beta, gamma) -> np.ndarray:
    """Expanded ``Rz(gamma) @ Ry(beta) @ Rx(alpha)``, vectorised.

    Accepts scalars or equal-shape arrays in degrees; returns ``(..., 3, 3)``.
    """
    a, b, g = (np.radians(np.asarray(v, dtype=float)) for v in (alpha, beta, gamma))
    ca, sa = np.cos(a), np.sin(a)
    cb, sb = np.cos(b), np.sin(b)
    cg, sg = np.cos(g), np.sin(g)
    out = np.empty(np.broadcast(a, b, g).shape + (3, 3))
    out[..., 0, 0] = cb * cg
    out[..., 0, 1] = sa * sb * cg - ca * sg
    out[..., 0, 2] = ca * sb * cg + sa * sg
    out[..., 1, 0] = cb * sg
    out[..., 1, 1] = sa * sb * sg + ca * cg
    out[..., 1, 2] = ca * sb * sg - sa * cg
    out[..., 2, 0] = -sb
    out[..., 2, 1] = sa * cb
    out[..., 2, 2] = ca * cb
    return out


def combined_rotation(pose: Pose) -> np.ndarray:
    """Platform rotation for ``pose`` (yaw after pitch after roll)."""
    return rotation_zyx(pose.alpha, pose.beta, pose.gamma)


def homogeneous(pose: Pose) -> np.ndarray:
    T = np.eye(4)
    T[:3, :3] = combined_rotation(pose)
    T[:3, 3] = pose.position
    return T


def apply(transform: np.ndarray, point) -> np.ndarray:
    """Rigid action ``R @ p + d`` of a 4x4 transform on a 3-vector (or ``(n, 3)``)."""
    p = np.asarray(point, dtype=float)
    return p @ transform[:3, :3].T + transform[:3, 3]


def compose(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b


def inverse(transform: np.ndarray) -> np.ndarray:
    R = transform[:3, :3]
    out = np.eye(4)
    out[:3, :3] = R.T
    out[:3, 3] = -R.T @ transform[:3, 3]
    return out


def is_rotation(R: np.ndarray, tol: float = 1e-9) -> bool:
    R = np.asarray(R)
    return (
        R.shape == (3, 3)
        and np.allclose(R.T @ R, np.eye(3), atol=tol, rtol=0)
        and abs(np.linalg.det(R) - 1.0) <= tol
    )


def is_homogeneous(T: np.ndarray, tol: float = 1e-9) -> bool:
    T = np.asarray(T)
    return (
        T.shape == (4, 4)
        and np.array_equal(T[3], [0.0, 0.0, 0.0, 1.0])
        and is_rotation(T[:3, :3], tol)
    )


def pose_error(target: Pose, reached_position) -> float:
    """Distance in mm between the target grip position and a reached point."""
    return float(np.linalg.norm(target.position - np.asarray(reached_position, dtype=float)))


def rotation_angle(Ra: np.ndarray, Rb: np.ndarray) -> np.ndarray:
    """Axis-angle magnitude in degrees of ``Ra.T @ Rb``; broadcasts over leading axes."""
    trace = np.einsum("...ji,...ji->...", Ra, Rb)
    cos = np.clip((trace - 1.0) / 2.0, -1.0, 1.0)
    return np.degrees(np.arccos(cos))


def euler_from_rotation(R: np.ndarray) -> tuple[float, float, float]:
    """Inverse of :func:`rotation_zyx` for |beta| < 90 degrees."""
    beta = math.asin(-float(np.clip(R[2, 0], -1.0, 1.0)))
    alpha = math.atan2(R[2, 1], R[2, 2])
    gamma = math.atan2(R[1, 0], R[0, 0])
    return math.degrees(alpha), math.degrees(beta), math.degrees(gamma)


def nearest_rotation(M: np.ndarray) -> np.ndarray:
    """Project a 3x3 matrix onto SO(3) (chordal mean when ``M`` is a sum)."""
    U, _, Vt = np.linalg.svd(M)
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt
