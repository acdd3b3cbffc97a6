"""Grip-center deviation under tolerance bands on the solved DH variables.

A band of magnitude ``m`` shifts every joint angle by up to ``m`` degrees and
every actuator length by up to ``m`` mm.  Two direction families are swept:

* ``corner``: the 64 sign patterns over the six variables, applied with the
  same signs to all six legs (errors combining constructively);
* ``random``: seeded uniform directions drawn independently per leg.

Each leg chain is a complete serial model of the grip center, so by default
every leg's predicted grip is scored on its own (``combine="leg"``).  With
``combine="centroid"`` the six predictions are averaged first, which cancels
most lateral error between opposing legs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .dh import LegSolution, chain_batch
from .errors import EmptyDatabase
from .geometry import MachineConfig
from .transforms import Pose

STATS = ("x-max", "x-min", "y-max", "y-min", "z-max", "z-min")
REPORT_COLUMNS = ("band", "stat", "at", "dev_x", "dev_y", "dev_z", "dev_dist", "pose_id")
SUMMARY_COLUMNS = ("band", "kind", "samples", "max_x", "max_y", "max_z", "max_dist",
                   "mean_x", "mean_y", "mean_z", "mean_dist")


@dataclass(frozen=True)
class ToleranceBand:
    magnitude: float

    def __post_init__(self):
        if self.magnitude < 0:
            raise ValueError("tolerance band magnitude must be >= 0")


@dataclass(frozen=True)
class DeviationRecord:
    pose_id: int
    dev_x: float
    dev_y: float
    dev_z: float
    dev_dist: float
    band: ToleranceBand
    sample_kind: str


def perturb(solution: LegSolution, band: ToleranceBand, direction) -> LegSolution:
    d = np.asarray(direction, dtype=float)
    if np.any(np.abs(d) > 1.0):
        raise ValueError("direction components must lie in [-1, 1]")
    return solution.with_values(solution.values() + band.magnitude * d)


def deviation(
    nominal_pose: Pose,
    perturbed,
    config: MachineConfig,
    pose_id: int = 0,
    band: ToleranceBand = ToleranceBand(0.0),
    sample_kind: str = "corner",
    combine: str = "leg",
) -> DeviationRecord:
    """Grip-center deviation for one set of perturbed leg solutions.

    ``combine="leg"`` reports the leg chain whose grip moved furthest;
    ``"centroid"`` reports the mean of the six grips.
    """
    grips = np.array([chain_batch(config, s.leg_index, s.values()[None])[0, :3, 3] for s in perturbed])
    if combine == "centroid":
        dev = np.abs(grips.mean(axis=0) - nominal_pose.position)
    elif combine == "leg":
        devs = np.abs(grips - nominal_pose.position)
        dev = devs[np.argmax(np.linalg.norm(devs, axis=1))]
    else:
        raise ValueError(f"combine must be 'leg' or 'centroid', got {combine!r}")
    return DeviationRecord(pose_id, *map(float, dev), float(np.linalg.norm(dev)), band, sample_kind)


def corner_directions() -> np.ndarray:
    """``(64, 6, 6)``: every sign pattern, shared by all six legs."""
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=6)))
    return np.repeat(signs[:, None, :], 6, axis=1)


def random_directions(n: int, seed: int) -> np.ndarray:
    """``(n, 6, 6)`` uniform directions in [-1, 1], independent per leg."""
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, 6, 6))


def _deviations(solutions, nominal: np.ndarray, directions: np.ndarray, magnitude: float, config):
    """``(n_dir, n_leg, 3)`` absolute grip deviations of every leg chain for one pose."""
    grips = np.empty((len(directions), len(solutions), 3))
    for leg, sol in enumerate(solutions):
        vals = sol.values()[None, :] + magnitude * directions[:, leg, :]
        grips[:, leg] = chain_batch(config, sol.leg_index, vals)[:, :3, 3]
    return grips - nominal


@dataclass
class SensitivityReport:
    """Per-sample deviations plus the derived table and summary rows.

    A sample is one (pose, direction, leg) triple; ``leg`` is 0 when the six
    grips were averaged.
    """

    bands: list[float]
    combine: str
    pose_ids: np.ndarray
    kinds: np.ndarray
    direction_index: np.ndarray
    legs: np.ndarray
    dev: np.ndarray  # (n_band, n_sample, 4): |x|, |y|, |z|, dist

    def table_rows(self) -> list[tuple]:
        """Six rows per band: the sample at the max/min of each axis deviation."""
        rows = []
        for b, band in enumerate(self.bands):
            dev = self.dev[b]
            for stat in STATS:
                col = "xyz".index(stat[0])
                key = -dev[:, col] if stat.endswith("max") else dev[:, col]
                i = int(np.lexsort((self.legs, self.direction_index, self.pose_ids, key))[0])
                at = f"{self.kinds[i]}:{self.direction_index[i]}"
                if self.legs[i]:
                    at += f":leg{self.legs[i]}"
                rows.append((band, stat, at, *map(float, dev[i]), int(self.pose_ids[i])))
        return rows

    def summary_rows(self) -> list[tuple]:
        rows = []
        for b, band in enumerate(self.bands):
            for kind in ("corner", "random", "all"):
                mask = np.ones(len(self.kinds), bool) if kind == "all" else self.kinds == kind
                if not mask.any():
                    continue
                d = self.dev[b][mask]
                rows.append((band, kind, int(mask.sum()), *map(float, d.max(axis=0)), *map(float, d.mean(axis=0))))
        return rows

    def max_dist(self, band: float, kind: str = "corner") -> float:
        b = self.bands.index(float(band))
        return float(self.dev[b][self.kinds == kind, 3].max())

    def linearity_ratio(self, kind: str = "corner") -> float:
        """Max deviation at the largest band over that at the smallest non-zero band."""
        nonzero = sorted(b for b in self.bands if b > 0)
        return self.max_dist(nonzero[-1], kind) / self.max_dist(nonzero[0], kind)


def sweep(
    dh_results,
    nominal_poses: dict,
    bands,
    n_random: int,
    seed: int,
    config: MachineConfig,
    combine: str = "leg",
) -> SensitivityReport:
    """Evaluate every band on every solved pose.

    ``nominal_poses`` maps pose_id to the target :class:`Pose`.  The same
    direction set is reused for every band and pose.
    """
    if combine not in ("leg", "centroid"):
        raise ValueError(f"combine must be 'leg' or 'centroid', got {combine!r}")
    solved = sorted((r for r in dh_results if r.solved), key=lambda r: r.pose_id)
    if not solved:
        raise EmptyDatabase("no solved poses to analyse")
    bands = [float(b) for b in bands]
    for b in bands:
        ToleranceBand(b)
    directions = np.concatenate([corner_directions(), random_directions(n_random, seed)])
    n_dir = len(directions)
    n_leg = 6 if combine == "leg" else 1
    per_pose = n_dir * n_leg

    dev = np.zeros((len(bands), len(solved) * per_pose, 4))
    for p, res in enumerate(solved):
        nominal = nominal_poses[res.pose_id].position
        for b, band in enumerate(bands):
            d = _deviations(res.solutions, nominal, directions, band, config)
            d = np.abs(d.mean(axis=1, keepdims=True) if combine == "centroid" else d).reshape(-1, 3)
            block = slice(p * per_pose, (p + 1) * per_pose)
            dev[b, block, :3] = d
            dev[b, block, 3] = np.linalg.norm(d, axis=1)

    kinds = np.repeat(np.array(["corner"] * 64 + ["random"] * n_random), n_leg)
    dir_index = np.repeat(np.arange(n_dir), n_leg)
    legs = np.tile(np.arange(1, 7), n_dir) if combine == "leg" else np.zeros(n_dir, int)
    return SensitivityReport(
        bands,
        combine,
        np.repeat([r.pose_id for r in solved], per_pose),
        np.tile(kinds, len(solved)),
        np.tile(dir_index, len(solved)),
        np.tile(legs, len(solved)),
        dev,
    )
