"""CSV persistence for workspace and DH databases, plus queries over them.

Every CSV is accompanied by ``<name>.meta.json`` carrying the config hash and
the parameters that produced it.
"""

from __future__ import annotations

import io
import json
import math
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .dh import LegSolution
from .errors import ConfigHashMismatch, EmptyDatabase, InsufficientRecords, ParseError, SchemaMismatch
from .geometry import MachineConfig
from .ik import Workspace, WorkspaceRecord

TOOL_VERSION = "0.1.0"

WORKSPACE_COLUMNS = ("pose_id", "dx", "dy", "dz", "alpha", "beta", "gamma",
                     "l1", "l2", "l3", "l4", "l5", "l6", "jdet")
DH_COLUMNS = ("pose_id", "leg", "theta2", "theta3", "d4", "theta5", "theta6", "theta7",
              "residual_mm", "solved")


def meta_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def write_meta(path, config: MachineConfig | None, **params) -> Path:
    meta = {
        "config_hash": config.config_hash() if config is not None else None,
        "limits": params.pop("limits", None),
        "steps": params.pop("steps", None),
        "seed": params.pop("seed", None),
        "tool_version": TOOL_VERSION,
        "created_utc": datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }
    meta.update(params)
    out = meta_path(path)
    out.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return out


def read_meta(path) -> dict:
    p = meta_path(path)
    return json.loads(p.read_text()) if p.exists() else {}


def _check_hash(path, config: MachineConfig | None) -> dict:
    meta = read_meta(path)
    if config is not None and meta.get("config_hash") not in (None, config.config_hash()):
        raise ConfigHashMismatch(
            f"{path} was built with config {meta['config_hash'][:12]}, not {config.config_hash()[:12]}"
        )
    return meta


def _read_table(path, columns) -> np.ndarray:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(",")
        missing = [c for c in columns if c not in header]
        if missing:
            raise SchemaMismatch(f"{path}: missing column(s) {', '.join(missing)}")
        order = [header.index(c) for c in columns]
        body = fh.read()
    if not body.strip():
        return np.zeros((0, len(columns)))
    try:
        data = np.loadtxt(io.StringIO(body), delimiter=",", ndmin=2, dtype=float)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    if data.shape[1] != len(header):
        raise SchemaMismatch(f"{path}: rows have {data.shape[1]} fields, header has {len(header)}")
    return data[:, order]


def write_workspace(db: Workspace, path, config: MachineConfig | None = None, **meta) -> Path:
    """Write ``db`` sorted by ``pose_id`` and its metadata sidecar."""
    path = Path(path)
    order = np.argsort(db.pose_id, kind="stable")
    table = np.column_stack([db.pose_id[order], db.poses[order], db.lengths[order], db.jdet[order]])
    fmt = ["%d"] + ["%.6f"] * 12 + ["%.6e"]
    np.savetxt(path, table, fmt=fmt, delimiter=",", header=",".join(WORKSPACE_COLUMNS), comments="")
    write_meta(path, config, grid_size=int(db.grid_size), **meta)
    return path


def read_workspace(path, config: MachineConfig | None = None) -> Workspace:
    meta = _check_hash(path, config)
    t = _read_table(path, WORKSPACE_COLUMNS)
    return Workspace(
        t[:, 0].astype(np.int64), t[:, 1:7].copy(), t[:, 7:13].copy(), t[:, 13].copy(),
        grid_size=int(meta.get("grid_size", 0)),
    )


def write_dh(results, path, config: MachineConfig | None = None, **meta) -> Path:
    """Write FK results (six rows per pose), sorted by pose_id then leg."""
    rows = []
    for res in sorted(results, key=lambda r: r.pose_id):
        for fit in res.fits:
            s = fit.solution
            rows.append([res.pose_id, s.leg_index, *s.values(), fit.residual_mm, int(fit.solved)])
    table = np.array(rows, dtype=float).reshape(-1, len(DH_COLUMNS))
    fmt = ["%d", "%d"] + ["%.6f"] * 7 + ["%d"]
    np.savetxt(path, table, fmt=fmt, delimiter=",", header=",".join(DH_COLUMNS), comments="")
    write_meta(path, config, **meta)
    return Path(path)


def read_dh(path, config: MachineConfig | None = None) -> list:
    """Read a DH database back into :class:`~hexakin.fk.FkResult` objects."""
    from .fk import FkResult, LegFit

    _check_hash(path, config)
    t = _read_table(path, DH_COLUMNS)
    results = []
    for pid in np.unique(t[:, 0]):
        rows = t[t[:, 0] == pid]
        rows = rows[np.argsort(rows[:, 1])]
        fits = tuple(
            LegFit(LegSolution.from_values(int(r[1]), r[2:8]), bool(r[9]), float(r[8]), math.nan, 0)
            for r in rows
        )
        results.append(FkResult(int(pid), fits))
    return results


def check_integrity(db: Workspace, dh_results) -> None:
    """Raise if a DH record refers to a pose missing from the workspace."""
    known = set(db.pose_id.tolist())
    orphans = sorted({r.pose_id for r in dh_results} - known)
    if orphans:
        raise SchemaMismatch(f"{len(orphans)} DH pose_id(s) not in workspace, e.g. {orphans[:5]}")


def sample_poses(db: Workspace, n: int, seed: int) -> list[WorkspaceRecord]:
    """Seeded uniform sample without replacement."""
    if n > len(db):
        raise InsufficientRecords(f"asked for {n} poses, database holds {len(db)}")
    rng = np.random.default_rng(seed)
    picks = rng.choice(len(db), size=n, replace=False)
    return [db.record(int(i)) for i in picks]


def nearest_by_lengths(db: Workspace, lengths, k: int = 1) -> list[tuple[WorkspaceRecord, float]]:
    """Exact k nearest records in 6-D actuator-length space, ties by pose_id."""
    if len(db) == 0:
        raise EmptyDatabase("workspace database is empty")
    q = np.asarray(lengths, dtype=float).reshape(6)
    dist = np.sqrt(np.sum((db.lengths - q) ** 2, axis=1))
    order = np.lexsort((db.pose_id, dist))[:k]
    return [(db.record(int(i)), float(dist[i])) for i in order]
