"""Command-line pipeline: workspace -> fk -> sensitivity, plus ik/lookup/export.

Exit codes: 0 success (unsolved poses included), 2 config or usage error,
3 I/O error, 4 empty or insufficient data.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from . import store
from .errors import (
    ConfigHashMismatch,
    EmptyDatabase,
    GeometryInconsistent,
    InsufficientRecords,
    ParseError,
    SchemaMismatch,
    ValidationError,
)
from .fk import SearchParams, recover_many
from .geometry import build_joint_layout, load_machine_config
from .ik import DEFAULT_THRESHOLD, GridSteps, MotionLimits, force_jacobian, leg_lengths, pose_valid, workspace_table
from .sensitivity import REPORT_COLUMNS, SUMMARY_COLUMNS, sweep
from .transforms import Pose


class UsageError(Exception):
    pass


def _floats(text: str, n: int | None = None, what: str = "value") -> list[float]:
    try:
        vals = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if n is not None and len(vals) != n:
        raise UsageError(f"{what}: expected {n} numbers, got {len(vals)}")
    return vals


def _jobs(arg: int | None) -> int:
    if arg:
        return arg
    env = os.environ.get("HEXAKIN_JOBS")
    if env:
        return int(env)
    return os.cpu_count() or 1


def _machine(args):
    config = load_machine_config(args.config)
    return config, build_joint_layout(config)


def _write_manifest(out: Path, args, started: float, **extra) -> None:
    manifest = {
        "subcommand": args.command,
        "config": getattr(args, "config", None),
        "params": {k: v for k, v in vars(args).items() if k not in ("func", "command")},
        "seed": getattr(args, "seed", None),
        "inputs": [str(p) for p in (getattr(args, "db", None), getattr(args, "dh_db", None)) if p],
        "outputs": [str(out)],
        "wall_time_s": round(time.perf_counter() - started, 3),
    }
    manifest.update(extra)
    out.with_name(out.stem + ".manifest.json").write_text(json.dumps(manifest, indent=2, default=str) + "\n")


def cmd_workspace(args) -> int:
    started = time.perf_counter()
    config, layout = _machine(args)
    if args.limits:
        limits = MotionLimits.from_dict(json.loads(Path(args.limits).read_text()))
    else:
        limits = MotionLimits.about_home(config)
    steps = GridSteps(*_floats(args.steps, 3, "--steps"))
    ws = workspace_table(layout, config, limits, steps, args.threshold, _jobs(args.jobs))
    out = Path(args.out)
    store.write_workspace(
        ws, out, config, limits=limits.as_dict(), steps=[steps.step_xy, steps.step_z, steps.step_rot],
        threshold=args.threshold,
    )
    _write_manifest(out, args, started, valid=len(ws), total=ws.grid_size)
    rate = len(ws) / ws.grid_size if ws.grid_size else 0.0
    print(f"valid {len(ws)} / {ws.grid_size} grid poses ({rate:.2%}) -> {out}")
    return 0


def cmd_ik(args) -> int:
    config, layout = _machine(args)
    pose = Pose(*_floats(args.pose, 6, "--pose"))
    lengths = leg_lengths(pose, layout, config)
    for i, length in enumerate(lengths, 1):
        print(f"l{i} = {length:.6f}")
    if lengths.min() > 1e-9:
        print(f"det J = {np.linalg.det(force_jacobian(pose, layout, config)):.6e}")
    print(pose_valid(pose, layout, config, args.threshold))
    return 0


def cmd_fk(args) -> int:
    started = time.perf_counter()
    config, layout = _machine(args)
    db = store.read_workspace(args.db, config)
    if len(db) == 0:
        raise EmptyDatabase(f"{args.db} holds no poses")
    if args.pose_id is not None:
        try:
            records = [db.record(db.index_of(args.pose_id))]
        except KeyError:
            raise InsufficientRecords(f"pose_id {args.pose_id} not in {args.db}") from None
    else:
        records = store.sample_poses(db, args.sample, args.seed)
    params = SearchParams(coarse_step=args.coarse, fine_step=args.fine, error_limit=args.error_limit)
    t0 = time.perf_counter()
    results = recover_many(records, layout, config, params, _jobs(args.jobs))
    per_pose = (time.perf_counter() - t0) / len(records)
    out = Path(args.out)
    store.write_dh(results, out, config, seed=args.seed, workspace=str(args.db),
                   error_limit=args.error_limit, coarse=args.coarse, fine=args.fine)
    solved = sum(r.solved for r in results)
    _write_manifest(out, args, started, solved=solved, total=len(results))
    print(f"solved {solved} / {len(results)} poses, mean {per_pose:.3f} s per pose -> {out}")
    for r in results:
        if not r.solved:
            legs = [f.solution.leg_index for f in r.fits if not f.solved]
            print(f"  pose {r.pose_id}: Unsolved legs {legs}")
    return 0


def cmd_lookup(args) -> int:
    db = store.read_workspace(args.db)
    hits = store.nearest_by_lengths(db, _floats(args.lengths, 6, "--lengths"), args.k)
    print("rank,pose_id,distance,dx,dy,dz,alpha,beta,gamma")
    for rank, (rec, dist) in enumerate(hits, 1):
        p = rec.pose
        print(f"{rank},{rec.pose_id},{dist:.6f},{p.dx:.6f},{p.dy:.6f},{p.dz:.6f},"
              f"{p.alpha:.6f},{p.beta:.6f},{p.gamma:.6f}")
    return 0


def cmd_sensitivity(args) -> int:
    started = time.perf_counter()
    config = load_machine_config(args.config)
    results = store.read_dh(args.dh_db, config)
    ws_path = args.db or store.read_meta(args.dh_db).get("workspace")
    if not ws_path:
        raise UsageError("--db is required: the DH database does not record its workspace file")
    db = store.read_workspace(ws_path, config)
    store.check_integrity(db, results)
    results = [r for r in results if r.solved]
    nominal = {r.pose_id: db.record(db.index_of(r.pose_id)).pose for r in results}
    bands = _floats(args.bands, what="--bands")
    report = sweep(results, nominal, bands, args.samples, args.seed, config, combine=args.combine)

    out = Path(args.out)
    _write_csv(out, REPORT_COLUMNS, report.table_rows())
    summary = out.with_name(out.stem + ".summary.csv")
    _write_csv(summary, SUMMARY_COLUMNS, report.summary_rows())
    store.write_meta(out, config, seed=args.seed, bands=bands, combine=args.combine)
    ratio = report.linearity_ratio() if len([b for b in bands if b > 0]) > 1 else float("nan")
    _write_manifest(out, args, started, linearity_ratio=ratio)
    for band in bands:
        print(f"band {band:g}: max grip deviation {report.max_dist(band):.3f} mm (corner)")
    print(f"max-deviation ratio largest/smallest band: {ratio:.3f}")
    print(f"report -> {out}, summary -> {summary}")
    return 0


def _fmt(v):
    return f"{v:.6f}" if isinstance(v, float) else v


def _write_csv(path: Path, header, rows) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows([[_fmt(v) for v in row] for row in rows])


def _svg_scatter(points: np.ndarray, title: str, size: int = 400, pad: int = 20) -> str:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>',
    ]
    if len(points):
        lo, hi = points.min(axis=0), points.max(axis=0)
        span = np.where(hi - lo > 0, hi - lo, 1.0)
        xy = pad + (points - lo) / span * (size - 2 * pad)
        for x, y in xy:
            parts.append(f'<circle cx="{x:.2f}" cy="{size - y:.2f}" r="1"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_export(args) -> int:
    started = time.perf_counter()
    out = Path(args.out)
    if args.db:
        db = store.read_workspace(args.db)
        pts = db.poses[np.argsort(db.pose_id, kind="stable"), :3]
        header, title = ("x", "y", "z"), f"workspace {Path(args.db).name} (top view)"
        plane = pts[:, :2]
    else:
        with Path(args.report).open() as fh:
            rows = list(csv.DictReader(fh))
        if rows and "kind" in rows[0]:
            rows = [r for r in rows if r["kind"] == "corner"]
            pts = np.array([[float(r["band"]), float(r["max_dist"]), float(r["mean_dist"])] for r in rows])
            header = ("band", "max_dist", "mean_dist")
        else:
            pts = np.array([[float(r["band"]), float(r["dev_dist"]), float(r["pose_id"])] for r in rows])
            header = ("band", "dev_dist", "pose_id")
        pts = pts.reshape(-1, 3)
        title, plane = f"deviation vs band {Path(args.report).name}", pts[:, :2]
    if args.format == "csv":
        _write_csv(out, header, [tuple(map(float, p)) for p in pts])
    else:
        out.write_text(_svg_scatter(plane, title))
    _write_manifest(out, args, started, rows=len(pts))
    print(f"{len(pts)} points -> {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hexakin", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("workspace", help="enumerate valid workspace poses")
    p.add_argument("--config", required=True)
    p.add_argument("--limits", help="JSON file with x_range..yaw_range (default: about home)")
    p.add_argument("--steps", default="15,10,10", help="xy mm, z mm, rotation deg")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_workspace)

    p = sub.add_parser("ik", help="leg lengths and validity for one pose")
    p.add_argument("--config", required=True)
    p.add_argument("--pose", required=True, help="dx,dy,dz,alpha,beta,gamma")
    p.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    p.set_defaults(func=cmd_ik)

    p = sub.add_parser("fk", help="recover DH parameters for workspace poses")
    p.add_argument("--config", required=True)
    p.add_argument("--db", required=True)
    sel = p.add_mutually_exclusive_group(required=True)
    sel.add_argument("--sample", type=int)
    sel.add_argument("--pose-id", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--error-limit", type=float, default=1.0)
    p.add_argument("--coarse", type=float, default=1.0)
    p.add_argument("--fine", type=float, default=0.1)
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int)
    p.set_defaults(func=cmd_fk)

    p = sub.add_parser("lookup", help="nearest stored poses for six actuator lengths")
    p.add_argument("--db", required=True)
    p.add_argument("--lengths", required=True, help="l1,...,l6 in mm")
    p.add_argument("--k", type=int, default=1)
    p.set_defaults(func=cmd_lookup)

    p = sub.add_parser("sensitivity", help="grip deviation under DH tolerance bands")
    p.add_argument("--config", required=True)
    p.add_argument("--dh-db", required=True)
    p.add_argument("--db", help="workspace database (default: the one recorded by fk)")
    p.add_argument("--bands", default="0.1,0.2,0.3,0.4,0.5")
    p.add_argument("--samples", type=int, default=100, help="random directions per pose")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--combine", choices=("leg", "centroid"), default="leg")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sensitivity)

    p = sub.add_parser("export", help="point-cloud CSV or SVG scatter for plotting")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--db")
    src.add_argument("--report")
    p.add_argument("--format", choices=("csv", "svg-points"), default="csv")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ParseError, ValidationError, GeometryInconsistent, ConfigHashMismatch, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (EmptyDatabase, InsufficientRecords) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except (OSError, SchemaMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
