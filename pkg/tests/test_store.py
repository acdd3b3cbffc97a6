import json
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hexakin import store
from hexakin.dh import LegSolution
from hexakin.errors import ConfigHashMismatch, EmptyDatabase, InsufficientRecords, ParseError, SchemaMismatch
from hexakin.fk import FkResult, LegFit
from hexakin.ik import Workspace


def small_db(n=20, seed=0):
    rng = np.random.default_rng(seed)
    ids = np.sort(rng.choice(10_000, size=n, replace=False))
    return Workspace(ids, rng.uniform(-50, 50, (n, 6)), rng.uniform(470, 660, (n, 6)), rng.uniform(0.01, 0.05, n), 10_000)


def fake_results(ids):
    fits = lambda pid: tuple(
        LegFit(LegSolution(leg, -60 + leg, -90, 500 + pid % 7, 180, 170, 180), leg != 3 or pid % 2 == 0, 0.25 * leg, 0.1, 9)
        for leg in range(1, 7)
    )
    return [FkResult(int(pid), fits(int(pid))) for pid in ids]


def test_workspace_roundtrip(tmp_path, config):
    db = small_db()
    path = store.write_workspace(db, tmp_path / "ws.csv", config, steps=[15, 10, 10], seed=None)
    back = store.read_workspace(path, config)
    assert np.array_equal(back.pose_id, db.pose_id)
    assert np.allclose(back.poses, db.poses, atol=1e-6)
    assert np.allclose(back.lengths, db.lengths, atol=1e-6)
    assert np.allclose(back.jdet, db.jdet, rtol=1e-6)
    assert back.grid_size == 10_000
    meta = store.read_meta(path)
    assert meta["config_hash"] == config.config_hash()
    assert {"limits", "steps", "seed", "tool_version", "created_utc"} <= set(meta)


def test_workspace_sorted_on_write(tmp_path):
    db = small_db()
    order = np.arange(len(db))[::-1]
    shuffled = Workspace(db.pose_id[order], db.poses[order], db.lengths[order], db.jdet[order], db.grid_size)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    store.write_workspace(db, a)
    store.write_workspace(shuffled, b)
    assert a.read_bytes() == b.read_bytes()


def test_hash_mismatch(tmp_path, config):
    path = store.write_workspace(small_db(), tmp_path / "ws.csv", config)
    with pytest.raises(ConfigHashMismatch):
        store.read_workspace(path, replace(config, grip_offset=300.0))


def test_missing_column_named(tmp_path):
    path = tmp_path / "ws.csv"
    path.write_text("pose_id,dx,dy\n1,2,3\n")
    with pytest.raises(SchemaMismatch, match="dz"):
        store.read_workspace(path)


def test_garbage_row(tmp_path):
    path = tmp_path / "ws.csv"
    path.write_text(",".join(store.WORKSPACE_COLUMNS) + "\n" + ",".join(["x"] * 14) + "\n")
    with pytest.raises(ParseError):
        store.read_workspace(path)


def test_dh_roundtrip(tmp_path, config):
    results = fake_results([5, 3, 9])
    path = store.write_dh(results, tmp_path / "dh.csv", config, seed=1)
    back = store.read_dh(path, config)
    assert [r.pose_id for r in back] == [3, 5, 9]
    by_id = {r.pose_id: r for r in results}
    for r in back:
        orig = by_id[r.pose_id]
        assert r.solved == orig.solved
        for f, g in zip(r.fits, orig.fits):
            assert np.allclose(f.solution.values(), g.solution.values(), atol=1e-6)
            assert f.residual_mm == pytest.approx(g.residual_mm)
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(store.DH_COLUMNS) and len(lines) == 1 + 18


def test_integrity_detects_orphans():
    db = small_db()
    store.check_integrity(db, fake_results(db.pose_id[:3]))
    with pytest.raises(SchemaMismatch, match="not in workspace"):
        store.check_integrity(db, fake_results([int(db.pose_id.max()) + 1]))


def test_sampling_is_seeded():
    db = small_db(50)
    a = [r.pose_id for r in store.sample_poses(db, 10, 7)]
    b = [r.pose_id for r in store.sample_poses(db, 10, 7)]
    c = [r.pose_id for r in store.sample_poses(db, 10, 8)]
    assert a == b and a != c and len(set(a)) == 10
    with pytest.raises(InsufficientRecords):
        store.sample_poses(db, 51, 0)


def test_lookup_empty_database():
    empty = Workspace(np.zeros(0, int), np.zeros((0, 6)), np.zeros((0, 6)), np.zeros(0))
    with pytest.raises(EmptyDatabase):
        store.nearest_by_lengths(empty, [500] * 6)


@settings(max_examples=40)
@given(st.lists(st.floats(460, 670), min_size=6, max_size=6), st.integers(1, 25), st.integers(0, 5))
def test_lookup_matches_brute_force(query, k, seed):
    db = small_db(20, seed)
    hits = store.nearest_by_lengths(db, query, k)
    dist = [float(np.linalg.norm(db.lengths[i] - query)) for i in range(len(db))]
    expect = sorted(range(len(db)), key=lambda i: (dist[i], db.pose_id[i]))[:k]
    assert [h.pose_id for h, _ in hits] == [int(db.pose_id[i]) for i in expect]
    assert [d for _, d in hits] == pytest.approx([dist[i] for i in expect])


def test_lookup_ties_by_pose_id():
    db = small_db(4)
    db.lengths[:] = 500.0
    hits = store.nearest_by_lengths(db, [500.0] * 6, 4)
    assert [h.pose_id for h, _ in hits] == sorted(db.pose_id.tolist())


def test_meta_sidecar_path(tmp_path):
    assert store.meta_path(tmp_path / "run.csv").name == "run.meta.json"
    store.write_meta(tmp_path / "run.csv", None, seed=3, extra="x")
    meta = json.loads((tmp_path / "run.meta.json").read_text())
    assert meta["seed"] == 3 and meta["extra"] == "x" and meta["config_hash"] is None
