import json
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hexakin.errors import GeometryInconsistent, ParseError, ValidationError
from hexakin.geometry import (
    MachineConfig,
    build_joint_layout,
    chord_angle,
    config_from_dict,
    load_machine_config,
    tiger_config_path,
    validate_geometry,
)


def asin_angle(side, radius):
    return 2.0 * math.degrees(math.asin(side / (2.0 * radius)))


def regular_config(radius, plat_radius, large_deg, plat_large_deg, start=60.0):
    """Config whose chords tile the circle exactly and whose theta1 matches the base sides."""
    side = lambda R, deg: 2.0 * R * math.sin(math.radians(deg) / 2.0)
    half = large_deg / 2.0
    theta1 = [ax + s * half for ax in (90.0, 210.0, 330.0) for s in (-1, 1)]
    return MachineConfig(
        base_joint_radius=radius,
        base_small_side=side(radius, 120.0 - large_deg),
        base_large_side=side(radius, large_deg),
        platform_joint_radius=plat_radius,
        platform_small_side=side(plat_radius, 120.0 - plat_large_deg),
        platform_large_side=side(plat_radius, plat_large_deg),
        actuator_min_length=400.0,
        actuator_stroke=200.0,
        base_center_height=50.0,
        grip_offset=300.0,
        home_height=450.0,
        theta1_values=tuple(theta1),
        platform_start_angle=start,
    )


def chords(points):
    return np.linalg.norm(points - np.roll(points, -1, axis=0), axis=1)


def test_tiger_file_values(config):
    assert config.actuator_stroke == 203.0
    assert config.base_joint_radius == 477.4
    assert config.grip_offset == 343.2
    assert config.theta1_normalized[-1] == pytest.approx(6.6)


def test_tiger_chord_angles_against_asin_oracle(config):
    base_small = asin_angle(377.9, 477.4)
    base_large = asin_angle(570.4, 477.4)
    assert base_small / 2 == pytest.approx(23.32, abs=0.01)
    assert base_large / 2 == pytest.approx(36.68, abs=0.01)
    assert 3 * (base_small + base_large) == pytest.approx(360.0, abs=0.1)
    plat = 3 * (asin_angle(178.8, 225.1) + asin_angle(268.7, 225.1))
    assert asin_angle(178.8, 225.1) == pytest.approx(46.8, abs=0.05)
    assert asin_angle(268.7, 225.1) == pytest.approx(73.3, abs=0.05)
    # closes within the 0.5 degree tolerance, not exactly
    assert 360.0 < plat < 360.5
    assert chord_angle(config.platform_small_side, config.platform_joint_radius) == pytest.approx(
        asin_angle(178.8, 225.1)
    )


def test_tiger_validates(config):
    report = validate_geometry(config)
    assert report and all(c.passed for c in report)
    names = {c.name for c in report}
    assert {"base_closure", "platform_closure", "theta1_count", "pairing_bijective"} <= names


def test_closure_failure_reports_residual(config):
    bad = replace(config, base_large_side=580.4)
    report = {c.name: c for c in validate_geometry(bad)}
    closure = 3 * (asin_angle(377.9, 477.4) + asin_angle(580.4, 477.4)) - 360.0
    assert not report["base_closure"].passed
    assert report["base_closure"].residual == pytest.approx(closure)
    with pytest.raises(GeometryInconsistent, match="base_closure"):
        build_joint_layout(bad)


def test_zero_radius_fails_positivity(config):
    report = {c.name: c for c in validate_geometry(replace(config, base_joint_radius=0.0))}
    assert not report["positive_lengths"].passed


def test_tiger_layout(config, layout):
    assert np.allclose(np.linalg.norm(layout.base_joints, axis=1), 477.4, atol=1e-9)
    assert np.allclose(np.linalg.norm(layout.platform_joints, axis=1), 225.1, atol=1e-9)
    assert sorted(p for _, p in layout.pairing) == list(range(6))
    assert [b for b, _ in layout.pairing] == list(range(6))
    # the large platform chord is laid out exactly; the small one absorbs the closure residual
    c = chords(layout.platform_joints)
    large = c[np.argmax(c)]
    assert large == pytest.approx(268.7, abs=1e-9)
    assert np.allclose(c[c < 220], 178.8, atol=1.1)


def test_layout_is_deterministic(config):
    a, b = build_joint_layout(config), build_joint_layout(config)
    assert np.array_equal(a.base_joints, b.base_joints)
    assert np.array_equal(a.platform_joints, b.platform_joints)
    assert a.pairing == b.pairing


@given(
    st.floats(100.0, 1000.0),
    st.floats(50.0, 500.0),
    st.floats(62.0, 100.0),
    st.floats(62.0, 100.0),
)
def test_exact_configs_alternate_chords(radius, plat_radius, large, plat_large):
    config = regular_config(radius, plat_radius, large, plat_large)
    if not all(c.passed for c in validate_geometry(config)):
        with pytest.raises(GeometryInconsistent):
            build_joint_layout(config)
        return
    layout = build_joint_layout(config)
    for pts, R, small, big in (
        (layout.base_joints, radius, config.base_small_side, config.base_large_side),
        (layout.platform_joints, plat_radius, config.platform_small_side, config.platform_large_side),
    ):
        assert np.allclose(np.linalg.norm(pts, axis=1), R, rtol=0, atol=1e-9)
        c = chords(pts)
        pattern = np.array([small, big] * 3)
        assert np.allclose(c, pattern, atol=1e-6) or np.allclose(c, np.roll(pattern, 1), atol=1e-6)


def test_equal_sides_give_even_spacing():
    config = regular_config(300.0, 150.0, 60.0, 60.0, start=0.0)
    assert config.base_small_side == pytest.approx(300.0)
    layout = build_joint_layout(config)
    gaps = np.diff(np.sort(layout.base_angles))
    assert np.allclose(gaps, 60.0)


def _write(tmp_path, data):
    path = tmp_path / "machine.json"
    path.write_text(json.dumps(data))
    return path


def test_load_rejects_impossible_chord(tmp_path, config):
    data = config.to_dict() | {"base_small_side": 1000.0}
    with pytest.raises(ValidationError, match="base_small_chord_fits"):
        load_machine_config(_write(tmp_path, data))


def test_load_missing_field_names_it(tmp_path, config):
    data = config.to_dict()
    del data["grip_offset"]
    with pytest.raises(ParseError, match="grip_offset"):
        load_machine_config(_write(tmp_path, data))


@pytest.mark.parametrize("text, fragment", [
    ("{\n  \"base_joint_radius\": 477.4,\n  oops\n}", "line 3"),
    ("[1, 2]", "JSON object"),
])
def test_load_bad_json(tmp_path, text, fragment):
    path = tmp_path / "bad.json"
    path.write_text(text)
    with pytest.raises(ParseError, match=fragment):
        load_machine_config(path)


def test_unknown_and_non_numeric_fields(config):
    with pytest.raises(ParseError, match="unknown"):
        config_from_dict(config.to_dict() | {"colour": 1})
    with pytest.raises(ParseError, match="non-numeric"):
        config_from_dict(config.to_dict() | {"grip_offset": "long"})


def test_config_hash_tracks_content(config):
    assert config.config_hash() == load_machine_config(tiger_config_path()).config_hash()
    assert config.config_hash() != replace(config, grip_offset=343.3).config_hash()
