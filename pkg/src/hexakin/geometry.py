"""Machine description and joint layout of a semi-symmetric 6-UPS platform.

Base joints sit at the fixed ``theta1_values`` angles on the base circle (the
same angles the per-leg DH chains use for their first joint), so the IK and DH
models share one set of base joint centers.  Platform joints are laid out as
three symmetric pairs whose large chord matches ``platform_large_side``,
rotated by ``platform_start_angle`` relative to the base pattern.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import GeometryInconsistent, ParseError, ValidationError

CLOSURE_TOL_DEG = 0.5


@dataclass(frozen=True)
class MachineConfig:
    """Lengths in mm, angles in degrees."""

    base_joint_radius: float
    base_small_side: float
    base_large_side: float
    platform_joint_radius: float
    platform_small_side: float
    platform_large_side: float
    actuator_min_length: float
    actuator_stroke: float
    base_center_height: float
    grip_offset: float
    home_height: float
    theta1_values: tuple[float, ...]
    platform_start_angle: float = 60.0

    def __post_init__(self):
        object.__setattr__(self, "theta1_values", tuple(float(t) for t in self.theta1_values))

    @property
    def actuator_max_length(self) -> float:
        return self.actuator_min_length + self.actuator_stroke

    @property
    def home_grip_z(self) -> float:
        """World z of the grip center at the home pose."""
        return self.base_center_height + self.home_height + self.grip_offset

    @property
    def theta1_normalized(self) -> tuple[float, ...]:
        return tuple(t % 360.0 for t in self.theta1_values)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["theta1_values"] = list(self.theta1_values)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class JointLayout:
    """Joint centers of one platform; ``pairing[i] = (base index, platform index)``.

    ``base_joints`` are in the base frame (origin at the base center),
    ``platform_joints`` in the platform frame.  Leg ``i`` (0-based) always uses
    base joint ``i``.
    """

    base_joints: np.ndarray
    platform_joints: np.ndarray
    pairing: tuple[tuple[int, int], ...]
    base_angles: np.ndarray = field(repr=False)
    platform_angles: np.ndarray = field(repr=False)

    @property
    def leg_platform_joints(self) -> np.ndarray:
        """Platform joints reordered so row ``i`` belongs to leg ``i``."""
        return self.platform_joints[[p for _, p in self.pairing]]

    @property
    def leg_platform_angles(self) -> np.ndarray:
        return self.platform_angles[[p for _, p in self.pairing]]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    residual: float


def chord_angle(side: float, radius: float) -> float:
    """Central angle in degrees subtended by a chord."""
    return 2.0 * math.degrees(math.asin(side / (2.0 * radius)))


def _angle_diff(a: float, b: float) -> float:
    return (a - b + 180.0) % 360.0 - 180.0


def validate_geometry(config: MachineConfig) -> list[Check]:
    """Run every config/layout invariant; failures are reported, never raised."""
    checks: list[Check] = []
    lengths = {
        f.name: getattr(config, f.name)
        for f in fields(config)
        if f.name not in ("theta1_values", "platform_start_angle")
    }
    worst = min(lengths.values())
    checks.append(Check("positive_lengths", worst > 0 and all(map(math.isfinite, lengths.values())), worst))

    chords_ok = True
    for plate in ("base", "platform"):
        R = getattr(config, f"{plate}_joint_radius")
        for kind in ("small", "large"):
            side = getattr(config, f"{plate}_{kind}_side")
            excess = side - 2.0 * R
            ok = R > 0 and side > 0 and excess < 0
            chords_ok &= ok
            checks.append(Check(f"{plate}_{kind}_chord_fits", ok, excess))

    if chords_ok:
        for plate in ("base", "platform"):
            R = getattr(config, f"{plate}_joint_radius")
            total = 3.0 * (
                chord_angle(getattr(config, f"{plate}_small_side"), R)
                + chord_angle(getattr(config, f"{plate}_large_side"), R)
            )
            checks.append(Check(f"{plate}_closure", abs(total - 360.0) <= CLOSURE_TOL_DEG, total - 360.0))

    n = len(config.theta1_values)
    checks.append(Check("theta1_count", n == 6, float(n - 6)))
    if n == 6 and chords_ok:
        # theta1 spacing has to alternate large/small like the base sides
        R = config.base_joint_radius
        expect = (chord_angle(config.base_large_side, R), chord_angle(config.base_small_side, R))
        t = config.theta1_normalized
        gaps = [(t[(i + 1) % 6] - t[i]) % 360.0 for i in range(6)]
        residual = min(
            max(abs(g - expect[(i + shift) % 2]) for i, g in enumerate(gaps)) for shift in (0, 1)
        )
        checks.append(Check("theta1_matches_base_sides", residual <= CLOSURE_TOL_DEG, residual))

    if all(c.passed for c in checks):
        try:
            _pairing(config)
        except GeometryInconsistent:
            checks.append(Check("pairing_bijective", False, 1.0))
        else:
            checks.append(Check("pairing_bijective", True, 0.0))
    return checks


def _platform_angles(config: MachineConfig) -> np.ndarray:
    t = config.theta1_normalized
    base_phase = (t[0] + _angle_diff(t[1], t[0]) / 2.0) % 360.0
    phase = base_phase + config.platform_start_angle
    half_large = chord_angle(config.platform_large_side, config.platform_joint_radius) / 2.0
    angles = []
    for k in range(3):
        axis = phase + 120.0 * k
        angles += [axis - half_large, axis + half_large]
    return np.array(angles) % 360.0


def _pairing(config: MachineConfig) -> tuple[tuple[int, int], ...]:
    base = config.theta1_normalized
    plat = _platform_angles(config)
    pairing = []
    for i, b in enumerate(base):
        gaps = [abs(_angle_diff(p, b)) for p in plat]
        pairing.append((i, int(np.argmin(gaps))))
    if len({p for _, p in pairing}) != 6:
        raise GeometryInconsistent(f"nearest-angle pairing is not one-to-one: {pairing}")
    return tuple(pairing)


def build_joint_layout(config: MachineConfig) -> JointLayout:
    failed = [c for c in validate_geometry(config) if not c.passed]
    if failed:
        desc = ", ".join(f"{c.name} (residual {c.residual:.4g})" for c in failed)
        raise GeometryInconsistent(f"invalid geometry: {desc}")

    base_angles = np.array(config.theta1_normalized)
    plat_angles = _platform_angles(config)

    def ring(radius, angles_deg):
        a = np.radians(angles_deg)
        return np.stack([radius * np.cos(a), radius * np.sin(a), np.zeros_like(a)], axis=1)

    return JointLayout(
        base_joints=ring(config.base_joint_radius, base_angles),
        platform_joints=ring(config.platform_joint_radius, plat_angles),
        pairing=_pairing(config),
        base_angles=base_angles,
        platform_angles=plat_angles,
    )


def config_from_dict(data: dict, source: str = "<dict>") -> MachineConfig:
    names = [f.name for f in fields(MachineConfig)]
    required = [f.name for f in fields(MachineConfig) if f.name != "platform_start_angle"]
    missing = [n for n in required if n not in data]
    if missing:
        raise ParseError(f"{source}: missing field(s) {', '.join(missing)}")
    unknown = sorted(set(data) - set(names))
    if unknown:
        raise ParseError(f"{source}: unknown field(s) {', '.join(unknown)}")
    try:
        kwargs = {n: float(data[n]) for n in names if n in data and n != "theta1_values"}
        kwargs["theta1_values"] = tuple(float(t) for t in data["theta1_values"])
    except (TypeError, ValueError) as exc:
        raise ParseError(f"{source}: non-numeric value ({exc})") from None
    config = MachineConfig(**kwargs)
    failed = [c for c in validate_geometry(config) if not c.passed]
    if failed:
        raise ValidationError(
            f"{source}: " + "; ".join(f"{c.name} violated (residual {c.residual:.6g})" for c in failed)
        )
    return config


def load_machine_config(path) -> MachineConfig:
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    return config_from_dict(data, str(path))


def tiger_config_path() -> Path:
    return Path(str(resources.files("hexakin") / "data" / "tiger66_1.json"))


def tiger_config() -> MachineConfig:
    """The bundled Tiger 66.1 reference machine."""
    return load_machine_config(tiger_config_path())
