"""Run configuration: TOML sections with unit-suffixed scalars.

Frequencies are written in cycles (``"5 MHz"``) and stored as angular
frequencies (rad/s).  The gate detuning ``delta`` follows the same rule.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .units import UnitError, angular, parse_quantity

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SpeciesConfig:
    name: str = "9Be+"
    overrides: dict = field(default_factory=dict)  # IonSpecies field -> SI value


@dataclass(frozen=True)
class QubitConfig:
    up: tuple[int, int] = (1, 1)
    down: tuple[int, int] = (2, 0)
    bias: float | None = None  # T; None = clock point of (up, down)


@dataclass(frozen=True)
class ConductorConfig:
    name: str
    kind: str
    z1: float
    z2: float
    x: float
    current: float


@dataclass(frozen=True)
class GeometryConfig:
    layout: str = "five_wire"
    d0: float = 30e-6
    conductors: tuple[ConductorConfig, ...] = ()


@dataclass(frozen=True)
class ChainSection:
    N: int = 2
    omega_axial: float = 2 * math.pi * 1e6
    mode_frequency: float = 2 * math.pi * 5e6
    mode_kind: str = "rocking"
    omega_x: float | None = None
    omega_z: float | None = None


@dataclass(frozen=True)
class GateConfig:
    kind: str = "phiphi"
    mode_axis: str | None = None
    tau: float | None = 20e-6
    delta: float | None = None
    current: float | None = None
    phase_b: float = 0.0
    phase_r: float = 0.0
    up: tuple[int, int] | None = None
    down: tuple[int, int] | None = None


@dataclass(frozen=True)
class CarrierConfig:
    current: float = 15e-3


@dataclass(frozen=True)
class ErrorsConfig:
    displacement: tuple[float, float, float] = (0.0, 0.0, 200e-9)


@dataclass(frozen=True)
class EvolveConfig:
    n_max: int = 20
    tol: float = 1e-10
    flags: dict = field(default_factory=lambda: {"include_offresonant": False})
    fock_scan: tuple[int, ...] = (0, 1, 2, 3, 4, 5)
    samples: int = 101


@dataclass(frozen=True)
class LevelsConfig:
    B_min: float = 0.0
    B_max: float = 20e-3
    n: int = 41


@dataclass(frozen=True)
class FieldsConfig:
    drive: str = "gradient"
    current: float = 1.0
    x_min: float = 10e-6
    x_max: float = 50e-6
    nx: int = 41
    z_min: float = -20e-6
    z_max: float = 20e-6
    nz: int = 41


@dataclass(frozen=True)
class RunConfig:
    species: SpeciesConfig = SpeciesConfig()
    qubit: QubitConfig = QubitConfig()
    geometry: GeometryConfig = GeometryConfig()
    chain: ChainSection = ChainSection()
    gate: GateConfig = GateConfig()
    carrier: CarrierConfig = CarrierConfig()
    errors: ErrorsConfig = ErrorsConfig()
    evolve: EvolveConfig = EvolveConfig()
    levels: LevelsConfig = LevelsConfig()
    fields: FieldsConfig = FieldsConfig()


def _check_keys(section: str, table: dict, allowed: set[str]) -> None:
    if not isinstance(table, dict):
        raise ConfigError(f"[{section}] must be a table")
    unknown = set(table) - allowed
    if unknown:
        raise ConfigError(f"[{section}] unknown keys: {sorted(unknown)}; allowed: {sorted(allowed)}")


def _q(section, key, value, dim):
    try:
        return parse_quantity(value, dim)
    except UnitError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from None


def _w(section, key, value):
    try:
        return angular(value)
    except UnitError as exc:
        raise ConfigError(f"[{section}] {key}: {exc}") from None


def _label(section, key, value):
    if not (isinstance(value, list) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value)):
        raise ConfigError(f"[{section}] {key} must be [F, mF]")
    return (value[0], value[1])


def _int(section, key, value, lo=None):
    if not isinstance(value, int) or isinstance(value, bool):
        raise ConfigError(f"[{section}] {key} must be an integer")
    if lo is not None and value < lo:
        raise ConfigError(f"[{section}] {key} must be >= {lo}")
    return value


def _species(t):
    _check_keys("species", t, {"name", "mass_u", "hyperfine_A", "gJ", "gI"})
    from .constants import CONSTANTS, SPECIES

    name = t.get("name", "9Be+")
    if name not in SPECIES:
        raise ConfigError(f"[species] unknown species {name!r}; known: {sorted(SPECIES)}")
    ov = {}
    if "mass_u" in t:
        ov["mass"] = float(t["mass_u"]) * CONSTANTS.atomic_mass
    if "hyperfine_A" in t:
        ov["hyperfine_constant"] = _q("species", "hyperfine_A", t["hyperfine_A"], "frequency")
    for k in ("gJ", "gI"):
        if k in t:
            ov[k] = float(t[k])
    return SpeciesConfig(name, ov)


def _qubit(t):
    _check_keys("qubit", t, {"up", "down", "bias"})
    d = QubitConfig()
    bias = t.get("bias", "auto")
    return QubitConfig(
        up=_label("qubit", "up", t["up"]) if "up" in t else d.up,
        down=_label("qubit", "down", t["down"]) if "down" in t else d.down,
        bias=None if bias == "auto" else _q("qubit", "bias", bias, "field"),
    )


def _geometry(t):
    _check_keys("geometry", t, {"layout", "d0", "conductors"})
    layout = t.get("layout", "five_wire")
    if layout == "five_wire":
        if "conductors" in t:
            raise ConfigError("[geometry] conductors are only allowed with layout = 'custom'")
        return GeometryConfig("five_wire", _q("geometry", "d0", t.get("d0", "30 um"), "length"))
    if layout != "custom":
        raise ConfigError(f"[geometry] layout must be 'five_wire' or 'custom', got {layout!r}")
    conds = []
    for c in t.get("conductors", []):
        _check_keys("geometry.conductors", c, {"name", "kind", "z1", "z2", "z", "x", "current"})
        kind = c.get("kind", "strip")
        if kind == "wire":
            z = _q("geometry.conductors", "z", c.get("z", "0 um"), "length")
            z1 = z2 = z
        elif kind == "strip":
            z1 = _q("geometry.conductors", "z1", c["z1"], "length")
            z2 = _q("geometry.conductors", "z2", c["z2"], "length")
        else:
            raise ConfigError(f"[geometry.conductors] kind must be 'wire' or 'strip', got {kind!r}")
        conds.append(ConductorConfig(str(c["name"]), kind, z1, z2,
                                     _q("geometry.conductors", "x", c.get("x", "0 um"), "length"),
                                     _q("geometry.conductors", "current", c.get("current", "0 A"), "current")))
    if not conds:
        raise ConfigError("[geometry] custom layout needs at least one conductor")
    return GeometryConfig("custom", float("nan"), tuple(conds))


def _chain(t):
    _check_keys("chain", t, {"N", "axial", "mode_frequency", "mode_kind", "radial_x", "radial_z"})
    kind = t.get("mode_kind", "rocking")
    if kind not in ("com", "rocking"):
        raise ConfigError(f"[chain] mode_kind must be 'com' or 'rocking', got {kind!r}")
    return ChainSection(
        N=_int("chain", "N", t.get("N", 2), 1),
        omega_axial=_w("chain", "axial", t.get("axial", "1 MHz")),
        mode_frequency=_w("chain", "mode_frequency", t.get("mode_frequency", "5 MHz")),
        mode_kind=kind,
        omega_x=_w("chain", "radial_x", t["radial_x"]) if "radial_x" in t else None,
        omega_z=_w("chain", "radial_z", t["radial_z"]) if "radial_z" in t else None,
    )


def _gate(t):
    _check_keys("gate", t, {"kind", "mode_axis", "tau", "delta", "current", "phase_b", "phase_r", "up", "down"})
    kind = t.get("kind", "phiphi")
    if kind not in ("zz", "phiphi"):
        raise ConfigError(f"[gate] kind must be 'zz' or 'phiphi', got {kind!r}")
    given = [k for k in ("tau", "delta", "current") if k in t]
    if len(given) > 1:
        raise ConfigError(f"[gate] conflicting gate specification: {' and '.join(given)} given; specify exactly one of tau, delta, current")
    if not given:
        raise ConfigError("[gate] specify exactly one of tau, delta, current")
    axis = t.get("mode_axis")
    if axis is not None and axis not in ("x", "z"):
        raise ConfigError(f"[gate] mode_axis must be 'x' or 'z', got {axis!r}")
    return GateConfig(
        kind=kind,
        mode_axis=axis,
        tau=_q("gate", "tau", t["tau"], "time") if "tau" in t else None,
        delta=_w("gate", "delta", t["delta"]) if "delta" in t else None,
        current=_q("gate", "current", t["current"], "current") if "current" in t else None,
        phase_b=_q("gate", "phase_b", t.get("phase_b", "0 rad"), "angle"),
        phase_r=_q("gate", "phase_r", t.get("phase_r", "0 rad"), "angle"),
        up=_label("gate", "up", t["up"]) if "up" in t else None,
        down=_label("gate", "down", t["down"]) if "down" in t else None,
    )


def _carrier(t):
    _check_keys("carrier", t, {"current"})
    return CarrierConfig(_q("carrier", "current", t.get("current", "15 mA"), "current"))


def _errors(t):
    _check_keys("errors", t, {"displacement"})
    disp = t.get("displacement", ["0 nm", "0 nm", "200 nm"])
    if not (isinstance(disp, list) and len(disp) == 3):
        raise ConfigError("[errors] displacement must be a list of three lengths (x, y, z)")
    return ErrorsConfig(tuple(_q("errors", "displacement", v, "length") for v in disp))


_FLAG_NAMES = {"include_carrier_x", "include_carrier_z", "include_sideband_x", "include_sideband_z",
               "include_offresonant"}


def _evolve(t):
    _check_keys("evolve", t, {"n_max", "tol", "flags", "fock_scan", "samples"})
    flags = t.get("flags", {"include_offresonant": False})
    _check_keys("evolve.flags", flags, _FLAG_NAMES)
    if not all(isinstance(v, bool) for v in flags.values()):
        raise ConfigError("[evolve.flags] values must be booleans")
    tol = t.get("tol", 1e-10)
    if not (isinstance(tol, float) and 0 < tol < 1e-3):
        raise ConfigError("[evolve] tol must be a float in (0, 1e-3)")
    scan = t.get("fock_scan", [0, 1, 2, 3, 4, 5])
    return EvolveConfig(
        n_max=_int("evolve", "n_max", t.get("n_max", 20), 4),
        tol=tol,
        flags=dict(flags),
        fock_scan=tuple(_int("evolve", "fock_scan", n, 0) for n in scan),
        samples=_int("evolve", "samples", t.get("samples", 101), 2),
    )


def _levels(t):
    _check_keys("levels", t, {"B_min", "B_max", "n"})
    out = LevelsConfig(
        _q("levels", "B_min", t.get("B_min", "0 mT"), "field"),
        _q("levels", "B_max", t.get("B_max", "20 mT"), "field"),
        _int("levels", "n", t.get("n", 41), 2),
    )
    if not 0 <= out.B_min < out.B_max:
        raise ConfigError("[levels] need 0 <= B_min < B_max")
    return out


def _fields(t):
    _check_keys("fields", t, {"drive", "current", "x_min", "x_max", "nx", "z_min", "z_max", "nz"})
    drive = t.get("drive", "gradient")
    if drive not in ("gradient", "rotation", "layout"):
        raise ConfigError(f"[fields] drive must be gradient, rotation or layout, got {drive!r}")
    d = FieldsConfig()
    return FieldsConfig(
        drive=drive,
        current=_q("fields", "current", t.get("current", "1 A"), "current"),
        x_min=_q("fields", "x_min", t["x_min"], "length") if "x_min" in t else d.x_min,
        x_max=_q("fields", "x_max", t["x_max"], "length") if "x_max" in t else d.x_max,
        nx=_int("fields", "nx", t.get("nx", d.nx), 2),
        z_min=_q("fields", "z_min", t["z_min"], "length") if "z_min" in t else d.z_min,
        z_max=_q("fields", "z_max", t["z_max"], "length") if "z_max" in t else d.z_max,
        nz=_int("fields", "nz", t.get("nz", d.nz), 2),
    )


_SECTIONS = {
    "species": _species, "qubit": _qubit, "geometry": _geometry, "chain": _chain, "gate": _gate,
    "carrier": _carrier, "errors": _errors, "evolve": _evolve, "levels": _levels, "fields": _fields,
}


def parse_config(data: dict) -> RunConfig:
    _check_keys("top level", data, set(_SECTIONS))
    kwargs = {name: parser(data[name]) for name, parser in _SECTIONS.items() if name in data}
    return RunConfig(**kwargs)


def load_config(path: str | Path | None = None) -> RunConfig:
    """Parse a config file; ``None`` loads the shipped default."""
    if path is None:
        text = default_config_text()
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path or 'default config'}: {exc}") from None
    return parse_config(data)


def default_config_text() -> str:
    return resources.files("maggates.data").joinpath("default.toml").read_text()
