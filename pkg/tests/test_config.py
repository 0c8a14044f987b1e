import math

import pytest

from maggates.config import ConfigError, load_config, parse_config
from maggates.units import UnitError, angular, parse_quantity


@pytest.mark.parametrize("text, dim, value", [
    ("15 mA", "current", 0.015),
    ("1.7 A", "current", 1.7),
    ("12 mT", "field", 0.012),
    ("30 um", "length", 3e-5),
    ("200nm", "length", 2e-7),
    ("5 MHz", "frequency", 5e6),
    ("20 us", "time", 2e-5),
    ("-1.5e-1 rad", "angle", -0.15),
])
def test_parse_quantity(text, dim, value):
    assert parse_quantity(text, dim) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("text, dim", [("30", "length"), (30.0, "length"), ("30 mA", "length"), ("3 furlong", "length")])
def test_parse_quantity_rejects(text, dim):
    with pytest.raises(UnitError):
        parse_quantity(text, dim)


def test_angular():
    assert angular("1 MHz") == pytest.approx(2 * math.pi * 1e6)


def test_default_config():
    cfg = load_config()
    assert cfg.gate.kind == "phiphi" and cfg.gate.tau == pytest.approx(20e-6)
    assert cfg.geometry.d0 == pytest.approx(30e-6)
    assert cfg.chain.mode_frequency == pytest.approx(2 * math.pi * 5e6)
    assert cfg.qubit.bias is None
    assert cfg.errors.displacement == pytest.approx((0, 0, 200e-9))


def test_gate_conflict_named():
    with pytest.raises(ConfigError, match="tau and current"):
        parse_config({"gate": {"kind": "zz", "tau": "20 us", "current": "1 A"}})
    with pytest.raises(ConfigError, match="exactly one"):
        parse_config({"gate": {"kind": "zz"}})


@pytest.mark.parametrize("data", [
    {"bogus": {}},
    {"gate": {"kind": "zz", "tau": "20 us", "colour": "red"}},
    {"evolve": {"flags": {"include_everything": True}}},
    {"geometry": {"d0": "30"}},
    {"geometry": {"layout": "six_wire"}},
    {"chain": {"mode_kind": "stretch"}},
    {"species": {"name": "Unobtainium+"}},
    {"evolve": {"n_max": 2}},
])
def test_invalid_configs(data):
    with pytest.raises(ConfigError):
        parse_config(data)


def test_custom_geometry_and_overrides(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("""
[species]
name = "9Be+"
hyperfine_A = "-625 MHz"

[qubit]
bias = "11.9 mT"

[geometry]
layout = "custom"
conductors = [
  {name = "a", kind = "strip", z1 = "-10 um", z2 = "10 um", current = "1 A"},
  {name = "w", kind = "wire", z = "25 um", x = "-2 um", current = "-0.5 A"},
]

[gate]
kind = "zz"
delta = "50 kHz"
""")
    cfg = load_config(p)
    assert cfg.species.overrides["hyperfine_constant"] == pytest.approx(-625e6)
    assert cfg.qubit.bias == pytest.approx(11.9e-3)
    assert [c.kind for c in cfg.geometry.conductors] == ["strip", "wire"]
    assert cfg.geometry.conductors[1].z1 == cfg.geometry.conductors[1].z2 == pytest.approx(25e-6)
    assert cfg.gate.delta == pytest.approx(2 * math.pi * 5e4) and cfg.gate.tau is None


def test_missing_file_and_bad_toml(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[gate\n")
    with pytest.raises(ConfigError):
        load_config(bad)
