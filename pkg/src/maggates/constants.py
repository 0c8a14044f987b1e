"""Physical constants and the ion species registry.

Every module pulls hbar, mu0, muB, e and epsilon0 from :data:`CONSTANTS` so
there is exactly one place where CODATA values enter the package.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path

from scipy import constants as _codata

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class PhysicalConstants:
    hbar: float
    mu0: float
    muB: float
    elementary_charge: float
    epsilon0: float
    atomic_mass: float

    def __post_init__(self):
        for name, value in vars(self).items():
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"constant {name} must be positive and finite, got {value}")

    @property
    def h(self) -> float:
        return 2 * math.pi * self.hbar


CONSTANTS = PhysicalConstants(
    hbar=_codata.hbar,
    mu0=_codata.mu_0,
    muB=_codata.physical_constants["Bohr magneton"][0],
    elementary_charge=_codata.e,
    epsilon0=_codata.epsilon_0,
    atomic_mass=_codata.physical_constants["atomic mass constant"][0],
)


@dataclass(frozen=True)
class IonSpecies:
    """Ground-state (J = 1/2) hyperfine parameters of a singly charged ion.

    ``hyperfine_constant`` is in Hz and keeps its literature sign; ``gI`` is
    in Bohr-magneton units with ``mu = -muB (gJ J + gI I)``.
    """

    name: str
    mass: float
    nuclear_spin: float
    hyperfine_constant: float
    gJ: float
    gI: float

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"{self.name}: mass must be positive")
        two_i = 2 * self.nuclear_spin
        if two_i < 0 or abs(two_i - round(two_i)) > 1e-12:
            raise ValueError(f"{self.name}: nuclear spin must be a non-negative half-integer, got {self.nuclear_spin}")

    @property
    def electron_spin(self) -> float:
        return 0.5

    @property
    def dim(self) -> int:
        return 2 * int(round(2 * self.nuclear_spin + 1))


_REGISTRY_FIELDS = {"mass_u", "nuclear_spin", "hyperfine_A_Hz", "gJ", "gI"}


def load_registry(path: str | Path | None = None) -> dict[str, IonSpecies]:
    """Read a species registry file (TOML, one table per ion)."""
    if path is None:
        text = resources.files("maggates.data").joinpath("species.toml").read_text()
    else:
        text = Path(path).read_text()
    raw = tomllib.loads(text)
    out = {}
    for name, entry in raw.items():
        unknown = set(entry) - _REGISTRY_FIELDS
        missing = _REGISTRY_FIELDS - set(entry)
        if unknown or missing:
            raise ValueError(f"species {name!r}: unknown keys {sorted(unknown)}, missing keys {sorted(missing)}")
        out[name] = IonSpecies(
            name=name,
            mass=float(entry["mass_u"]) * CONSTANTS.atomic_mass,
            nuclear_spin=float(entry["nuclear_spin"]),
            hyperfine_constant=float(entry["hyperfine_A_Hz"]),
            gJ=float(entry["gJ"]),
            gI=float(entry["gI"]),
        )
    return out


SPECIES = load_registry()


def get_species(name: str, **overrides) -> IonSpecies:
    """Look up a registry entry, optionally overriding individual fields."""
    try:
        species = SPECIES[name]
    except KeyError:
        raise KeyError(f"unknown species {name!r}; known: {sorted(SPECIES)}") from None
    return replace(species, **overrides) if overrides else species
