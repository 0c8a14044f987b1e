"""Unit-suffixed scalars such as ``"30 um"`` or ``"5 MHz"``, converted to SI."""
from __future__ import annotations

import math
import re

# unit -> (dimension, SI factor)
UNITS: dict[str, tuple[str, float]] = {
    "A": ("current", 1.0),
    "mA": ("current", 1e-3),
    "T": ("field", 1.0),
    "mT": ("field", 1e-3),
    "uT": ("field", 1e-6),
    "m": ("length", 1.0),
    "um": ("length", 1e-6),
    "nm": ("length", 1e-9),
    "Hz": ("frequency", 1.0),
    "kHz": ("frequency", 1e3),
    "MHz": ("frequency", 1e6),
    "GHz": ("frequency", 1e9),
    "s": ("time", 1.0),
    "us": ("time", 1e-6),
    "ns": ("time", 1e-9),
    "rad": ("angle", 1.0),
    "mrad": ("angle", 1e-3),
    "V": ("voltage", 1.0),
    "uV": ("voltage", 1e-6),
}

_PATTERN = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z]+)\s*$")


class UnitError(ValueError):
    pass


def parse_quantity(text, dimension: str) -> float:
    """SI value of ``text``; raises :class:`UnitError` on a missing or mismatched unit.

    Frequencies are returned in Hz (cycles per second), not rad/s.
    """
    if not isinstance(text, str):
        raise UnitError(f"expected a value with a {dimension} unit, got bare {text!r}")
    m = _PATTERN.match(text)
    if m is None:
        raise UnitError(f"cannot parse {text!r}; expected '<number> <unit>'")
    value, unit = float(m.group(1)), m.group(2)
    if unit not in UNITS:
        raise UnitError(f"unknown unit {unit!r} in {text!r}")
    dim, factor = UNITS[unit]
    if dim != dimension:
        raise UnitError(f"{text!r} is a {dim}, expected a {dimension}")
    return value * factor


def angular(text) -> float:
    """Angular frequency (rad/s) from a frequency string."""
    return 2 * math.pi * parse_quantity(text, "frequency")
