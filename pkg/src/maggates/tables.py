"""Deterministic CSV output and the matching reader."""
from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence


def fmt_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int,)) and not isinstance(v, bool):
        return str(v)
    try:
        return repr(float(v))
    except (TypeError, ValueError):
        return str(v)


def write_csv(path, header: Sequence[str], rows: Sequence[Sequence]) -> Path:
    """Write rows with full float precision; no timestamps or other run-dependent content."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            if len(r) != len(header):
                raise ValueError(f"row has {len(r)} entries, header {len(header)}")
            w.writerow([fmt_value(v) for v in r])
    return path


def _parse(s: str):
    if s in ("true", "false"):
        return s == "true"
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


def read_csv(path) -> tuple[list[str], list[list]]:
    """Inverse of :func:`write_csv`: numbers come back as int/float, flags as bool."""
    with Path(path).open(newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[_parse(s) for s in row] for row in r]
    return header, rows


def format_table(header: Sequence[str], rows: Sequence[Sequence], floatfmt: str = ".6g") -> str:
    cells = [[f"{v:{floatfmt}}" if isinstance(v, float) else str(v) for v in r] for r in rows]
    widths = [max(len(h), *(len(c[i]) for c in cells)) if cells else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(header, widths)),
             "  ".join("-" * w for w in widths)]
    lines += ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    return "\n".join(lines)
