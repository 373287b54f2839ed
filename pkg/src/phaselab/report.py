"""Deterministic CSV and summary writers.

Output bytes must be a pure function of the data: floats are rendered with
repr (shortest round-trip form), no timestamps or environment detail ever
enters a file, and column order is fixed by the caller.  The acceptance
suite diffs whole files across runs, so any nondeterminism here is a bug.
"""

from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = ["format_cell", "render_csv", "write_csv", "write_lines"]


def format_cell(value: object) -> str:
    """Render one CSV cell; floats via repr so equal values give equal bytes."""
    if isinstance(value, str):
        if "," in value or "\n" in value:
            raise ValueError(f"cell {value!r} would break the CSV layout")
        return value
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, complex):
        raise TypeError("split complex values into _re/_im columns")
    raise TypeError(f"cannot format {type(value).__name__} into a CSV cell")


def render_csv(
    columns: Mapping[str, Sequence],
    header: Iterable[tuple[str, object]] = (),
) -> str:
    """CSV text: '# key = value' provenance lines, column names, data rows."""
    lines = [f"# {key} = {format_cell(value)}" for key, value in header]
    names = list(columns)
    if not names:
        raise ValueError("a CSV needs at least one column")
    lengths = {len(columns[n]) for n in names}
    if len(lengths) != 1:
        raise ValueError(f"columns have unequal lengths: { {n: len(columns[n]) for n in names} }")
    lines.append(",".join(names))
    for i in range(lengths.pop()):
        lines.append(",".join(format_cell(columns[n][i]) for n in names))
    return "\n".join(lines) + "\n"


def write_csv(
    path: str | Path,
    columns: Mapping[str, Sequence],
    header: Iterable[tuple[str, object]] = (),
) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_csv(columns, header), encoding="utf-8")
    return path


def write_lines(path: str | Path, lines: Iterable[str]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path
