"""Exact rank over Q for sparse rational matrices.

The elimination kernel comes from the compiled extension when it is built
and importable, and from :mod:`wittenfact._rank_py` otherwise.  Setting
``WITTENFACT_PURE_PYTHON=1`` forces the fallback.  ``BACKEND`` names the
kernel in use.
"""
from __future__ import annotations

import os
from fractions import Fraction
from math import lcm
from typing import Iterable, Mapping

from . import _rank_py

_compiled = None
if os.environ.get("WITTENFACT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _rank as _compiled  # type: ignore[attr-defined]
    except ImportError:
        _compiled = None

BACKEND = "compiled" if _compiled is not None else "python"


def integer_rows(rows: Iterable[Mapping[int, object]]) -> list[list[tuple[int, int]]]:
    """Scale each rational row by the lcm of its denominators; rank is unchanged."""
    out = []
    for row in rows:
        items = sorted((c, Fraction(v)) for c, v in row.items() if v)
        if not items:
            continue
        den = 1
        for _, v in items:
            den = lcm(den, v.denominator)
        out.append([(c, int(v * den)) for c, v in items])
    return out


def rank_python(int_rows) -> int:
    return _rank_py.rank_int_rows(int_rows)


def rank_compiled(int_rows, ncols: int) -> int:
    """Compiled kernel with big-integer fallback on int64 overflow."""
    if _compiled is None:
        return rank_python(int_rows)
    r = _compiled.rank_int_rows(int_rows, ncols)
    if r < 0:
        return rank_python(int_rows)
    return r


def rank(rows: Iterable[Mapping[int, object]], ncols: int | None = None) -> int:
    """Rank of a sparse rational matrix given as ``{column: value}`` rows."""
    int_rows = integer_rows(rows)
    if not int_rows:
        return 0
    if ncols is None:
        ncols = 1 + max(r[-1][0] for r in int_rows)
    if _compiled is not None:
        return rank_compiled(int_rows, ncols)
    return rank_python(int_rows)
