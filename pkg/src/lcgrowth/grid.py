"""Cell sets and sound product brackets in the affine chart.

A ``CellSet`` is a finite union of closed lattice cells, stored per u-column
as merged half-open runs of b-indices.  Products, translates and inverses of
cell sets are not cell sets; they are returned as an (inner, outer) pair with
``inner <= true set <= outer`` up to null boundaries.

Bracket construction.  For a pair of source columns with u-index ranges
``[a1, a2]`` and ``[c1, c2]`` (a point has ``a1 == a2``) and a target column
``t`` the product ``(u_x + u_y, b_x + e^{u_x} b_y)`` is bounded as follows:

* outer: ``u_x`` ranges over ``[max(a1, t - c2), min(a2, t + 1 - c1)]``, so
  ``b`` lies in ``I_x + [e^{lo}, e^{hi}] * I_y``;
* inner: for each ``u`` in the target column pick ``u_x = clamp(s, F(u))``
  with ``F(u) = [max(a1, u - c2), min(a2, u - c1)]``; the chosen values sweep
  ``[w1, w2]`` and every ``b`` in the intersection over that sweep is hit.
"""

from __future__ import annotations

import math
from collections import defaultdict
from typing import Iterable

from .errors import WindowError
from .groups import AffineGrid
from .values import Interval

EPS = 1e-9

Runs = tuple[tuple[int, int], ...]


def merge_runs(runs: Iterable[tuple[int, int]]) -> Runs:
    out: list[list[int]] = []
    for a, b in sorted(r for r in runs if r[0] < r[1]):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return tuple((a, b) for a, b in out)


def _intersect_runs(r1: Runs, r2: Runs) -> Runs:
    out = []
    i = j = 0
    while i < len(r1) and j < len(r2):
        a = max(r1[i][0], r2[j][0])
        b = min(r1[i][1], r2[j][1])
        if a < b:
            out.append((a, b))
        if r1[i][1] < r2[j][1]:
            i += 1
        else:
            j += 1
    return tuple(out)


def _subtract_runs(r1: Runs, r2: Runs) -> Runs:
    out = []
    for a, b in r1:
        cur = a
        for c, d in r2:
            if d <= cur or c >= b:
                continue
            if c > cur:
                out.append((cur, c))
            cur = max(cur, d)
        if cur < b:
            out.append((cur, b))
    return tuple(out)


class CellSet:
    """Union of closed cells; ``columns`` maps u-index to merged b-index runs."""

    __slots__ = ("h", "columns")

    def __init__(self, h: float, columns: dict[int, Iterable[tuple[int, int]]] | None = None):
        self.h = h
        cols = {}
        for i, runs in (columns or {}).items():
            merged = merge_runs(runs)
            if merged:
                cols[int(i)] = merged
        self.columns = dict(sorted(cols.items()))

    @classmethod
    def from_cells(cls, h: float, cells: Iterable[tuple[int, int]]) -> "CellSet":
        cols = defaultdict(list)
        for i, j in cells:
            cols[i].append((j, j + 1))
        return cls(h, cols)

    @classmethod
    def box(cls, h: float, u: tuple[float, float], b: tuple[float, float]) -> "CellSet":
        """Cells tiling [u0, u1] x [b0, b1]; endpoints are snapped to the lattice."""
        i0, i1 = round(u[0] / h), round(u[1] / h)
        j0, j1 = round(b[0] / h), round(b[1] / h)
        return cls(h, {i: [(j0, j1)] for i in range(i0, i1)})

    def __repr__(self):
        return f"CellSet(h={self.h}, cells={self.count})"

    def __eq__(self, other):
        return isinstance(other, CellSet) and self.h == other.h and self.columns == other.columns

    def __hash__(self):
        return hash((self.h, tuple(self.columns.items())))

    def __bool__(self):
        return bool(self.columns)

    @property
    def count(self) -> int:
        return sum(b - a for runs in self.columns.values() for a, b in runs)

    def cells(self):
        for i, runs in self.columns.items():
            for a, b in runs:
                for j in range(a, b):
                    yield (i, j)

    def __contains__(self, cell) -> bool:
        i, j = cell
        return any(a <= j < b for a, b in self.columns.get(i, ()))

    def __or__(self, other: "CellSet") -> "CellSet":
        cols = defaultdict(list)
        for src in (self, other):
            for i, runs in src.columns.items():
                cols[i].extend(runs)
        return CellSet(self.h, cols)

    def __and__(self, other: "CellSet") -> "CellSet":
        return CellSet(self.h, {i: _intersect_runs(r, other.columns[i])
                                for i, r in self.columns.items() if i in other.columns})

    def __sub__(self, other: "CellSet") -> "CellSet":
        return CellSet(self.h, {i: _subtract_runs(r, other.columns.get(i, ()))
                                for i, r in self.columns.items()})

    def __le__(self, other: "CellSet") -> bool:
        return not (self - other)

    def refine(self) -> "CellSet":
        """The same closed set on the lattice of pitch h/2."""
        cols = {}
        for i, runs in self.columns.items():
            r = [(2 * a, 2 * b) for a, b in runs]
            cols[2 * i] = r
            cols[2 * i + 1] = r
        return CellSet(self.h / 2, cols)

    # measures: nu is flat area, mu integrates e^{-u} exactly per column
    def right_measure(self) -> Interval:
        return Interval.around(self.count * self.h * self.h)

    def left_measure(self) -> Interval:
        h = self.h
        total = 0.0
        for i, runs in self.columns.items():
            n = sum(b - a for a, b in runs)
            total += n * h * (math.exp(-i * h) - math.exp(-(i + 1) * h))
        return Interval.around(total, rel=1e-11)


# column shapes: (u-index lo, u-index hi, [(b_lo, b_hi), ...]) with real b-bounds

def cell_shape(S: CellSet):
    h = S.h
    return [(i, i + 1, [(a * h, b * h) for a, b in runs]) for i, runs in S.columns.items()]


def point_shape(G: AffineGrid, x):
    b = x[1] * G.h
    return [(x[0], x[0], [(b, b)])]


def _bounds(lo_scale: float, hi_scale: float, y1: float, y2: float):
    """Range of s*y over s in [lo_scale, hi_scale], y in [y1, y2] (s > 0)."""
    cands = (lo_scale * y1, lo_scale * y2, hi_scale * y1, hi_scale * y2)
    return min(cands), max(cands)


def product_bracket(G: AffineGrid, A, B) -> tuple[CellSet, CellSet]:
    """Inner and outer cell sets for the product of two column shapes."""
    h = G.h
    outer = defaultdict(list)
    inner = defaultdict(list)
    for a1, a2, Ix in A:
        for c1, c2, Iy in B:
            U1, U2 = a1 + c1, a2 + c2
            targets = range(U1, U2) if U2 > U1 else range(U1 - 1, U1 + 1)
            for t in targets:
                lo = max(a1, t - c2)
                hi = min(a2, t + 1 - c1)
                e_lo, e_hi = math.exp(lo * h), math.exp(hi * h)
                for x1, x2 in Ix:
                    for y1, y2 in Iy:
                        s_lo, _ = _bounds(e_lo, e_hi, y1, y1)
                        _, s_hi = _bounds(e_lo, e_hi, y2, y2)
                        outer[t].append((x1 + s_lo, x2 + s_hi))
                if not (U1 <= t and t + 1 <= U2):
                    continue
                w2 = max(a1, t + 1 - c2)
                w1 = min(w2, min(a2, t - c1))
                f1, f2 = math.exp(w1 * h), math.exp(w2 * h)
                for x1, x2 in Ix:
                    for y1, y2 in Iy:
                        lo_b = x1 + max(f1 * y1, f2 * y1)
                        hi_b = x2 + min(f1 * y2, f2 * y2)
                        if lo_b < hi_b:
                            inner[t].append((lo_b, hi_b))
    return _inner_cells(G, inner), _outer_cells(G, outer)


def inverse_bracket(G: AffineGrid, S: CellSet) -> tuple[CellSet, CellSet]:
    """(u, b) -> (-u, -e^{-u} b) applied to a cell set."""
    h = G.h
    outer = defaultdict(list)
    inner = defaultdict(list)
    for i, runs in S.columns.items():
        t = -i - 1                      # target u' in [t h, (t+1) h]
        e_lo, e_hi = math.exp(t * h), math.exp((t + 1) * h)
        for a, b in runs:
            y1, y2 = a * h, b * h
            lo1, hi1 = _bounds(e_lo, e_hi, y1, y2)
            outer[t].append((-hi1, -lo1))
            lo_b = -min(e_lo * y2, e_hi * y2)
            hi_b = -max(e_lo * y1, e_hi * y1)
            if lo_b < hi_b:
                inner[t].append((lo_b, hi_b))
    return _inner_cells(G, inner), _outer_cells(G, outer)


def _merge_real(intervals):
    out: list[list[float]] = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return out


def _outer_cells(G: AffineGrid, cols) -> CellSet:
    h = G.h
    result = {}
    for t, ivs in cols.items():
        runs = []
        for a, b in _merge_real(ivs):
            pad = EPS * max(1.0, abs(a), abs(b))
            j0 = math.floor((a - pad) / h)
            j1 = math.ceil((b + pad) / h)
            runs.append((j0, max(j1, j0 + 1)))
        result[t] = runs
    out = CellSet(h, result)
    _check_window(G, out)
    return out


def _inner_cells(G: AffineGrid, cols) -> CellSet:
    h = G.h
    result = {}
    for t, ivs in cols.items():
        runs = []
        for a, b in _merge_real(ivs):
            pad = EPS * max(1.0, abs(a), abs(b))
            j0 = math.ceil((a + pad) / h)
            j1 = math.floor((b - pad) / h)
            if j0 < j1:
                runs.append((j0, j1))
        result[t] = runs
    return CellSet(h, result)


def _check_window(G: AffineGrid, S: CellSet) -> None:
    if not S:
        return
    i_lo, i_hi = min(S.columns), max(S.columns)
    if i_lo < G.i_range[0] or i_hi > G.i_range[1]:
        raise WindowError("u-index", i_lo if i_lo < G.i_range[0] else i_hi)
    for runs in S.columns.values():
        if runs[0][0] < G.j_range[0]:
            raise WindowError("b-index", runs[0][0])
        if runs[-1][1] - 1 > G.j_range[1]:
            raise WindowError("b-index", runs[-1][1] - 1)
