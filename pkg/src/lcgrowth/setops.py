"""Compact sets in each model: measures, translates, inverses, product sets, Delta extrema."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Iterable

from . import grid, padic
from .errors import ModelError, NotApplicableError, SpecError
from .groups import AffineGrid, FiniteGroup, PAdicAffine, ProductGroup, _iter_bits
from .values import Interval

LEFT, RIGHT = "left", "right"


class FiniteSet:
    """Subset of a finite group as a bitmask."""

    __slots__ = ("mask", "n")

    def __init__(self, n: int, elements: Iterable[int] = (), mask: int | None = None):
        self.n = n
        if mask is None:
            mask = 0
            for x in elements:
                if not 0 <= x < n:
                    raise SpecError(f"element {x} outside group of order {n}")
                mask |= 1 << x
        self.mask = mask

    def __repr__(self):
        return f"FiniteSet({self.elements()})"

    def __eq__(self, other):
        return isinstance(other, FiniteSet) and self.mask == other.mask and self.n == other.n

    def __hash__(self):
        return hash((self.n, self.mask))

    def __bool__(self):
        return self.mask != 0

    def __len__(self):
        return self.mask.bit_count()

    def __iter__(self):
        return _iter_bits(self.mask)

    def __contains__(self, x):
        return bool(self.mask >> x & 1)

    def elements(self) -> list[int]:
        return list(_iter_bits(self.mask))

    def _new(self, mask):
        return FiniteSet(self.n, mask=mask)

    def __or__(self, other):
        return self._new(self.mask | other.mask)

    def __and__(self, other):
        return self._new(self.mask & other.mask)

    def __sub__(self, other):
        return self._new(self.mask & ~other.mask)

    def __le__(self, other):
        return self.mask & ~other.mask == 0


class BoxSet:
    """Finite disjoint union of product boxes (one exact factor set per coordinate)."""

    __slots__ = ("boxes",)

    def __init__(self, boxes: Iterable[tuple] = ()):
        disjoint: list[tuple] = []
        for box in boxes:
            if not all(box):
                continue
            pieces = [tuple(box)]
            for other in disjoint:
                pieces = [q for pc in pieces for q in _box_sub(pc, other)]
            disjoint.extend(pieces)
        self.boxes = tuple(disjoint)

    def __repr__(self):
        return f"BoxSet({list(self.boxes)})"

    def __bool__(self):
        return bool(self.boxes)

    def __or__(self, other):
        return BoxSet(self.boxes + other.boxes)

    def __and__(self, other):
        out = []
        for a in self.boxes:
            for b in other.boxes:
                c = tuple(x & y for x, y in zip(a, b))
                if all(c):
                    out.append(c)
        return BoxSet(out)

    def __sub__(self, other):
        pieces = list(self.boxes)
        for b in other.boxes:
            pieces = [q for pc in pieces for q in _box_sub(pc, b)]
        obj = BoxSet.__new__(BoxSet)
        obj.boxes = tuple(pieces)
        return obj

    def __le__(self, other):
        return not (self - other)

    def __eq__(self, other):
        return isinstance(other, BoxSet) and self <= other and other <= self

    __hash__ = None


def _box_sub(b: tuple, c: tuple) -> list[tuple]:
    inter = [x & y for x, y in zip(b, c)]
    if not all(inter):
        return [b]
    out = []
    for i in range(len(b)):
        rest = b[i] - c[i]
        if rest:
            out.append(tuple(inter[:i]) + (rest,) + tuple(b[i + 1:]))
    return out


GroupSet = FiniteSet | padic.BallSet | grid.CellSet | BoxSet


@dataclass(frozen=True)
class SetBracket:
    """Inner/outer pair; identical objects in exact models."""

    inner: Any
    outer: Any

    @property
    def exact(self) -> bool:
        return self.inner is self.outer or self.inner == self.outer


# measures

def measure(G, S, side: str = LEFT):
    """Left (mu) or right (nu) Haar measure of a set or a bracket."""
    if side not in (LEFT, RIGHT):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    if isinstance(S, SetBracket):
        if S.exact:
            return measure(G, S.outer, side)
        lo = Interval.coerce(measure(G, S.inner, side))
        hi = Interval.coerce(measure(G, S.outer, side))
        return Interval(lo.lo, hi.hi)
    if isinstance(G, FiniteGroup):
        return Fraction(len(S))
    if isinstance(G, PAdicAffine):
        total = Fraction(0)
        for b in S.balls:
            w = G.pw(-b.depth)
            total += w * G.pw(b.k) if side == LEFT else w
        return total
    if isinstance(G, AffineGrid):
        return S.left_measure() if side == LEFT else S.right_measure()
    if isinstance(G, ProductGroup):
        total = Fraction(0)
        for box in S.boxes:
            term = Fraction(1)
            for f, part in zip(G.factors, box):
                term = term * measure(f, part, side)
            total = total + term
        return total
    raise NotApplicableError(f"no measure for {G!r}")


def mu(G, S):
    return measure(G, S, LEFT)


def nu(G, S):
    return measure(G, S, RIGHT)


# group-dependent set operations

def _require_exact_factors(G: ProductGroup):
    if not G.is_exact:
        raise NotApplicableError("product models support exact factors only")


def singleton(G, x):
    """The compact set {x} (a point in finite models, a finest ball in p-adic ones)."""
    x = G.check(x)
    if isinstance(G, FiniteGroup):
        return FiniteSet(G.n, [x])
    if isinstance(G, PAdicAffine):
        return padic.BallSet(G.p, [padic.check_ball(G, padic.make_ball(G.p, x[0], x[1], G.d_window[1]))])
    if isinstance(G, ProductGroup):
        return BoxSet([tuple(singleton(f, c) for f, c in zip(G.factors, x))])
    if isinstance(G, AffineGrid):
        return grid.CellSet.from_cells(G.h, [x])
    raise NotApplicableError(f"no singleton for {G!r}")


def translate(G, S, g, side: str = LEFT):
    """``g S`` (left) or ``S g`` (right). Grid models return a SetBracket."""
    g = G.check(g)
    if isinstance(G, FiniteGroup):
        m = G.left_mask(g, S.mask) if side == LEFT else G.right_mask(S.mask, g)
        return FiniteSet(G.n, mask=m)
    if isinstance(G, PAdicAffine):
        if side == LEFT:
            return padic.BallSet(G.p, [padic.ball_left(G, g, b) for b in S.balls])
        return padic.BallSet(G.p, [padic.ball_right(G, b, g) for b in S.balls])
    if isinstance(G, AffineGrid):
        pt = grid.point_shape(G, g)
        sh = grid.cell_shape(S)
        inner, outer = grid.product_bracket(G, pt, sh) if side == LEFT else grid.product_bracket(G, sh, pt)
        return SetBracket(inner, outer)
    if isinstance(G, ProductGroup):
        _require_exact_factors(G)
        return BoxSet(tuple(translate(f, part, c, side) for f, part, c in zip(G.factors, box, g))
                      for box in S.boxes)
    raise NotApplicableError(f"no translate for {G!r}")


def inverse_set(G, S):
    if isinstance(G, FiniteGroup):
        return FiniteSet(G.n, mask=G.inverse_mask(S.mask))
    if isinstance(G, PAdicAffine):
        return padic.BallSet(G.p, [padic.ball_inv(G, b) for b in S.balls])
    if isinstance(G, AffineGrid):
        return SetBracket(*grid.inverse_bracket(G, S))
    if isinstance(G, ProductGroup):
        _require_exact_factors(G)
        return BoxSet(tuple(inverse_set(f, part) for f, part in zip(G.factors, box)) for box in S.boxes)
    raise NotApplicableError(f"no inverse for {G!r}")


def product(G, S, T):
    """Exact product set ``S T`` for exact models."""
    if isinstance(G, FiniteGroup):
        return FiniteSet(G.n, mask=G.product_mask(S.mask, T.mask))
    if isinstance(G, PAdicAffine):
        return padic.BallSet(G.p, [padic.ball_mul(G, a, b) for a in S.balls for b in T.balls])
    if isinstance(G, ProductGroup):
        _require_exact_factors(G)
        return BoxSet(tuple(product(f, x, y) for f, x, y in zip(G.factors, a, b))
                      for a in S.boxes for b in T.boxes)
    raise NotApplicableError(f"exact product not available for {G!r}")


def product_set(G, S, T) -> SetBracket:
    if not S or not T:
        raise ModelError("product_set needs nonempty sets")
    if isinstance(G, AffineGrid):
        return SetBracket(*grid.product_bracket(G, grid.cell_shape(S), grid.cell_shape(T)))
    P = product(G, S, T)
    return SetBracket(P, P)


def delta_extrema(G, S):
    """(sup Delta, inf Delta, argmax element, argmin element) over a nonempty set."""
    if not S:
        raise ModelError("delta_extrema of an empty set")
    if isinstance(G, FiniteGroup):
        x = min(S)
        return Fraction(1), Fraction(1), x, x
    if isinstance(G, PAdicAffine):
        balls = S.balls
        k_max = max(b.k for b in balls)
        k_min = min(b.k for b in balls)
        b_max = min(b for b in balls if b.k == k_max)
        b_min = min(b for b in balls if b.k == k_min)
        return G.pw(k_max), G.pw(k_min), (k_max, b_max.center), (k_min, b_min.center)
    if isinstance(G, AffineGrid):
        i_min, i_max = min(S.columns), max(S.columns)
        h = G.h
        arg_sup = (i_min, S.columns[i_min][0][0])
        # inf of e^{-u} sits on the right edge of the last column, a lattice point of that closed cell
        arg_inf = (i_max + 1, S.columns[i_max][0][0])
        return (Interval.around(math.exp(-i_min * h)), Interval.around(math.exp(-(i_max + 1) * h)),
                arg_sup, arg_inf)
    if isinstance(G, ProductGroup):
        best_sup = best_inf = None
        for box in S.boxes:
            parts = [delta_extrema(f, part) for f, part in zip(G.factors, box)]
            sup = math.prod((p[0] for p in parts), start=Fraction(1))
            inf = math.prod((p[1] for p in parts), start=Fraction(1))
            if best_sup is None or sup > best_sup[0]:
                best_sup = (sup, tuple(p[2] for p in parts))
            if best_inf is None or inf < best_inf[0]:
                best_inf = (inf, tuple(p[3] for p in parts))
        return best_sup[0], best_inf[0], best_sup[1], best_inf[1]
    raise NotApplicableError(f"no delta extrema for {G!r}")


def full_set(G):
    if isinstance(G, FiniteGroup):
        return FiniteSet(G.n, mask=G.full_mask)
    raise NotApplicableError("only finite models have a compact carrier")


# JSON surface

def parse_set(G, spec: dict):
    if not isinstance(spec, dict):
        raise SpecError("set spec must be an object")
    try:
        if isinstance(G, FiniteGroup):
            elems = [G.labels.index(e) if isinstance(e, str) else int(e) for e in spec["elements"]]
            return FiniteSet(G.n, elems)
        if isinstance(G, PAdicAffine):
            return padic.ballset(G, [(b["k"], b.get("center", 0), b["d"]) for b in spec["balls"]])
        if isinstance(G, AffineGrid):
            if "cells" in spec:
                S = grid.CellSet.from_cells(G.h, [tuple(c) for c in spec["cells"]])
            else:
                boxes = spec["boxes"] if "boxes" in spec else [spec["box"]]
                S = grid.CellSet(G.h)
                for bx in boxes:
                    S = S | grid.CellSet.box(G.h, tuple(bx["u"]), tuple(bx["b"]))
            grid._check_window(G, S)
            return S
        if isinstance(G, ProductGroup):
            return BoxSet(tuple(parse_set(f, part) for f, part in zip(G.factors, box))
                          for box in spec["tuple_sets"])
    except (KeyError, ValueError, TypeError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad set spec: {exc!r}") from None
    raise NotApplicableError(f"no set spec for {G!r}")


def set_to_json(G, S):
    if isinstance(S, SetBracket):
        if S.exact:
            return set_to_json(G, S.outer)
        return {"inner": set_to_json(G, S.inner), "outer": set_to_json(G, S.outer)}
    if isinstance(G, FiniteGroup):
        return {"elements": S.elements()}
    if isinstance(G, PAdicAffine):
        return {"balls": [{"k": b.k, "center": f"{b.center.numerator}/{b.center.denominator}",
                           "d": b.depth} for b in S.balls]}
    if isinstance(G, AffineGrid):
        return {"columns": {str(i): [list(r) for r in runs] for i, runs in S.columns.items()}}
    if isinstance(G, ProductGroup):
        return {"tuple_sets": [[set_to_json(f, part) for f, part in zip(G.factors, box)]
                               for box in S.boxes]}
    raise NotApplicableError(f"no set serialization for {G!r}")


def element_to_json(G, x):
    if isinstance(G, FiniteGroup):
        return int(x)
    if isinstance(G, PAdicAffine):
        return [x[0], f"{x[1].numerator}/{x[1].denominator}"]
    if isinstance(G, AffineGrid):
        return [x[0], x[1]]
    if isinstance(G, ProductGroup):
        return [element_to_json(f, c) for f, c in zip(G.factors, x)]
    raise NotApplicableError(f"no element serialization for {G!r}")


def parse_element(G, obj):
    if isinstance(G, FiniteGroup):
        return G.check(G.labels.index(obj) if isinstance(obj, str) else int(obj))
    if isinstance(G, PAdicAffine):
        return G.check((int(obj[0]), padic.parse_center(obj[1])))
    if isinstance(G, AffineGrid):
        return G.check((int(obj[0]), int(obj[1])))
    if isinstance(G, ProductGroup):
        return tuple(parse_element(f, c) for f, c in zip(G.factors, obj))
    raise NotApplicableError(f"no element parser for {G!r}")
