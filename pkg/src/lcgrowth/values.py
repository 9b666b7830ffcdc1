"""Measure values: exact rationals, outward-rounded real intervals, and +inf."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

INF = math.inf


def _down(x: float) -> float:
    return math.nextafter(x, -math.inf)


def _up(x: float) -> float:
    return math.nextafter(x, math.inf)


def _lo(x) -> float:
    if isinstance(x, Fraction):
        f = float(x)
        return f if Fraction(f) <= x else _down(f)
    return float(x)


def _hi(x) -> float:
    if isinstance(x, Fraction):
        f = float(x)
        return f if Fraction(f) >= x else _up(f)
    return float(x)


@dataclass(frozen=True)
class Interval:
    """Closed real interval with outward rounding on every operation."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> "Interval":
        return cls(_lo(x), _hi(x))

    @classmethod
    def around(cls, x: float, rel: float = 1e-12) -> "Interval":
        pad = abs(x) * rel
        return cls(_down(x - pad), _up(x + pad))

    @classmethod
    def coerce(cls, x) -> "Interval":
        return x if isinstance(x, Interval) else cls.point(x)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x) -> bool:
        return self.lo <= _lo(x) and _hi(x) <= self.hi

    def hull(self, other) -> "Interval":
        o = Interval.coerce(other)
        return Interval(min(self.lo, o.lo), max(self.hi, o.hi))

    def __add__(self, other):
        o = Interval.coerce(other)
        return Interval(_down(self.lo + o.lo), _up(self.hi + o.hi))

    __radd__ = __add__

    def __neg__(self):
        return Interval(-self.hi, -self.lo)

    def __sub__(self, other):
        return self + (-Interval.coerce(other))

    def __rsub__(self, other):
        return Interval.coerce(other) + (-self)

    def __mul__(self, other):
        o = Interval.coerce(other)
        prods = [a * b for a in (self.lo, self.hi) for b in (o.lo, o.hi)
                 if not (math.isinf(a) and b == 0) and not (math.isinf(b) and a == 0)]
        if not prods:
            prods = [0.0]
        return Interval(_down(min(prods)), _up(max(prods)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = Interval.coerce(other)
        if o.lo > 0:
            return self * Interval(_down(1.0 / o.hi) if o.hi != INF else 0.0, _up(1.0 / o.lo))
        if o.hi < 0:
            return -(self / -o)
        if self.lo >= 0 and o.lo == 0 and o.hi > 0:
            # nonnegative over [0, hi]: unbounded above
            low = self.lo / o.hi if o.hi != INF else 0.0
            return Interval(_down(low), INF)
        raise ZeroDivisionError(f"interval division by {o}")

    def __rtruediv__(self, other):
        return Interval.coerce(other) / self

    def __str__(self):
        return f"[{self.lo!r}, {self.hi!r}]"


HaarValue = Union[Fraction, Interval, float]


def is_exact(v) -> bool:
    return isinstance(v, (Fraction, int)) and not isinstance(v, bool)


def upper(v) -> float:
    """Upper float bound of a value (exact, interval, or inf)."""
    if isinstance(v, Interval):
        return v.hi
    return _hi(v)


def lower(v) -> float:
    if isinstance(v, Interval):
        return v.lo
    return _lo(v)


def leq(a, b) -> bool | None:
    """Three-valued ``a <= b``; None when brackets overlap."""
    if not isinstance(a, Interval) and not isinstance(b, Interval):
        return a <= b
    if upper(a) <= lower(b):
        return True
    if lower(a) > upper(b):
        return False
    return None


def vmin(*vals):
    """Minimum that keeps exactness where possible and is interval-aware."""
    finite = [v for v in vals if not (isinstance(v, float) and math.isinf(v))]
    if not finite:
        return INF
    if all(not isinstance(v, Interval) for v in finite):
        return min(finite)
    ivs = [Interval.coerce(v) for v in finite]
    return Interval(min(i.lo for i in ivs), min(i.hi for i in ivs))


def to_json(v):
    """Serialize a value losslessly: rationals as "num/den", intervals as decimal strings."""
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, int):
        return f"{v}/1"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    if isinstance(v, Interval):
        return [_fmt(v.lo), _fmt(v.hi)]
    if isinstance(v, float):
        return _fmt(v)
    raise TypeError(f"not a measure value: {v!r}")


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def from_json(obj):
    if isinstance(obj, list):
        return Interval(float(obj[0]), float(obj[1]))
    if obj == "inf":
        return INF
    if isinstance(obj, str) and "/" in obj:
        return Fraction(obj)
    if isinstance(obj, str):
        return float(obj)
    return obj
