"""Computable locally compact group models.

Four models are provided:

* ``FiniteGroup``: a Cayley table with counting measure (unimodular).
* ``AffineGrid``: the ax+b group in chart coordinates ``(u, b)`` with
  ``u = log a``, discretized to a lattice of pitch ``h``.  Right Haar measure
  is the flat area ``du db``; left Haar measure is ``e^{-u} du db``.
* ``PAdicAffine``: ``Q_p`` semidirect ``Z`` with law
  ``(k, b)(k', b') = (k + k', b + p^k b')`` on a bounded window.
* ``ProductGroup``: direct product of the above.

Modular function convention everywhere: ``mu(X x) = modular(x) * mu(X)``.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from .errors import GroupAxiomError, ModelError, SpecError, WindowError
from .values import INF

BELOW, ON, ABOVE = "below", "on", "above"


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, math.isqrt(p) + 1))


def valuation(x: Fraction | int, p: int) -> float:
    """p-adic valuation of a rational; +inf for zero."""
    x = Fraction(x)
    if x == 0:
        return INF
    v = 0
    num, den = x.numerator, x.denominator
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def _iter_bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class FiniteGroup:
    """Finite group given by a multiplication table; elements are indices."""

    kind = "finite"
    is_exact = True

    def __init__(self, table, name: str = "table", labels: Sequence[str] | None = None,
                 spec: dict | None = None):
        T = _validate_table(table)
        n = T.shape[0]
        self.n = n
        self.name = name
        self.table = T
        self.table.setflags(write=False)
        self._rows = [tuple(int(v) for v in row) for row in T]
        self.identity = int(np.flatnonzero((T == np.arange(n)).all(axis=1))[0])
        inv = [0] * n
        for x in range(n):
            inv[x] = self._rows[x].index(self.identity)
        self._inv = tuple(inv)
        self.labels = list(labels) if labels is not None else [str(i) for i in range(n)]
        self.spec = spec if spec is not None else {"kind": "table", "table": T.tolist()}

    def __repr__(self):
        return f"FiniteGroup({self.name}, n={self.n})"

    # element level
    def contains(self, x) -> bool:
        return isinstance(x, (int, np.integer)) and 0 <= x < self.n

    def check(self, x) -> int:
        if not self.contains(x):
            raise WindowError("element", x)
        return int(x)

    def mul(self, x: int, y: int) -> int:
        return self._rows[x][y]

    def inv(self, x: int) -> int:
        return self._inv[x]

    def modular(self, x) -> Fraction:
        return Fraction(1)

    def region(self, x) -> str:
        return ON

    def elements(self) -> range:
        return range(self.n)

    @property
    def is_unimodular(self) -> bool:
        return True

    @property
    def total_measure(self) -> Fraction:
        return Fraction(self.n)

    @cached_property
    def is_abelian(self) -> bool:
        return bool((self.table == self.table.T).all())

    @property
    def full_mask(self) -> int:
        return (1 << self.n) - 1

    # bit-parallel translation tables: 8-bit chunks of the operand mask
    @cached_property
    def _left_chunks(self):
        return self._chunk_tables(lambda x, y: self._rows[x][y])

    @cached_property
    def _right_chunks(self):
        return self._chunk_tables(lambda x, y: self._rows[y][x])

    def _chunk_tables(self, op):
        n_chunks = (self.n + 7) // 8
        tables = []
        for x in range(self.n):
            per_x = []
            for c in range(n_chunks):
                bits = [1 << op(x, 8 * c + b) if 8 * c + b < self.n else 0 for b in range(8)]
                row = [0] * 256
                for v in range(1, 256):
                    low = v & -v
                    row[v] = row[v ^ low] | bits[low.bit_length() - 1]
                per_x.append(row)
            tables.append(per_x)
        return tables

    def left_mask(self, x: int, mask: int) -> int:
        """Mask of x*S."""
        out = 0
        c = 0
        rows = self._left_chunks[x]
        while mask:
            out |= rows[c][mask & 255]
            mask >>= 8
            c += 1
        return out

    def right_mask(self, mask: int, x: int) -> int:
        """Mask of S*x."""
        out = 0
        c = 0
        rows = self._right_chunks[x]
        while mask:
            out |= rows[c][mask & 255]
            mask >>= 8
            c += 1
        return out

    def product_mask(self, a: int, b: int) -> int:
        out = 0
        for x in _iter_bits(a):
            out |= self.left_mask(x, b)
        return out

    def inverse_mask(self, mask: int) -> int:
        out = 0
        for x in _iter_bits(mask):
            out |= 1 << self._inv[x]
        return out


def _validate_table(table) -> np.ndarray:
    try:
        T = np.asarray(table, dtype=np.int64)
    except (TypeError, ValueError) as exc:
        raise SpecError(f"table is not an integer matrix: {exc}") from None
    if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] == 0:
        raise SpecError(f"table must be a nonempty square matrix, got shape {T.shape}")
    n = T.shape[0]
    bad = np.argwhere((T < 0) | (T >= n))
    if len(bad):
        a, b = (int(v) for v in bad[0])
        raise GroupAxiomError("closure", (a, b))
    ar = np.arange(n)
    ids = [e for e in range(n) if (T[e] == ar).all() and (T[:, e] == ar).all()]
    if not ids:
        raise GroupAxiomError("identity", ())
    e = ids[0]
    for x in range(n):
        if not ((T[x] == e) & (T[:, x] == e)).any():
            raise GroupAxiomError("inverse", (x,))
    lhs = T[T]          # (xy)z
    rhs = T[:, T]       # x(yz)
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        raise GroupAxiomError("associativity", tuple(int(v) for v in bad[0]))
    return T


# builtin finite groups

def cyclic(n: int) -> FiniteGroup:
    if n < 1:
        raise SpecError("cyclic order must be >= 1")
    ar = np.arange(n)
    return FiniteGroup((ar[:, None] + ar[None, :]) % n, name=f"Z{n}",
                       spec={"kind": "cyclic", "n": n})


def dihedral(n: int) -> FiniteGroup:
    """Dihedral group of order 2n; index i + n*e stands for r^i s^e."""
    if n < 1:
        raise SpecError("dihedral n must be >= 1")
    T = np.zeros((2 * n, 2 * n), dtype=np.int64)
    for a in range(2 * n):
        i, e = a % n, a // n
        for b in range(2 * n):
            j, f = b % n, b // n
            T[a, b] = ((i + (-1) ** e * j) % n) + n * (e ^ f)
    labels = [f"r{i}" if e == 0 else f"r{i}s" for e in (0, 1) for i in range(n)]
    return FiniteGroup(T, name=f"D{n}", labels=labels, spec={"kind": "dihedral", "n": n})


_Q_LABELS = ["1", "-1", "i", "-i", "j", "-j", "k", "-k"]


def quaternion() -> FiniteGroup:
    units = {"1": (1, 0, 0, 0), "i": (0, 1, 0, 0), "j": (0, 0, 1, 0), "k": (0, 0, 0, 1)}
    elems = []
    for name in ("1", "i", "j", "k"):
        q = units[name]
        elems.append(q)
        elems.append(tuple(-c for c in q))
    # reorder to 1, -1, i, -i, j, -j, k, -k
    index = {q: i for i, q in enumerate(elems)}

    def qmul(a, b):
        a0, a1, a2, a3 = a
        b0, b1, b2, b3 = b
        return (a0 * b0 - a1 * b1 - a2 * b2 - a3 * b3,
                a0 * b1 + a1 * b0 + a2 * b3 - a3 * b2,
                a0 * b2 - a1 * b3 + a2 * b0 + a3 * b1,
                a0 * b3 + a1 * b2 - a2 * b1 + a3 * b0)

    T = [[index[qmul(a, b)] for b in elems] for a in elems]
    return FiniteGroup(T, name="Q8", labels=_Q_LABELS, spec={"kind": "quaternion"})


def _parity(perm) -> int:
    seen, parity = set(), 0
    for i in range(len(perm)):
        if i in seen:
            continue
        j, length = i, 0
        while j not in seen:
            seen.add(j)
            j = perm[j]
            length += 1
        parity ^= (length - 1) & 1
    return parity


def _perm_group(n: int, even_only: bool, name: str, spec: dict) -> FiniteGroup:
    perms = [p for p in itertools.permutations(range(n)) if not even_only or _parity(p) == 0]
    index = {p: i for i, p in enumerate(perms)}
    # (pq)(x) = p(q(x))
    T = [[index[tuple(p[q[x]] for x in range(n))] for q in perms] for p in perms]
    return FiniteGroup(T, name=name, labels=["".join(map(str, p)) for p in perms], spec=spec)


def symmetric(n: int) -> FiniteGroup:
    if not 1 <= n <= 5:
        raise SpecError("symmetric n must be in [1, 5]")
    return _perm_group(n, False, f"S{n}", {"kind": "symmetric", "n": n})


def alternating(n: int) -> FiniteGroup:
    if not 1 <= n <= 5:
        raise SpecError("alternating n must be in [1, 5]")
    return _perm_group(n, True, f"A{n}", {"kind": "alternating", "n": n})


def direct_product_table(groups: Sequence[FiniteGroup], spec: dict | None = None) -> FiniteGroup:
    """Flatten a product of finite groups into one table (mixed radix, first factor major)."""
    sizes = [g.n for g in groups]
    tuples = list(itertools.product(*[range(s) for s in sizes]))
    index = {t: i for i, t in enumerate(tuples)}
    T = [[index[tuple(g.mul(a, b) for g, a, b in zip(groups, s, t))] for t in tuples] for s in tuples]
    labels = ["(" + ",".join(g.labels[a] for g, a in zip(groups, t)) + ")" for t in tuples]
    name = "x".join(g.name for g in groups)
    return FiniteGroup(T, name=name, labels=labels, spec=spec)


class AffineGrid:
    """The ax+b group in chart coordinates (u, b), u = log a, on a lattice of pitch h.

    Elements are lattice points ``(i, j)`` meaning ``(u, b) = (i h, j h)``;
    the cell ``(i, j)`` is the closed square with that lower-left corner.
    """

    kind = "affine_grid"
    is_exact = False
    is_unimodular = False
    total_measure = INF

    def __init__(self, u: Sequence[float], b: Sequence[float], h: float):
        if not h > 0:
            raise SpecError("grid pitch h must be positive")
        u_lo, u_hi = (float(v) for v in u)
        b_lo, b_hi = (float(v) for v in b)
        if not (u_lo < u_hi and b_lo < b_hi):
            raise SpecError("grid windows must be nonempty")
        self.h = float(h)
        self.u_window = (u_lo, u_hi)
        self.b_window = (b_lo, b_hi)
        self.i_range = (math.ceil(u_lo / h - 1e-9), math.floor(u_hi / h + 1e-9) - 1)
        self.j_range = (math.ceil(b_lo / h - 1e-9), math.floor(b_hi / h + 1e-9) - 1)
        if not (self.i_range[0] <= 0 <= self.i_range[1] and self.j_range[0] <= 0 <= self.j_range[1]):
            raise SpecError("grid windows must contain the identity (0, 0)")
        self.identity = (0, 0)
        self.spec = {"kind": "affine_grid", "u": [u_lo, u_hi], "b": [b_lo, b_hi], "h": self.h}
        self.name = f"Aff(h={self.h:g})"

    def __repr__(self):
        return f"AffineGrid(u={self.u_window}, b={self.b_window}, h={self.h})"

    def snap(self, x: float) -> int:
        return math.floor(x / self.h + 1e-9)

    def element(self, u: float, b: float) -> tuple[int, int]:
        return self.check((self.snap(u), self.snap(b)))

    def coords(self, x) -> tuple[float, float]:
        return (x[0] * self.h, x[1] * self.h)

    def contains(self, x) -> bool:
        i, j = x
        return (self.i_range[0] <= i <= self.i_range[1]
                and self.j_range[0] <= j <= self.j_range[1])

    def check(self, x):
        i, j = x
        if not self.i_range[0] <= i <= self.i_range[1]:
            raise WindowError("u-index", i)
        if not self.j_range[0] <= j <= self.j_range[1]:
            raise WindowError("b-index", j)
        return (int(i), int(j))

    def mul(self, x, y):
        h = self.h
        b = x[1] * h + math.exp(x[0] * h) * y[1] * h
        return self.check((x[0] + y[0], self.snap(b)))

    def inv(self, x):
        b = -math.exp(-x[0] * self.h) * x[1] * self.h
        return self.check((-x[0], self.snap(b)))

    def modular(self, x) -> float:
        return math.exp(-x[0] * self.h)

    def region(self, x) -> str:
        # Delta = e^{-u}; the band |u| < h is "on"
        if x[0] > 0:
            return BELOW
        if x[0] < 0:
            return ABOVE
        return ON


class PAdicAffine:
    """Q_p semidirect Z on a window: scale k in [k_min, k_max], b in p^{d_min} Z_p,
    balls of radius p^{-d} with d in [d_min, d_max].

    Elements are pairs ``(k, b)`` with ``b`` a Fraction whose denominator is a power of p.
    """

    kind = "padic_affine"
    is_exact = True
    is_unimodular = False
    total_measure = INF

    def __init__(self, p: int, k: Sequence[int], d: Sequence[int]):
        if not isinstance(p, int) or not is_prime(p):
            raise SpecError(f"p must be prime, got {p!r}")
        k_min, k_max = (int(v) for v in k)
        d_min, d_max = (int(v) for v in d)
        if k_min > k_max or d_min > d_max:
            raise SpecError("p-adic windows must be nonempty")
        if not k_min <= 0 <= k_max:
            raise SpecError("scale window must contain 0")
        self.p = p
        self.k_window = (k_min, k_max)
        self.d_window = (d_min, d_max)
        self.identity = (0, Fraction(0))
        self.spec = {"kind": "padic_affine", "p": p, "k": [k_min, k_max], "d": [d_min, d_max]}
        self.name = f"Q{p}xZ"

    def __repr__(self):
        return f"PAdicAffine(p={self.p}, k={self.k_window}, d={self.d_window})"

    def pw(self, e: int) -> Fraction:
        return Fraction(self.p) ** e

    def contains(self, x) -> bool:
        try:
            self.check(x)
        except (WindowError, SpecError):
            return False
        return True

    def check(self, x):
        k, b = x
        b = Fraction(b)
        if not self.k_window[0] <= k <= self.k_window[1]:
            raise WindowError("scale k", k)
        den = b.denominator
        while den % self.p == 0:
            den //= self.p
        if den != 1:
            raise SpecError(f"b = {b} is not of the form m/p^e")
        if valuation(b, self.p) < self.d_window[0]:
            raise WindowError("b valuation", valuation(b, self.p))
        return (int(k), b)

    def mul(self, x, y):
        return self.check((x[0] + y[0], x[1] + self.pw(x[0]) * y[1]))

    def inv(self, x):
        return self.check((-x[0], -self.pw(-x[0]) * x[1]))

    def modular(self, x) -> Fraction:
        return self.pw(x[0])

    def region(self, x) -> str:
        if x[0] < 0:
            return BELOW
        if x[0] > 0:
            return ABOVE
        return ON


class ProductGroup:
    """Direct product of models; elements are tuples of factor elements."""

    kind = "product"

    def __init__(self, factors: Sequence[Any], spec: dict | None = None):
        if not factors:
            raise SpecError("product needs at least one factor")
        self.factors = tuple(factors)
        self.identity = tuple(f.identity for f in self.factors)
        self.spec = spec or {"kind": "product", "factors": [f.spec for f in self.factors]}
        self.name = "x".join(f.name for f in self.factors)

    def __repr__(self):
        return f"ProductGroup({', '.join(map(repr, self.factors))})"

    @property
    def is_exact(self) -> bool:
        return all(f.is_exact for f in self.factors)

    @property
    def is_unimodular(self) -> bool:
        return all(f.is_unimodular for f in self.factors)

    @property
    def total_measure(self):
        out = Fraction(1)
        for f in self.factors:
            if f.total_measure == INF:
                return INF
            out *= f.total_measure
        return out

    def contains(self, x) -> bool:
        return len(x) == len(self.factors) and all(f.contains(c) for f, c in zip(self.factors, x))

    def check(self, x):
        if len(x) != len(self.factors):
            raise SpecError(f"tuple element of wrong length: {x!r}")
        return tuple(f.check(c) for f, c in zip(self.factors, x))

    def mul(self, x, y):
        return tuple(f.mul(a, b) for f, a, b in zip(self.factors, x, y))

    def inv(self, x):
        return tuple(f.inv(a) for f, a in zip(self.factors, x))

    def modular(self, x):
        out = Fraction(1)
        for f, a in zip(self.factors, x):
            out = out * f.modular(a)
        return out

    def region(self, x) -> str:
        d = self.modular(x)
        if isinstance(d, float):
            tol = 1e-12
            return ON if abs(d - 1) <= tol else (BELOW if d < 1 else ABOVE)
        return ON if d == 1 else (BELOW if d < 1 else ABOVE)


GroupModel = FiniteGroup | AffineGrid | PAdicAffine | ProductGroup


def build_group(spec: dict) -> GroupModel:
    """Construct and validate a group model from a JSON-style spec."""
    if not isinstance(spec, dict) or "kind" not in spec:
        raise SpecError("group spec must be an object with a 'kind'")
    kind = spec["kind"]
    try:
        if kind == "cyclic":
            return cyclic(int(spec["n"]))
        if kind == "table":
            return FiniteGroup(spec["table"], spec=dict(spec))
        if kind == "dihedral":
            return dihedral(int(spec["n"]))
        if kind == "quaternion":
            return quaternion()
        if kind == "symmetric":
            return symmetric(int(spec["n"]))
        if kind == "alternating":
            return alternating(int(spec["n"]))
        if kind == "affine_grid":
            return AffineGrid(spec["u"], spec["b"], float(spec["h"]))
        if kind == "padic_affine":
            return PAdicAffine(spec["p"], spec["k"], spec["d"])
        if kind == "product":
            factors = [build_group(f) for f in spec["factors"]]
            if all(isinstance(f, FiniteGroup) for f in factors):
                return direct_product_table(factors, spec=dict(spec))
            return ProductGroup(factors, spec=dict(spec))
    except KeyError as exc:
        raise SpecError(f"group spec of kind {kind!r} is missing {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"bad group spec: {exc}") from None
    raise SpecError(f"unknown group kind {kind!r}")


def builtin_groups(max_order: int = 16) -> list[FiniteGroup]:
    """Named finite groups up to the given order (cyclic, dihedral, Q8, A4, small products)."""
    out = [cyclic(n) for n in range(1, max_order + 1)]
    out += [dihedral(n) for n in range(2, max_order // 2 + 1)]
    out.append(quaternion())
    if max_order >= 12:
        out.append(alternating(4))
    for factors in ([2, 2], [4, 2], [2, 2, 2], [6, 2], [4, 4], [2, 2, 2, 2], [8, 2], [3, 3]):
        if math.prod(factors) <= max_order:
            spec = {"kind": "product", "factors": [{"kind": "cyclic", "n": m} for m in factors]}
            out.append(build_group(spec))
    return [g for g in out if g.n <= max_order]


def groups_up_to_order_8() -> list[FiniteGroup]:
    """One representative of every isomorphism class of groups of order <= 8."""
    out = [cyclic(n) for n in range(1, 9)]
    out.append(build_group({"kind": "product", "factors": [{"kind": "cyclic", "n": 2}] * 2}))
    out.append(dihedral(3))
    out.append(build_group({"kind": "product", "factors": [{"kind": "cyclic", "n": 4},
                                                           {"kind": "cyclic", "n": 2}]}))
    out.append(build_group({"kind": "product", "factors": [{"kind": "cyclic", "n": 2}] * 3}))
    out.append(dihedral(4))
    out.append(quaternion())
    return out


# functional surface

def group_law(G: GroupModel, x, y):
    return G.mul(G.check(x), G.check(y))


def invert(G: GroupModel, x):
    return G.inv(G.check(x))


def modular(G: GroupModel, x):
    return G.modular(G.check(x))


def classify_region(G: GroupModel, x) -> str:
    return G.region(G.check(x))
