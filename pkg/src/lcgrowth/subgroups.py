"""Compact subgroups and the capped supremum of their Haar measure."""

from __future__ import annotations

import weakref
from dataclasses import dataclass
from fractions import Fraction
from itertools import product as cartesian
from typing import Any

from . import padic
from .errors import ModelError
from .groups import AffineGrid, FiniteGroup, PAdicAffine, ProductGroup, _iter_bits
from .setops import BoxSet, FiniteSet, SetBracket, inverse_set, mu, nu, product

DEFAULT_ORDER_BOUND = 64


@dataclass(frozen=True)
class SubgroupWitness:
    carrier: Any
    mu: Fraction
    is_proper: bool
    in_kernel: bool


def closure_mask(G: FiniteGroup, gens: int) -> int:
    """Subgroup generated by a mask (closure under multiplication suffices in finite groups)."""
    S = gens | (1 << G.identity)
    while True:
        T = G.product_mask(S, S)
        if T == S:
            return S
        S = T


_finite_cache: "weakref.WeakKeyDictionary[FiniteGroup, tuple]" = weakref.WeakKeyDictionary()


def subgroup_masks(G: FiniteGroup, bound: int = DEFAULT_ORDER_BOUND) -> tuple[int, ...]:
    """Masks of all subgroups, sorted by order then mask."""
    if G.n > bound:
        raise ModelError(f"group order {G.n} exceeds enumeration bound {bound}")
    cached = _finite_cache.get(G)
    if cached is not None:
        return cached
    start = closure_mask(G, 0)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for S in frontier:
            for g in range(G.n):
                if S >> g & 1:
                    continue
                T = closure_mask(G, S | (1 << g))
                if T not in seen:
                    seen.add(T)
                    nxt.append(T)
        frontier = nxt
    out = tuple(sorted(seen, key=lambda m: (m.bit_count(), m)))
    _finite_cache[G] = out
    return out


def enumerate_subgroups(G: FiniteGroup, bound: int = DEFAULT_ORDER_BOUND) -> list[SubgroupWitness]:
    if not isinstance(G, FiniteGroup):
        raise ModelError("enumerate_subgroups needs a finite table model")
    full = G.full_mask
    return [SubgroupWitness(FiniteSet(G.n, mask=m), Fraction(m.bit_count()), m != full, True)
            for m in subgroup_masks(G, bound)]


def kernel_subgroups(G: PAdicAffine) -> list[SubgroupWitness]:
    """The balls p^d Z_p on the scale-0 slab, smallest first."""
    if not isinstance(G, PAdicAffine):
        raise ModelError("kernel_subgroups needs a p-adic affine model")
    out = []
    for d in range(G.d_window[1], G.d_window[0] - 1, -1):
        H = padic.BallSet(G.p, [padic.Ball(0, d, Fraction(0))])
        out.append(SubgroupWitness(H, G.pw(-d), True, True))
    return out


_witness_cache: "weakref.WeakKeyDictionary[Any, list]" = weakref.WeakKeyDictionary()


def compact_kernel_subgroups(G) -> list[SubgroupWitness]:
    """Candidate compact subgroups of ker Delta with positive measure, smallest first."""
    cached = _witness_cache.get(G)
    if cached is None:
        cached = _witness_cache[G] = _compact_kernel_subgroups(G)
    return cached


def _compact_kernel_subgroups(G) -> list[SubgroupWitness]:
    if isinstance(G, FiniteGroup):
        return enumerate_subgroups(G)
    if isinstance(G, PAdicAffine):
        return kernel_subgroups(G)
    if isinstance(G, AffineGrid):
        return []
    if isinstance(G, ProductGroup):
        per_factor = []
        for f in G.factors:
            cands = compact_kernel_subgroups(f)
            if not cands:
                return []
            per_factor.append(cands)
        out = []
        for combo in cartesian(*per_factor):
            carrier = BoxSet([tuple(w.carrier for w in combo)])
            value = Fraction(1)
            for w in combo:
                value *= w.mu
            proper = any(w.is_proper for w in combo) or any(not isinstance(f, FiniteGroup) for f in G.factors)
            out.append(SubgroupWitness(carrier, value, proper, True))
        out.sort(key=lambda w: w.mu)
        return out
    raise ModelError(f"no subgroup enumeration for {G!r}")


def subgroup_cap(G, E, alpha, beta):
    """min{mu(E)/beta, alpha nu(E)}."""
    return min(mu(G, E) / beta, alpha * nu(G, E))


def constrained_subgroup_sup(G, E, alpha, beta, orientation: str = "corrected"):
    """Largest mu(H) over proper compact subgroups H of ker Delta with mu(H) <= cap.

    Returns ``(value, witness)``; ``(0, None)`` when only null subgroups qualify.
    ``orientation`` is informational: the caller chooses which extrema ``alpha``
    and ``beta`` are.
    """
    if isinstance(E, SetBracket):
        E = E.outer
    if not E:
        raise ModelError("constrained_subgroup_sup needs a nonempty E")
    if isinstance(G, AffineGrid):
        return Fraction(0), None
    cap = subgroup_cap(G, E, alpha, beta)
    best = None
    for w in compact_kernel_subgroups(G):
        if not w.is_proper or w.mu > cap:
            continue
        if best is None or w.mu > best.mu:
            best = w
    if best is None:
        return Fraction(0), None
    return best.mu, best


def is_subgroup(G, S) -> bool:
    """Exhaustive closure/inverse/identity check for a finite carrier."""
    if isinstance(G, FiniteGroup):
        m = S.mask
        if not m >> G.identity & 1:
            return False
        if G.product_mask(m, m) & ~m:
            return False
        return all(m >> G.inv(x) & 1 for x in _iter_bits(m))
    if isinstance(G, PAdicAffine):
        return (S.contains_point(G.identity) and product(G, S, S) <= S
                and inverse_set(G, S) == S)
    raise ModelError(f"no subgroup check for {G!r}")
