"""Normalization, the feasible family of pairs inside X*Y*, transform moves, and maximizers.

The feasible family: pairs (X', Y') with X' inside X*Y* and the Delta-region of
X*, Y' inside X*Y* and the region of Y*, and X'Y' inside X*Y*.  Objective is
lexicographic: (nu(X') + mu(Y'), nu(X')).

Exact maximization is a branch-and-bound over atoms of P = X*Y*: elements in
finite models, balls refined to a common depth in p-adic ones.  For a fixed X'
the best Y' is every allowed atom b with a b inside P for all a in X', so the
search only branches over X'.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import padic
from .errors import ModelError, NotApplicableError, WindowError
from .groups import ABOVE, BELOW, ON, FiniteGroup, PAdicAffine, _iter_bits
from .setops import (LEFT, RIGHT, FiniteSet, delta_extrema, mu, nu, product, set_to_json,
                     translate)
from .subgroups import is_subgroup
from .theorems import AS_STATED, CORRECTED, ORIENTATIONS, REPORT_SCHEMA, kappa, rho
from .values import to_json

DEFAULT_ATOM_BOUND = 14
EXACT, HEURISTIC = "exact", "heuristic"
EXPAND_X, EXPAND_Y = "expand_x", "expand_y"


@dataclass
class NormalizedPair:
    G: Any
    X: Any
    Y: Any
    orientation: str
    x0: Any
    y0: Any
    Xstar: Any
    Ystar: Any
    P: Any
    regions_x: tuple
    regions_y: tuple


@dataclass
class MinimizerPair:
    X0: Any
    Y0: Any
    H: Any
    objective: tuple
    feasible: bool
    provenance: str
    ctx: NormalizedPair = field(repr=False)


def _require_exact(G):
    if not isinstance(G, (FiniteGroup, PAdicAffine)):
        raise NotApplicableError("the minimizer works on finite and p-adic models only")


def normalize_pair(G, X, Y, orientation: str = CORRECTED) -> NormalizedPair:
    _require_exact(G)
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}")
    if not X or not Y:
        raise ModelError("X and Y must be nonempty")
    _, _, argmax_x, argmin_x = delta_extrema(G, X)
    _, _, argmax_y, argmin_y = delta_extrema(G, Y)
    if orientation == AS_STATED:
        x0, y0 = argmax_x, argmin_y
        rx, ry = (ON, BELOW), (ON, ABOVE)
    else:
        x0, y0 = argmin_x, argmax_y
        rx, ry = (ON, ABOVE), (ON, BELOW)
    Xs = translate(G, X, G.inv(x0), LEFT)
    Ys = translate(G, Y, G.inv(y0), RIGHT)
    P = product(G, Xs, Ys)
    return NormalizedPair(G, X, Y, orientation, x0, y0, Xs, Ys, P, rx, ry)


def restrict_region(G, S, regions):
    if isinstance(G, FiniteGroup):
        return S
    return padic.BallSet(G.p, [b for b in S.balls if G.region((b.k, b.center)) in regions])


def is_feasible(ctx: NormalizedPair, Xp, Yp) -> bool:
    G = ctx.G
    if not Xp <= restrict_region(G, ctx.P, ctx.regions_x):
        return False
    if not Yp <= restrict_region(G, ctx.P, ctx.regions_y):
        return False
    if not Xp or not Yp:
        return True
    try:
        return product(G, Xp, Yp) <= ctx.P
    except WindowError:
        return False


def objective(ctx: NormalizedPair, Xp, Yp) -> tuple:
    G = ctx.G
    a = nu(G, Xp)
    return (a + mu(G, Yp), a)


def _contains(G, S, g) -> bool:
    return g in S if isinstance(G, FiniteGroup) else S.contains_point(g)


def transform_step(ctx: NormalizedPair, state, g, direction: str):
    """One Kemperman move at g in X' n Y'."""
    G = ctx.G
    Xp, Yp = state
    if not (_contains(G, Xp, g) and _contains(G, Yp, g)):
        raise ModelError("transform element must lie in both sets")
    gi = G.inv(g)
    if direction == EXPAND_X:
        new = (Xp | translate(G, Xp, g, RIGHT), Yp & translate(G, Yp, gi, LEFT))
    elif direction == EXPAND_Y:
        new = (Xp & translate(G, Xp, gi, RIGHT), Yp | translate(G, Yp, g, LEFT))
    else:
        raise ValueError(f"unknown direction {direction!r}")
    if not is_feasible(ctx, *new):
        raise AssertionError("transform produced an infeasible pair")
    return new


def _finest_depth(ctx: NormalizedPair) -> int:
    return max(b.depth for S in (ctx.Xstar, ctx.Ystar, ctx.P) for b in S.balls)


def _scan_points(ctx: NormalizedPair, S):
    G = ctx.G
    if isinstance(G, FiniteGroup):
        return list(S)
    return [(b.k, b.center) for b in S.refine(_finest_depth(ctx))]


def _pair(ctx, Xp, Yp, provenance) -> MinimizerPair:
    return MinimizerPair(Xp, Yp, Xp & Yp, objective(ctx, Xp, Yp), is_feasible(ctx, Xp, Yp),
                         provenance, ctx)


def maximize_heuristic(ctx: NormalizedPair, max_steps: int = 100_000) -> MinimizerPair:
    """Greedy transform ascent from (X*, Y*) until no move strictly improves."""
    _require_exact(ctx.G)
    state = (ctx.Xstar, ctx.Ystar)
    best = objective(ctx, *state)
    for _ in range(max_steps):
        improved = False
        for g in _scan_points(ctx, state[0] & state[1]):
            for direction in (EXPAND_X, EXPAND_Y):
                try:
                    new = transform_step(ctx, state, g, direction)
                except WindowError:
                    continue
                val = objective(ctx, *new)
                if val > best:
                    state, best, improved = new, val, True
                    break
            if improved:
                break
        if not improved:
            break
    return _pair(ctx, state[0], state[1], HEURISTIC)


# exact search

def _atoms(ctx: NormalizedPair, bound: int):
    """(atoms, wx, wy, allowed_x, allowed_y, compat) for the branch-and-bound."""
    G = ctx.G
    if isinstance(G, FiniteGroup):
        atoms = list(ctx.P)
        if len(atoms) > bound:
            raise ModelError(f"{len(atoms)} atoms exceed the bound {bound}")
        wx = wy = [1] * len(atoms)
        full = (1 << len(atoms)) - 1
        compat = []
        for a in atoms:
            m = 0
            for j, b in enumerate(atoms):
                if ctx.P.mask >> G.mul(a, b) & 1:
                    m |= 1 << j
            compat.append(m)
        return atoms, wx, wy, full, full, compat
    atoms = ctx.P.refine(_finest_depth(ctx))
    if len(atoms) > bound:
        raise ModelError(f"{len(atoms)} atoms exceed the bound {bound}")
    wx = [G.pw(-a.depth) for a in atoms]
    wy = [G.pw(a.k - a.depth) for a in atoms]
    ax = ay = 0
    for i, a in enumerate(atoms):
        r = G.region((a.k, a.center))
        if r in ctx.regions_x:
            ax |= 1 << i
        if r in ctx.regions_y:
            ay |= 1 << i
    compat = []
    for a in atoms:
        m = 0
        for j, b in enumerate(atoms):
            try:
                ok = padic.BallSet(G.p, [padic.ball_mul(G, a, b)]) <= ctx.P
            except WindowError:
                ok = False
            if ok:
                m |= 1 << j
        compat.append(m)
    return atoms, wx, wy, ax, ay, compat


def _branch_and_bound(wx, wy, allowed_x, allowed_y, compat):
    """Lexicographic maximum of (nu(X') + mu(Y'), nu(X')) over X' inside allowed_x.

    Include-first exploration; only strict improvements replace the incumbent,
    so ties resolve to the first pair met in this canonical order.
    """
    order = list(_iter_bits(allowed_x))
    suffix = [0] * (len(order) + 1)
    for idx in range(len(order) - 1, -1, -1):
        suffix[idx] = suffix[idx + 1] + wx[order[idx]]
    ycache: dict[int, Any] = {}

    def ysum(mask):
        v = ycache.get(mask)
        if v is None:
            v = ycache[mask] = sum((wy[j] for j in _iter_bits(mask)), 0)
        return v

    best = [None, None, 0, 0]    # sum, nu, xmask, ymask

    def rec(idx, xmask, nux, ymask):
        ys = ysum(ymask)
        reach = nux + suffix[idx]
        if best[0] is not None:
            if reach + ys < best[0] or (reach + ys == best[0] and reach <= best[1]):
                return
        if idx == len(order):
            total = nux + ys
            if best[0] is None or (total, nux) > (best[0], best[1]):
                best[:] = [total, nux, xmask, ymask]
            return
        i = order[idx]
        rec(idx + 1, xmask | (1 << i), nux + wx[i], ymask & compat[i])
        rec(idx + 1, xmask, nux, ymask)

    rec(0, 0, 0, allowed_y)
    return best[2], best[3]


_exact_cache: "weakref.WeakKeyDictionary[Any, dict]" = weakref.WeakKeyDictionary()


def maximize_exact(ctx: NormalizedPair, bound: int = DEFAULT_ATOM_BOUND) -> MinimizerPair:
    G = ctx.G
    _require_exact(G)
    memo = _exact_cache.setdefault(G, {})
    key = (ctx.P, ctx.regions_x, ctx.regions_y)
    hit = memo.get(key)
    if hit is None:
        atoms, wx, wy, ax, ay, compat = _atoms(ctx, bound)
        xm, ym = _branch_and_bound(wx, wy, ax, ay, compat)
        if isinstance(G, FiniteGroup):
            to_set = lambda m: FiniteSet(G.n, [atoms[i] for i in _iter_bits(m)])  # noqa: E731
        else:
            to_set = lambda m: padic.BallSet(G.p, [atoms[i] for i in _iter_bits(m)])  # noqa: E731
        hit = memo[key] = (to_set(xm), to_set(ym))
    return _pair(ctx, hit[0], hit[1], EXACT)


# claims at the maximizer

@dataclass
class ClaimsReport:
    stabilizes: bool
    is_group: bool
    measure_lower: bool
    measure_cap: bool
    sum_lower: bool
    rho: Any
    kappa: Any
    mu_H: Any
    cap: Any
    advisory: bool
    failures: dict = field(default_factory=dict)

    @property
    def all_pass(self) -> bool:
        return self.stabilizes and self.is_group and self.measure_lower and self.measure_cap

    def to_json(self) -> dict:
        return {"stabilizes": self.stabilizes, "is_group": self.is_group,
                "measure_lower": self.measure_lower, "measure_cap": self.measure_cap,
                "sum_lower": self.sum_lower, "rho": to_json(self.rho),
                "kappa": to_json(self.kappa), "mu_H": to_json(self.mu_H),
                "cap": to_json(self.cap), "advisory": self.advisory,
                "failures": dict(self.failures), "all_pass": self.all_pass}


def verify_claims(ctx: NormalizedPair, pair: MinimizerPair) -> ClaimsReport:
    """Stabilizer identities, subgroup property, the lower bound rho*kappa, and the final cap."""
    G = ctx.G
    X0, Y0, H = pair.X0, pair.Y0, pair.H
    failures = {}
    stab = bool(H) and product(G, X0, H) == X0 and product(G, H, Y0) == Y0
    if not stab:
        failures["stabilizes"] = "X0 H != X0 or H Y0 != Y0" if H else "H is empty"
    group = bool(H) and is_subgroup(G, H)
    if not group:
        failures["is_group"] = "H fails identity, closure or inverse"
    XY = product(G, ctx.X, ctx.Y)
    r = rho(G, ctx.X, ctx.Y, XY)
    k = kappa(G, ctx.Xstar, ctx.Ystar, ctx.P)
    mh = mu(G, H)
    lower_ok = mh >= r * k
    if not lower_ok:
        failures["measure_lower"] = f"mu(H) = {mh} < {r * k}"
    cap = min(mu(G, XY) / G.modular(ctx.y0), G.modular(ctx.x0) * nu(G, XY))
    cap_ok = mh <= cap
    if not cap_ok:
        failures["measure_cap"] = f"mu(H) = {mh} > {cap}"
    sum_ok = pair.objective[0] >= nu(G, ctx.Xstar) + mu(G, ctx.Ystar)
    return ClaimsReport(stab, group, lower_ok, cap_ok, sum_ok, r, k, mh, cap,
                        pair.provenance != EXACT, failures)


def pair_to_json(G, pair: MinimizerPair, claims: ClaimsReport | None = None) -> dict:
    out = {"schema": REPORT_SCHEMA, "kind": "minimizer", "orientation": pair.ctx.orientation,
           "provenance": pair.provenance, "X0": set_to_json(G, pair.X0),
           "Y0": set_to_json(G, pair.Y0), "H": set_to_json(G, pair.H),
           "objective": [to_json(v) for v in pair.objective], "feasible": pair.feasible}
    if claims is not None:
        out["claims"] = claims.to_json()
    return out
