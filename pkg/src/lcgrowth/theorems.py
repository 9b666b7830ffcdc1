"""Growth inequalities for compact sets, the proof's auxiliary quantities, and Kneser's check.

Conventions: mu is left Haar, nu is right Haar, ``mu(Xx) = Delta(x) mu(X)``.
The main bound has two readings of its scaling constants:

* ``as_stated``: alpha = sup_X Delta, beta = inf_Y Delta;
* ``corrected``: alpha = inf_X Delta, beta = sup_Y Delta, which is the reading
  the normalization step needs (x0^{-1}X must land in Delta >= 1).

Bracketed (grid) values are Interval objects.  A verdict is ``holds`` only
when the upper end of min(branch1, branch2) is <= 1, ``violated`` only when
the lower end is > 1, and ``inconclusive-bracket`` otherwise.
"""

from __future__ import annotations

import weakref
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import padic
from .errors import ModelError, NotApplicableError
from .groups import AffineGrid, FiniteGroup, PAdicAffine, _iter_bits
from .setops import (LEFT, RIGHT, FiniteSet, SetBracket, delta_extrema, element_to_json, mu, nu,
                     product, product_set, set_to_json, translate)
from .subgroups import constrained_subgroup_sup, subgroup_masks
from .values import INF, is_exact, leq, to_json, vmin

AS_STATED, CORRECTED = "as_stated", "corrected"
ORIENTATIONS = (AS_STATED, CORRECTED)
HOLDS, VIOLATED, INCONCLUSIVE = "holds", "violated", "inconclusive-bracket"
REPORT_SCHEMA = "lcgrowth.report/1"


def _verdict(value, bound=1) -> str:
    r = leq(value, bound)
    if r is None:
        return INCONCLUSIVE
    return HOLDS if r else VIOLATED


def scaling_constants(G, X, Y, orientation: str = CORRECTED):
    """(alpha, beta, x0, y0) for the chosen orientation."""
    if orientation not in ORIENTATIONS:
        raise ValueError(f"orientation must be one of {ORIENTATIONS}, got {orientation!r}")
    sx, ix, argmax_x, argmin_x = delta_extrema(G, X)
    sy, iy, argmax_y, argmin_y = delta_extrema(G, Y)
    if orientation == AS_STATED:
        return sx, iy, argmax_x, argmin_y
    return ix, sy, argmin_x, argmax_y


def _xy(G, X, Y, XY=None) -> SetBracket:
    if XY is None:
        return product_set(G, X, Y)
    if isinstance(XY, SetBracket):
        return XY
    return SetBracket(XY, XY)


def kemperman_sum(G, X, Y, XY=None):
    """nu(X)/nu(XY) + mu(Y)/mu(XY)."""
    XY = _xy(G, X, Y, XY)
    return nu(G, X) / nu(G, XY) + mu(G, Y) / mu(G, XY)


def rho(G, X, Y, XY=None):
    return kemperman_sum(G, X, Y, XY) - 1


def _harmonic(a, b, n, m):
    """((a + b) n m) / (a m + b n): weighted harmonic mean of n and m."""
    return (a + b) * n * m / (a * m + b * n)


def kappa(G, Xstar, Ystar, XsYs=None):
    XsYs = _xy(G, Xstar, Ystar, XsYs)
    n, m = nu(G, XsYs), mu(G, XsYs)
    k = _harmonic(nu(G, Xstar), mu(G, Ystar), n, m)
    if is_exact(k) and not min(n, m) <= k <= max(n, m):
        raise AssertionError(f"kappa {k} outside [{min(n, m)}, {max(n, m)}]")
    return k


def kappa_prime(G, X, Y, alpha, beta, XY=None):
    """The coefficient written in terms of X, Y and the scalings; equals kappa of (X*, Y*)."""
    XY = _xy(G, X, Y, XY)
    n, m = nu(G, XY), mu(G, XY)
    return (alpha * nu(G, X) + mu(G, Y) / beta) * n * m / (nu(G, X) * m + mu(G, Y) * n)


@dataclass
class InequalityReport:
    law: str
    orientation: str | None
    alpha: Any
    beta: Any
    nu_X: Any
    mu_Y: Any
    nu_XY: Any
    mu_XY: Any
    mu_G: Any
    s: Any
    witness: Any
    branch1: Any
    branch2: Any
    verdict: str
    slack: Any
    mu_X: Any = None
    bound: Any = None
    branch1_outer: Any = None
    notes: list = field(default_factory=list)

    def to_json(self, G) -> dict:
        out = {"schema": REPORT_SCHEMA, "kind": "inequality", "law": self.law,
               "orientation": self.orientation}
        for name in ("alpha", "beta", "nu_X", "mu_X", "mu_Y", "nu_XY", "mu_XY", "mu_G", "s",
                     "branch1", "branch1_outer", "branch2", "bound", "slack"):
            val = getattr(self, name)
            if val is not None:
                out[name] = to_json(val)
        out["witness"] = None if self.witness is None else set_to_json(G, self.witness.carrier)
        out["verdict"] = self.verdict
        out["notes"] = list(self.notes)
        return out


def _check_cover(XYb: SetBracket, E):
    if E is None:
        return XYb.outer
    if isinstance(E, SetBracket):
        E = E.outer
    if not XYb.outer <= E:
        raise ModelError("E must contain the product set XY")
    return E


def _model_notes(G) -> list[str]:
    notes = []
    if type(G).__name__ == "ProductGroup":
        notes.append("subgroup search restricted to products of factor subgroups")
    if isinstance(G, AffineGrid):
        notes.append("connected chart: only null compact subgroups, s = 0")
    return notes


def verify_main(G, X, Y, E=None, orientation: str = CORRECTED) -> InequalityReport:
    if not X or not Y:
        raise ModelError("X and Y must be nonempty")
    XYb = product_set(G, X, Y)
    E = _check_cover(XYb, E)
    alpha, beta, _, _ = scaling_constants(G, X, Y, orientation)
    s, w = constrained_subgroup_sup(G, E, alpha, beta, orientation)
    nx, my = nu(G, X), mu(G, Y)
    nxy, mxy = nu(G, XYb), mu(G, XYb)
    factor = 1 - s / (alpha * nx + my / beta)
    b1 = (nx / nxy + my / mxy) * factor
    b1_outer = (nx / nu(G, XYb.outer) + my / mu(G, XYb.outer)) * factor
    total = G.total_measure
    b2 = INF if total == INF else total / mxy
    m = vmin(b1, b2)
    verdict = _verdict(m)
    notes = _model_notes(G)
    if verdict == INCONCLUSIVE:
        notes.append("bracket straddles 1; refine h -> h/2")
    return InequalityReport("main", orientation, alpha, beta, nx, my, nxy, mxy, total, s, w,
                            b1, b2, verdict, 1 - m, branch1_outer=b1_outer, notes=notes)


def verify_unimodular(G, X, Y, E=None) -> InequalityReport:
    """mu(XY) >= min{mu(X) + mu(Y) - s, mu(G)}; slack = mu(XY) - bound."""
    if not G.is_unimodular:
        raise NotApplicableError("the unimodular bound needs a unimodular model")
    if not X or not Y:
        raise ModelError("X and Y must be nonempty")
    XYb = product_set(G, X, Y)
    E = _check_cover(XYb, E)
    one = Fraction(1)
    s, w = constrained_subgroup_sup(G, E, one, one)
    mx, my, mxy = mu(G, X), mu(G, Y), mu(G, XYb)
    total = G.total_measure
    bound = vmin(mx + my - s, total)
    slack = mxy - bound
    verdict = _verdict(bound, mxy)
    return InequalityReport("unimodular", None, one, one, nu(G, X), my, nu(G, XYb), mxy, total,
                            s, w, None, None, verdict, slack, mu_X=mx, bound=bound,
                            notes=_model_notes(G))


def verify_kemperman_connected(G, X, Y) -> InequalityReport:
    """min{nu(X)/nu(XY) + mu(Y)/mu(XY), mu(G)/mu(XY)} <= 1 on the grid chart."""
    if not isinstance(G, AffineGrid):
        raise NotApplicableError("the connected-group bound applies to grid models only")
    if not X or not Y:
        raise ModelError("X and Y must be nonempty")
    XYb = product_set(G, X, Y)
    nx, my = nu(G, X), mu(G, Y)
    b1 = kemperman_sum(G, X, Y, XYb)
    b1_outer = nx / nu(G, XYb.outer) + my / mu(G, XYb.outer)
    verdict = _verdict(b1)
    notes = [] if verdict != INCONCLUSIVE else ["bracket straddles 1; refine h -> h/2"]
    return InequalityReport("kemperman", None, None, None, nx, my, nu(G, XYb), mu(G, XYb), INF,
                            Fraction(0), None, b1, INF, verdict, 1 - b1,
                            branch1_outer=b1_outer, notes=notes)


# Kneser

_kneser_cache: "weakref.WeakKeyDictionary[FiniteGroup, dict]" = weakref.WeakKeyDictionary()


def kneser_check(G: FiniteGroup, xy_mask: int, size_x: int, size_y: int) -> int | None:
    """Mask of the largest subgroup H with |XY| >= |X|+|Y|-|H| and XY H = XY, or None."""
    memo = _kneser_cache.setdefault(G, {})
    key = (xy_mask, size_x, size_y)
    if key in memo:
        return memo[key]
    size_xy = xy_mask.bit_count()
    found = None
    for h in reversed(subgroup_masks(G)):
        if size_xy < size_x + size_y - h.bit_count():
            continue
        if G.product_mask(xy_mask, h) == xy_mask:
            found = h
            break
    memo[key] = found
    return found


@dataclass
class KneserReport:
    XY: FiniteSet
    H: FiniteSet | None
    cond_growth: bool
    cond_periodic: bool
    verdict: str

    def to_json(self, G) -> dict:
        return {"schema": REPORT_SCHEMA, "kind": "kneser", "law": "kneser",
                "XY": set_to_json(G, self.XY),
                "H": None if self.H is None else set_to_json(G, self.H),
                "mu_H": None if self.H is None else to_json(Fraction(len(self.H))),
                "cond_growth": self.cond_growth, "cond_periodic": self.cond_periodic,
                "verdict": self.verdict}


def verify_kneser_abelian(G, X, Y) -> KneserReport:
    if not isinstance(G, FiniteGroup):
        raise NotApplicableError("Kneser's check needs a finite table model")
    if not G.is_abelian:
        raise NotApplicableError("Kneser's check needs an abelian group")
    if not X or not Y:
        raise ModelError("X and Y must be nonempty")
    xy = G.product_mask(X.mask, Y.mask)
    h = kneser_check(G, xy, len(X), len(Y))
    XY = FiniteSet(G.n, mask=xy)
    if h is None:
        return KneserReport(XY, None, False, False, VIOLATED)
    return KneserReport(XY, FiniteSet(G.n, mask=h), True, True, HOLDS)


# exceptional set of the structure statement

@dataclass
class Prop42Report:
    D: Any
    bound: Any
    lhs: Any
    rho: Any
    kappa_prime: Any
    mu_H: Any
    witnesses: list
    all_witnessed: bool
    verdict: str
    notes: list = field(default_factory=list)

    def to_json(self, G) -> dict:
        wit = []
        for item in self.witnesses:
            wit.append({k: (element_to_json(G, v) if k in ("g", "z") else v)
                        for k, v in item.items()})
        return {"schema": REPORT_SCHEMA, "kind": "exceptional_set", "D": set_to_json(G, self.D),
                "D_empty": not self.D, "lhs": to_json(self.lhs), "bound": to_json(self.bound),
                "rho": to_json(self.rho), "kappa_prime": to_json(self.kappa_prime),
                "mu_H": to_json(self.mu_H), "witnesses": wit,
                "all_witnessed": self.all_witnessed, "verdict": self.verdict,
                "notes": list(self.notes)}


def _conj_ok_finite(G: FiniteGroup, g: int, z: int, h_mask: int, xy_mask: int) -> bool:
    conj = G.left_mask(z, G.right_mask(h_mask, G.inv(z)))
    return G.left_mask(g, conj) & ~xy_mask == 0


def check_prop42(G, X, Y, pair) -> Prop42Report:
    """D = XY minus x0 X0 Y0 y0, the measure inequality on D, and coset witnesses off D."""
    if not isinstance(G, (FiniteGroup, PAdicAffine)):
        raise NotApplicableError("the exceptional-set check needs an exact model")
    if not pair.feasible:
        raise ModelError("minimizer pair is not feasible")
    ctx = pair.ctx
    XY = product(G, X, Y)
    x0, y0 = ctx.x0, ctx.y0
    alpha, beta = G.modular(x0), G.modular(y0)
    A = translate(G, pair.X0, x0, LEFT)
    B = translate(G, pair.Y0, y0, RIGHT)
    core = product(G, A, B) if A and B else A & B
    D = XY - core
    r = rho(G, X, Y, XY)
    kp = kappa_prime(G, X, Y, alpha, beta, XY)
    mu_h = mu(G, pair.H)
    bound = mu_h - r * kp
    lhs = min(mu(G, D) / beta, alpha * nu(G, D))
    witnesses = []
    ok = True
    if isinstance(G, FiniteGroup):
        h = pair.H.mask
        for g in _iter_bits(core.mask):
            z = None
            for b in B:
                a = G.mul(g, G.inv(b))
                if a in A and _conj_ok_finite(G, g, G.inv(b), h, XY.mask):
                    z = G.inv(b)
                    break
            if z is None:
                z = next((c for c in range(G.n) if _conj_ok_finite(G, g, c, h, XY.mask)), None)
            ok &= z is not None
            witnesses.append({"g": g, "z": z})
    else:
        for a in A.balls:
            for b in B.balls:
                AHB = product(G, product(G, padic.BallSet(G.p, [a]), pair.H), padic.BallSet(G.p, [b]))
                good = AHB <= XY
                ok &= good
                z = G.inv((b.k, b.center))
                witnesses.append({"g": G.mul((a.k, a.center), (b.k, b.center)), "z": z,
                                  "ok": good})
    verdict = _verdict(lhs, bound) if ok else VIOLATED
    notes = ["compact open subgroups: open and compact coincide in exact models"]
    return Prop42Report(D, bound, lhs, r, kp, mu_h, witnesses, ok, verdict, notes)


# a nonunimodular instance where the uncorrected sum exceeds one

@dataclass
class Example41Report:
    p: int
    t: int
    kemperman_sum: Fraction
    display_sum: Fraction
    nu_X: Fraction
    nu_XY: Fraction
    mu_Y: Fraction
    mu_XY: Fraction
    XH_is_H: bool
    disjoint: bool
    exceeds_one: bool

    def to_json(self, G=None) -> dict:
        out = {"schema": REPORT_SCHEMA, "kind": "example41"}
        for k, v in self.__dict__.items():
            out[k] = to_json(v) if isinstance(v, Fraction) else v
        return out


def example41_model(p: int, t: int, depth: int = 0) -> PAdicAffine:
    return PAdicAffine(p, (-2 * t - 2, 2 * t + 2), (-2 * t - 4, 2 * t + 4 + depth))


def build_example41(p: int, t: int, X_choice=None, W_choice=None):
    """X inside H = Z_p on slab 0, Y = H u W x with x = (-t, 0).

    ``X_choice`` and ``W_choice`` are lists of (center, depth) balls on slab 0;
    both default to the single ball Z_p.
    """
    if t < 1:
        raise ModelError("t must be >= 1")
    X_choice = [(0, 0)] if X_choice is None else list(X_choice)
    W_choice = [(0, 0)] if W_choice is None else list(W_choice)
    depth = max([d for _, d in X_choice + W_choice] + [0])
    G = example41_model(p, t, depth)
    H = padic.ballset(G, [(0, 0, 0)])
    X = padic.ballset(G, [(0, c, d) for c, d in X_choice])
    if not X:
        raise ModelError("X choice is empty")
    if not X <= H:
        raise ModelError("X must lie inside the slab-0 ball Z_p")
    W = padic.ballset(G, [(0, c, d) for c, d in W_choice])
    x = (-t, Fraction(0))
    Wx = translate(G, W, x, RIGHT)
    Y = H | Wx
    XY = product(G, X, Y)
    ks = kemperman_sum(G, X, Y, XY)
    XW = product(G, X, W)
    dx = G.modular(x)
    disp = nu(G, X) / (nu(G, H) + nu(G, XW)) + (mu(G, H) + mu(G, W) * dx) / (mu(G, H) + mu(G, XW) * dx)
    rep = Example41Report(p, t, ks, disp, nu(G, X), nu(G, XY), mu(G, Y), mu(G, XY),
                          product(G, X, H) == H, not (H & Wx), ks > 1)
    return G, X, Y, rep
