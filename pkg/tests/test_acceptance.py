"""The eight acceptance criteria, each with its tolerance and runtime budget.

Every test records one PASS/FAIL line; the lines are printed in the terminal summary.
"""

import contextlib
import math
import random
import time
from fractions import Fraction
from itertools import combinations

import pytest

from conftest import ACCEPTANCE_LINES
from lcgrowth import padic
from lcgrowth.grid import CellSet
from lcgrowth.groups import AffineGrid, PAdicAffine, builtin_groups, cyclic, groups_up_to_order_8
from lcgrowth.minimizer import is_feasible, maximize_exact, normalize_pair, objective, verify_claims
from lcgrowth.setops import LEFT, RIGHT, FiniteSet, inverse_set, mu, nu, translate
from lcgrowth.theorems import (AS_STATED, CORRECTED, HOLDS, VIOLATED, check_prop42, kappa,
                               kemperman_sum, kneser_check, rho, verify_kemperman_connected,
                               verify_main, verify_unimodular)

from oracles import stabilizer, sumset


@contextlib.contextmanager
def criterion(number, title, budget):
    t0 = time.perf_counter()
    info = {}
    try:
        yield info
    except BaseException as exc:
        dt = time.perf_counter() - t0
        line = f"ACCEPTANCE {number} FAIL  {title} ({dt:.2f}s / {budget}s): {type(exc).__name__}: {exc}"
        ACCEPTANCE_LINES.append(line.splitlines()[0])
        print(line)
        raise
    dt = time.perf_counter() - t0
    ok = dt <= budget
    extra = info.get("detail", "")
    line = f"ACCEPTANCE {number} {'PASS' if ok else 'FAIL'}  {title} ({dt:.2f}s / {budget}s) {extra}".rstrip()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, f"criterion {number} exceeded its runtime budget: {dt:.2f}s > {budget}s"


def _masks(n):
    return range(1, 1 << n)


def _elems(m):
    return [i for i in range(m.bit_length()) if m >> i & 1]


def _is_ap(p, S, d):
    S = set(S)
    return len(S) == 1 or sum((x + d) % p not in S for x in S) == 1


# 1. Cauchy-Davenport exactness

def test_criterion_1_cauchy_davenport():
    with criterion(1, "Cauchy-Davenport exact on Z/p, p in {2,3,5,7}", 10) as info:
        pairs = ap_pairs = 0
        for p in (2, 3, 5, 7):
            G = cyclic(p)
            for xm in _masks(p):
                X = _elems(xm)
                for ym in _masks(p):
                    Y = _elems(ym)
                    rep = verify_unimodular(G, FiniteSet(p, mask=xm), FiniteSet(p, mask=ym))
                    size = len(sumset(p, X, Y))
                    target = min(p, len(X) + len(Y) - 1)
                    expected = HOLDS if size >= target else VIOLATED
                    assert rep.verdict == expected == HOLDS, (p, X, Y)
                    assert rep.slack == size - target, (p, X, Y)
                    if any(_is_ap(p, X, d) and _is_ap(p, Y, d) for d in range(1, p)):
                        ap_pairs += 1
                        assert rep.slack == 0, (p, X, Y)
                    pairs += 1
        info["detail"] = f"[{pairs} pairs, {ap_pairs} progression pairs at slack 0]"


# 2. unimodular bound on builtin groups

def test_criterion_2_unimodular_bound():
    with criterion(2, "unimodular bound on builtin groups of order <= 16", 60) as info:
        groups = builtin_groups(16)
        names = {G.name for G in groups}
        assert {"Q8", "A4"} <= names and any(G.name.startswith("D") for G in groups)
        violations = 0
        for G in groups:
            rng = random.Random(G.n * 1009 + len(G.name))
            for _ in range(10_000):
                xm, ym = rng.randint(1, G.full_mask), rng.randint(1, G.full_mask)
                rep = verify_unimodular(G, FiniteSet(G.n, mask=xm), FiniteSet(G.n, mask=ym))
                if rep.verdict == VIOLATED or rep.slack < 0:
                    violations += 1
        assert violations == 0
        info["detail"] = f"[{len(groups)} groups x 10^4 pairs, 0 violations]"


# 3. minimizer claims

def test_criterion_3_minimizer_claims():
    with criterion(3, "minimizer claims on all groups of order <= 8", 600) as info:
        total = 0
        for G in groups_up_to_order_8():
            for xm in _masks(G.n):
                X = FiniteSet(G.n, mask=xm)
                for ym in _masks(G.n):
                    ctx = normalize_pair(G, X, FiniteSet(G.n, mask=ym), CORRECTED)
                    rep = verify_claims(ctx, maximize_exact(ctx))
                    assert rep.all_pass, (G.name, xm, ym, rep.failures)
                    total += 1
        info["detail"] = f"[{total} instances, all claims pass]"


# 4. worked instance on Z/6

def _brute_maximizer(ctx):
    P = ctx.P.elements()
    best = None
    subsets = [FiniteSet(6, c) for r in range(len(P) + 1) for c in combinations(P, r)]
    for Xp in subsets:
        for Yp in subsets:
            if is_feasible(ctx, Xp, Yp):
                key = objective(ctx, Xp, Yp)
                if best is None or key > best[0]:
                    best = (key, [(Xp, Yp)])
                elif key == best[0]:
                    best[1].append((Xp, Yp))
    return best


def test_criterion_4_worked_instance():
    with criterion(4, "worked instance Z/6, X = Y = {0,1}", 10):
        G = cyclic(6)
        X = Y = FiniteSet(6, [0, 1])
        ctx = normalize_pair(G, X, Y)
        pair = maximize_exact(ctx)
        assert rho(G, X, Y) == Fraction(1, 3)
        assert kappa(G, ctx.Xstar, ctx.Ystar) == 3
        assert (pair.X0, pair.Y0) == (FiniteSet(6, [0, 1, 2]), FiniteSet(6, [0]))
        assert mu(G, pair.H) == 1 == rho(G, X, Y) * kappa(G, X, Y)
        rep = check_prop42(G, X, Y, pair)
        assert not rep.D
        # exhaustive validation: the maximizer's objective is the true maximum
        key, argmax = _brute_maximizer(ctx)
        assert key == pair.objective and (pair.X0, pair.Y0) in argmax


# 5. orientation regression

def test_criterion_5_orientation_regression():
    with criterion(5, "p-adic orientation regression", 1):
        G = PAdicAffine(3, (-4, 4), (-6, 6))
        X = padic.ballset(G, [(0, 0, 0)])
        Y = padic.ballset(G, [(0, 0, 0), (-1, 0, 0)])
        assert kemperman_sum(G, X, Y) == Fraction(3, 2)
        a = verify_main(G, X, Y, orientation=AS_STATED)
        c = verify_main(G, X, Y, orientation=CORRECTED)
        assert a.branch1 == Fraction(6, 5) and a.verdict == VIOLATED
        assert c.branch1 == Fraction(6, 7) and c.verdict == HOLDS
        assert all(isinstance(v, Fraction) for v in (a.branch1, c.branch1, a.alpha, c.alpha, a.s, c.s))


# 6. Haar and modular invariants

def _finite_invariants(rng, n_checks):
    groups = builtin_groups(12)
    for i in range(n_checks):
        G = groups[i % len(groups)]
        S = FiniteSet(G.n, mask=rng.randint(1, G.full_mask))
        g, x, y = (rng.randrange(G.n) for _ in range(3))
        assert mu(G, translate(G, S, g, RIGHT)) == G.modular(g) * mu(G, S)
        assert nu(G, translate(G, S, g, LEFT)) == nu(G, S) / G.modular(g)
        assert nu(G, S) == mu(G, inverse_set(G, S))
        assert G.modular(G.mul(x, y)) == G.modular(x) * G.modular(y)


def _padic_invariants(rng, n_checks):
    G = PAdicAffine(5, (-4, 4), (-6, 10))
    for _ in range(n_checks):
        balls = [(rng.randint(-1, 1), rng.randrange(125), rng.randint(0, 3)) for _ in range(rng.randint(1, 4))]
        S = padic.ballset(G, balls)
        g, x, y = ((rng.randint(-1, 1), Fraction(rng.randint(-50, 50), 5 ** rng.randint(0, 1)))
                   for _ in range(3))
        assert mu(G, translate(G, S, g, RIGHT)) == G.modular(g) * mu(G, S)
        assert nu(G, translate(G, S, g, LEFT)) == nu(G, S) / G.modular(g)
        assert nu(G, S) == mu(G, inverse_set(G, S))
        assert G.modular(G.mul(x, y)) == G.modular(x) * G.modular(y)


def _grid_invariants(rng, n_checks):
    G = AffineGrid((-3, 3), (-12, 12), 0.02)
    h = G.h
    tol = 4 * h
    for _ in range(n_checks):
        # every image (gS, Sg, S^-1) must stay >= ~35 cell rows tall, or the cell
        # bracket alone is coarser than 4h; see the resolution note in the README
        i0, di = rng.randint(-25, 10), rng.randint(15, 25)
        j0, dj = rng.randint(-100, 25), rng.randint(75, 150)
        S = CellSet.box(h, (i0 * h, (i0 + di) * h), (j0 * h, (j0 + dj) * h))
        base_nu = di * dj * h * h
        base_mu = (math.exp(-i0 * h) - math.exp(-(i0 + di) * h)) * dj * h
        g = G.element(rng.uniform(-0.5, 0.5), rng.uniform(-2, 2))
        x = G.element(rng.uniform(-1, 1), rng.uniform(-2, 2))
        y = G.element(rng.uniform(-1, 1), rng.uniform(-2, 2))
        d = G.modular(g)
        assert math.isclose(mu(G, translate(G, S, g, RIGHT)).mid, d * base_mu, rel_tol=tol)
        assert math.isclose(nu(G, translate(G, S, g, LEFT)).mid, base_nu / d, rel_tol=tol)
        assert math.isclose(nu(G, S).mid, mu(G, inverse_set(G, S)).mid, rel_tol=tol)
        assert math.isclose(G.modular(G.mul(x, y)), G.modular(x) * G.modular(y), rel_tol=tol)


def test_criterion_6_invariants():
    with criterion(6, "Haar and modular invariants, 10^3 per model", 30) as info:
        rng = random.Random(6)
        _finite_invariants(rng, 1000)
        _padic_invariants(rng, 1000)
        _grid_invariants(rng, 1000)
        info["detail"] = "[finite and p-adic exact, grid h = 0.02 within 4h]"


# 7. connected-group inequality on the grid chart

def _box_union(rng, h):
    S = None
    for _ in range(rng.randint(1, 3)):
        u0, b0 = rng.uniform(-1, 0.7), rng.uniform(-2, 1.5)
        B = CellSet.box(h, (u0, u0 + rng.uniform(0.1, 0.8)), (b0, b0 + rng.uniform(0.1, 1.5)))
        S = B if S is None else S | B
    return S


def test_criterion_7_connected_inequality():
    with criterion(7, "connected-group inequality on 100 grid box-union pairs", 120) as info:
        h = 0.05
        G1 = AffineGrid((-3, 3), (-12, 12), h)
        G2 = AffineGrid((-3, 3), (-12, 12), h / 2)
        rng = random.Random(7)
        worst = 0.0
        for _ in range(100):
            X, Y = _box_union(rng, h), _box_union(rng, h)
            coarse = verify_kemperman_connected(G1, X, Y)
            fine = verify_kemperman_connected(G2, X.refine(), Y.refine())
            assert coarse.branch1_outer.hi <= 1 + 10 * h
            worst = max(worst, coarse.branch1_outer.hi)
            for name in ("branch1", "nu_XY", "mu_XY"):
                assert getattr(fine, name).width < getattr(coarse, name).width, name
        info["detail"] = f"[worst outer branch1 {worst:.4f} <= {1 + 10 * h}]"


# 8. Kneser on cyclic groups

def _rot_or(n, xm, ym):
    full = (1 << n) - 1
    out = 0
    for x in _elems(xm):
        out |= ((ym << x) | (ym >> (n - x))) & full
    return out


def test_criterion_8_kneser():
    with criterion(8, "Kneser exhaustive on Z/n, n <= 10", 60) as info:
        pairs = 0
        for n in range(1, 11):
            G = cyclic(n)
            stab = {}
            for xm in _masks(n):
                sx = xm.bit_count()
                for ym in _masks(n):
                    xy = _rot_or(n, xm, ym)
                    assert xy == G.product_mask(xm, ym)
                    if xy not in stab:
                        H = stabilizer(n, _elems(xy))
                        stab[xy] = sum(1 << h for h in H), len(H)
                    hmask, hsize = stab[xy]
                    oracle_ok = xy.bit_count() >= sx + ym.bit_count() - hsize
                    found = kneser_check(G, xy, sx, ym.bit_count())
                    assert oracle_ok and found == hmask, (n, xm, ym)
                    pairs += 1
        info["detail"] = f"[{pairs} pairs, subgroup equals the stabilizer oracle]"
