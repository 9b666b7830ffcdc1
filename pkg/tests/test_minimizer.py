import random
from fractions import Fraction
from itertools import combinations

import pytest

from lcgrowth import padic
from lcgrowth.errors import ModelError, NotApplicableError
from lcgrowth.grid import CellSet
from lcgrowth.groups import AffineGrid, PAdicAffine, cyclic, dihedral, groups_up_to_order_8
from lcgrowth.minimizer import (EXACT, EXPAND_X, EXPAND_Y, HEURISTIC, is_feasible, maximize_exact,
                                maximize_heuristic, normalize_pair, objective, transform_step,
                                verify_claims)
from lcgrowth.setops import FiniteSet, mu
from lcgrowth.theorems import AS_STATED, CORRECTED


def fs(n, *xs):
    return FiniteSet(n, xs)


def regression_instance():
    G = PAdicAffine(3, (-4, 4), (-6, 6))
    return G, padic.ballset(G, [(0, 0, 0)]), padic.ballset(G, [(0, 0, 0), (-1, 0, 0)])


def test_normalization_padic_orientations():
    G, X, Y = regression_instance()
    c = normalize_pair(G, X, Y, CORRECTED)
    assert c.x0 == (0, 0) and c.y0[0] == 0 and c.Xstar == X
    assert all(b.k <= 0 for b in c.Ystar.balls)
    a = normalize_pair(G, X, Y, AS_STATED)
    assert a.y0[0] == -1
    assert mu(G, a.Ystar) == 4 == mu(G, Y) / G.modular(a.y0)
    for ctx in (a, c):
        assert ctx.Xstar.contains_point(G.identity) and ctx.Ystar.contains_point(G.identity)


def test_feasibility_examples():
    Z6 = cyclic(6)
    ctx = normalize_pair(Z6, fs(6, 0, 1), fs(6, 0, 1))
    assert is_feasible(ctx, ctx.Xstar, ctx.Ystar)
    assert not is_feasible(ctx, fs(6, 0, 1, 2), fs(6, 0, 1))
    assert is_feasible(ctx, fs(6, 0, 1, 2), fs(6, 0))


def test_transform_examples():
    Z6 = cyclic(6)
    ctx = normalize_pair(Z6, fs(6, 0, 1), fs(6, 0, 1))
    state = (fs(6, 0, 1), fs(6, 0, 1))
    assert transform_step(ctx, state, 1, EXPAND_X) == (fs(6, 0, 1, 2), fs(6, 0))
    assert transform_step(ctx, state, 0, EXPAND_Y) == state
    Z4 = cyclic(4)
    c4 = normalize_pair(Z4, fs(4, 0, 2), fs(4, 0, 2))
    assert transform_step(c4, (fs(4, 0, 2), fs(4, 0, 2)), 2, EXPAND_X) == (fs(4, 0, 2), fs(4, 0, 2))
    with pytest.raises(ModelError):
        transform_step(ctx, state, 3, EXPAND_X)


def test_maximizer_examples():
    Z6 = cyclic(6)
    ctx = normalize_pair(Z6, fs(6, 0, 1), fs(6, 0, 1))
    h, e = maximize_heuristic(ctx), maximize_exact(ctx)
    for pair in (h, e):
        assert (pair.X0, pair.Y0) == (fs(6, 0, 1, 2), fs(6, 0))
        assert pair.objective == (4, 3) and pair.feasible
    assert h.provenance == HEURISTIC and e.provenance == EXACT
    c = normalize_pair(cyclic(7), fs(7, 0, 1, 2), fs(7, 0, 1, 2, 3))
    e = maximize_exact(c)
    assert e.objective[0] == 7 and e.H == fs(7, 0)
    c = normalize_pair(cyclic(4), fs(4, 0, 2), fs(4, 0, 2))
    assert maximize_heuristic(c).X0 == fs(4, 0, 2)
    e = maximize_exact(c)
    assert e.X0 == e.Y0 == e.H == fs(4, 0, 2)


def test_subgroup_pair_is_stable():
    D4 = dihedral(4)
    H = fs(8, 0, 4)          # {1, s}
    ctx = normalize_pair(D4, H, H)
    assert maximize_heuristic(ctx).X0 == H


def test_claims_examples():
    Z6 = cyclic(6)
    ctx = normalize_pair(Z6, fs(6, 0, 1), fs(6, 0, 1))
    r = verify_claims(ctx, maximize_exact(ctx))
    assert r.all_pass and r.mu_H == 1 == r.rho * r.kappa and not r.advisory
    ctx = normalize_pair(cyclic(4), fs(4, 0, 2), fs(4, 0, 2))
    r = verify_claims(ctx, maximize_exact(ctx))
    assert r.all_pass and r.mu_H == 2 == r.rho * r.kappa
    G, X, Y = regression_instance()
    ctx = normalize_pair(G, X, Y, CORRECTED)
    r = verify_claims(ctx, maximize_exact(ctx))
    assert r.all_pass and r.mu_H == 1 and r.rho * r.kappa == Fraction(7, 9)
    r = verify_claims(ctx, maximize_heuristic(ctx))
    assert r.advisory


def test_as_stated_orientation_breaks_lower_bound_on_regression_pair():
    G, X, Y = regression_instance()
    ctx = normalize_pair(G, X, Y, AS_STATED)
    r = verify_claims(ctx, maximize_exact(ctx))
    assert r.stabilizes and r.is_group and not r.measure_lower


def brute_best(G, P):
    """Exhaustive lexicographic optimum over all pairs of subsets of P (plain sets)."""
    P = list(P)
    Ps = set(P)
    subsets = [set(c) for r in range(len(P) + 1) for c in combinations(P, r)]
    best = None
    for A in subsets:
        for B in subsets:
            if all(G.mul(a, b) in Ps for a in A for b in B):
                val = (len(A) + len(B), len(A))
                best = val if best is None or val > best else best
    return best


@pytest.mark.parametrize("G", [g for g in groups_up_to_order_8() if g.n >= 4], ids=lambda G: G.name)
def test_exact_maximizer_matches_exhaustive(G):
    rng = random.Random(G.n)
    for _ in range(12):
        X = FiniteSet(G.n, rng.sample(range(G.n), rng.randint(1, 3)))
        Y = FiniteSet(G.n, rng.sample(range(G.n), rng.randint(1, 3)))
        ctx = normalize_pair(G, X, Y)
        if len(ctx.P) > 6:
            continue
        pair = maximize_exact(ctx)
        assert pair.objective == brute_best(G, ctx.P)
        assert pair.objective >= objective(ctx, ctx.Xstar, ctx.Ystar)
        h = maximize_heuristic(ctx)
        assert h.feasible and h.objective <= pair.objective


def test_padic_maximizer_matches_atom_enumeration():
    G = PAdicAffine(3, (-4, 4), (-6, 6))
    X = padic.ballset(G, [(0, 0, 1), (0, 1, 1)])
    Y = padic.ballset(G, [(0, 0, 0), (-1, 1, 1)])
    ctx = normalize_pair(G, X, Y)
    pair = maximize_exact(ctx)
    depth = max(b.depth for S in (ctx.Xstar, ctx.Ystar, ctx.P) for b in S.balls)
    atoms = ctx.P.refine(depth)
    best = None
    for mx in range(1 << len(atoms)):
        A = padic.BallSet(3, [a for i, a in enumerate(atoms) if mx >> i & 1])
        for my in range(1 << len(atoms)):
            B = padic.BallSet(3, [a for i, a in enumerate(atoms) if my >> i & 1])
            if is_feasible(ctx, A, B):
                v = objective(ctx, A, B)
                best = v if best is None or v > best else best
    assert pair.objective == best


def test_atom_bound_and_model_checks():
    G = cyclic(16)
    ctx = normalize_pair(G, FiniteSet(16, range(8)), FiniteSet(16, range(9)))
    with pytest.raises(ModelError):
        maximize_exact(ctx, bound=14)
    grid = AffineGrid((-1, 1), (-1, 1), 0.1)
    B = CellSet.box(0.1, (0, 0.2), (0, 0.2))
    with pytest.raises(NotApplicableError):
        normalize_pair(grid, B, B)
