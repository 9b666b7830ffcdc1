import math
import random
from fractions import Fraction

import pytest

from lcgrowth import padic
from lcgrowth.errors import ModelError, SpecError, WindowError
from lcgrowth.grid import CellSet
from lcgrowth.groups import AffineGrid, PAdicAffine, cyclic
from lcgrowth.setops import (LEFT, RIGHT, FiniteSet, delta_extrema, inverse_set, mu, nu, parse_set,
                             product, product_set, set_to_json, singleton, translate)
from lcgrowth.values import Interval

from oracles import padic_lambda, padic_mu, padic_points, padic_product_points, sumset

P3 = PAdicAffine(3, (-4, 4), (-4, 6))


def slab(G, k, center=0, d=0):
    return padic.ballset(G, [(k, center, d)])


def test_finite_measures_and_inverse():
    Z6 = cyclic(6)
    S = FiniteSet(6, [0, 3])
    assert mu(Z6, S) == nu(Z6, S) == 2
    assert inverse_set(Z6, FiniteSet(6, [1, 2])) == FiniteSet(6, [4, 5])
    assert inverse_set(Z6, singleton(Z6, 0)) == singleton(Z6, 0)
    assert all(len(translate(Z6, S, g, RIGHT)) == 2 for g in range(6))


def test_finite_product_set_matches_enumeration():
    Z7 = cyclic(7)
    XY = product_set(Z7, FiniteSet(7, [0, 1, 2]), FiniteSet(7, [0, 1, 2, 3]))
    assert XY.exact and XY.outer.elements() == [0, 1, 2, 3, 4, 5]
    rng = random.Random(3)
    G = cyclic(11)
    for _ in range(200):
        X = set(rng.sample(range(11), rng.randint(1, 11)))
        Y = set(rng.sample(range(11), rng.randint(1, 11)))
        assert set(product(G, FiniteSet(11, X), FiniteSet(11, Y))) == sumset(11, X, Y)


def test_padic_slab_measures():
    S = slab(P3, -1)
    assert mu(P3, S) == Fraction(1, 3) and nu(P3, S) == 1
    Sinv = inverse_set(P3, S)
    assert Sinv == slab(P3, 1, 0, 1)
    assert mu(P3, Sinv) == nu(P3, S) == 1


def test_padic_right_translate_scales_mu():
    S = slab(P3, 0)
    Sg = translate(P3, S, (1, 0), RIGHT)
    assert Sg == slab(P3, 1)
    assert mu(P3, Sg) == 3 == P3.modular((1, 0)) * mu(P3, S)


def test_padic_product_of_slabs():
    XY = product_set(P3, slab(P3, 0), slab(P3, -1))
    assert XY.exact and XY.outer == slab(P3, -1)


def test_padic_delta_extrema():
    S = slab(P3, 0) | slab(P3, -1)
    sup, inf, amax, amin = delta_extrema(P3, S)
    assert (sup, inf) == (1, Fraction(1, 3))
    assert amax[0] == 0 and amin[0] == -1


def test_canonical_merge_of_siblings():
    kids = [(0, c, 1) for c in range(3)]
    assert padic.ballset(P3, kids) == slab(P3, 0)
    assert padic.ballset(P3, kids[:2]) != slab(P3, 0)


def test_center_forms():
    assert padic.parse_center("2/3^2") == Fraction(2, 9)
    assert padic.parse_center("5/3") == Fraction(5, 3)
    with pytest.raises(SpecError):
        padic.parse_center("x")


def _random_ballset(rng, p, depth_max=2, k_max=2):
    triples = []
    for _ in range(rng.randint(1, 3)):
        d = rng.randint(0, depth_max)
        triples.append((rng.randint(0, k_max), rng.randrange(p ** d), d))
    return triples


@pytest.mark.parametrize("p", [2, 3])
def test_padic_products_against_residue_oracle(p):
    G = PAdicAffine(p, (-6, 6), (-2, 8))
    D = 4
    rng = random.Random(p)
    for _ in range(150):
        A, B = _random_ballset(rng, p), _random_ballset(rng, p)
        X, Y = padic.ballset(G, A), padic.ballset(G, B)
        pa, pb = padic_points(p, A, D), padic_points(p, B, D)
        pxy = padic_product_points(p, pa, pb, D)
        XY = product(G, X, Y)
        assert nu(G, X) == padic_lambda(p, pa, D)
        assert mu(G, X) == padic_mu(p, pa, D)
        assert nu(G, XY) == padic_lambda(p, pxy, D)
        assert mu(G, XY) == padic_mu(p, pxy, D)
        assert padic_points(p, [(b.k, b.center, b.depth) for b in XY.balls], D) == pxy


def test_padic_translate_out_of_window():
    G = PAdicAffine(3, (-1, 1), (0, 2))
    with pytest.raises(WindowError):
        translate(G, slab(G, 1), (1, 0), RIGHT)


GRID = AffineGrid((-3, 3), (-12, 12), 0.05)


def test_grid_box_measures():
    B = CellSet.box(GRID.h, (0, 1), (0, 1))
    assert nu(GRID, B).contains(1.0)
    assert mu(GRID, B).contains(1 - math.exp(-1))
    sup, inf, _, _ = delta_extrema(GRID, B)
    assert sup.contains(1.0) and inf.contains(math.exp(-1))


def test_grid_product_bracket_contains_closed_form():
    B = CellSet.box(GRID.h, (0, 1), (0, 1))
    XY = product_set(GRID, B, B)
    # XY = {u in [0,2], 0 <= b <= 1 + e^min(u,1)}
    assert XY.inner <= XY.outer
    m = mu(GRID, XY)
    n = nu(GRID, XY)
    assert m.lo <= 3 - math.exp(-1) - math.exp(-2) <= m.hi
    assert n.lo <= 2 * math.e + 1 <= n.hi


def test_grid_right_translate_bracket():
    B = CellSet.box(GRID.h, (0, 1), (0, 1))
    g = GRID.element(1.0, 0.0)
    Sg = translate(GRID, B, g, RIGHT)
    target = GRID.modular(g) * mu(GRID, B).mid
    m = mu(GRID, Sg)
    assert m.lo <= target <= m.hi


def test_grid_refinement_tightens_bracket():
    B = CellSet.box(0.1, (0, 1), (0, 1))
    G1 = AffineGrid((-3, 3), (-12, 12), 0.1)
    G2 = AffineGrid((-3, 3), (-12, 12), 0.05)
    w1 = mu(G1, product_set(G1, B, B)).width
    Bf = B.refine()
    w2 = mu(G2, product_set(G2, Bf, Bf)).width
    assert w2 < w1


def test_grid_outer_contains_sampled_products():
    rng = random.Random(0)
    h = GRID.h
    X = CellSet.box(h, (0, 0.5), (0, 1))
    Y = CellSet.box(h, (-0.5, 0.5), (-1, 0.5))
    XY = product_set(GRID, X, Y)
    for _ in range(2000):
        ux, bx = rng.uniform(0, 0.5), rng.uniform(0, 1)
        uy, by = rng.uniform(-0.5, 0.5), rng.uniform(-1, 0.5)
        u, b = ux + uy, bx + math.exp(ux) * by
        cell = (math.floor(u / h), math.floor(b / h))
        assert cell in XY.outer


def test_empty_product_rejected():
    Z5 = cyclic(5)
    with pytest.raises(ModelError):
        product_set(Z5, FiniteSet(5), FiniteSet(5, [1]))


def test_set_json_roundtrip():
    S = parse_set(P3, {"balls": [{"k": 0, "center": "1/3^1", "d": 0}, {"k": -1, "d": 2}]})
    assert parse_set(P3, set_to_json(P3, S)) == S
    Z6 = cyclic(6)
    assert parse_set(Z6, set_to_json(Z6, FiniteSet(6, [1, 4]))) == FiniteSet(6, [1, 4])
    with pytest.raises(SpecError):
        parse_set(Z6, {"elements": [9]})
