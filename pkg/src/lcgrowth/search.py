"""Near-equality search and a falsification scan for the empty exceptional set.

Search works on finite table models.  Pairs are bitmasks; the neighbourhood
of (X, Y) toggles one element of X or of Y, keeping both nonempty.
"""

from __future__ import annotations

import logging
import random
import weakref
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .errors import NotApplicableError
from .groups import FiniteGroup
from .minimizer import maximize_exact, normalize_pair
from .setops import FiniteSet, set_to_json
from .subgroups import SubgroupWitness, constrained_subgroup_sup, subgroup_masks
from .theorems import CORRECTED, REPORT_SCHEMA, check_prop42, verify_main, verify_unimodular
from .values import to_json

log = logging.getLogger(__name__)

LAWS = ("unimodular", "main")


@dataclass
class ExtremalWitness:
    group: dict
    X: FiniteSet
    Y: FiniteSet
    slack: Fraction
    law: str
    subgroup: SubgroupWitness | None

    def to_json(self, G) -> dict:
        return {"group": self.group, "X": set_to_json(G, self.X), "Y": set_to_json(G, self.Y),
                "slack": to_json(self.slack), "law": self.law,
                "subgroup": None if self.subgroup is None else set_to_json(G, self.subgroup.carrier)}


def slack(G, X, Y, law: str = "unimodular", orientation: str = CORRECTED):
    """Gap between the measured product set and the law's bound (0 means equality)."""
    if law == "unimodular":
        return verify_unimodular(G, X, Y).slack
    if law == "main":
        return verify_main(G, X, Y, orientation=orientation).slack
    raise NotApplicableError(f"unknown law {law!r}")


_orders: "weakref.WeakKeyDictionary[FiniteGroup, tuple]" = weakref.WeakKeyDictionary()


def _proper_orders(G: FiniteGroup) -> tuple[int, ...]:
    out = _orders.get(G)
    if out is None:
        full = G.full_mask
        out = _orders[G] = tuple(sorted({m.bit_count() for m in subgroup_masks(G) if m != full}))
    return out


def fast_slack(G: FiniteGroup, xm: int, ym: int, law: str = "unimodular") -> Fraction:
    """Integer-arithmetic slack on a finite model; agrees with ``slack``."""
    xy = G.product_mask(xm, ym).bit_count()
    s = max((o for o in _proper_orders(G) if o <= xy), default=0)
    bound = min(xm.bit_count() + ym.bit_count() - s, G.n)
    if law == "unimodular":
        return Fraction(xy - bound)
    if law == "main":
        return 1 - Fraction(bound, xy)
    raise NotApplicableError(f"unknown law {law!r}")


def canonical_key(G: FiniteGroup, xm: int, ym: int) -> tuple[int, int]:
    """Least masks over left translates of X and right translates of Y."""
    return (min(G.left_mask(g, xm) for g in range(G.n)),
            min(G.right_mask(ym, g) for g in range(G.n)))


def random_mask(G: FiniteGroup, rng: random.Random) -> int:
    k = rng.randint(1, G.n)
    m = 0
    for x in rng.sample(range(G.n), k):
        m |= 1 << x
    return m


def _neighbours(G: FiniteGroup, xm: int, ym: int):
    for x in range(G.n):
        nx = xm ^ (1 << x)
        if nx:
            yield nx, ym
    for y in range(G.n):
        ny = ym ^ (1 << y)
        if ny:
            yield xm, ny


def find_near_equality(G, law: str = "unimodular", budget: int = 1000, seed: int = 0,
                       threshold=0, counterexamples: list | None = None) -> list[ExtremalWitness]:
    """Seeded restarts plus steepest-descent hill climbing on the slack.

    Every state visited with slack <= threshold is kept once per canonical key.
    Negative slacks are not witnesses; they go to ``counterexamples``.
    """
    if not isinstance(G, FiniteGroup):
        raise NotApplicableError("search runs on finite table models")
    if law not in LAWS:
        raise NotApplicableError(f"unknown law {law!r}")
    rng = random.Random(seed)
    found: dict[tuple[int, int], tuple[Fraction, int, int]] = {}
    for _ in range(budget):
        xm, ym = random_mask(G, rng), random_mask(G, rng)
        cur = fast_slack(G, xm, ym, law)
        while True:
            if cur < 0:
                log.warning("negative slack at X=%s Y=%s", bin(xm), bin(ym))
                if counterexamples is not None:
                    counterexamples.append((FiniteSet(G.n, mask=xm), FiniteSet(G.n, mask=ym), cur))
                break
            if cur <= threshold:
                key = canonical_key(G, xm, ym)
                if key not in found:
                    found[key] = (cur, xm, ym)
            best = None
            for nx, ny in _neighbours(G, xm, ym):
                v = fast_slack(G, nx, ny, law)
                if v < cur and (best is None or v < best[0]):
                    best = (v, nx, ny)
            if best is None:
                break
            cur, xm, ym = best
    out = []
    for key in sorted(found, key=lambda k: (found[k][0], k)):
        val, xm, ym = found[key]
        X, Y = FiniteSet(G.n, mask=xm), FiniteSet(G.n, mask=ym)
        XY = FiniteSet(G.n, mask=G.product_mask(xm, ym))
        _, w = constrained_subgroup_sup(G, XY, Fraction(1), Fraction(1))
        out.append(ExtremalWitness(dict(G.spec), X, Y, val, law, w))
    return out


def witnesses_to_json(G, witnesses: list[ExtremalWitness]) -> dict:
    return {"schema": REPORT_SCHEMA, "kind": "search", "count": len(witnesses),
            "witnesses": [w.to_json(G) for w in witnesses]}


# exceptional-set scan: any unimodular instance with D nonempty is logged

def exceptional_set_scan(G, trials: int | None = None, seed: int = 0) -> list[dict[str, Any]]:
    """Pairs whose exact maximizer leaves a nonempty exceptional set D.

    ``trials=None`` enumerates every pair of nonempty subsets; otherwise random
    pairs are drawn with the given seed.
    """
    if not isinstance(G, FiniteGroup):
        raise NotApplicableError("the scan runs on finite table models")
    full = G.full_mask

    def pairs():
        if trials is None:
            for xm in range(1, full + 1):
                for ym in range(1, full + 1):
                    yield xm, ym
        else:
            rng = random.Random(seed)
            for _ in range(trials):
                yield random_mask(G, rng), random_mask(G, rng)

    hits = []
    for xm, ym in pairs():
        X, Y = FiniteSet(G.n, mask=xm), FiniteSet(G.n, mask=ym)
        ctx = normalize_pair(G, X, Y)
        pair = maximize_exact(ctx)
        rep = check_prop42(G, X, Y, pair)
        if rep.D:
            log.warning("nonempty exceptional set at X=%s Y=%s", X.elements(), Y.elements())
            cover = covering_subgroup(G, xm, ym)
            hits.append({"X": X.elements(), "Y": Y.elements(), "D": rep.D.elements(),
                         "H": pair.H.elements(),
                         "covering_H": None if cover is None else FiniteSet(G.n, mask=cover).elements()})
    return hits


def _covered(G: FiniteGroup, g: int, h: int, xy: int) -> bool:
    for z in range(G.n):
        conj = G.left_mask(z, G.right_mask(h, G.inv(z)))
        if G.left_mask(g, conj) & ~xy == 0:
            return True
    return False


def covering_subgroup(G: FiniteGroup, xm: int, ym: int) -> int | None:
    """Largest subgroup H meeting the growth bound whose conjugate translates cover XY.

    This is the exceptional set being empty for some admissible H, rather than
    for the H produced by the maximizer.
    """
    xy = G.product_mask(xm, ym)
    size_xy = xy.bit_count()
    sx, sy = xm.bit_count(), ym.bit_count()
    for h in reversed(subgroup_masks(G)):
        if min(Fraction(sx + sy - h.bit_count(), size_xy), Fraction(G.n, size_xy)) > 1:
            continue
        if all(_covered(G, g, h, xy) for g in range(G.n) if xy >> g & 1):
            return h
    return None
