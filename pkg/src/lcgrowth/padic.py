"""Ball sets in the p-adic affine group.

A ball ``Ball(k, depth, center)`` is the compact open set
``{(k, b) : b in center + p^depth Z_p}`` on the scale-``k`` slab.  Centers are
kept canonical in ``[0, p^depth)`` so structural equality is set equality.
Compact open sets are finite disjoint unions of balls; ``BallSet`` keeps them
disjoint and merges every complete family of ``p`` sibling balls.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .errors import SpecError, WindowError
from .groups import PAdicAffine, valuation


@dataclass(frozen=True, order=True)
class Ball:
    k: int
    depth: int
    center: Fraction


def make_ball(p: int, k: int, center, depth: int) -> Ball:
    radius = Fraction(p) ** depth
    return Ball(int(k), int(depth), Fraction(center) % radius)


def ball_contains_point(p: int, ball: Ball, x) -> bool:
    k, b = x
    return k == ball.k and ((Fraction(b) - ball.center) / Fraction(p) ** ball.depth).denominator == 1


def ball_subset(p: int, a: Ball, b: Ball) -> bool:
    """a is contained in b."""
    return (a.k == b.k and a.depth >= b.depth
            and ((a.center - b.center) / Fraction(p) ** b.depth).denominator == 1)


def children(p: int, ball: Ball) -> list[Ball]:
    step = Fraction(p) ** ball.depth
    return [Ball(ball.k, ball.depth + 1, ball.center + i * step) for i in range(p)]


def parent(p: int, ball: Ball) -> Ball:
    return make_ball(p, ball.k, ball.center, ball.depth - 1)


def subtract_ball(p: int, a: Ball, b: Ball) -> list[Ball]:
    """Balls covering a minus b (disjoint)."""
    if ball_subset(p, a, b):
        return []
    if not ball_subset(p, b, a):
        return [a]
    out = []
    cur = a
    while cur.depth < b.depth:
        nxt = None
        for c in children(p, cur):
            if ball_subset(p, b, c):
                nxt = c
            else:
                out.append(c)
        cur = nxt
    return out


def intersect_balls(p: int, a: Ball, b: Ball) -> Ball | None:
    if ball_subset(p, a, b):
        return a
    if ball_subset(p, b, a):
        return b
    return None


def normalize(p: int, balls: Iterable[Ball]) -> tuple[Ball, ...]:
    """Canonical disjoint form: drop nested balls, then merge full sibling families."""
    kept: list[Ball] = []
    for ball in sorted(set(balls), key=lambda b: (b.k, b.depth, b.center)):
        if not any(ball_subset(p, ball, other) for other in kept):
            kept.append(ball)
    current = set(kept)
    changed = True
    while changed:
        changed = False
        families = defaultdict(list)
        for ball in current:
            families[parent(p, ball)].append(ball)
        for par, kids in families.items():
            if len(kids) == p:
                current.difference_update(kids)
                current.add(par)
                changed = True
    return tuple(sorted(current))


class BallSet:
    """Finite disjoint union of balls in one p-adic affine model."""

    __slots__ = ("p", "balls")

    def __init__(self, p: int, balls: Iterable[Ball] = ()):
        self.p = p
        self.balls = normalize(p, balls)

    @classmethod
    def _raw(cls, p, balls):
        obj = cls.__new__(cls)
        obj.p = p
        obj.balls = balls
        return obj

    def __repr__(self):
        inner = ", ".join(f"({b.k}, {b.center}+{self.p}^{b.depth}Z)" for b in self.balls)
        return f"BallSet[{inner}]"

    def __eq__(self, other):
        return isinstance(other, BallSet) and self.p == other.p and self.balls == other.balls

    def __hash__(self):
        return hash((self.p, self.balls))

    def __bool__(self):
        return bool(self.balls)

    def __len__(self):
        return len(self.balls)

    def __iter__(self):
        return iter(self.balls)

    def __or__(self, other: "BallSet") -> "BallSet":
        return BallSet(self.p, self.balls + other.balls)

    def __and__(self, other: "BallSet") -> "BallSet":
        out = []
        for a in self.balls:
            for b in other.balls:
                c = intersect_balls(self.p, a, b)
                if c is not None:
                    out.append(c)
        return BallSet(self.p, out)

    def __sub__(self, other: "BallSet") -> "BallSet":
        pieces = list(self.balls)
        for b in other.balls:
            nxt = []
            for a in pieces:
                nxt.extend(subtract_ball(self.p, a, b))
            pieces = nxt
        return BallSet(self.p, pieces)

    def __le__(self, other: "BallSet") -> bool:
        return not (self - other)

    def contains_point(self, x) -> bool:
        return any(ball_contains_point(self.p, b, x) for b in self.balls)

    def refine(self, depth: int) -> list[Ball]:
        """Split every ball down to the given depth (balls already finer are kept)."""
        out = []
        stack = list(self.balls)
        while stack:
            b = stack.pop()
            if b.depth >= depth:
                out.append(b)
            else:
                stack.extend(children(self.p, b))
        return sorted(out)


# group operations on balls; all results are checked against the model window

def check_ball(G: PAdicAffine, ball: Ball) -> Ball:
    if not G.k_window[0] <= ball.k <= G.k_window[1]:
        raise WindowError("ball scale k", ball.k)
    if not G.d_window[0] <= ball.depth <= G.d_window[1]:
        raise WindowError("ball depth d", ball.depth)
    if ball.center != 0 and valuation(ball.center, G.p) < G.d_window[0]:
        raise WindowError("ball center valuation", valuation(ball.center, G.p))
    return ball


def ball_mul(G: PAdicAffine, a: Ball, b: Ball) -> Ball:
    """(k, c + p^d Z)(k', c' + p^d' Z) = (k + k', c + p^k c' + p^min(d, k + d') Z)."""
    depth = min(a.depth, a.k + b.depth)
    return check_ball(G, make_ball(G.p, a.k + b.k, a.center + G.pw(a.k) * b.center, depth))


def ball_inv(G: PAdicAffine, a: Ball) -> Ball:
    return check_ball(G, make_ball(G.p, -a.k, -G.pw(-a.k) * a.center, a.depth - a.k))


def ball_left(G: PAdicAffine, g, a: Ball) -> Ball:
    j, t = g
    return check_ball(G, make_ball(G.p, j + a.k, t + G.pw(j) * a.center, a.depth + j))


def ball_right(G: PAdicAffine, a: Ball, g) -> Ball:
    j, t = g
    return check_ball(G, make_ball(G.p, a.k + j, a.center + G.pw(a.k) * t, a.depth))


def parse_center(s) -> Fraction:
    """Accepts ints, "m/n" strings, and the "m/p^e" form."""
    if isinstance(s, int):
        return Fraction(s)
    s = str(s).strip()
    if "^" in s:
        num, den = s.split("/")
        base, exp = den.split("^")
        return Fraction(int(num)) / Fraction(int(base)) ** int(exp)
    try:
        return Fraction(s)
    except ValueError:
        raise SpecError(f"bad ball center {s!r}") from None


def ballset(G: PAdicAffine, triples: Iterable[tuple]) -> BallSet:
    """Build a BallSet from (k, center, depth) triples, checking the window."""
    balls = [check_ball(G, make_ball(G.p, k, parse_center(c), d)) for k, c, d in triples]
    return BallSet(G.p, balls)
