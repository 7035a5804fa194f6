"""Group-invariant transition kernels ``p(x, y) = mu(x^-1 y)``."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Mapping

from .group_tree import IDENTITY, GroupSpec, Word, shortlex_key


class MeasureError(ValueError):
    pass


class Irreducibility(Enum):
    YES = "yes"
    NO = "no"
    INCONCLUSIVE = "inconclusive"


@dataclass(frozen=True)
class StepMeasure:
    """Finitely supported probability measure on the group.

    Weights are exact rationals.  ``steps`` lists ``(word, weight)`` in
    shortlex order of the word.
    """

    group: GroupSpec
    steps: tuple[tuple[Word, Fraction], ...]
    denominator: int = field(init=False, repr=False)
    int_steps: tuple[tuple[Word, int], ...] = field(init=False, repr=False)

    def __post_init__(self):
        merged: dict[Word, Fraction] = {}
        for w, p in self.steps:
            p = Fraction(p)
            if p < 0:
                raise MeasureError("measure not stochastic: negative weight")
            if p:
                merged[w] = merged.get(w, Fraction(0)) + p
        if sum(merged.values(), Fraction(0)) != 1:
            raise MeasureError("measure not stochastic")
        if set(merged) <= {IDENTITY}:
            raise MeasureError("measure is supported on the identity")
        steps = tuple(sorted(merged.items(), key=lambda kv: shortlex_key(kv[0])))
        q = math.lcm(*(p.denominator for _, p in steps))
        object.__setattr__(self, "steps", steps)
        object.__setattr__(self, "denominator", q)
        object.__setattr__(self, "int_steps", tuple((w, int(p * q)) for w, p in steps))

    @classmethod
    def from_words(cls, group: GroupSpec, weights: Mapping[str, object]) -> "StepMeasure":
        """Build from ``{"ab": "1/4", ...}``; reduced duplicates are merged."""
        steps = [(group.parse(w), Fraction(str(p))) for w, p in weights.items()]
        return cls(group, tuple(steps))

    @classmethod
    def uniform(cls, group: GroupSpec, words) -> "StepMeasure":
        words = list(words)
        return cls.from_words(group, {w: Fraction(1, len(words)) for w in words})

    @property
    def support(self) -> tuple[Word, ...]:
        return tuple(w for w, _ in self.steps)

    @property
    def range_k(self) -> int:
        return max(len(w) for w in self.support)

    def weight(self, w: Word) -> Fraction:
        for s, p in self.steps:
            if s == w:
                return p
        return Fraction(0)

    def kernel(self, x: Word, y: Word) -> Fraction:
        """One-step transition probability ``p(x, y)``."""
        g = self.group
        return self.weight(g.multiply(g.inverse(x), y))

    def step_targets(self, x: Word) -> list[tuple[Word, int]]:
        """Successors of ``x`` with integer weights over ``denominator``."""
        g = self.group
        return [(g.multiply(x, s), w) for s, w in self.int_steps]

    def reversed(self) -> "StepMeasure":
        g = self.group
        return StepMeasure(g, tuple((g.inverse(s), p) for s, p in self.steps))

    def describe(self) -> str:
        g = self.group
        return ", ".join(f"{g.format(s)}:{p}" for s, p in self.steps)


@dataclass(frozen=True)
class KernelInfo:
    range_k: int
    period: int
    irreducible: Irreducibility


def _reachable(mu: StepMeasure, start: Word, radius: int) -> set[Word]:
    g = mu.group
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w, _ in mu.step_targets(v):
            if w not in seen and g.distance(w, start) <= radius:
                seen.add(w)
                queue.append(w)
    return seen


def _never_cancels(mu: StepMeasure) -> bool:
    """Certificate that the walk from the identity never shortens a word.

    The state is the suffix of length ``k``; if no step taken from any
    reachable state cancels a letter, word length grows at every step, so
    the identity is never revisited.
    """
    g = mu.group
    k = mu.range_k
    start = IDENTITY
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for s, _ in mu.int_steps:
            w = g.multiply(v, s)
            if len(w) != len(v) + len(s):
                return False
            w = w[-k:]
            if w not in seen:
                seen.add(w)
                queue.append(w)
    return True


def check_irreducible(mu: StepMeasure, depth: int | None = None) -> Irreducibility:
    """Decide whether the support generates the group as a semigroup.

    ``YES`` when every vertex of the ``(k+1)``-ball is reachable from the
    identity and vice versa inside the ball of radius ``depth``.  ``NO``
    when the walk provably never returns to the identity.
    """
    k = mu.range_k
    depth = 4 * (k + 1) if depth is None else depth
    g = mu.group
    target = g.ball(IDENTITY, k + 1)
    fwd = _reachable(mu, IDENTITY, depth)
    bwd = _reachable(mu.reversed(), IDENTITY, depth)
    if all(v in fwd for v in target) and all(v in bwd for v in target):
        return Irreducibility.YES
    if _never_cancels(mu) or _never_cancels(mu.reversed()):
        return Irreducibility.NO
    return Irreducibility.INCONCLUSIVE


def return_lengths(mu: StepMeasure, nmax: int) -> list[int]:
    """Lengths ``n <= nmax`` with ``p^(n)(e, e) > 0``."""
    g = mu.group
    k = mu.range_k
    layer = {IDENTITY}
    out = []
    for n in range(1, nmax + 1):
        left = nmax - n
        nxt = set()
        for v in layer:
            for w, _ in mu.step_targets(v):
                if len(w) <= k * left:
                    nxt.add(w)
        layer = nxt
        if IDENTITY in layer:
            out.append(n)
    return out


def _local_period(mu: StepMeasure, radius: int) -> int:
    """Period of the identity's strong component inside ``B(e, radius)``.

    Levels are BFS distances from the identity; the period is the gcd of
    ``level(u) + 1 - level(v)`` over edges ``u -> v`` of the component.
    """
    level = {IDENTITY: 0}
    queue = deque([IDENTITY])
    while queue:
        v = queue.popleft()
        for w, _ in mu.step_targets(v):
            if w not in level and len(w) <= radius:
                level[w] = level[v] + 1
                queue.append(w)
    back = _reachable(mu.reversed(), IDENTITY, radius)
    comp = [v for v in level if v in back]
    d = 0
    for v in comp:
        for w, _ in mu.step_targets(v):
            if w in level and w in back:
                d = math.gcd(d, abs(level[v] + 1 - level[w]))
    return d


def period(mu: StepMeasure, radius: int | None = None) -> int:
    """gcd of return lengths, required to agree on balls of two radii."""
    k = mu.range_k
    r1 = 2 * (k + 1) if radius is None else radius
    d1 = _local_period(mu, r1)
    d2 = _local_period(mu, 2 * r1)
    if d1 == 0 or d2 == 0:
        raise ArithmeticError("no return to the identity inside the ball")
    if d1 != d2:
        raise ArithmeticError("period did not stabilise; increase radius")
    return d1


def path_length_residue(mu: StepMeasure, x: Word, y: Word, d: int,
                        max_nodes: int = 200000) -> int:
    """Length modulo ``d`` of any admissible path from ``x`` to ``y``."""
    g = mu.group
    target = g.multiply(g.inverse(x), y)
    if target == IDENTITY:
        return 0
    dist = {IDENTITY: 0}
    queue = deque([IDENTITY])
    while queue:
        v = queue.popleft()
        for w, _ in mu.step_targets(v):
            if w in dist:
                continue
            dist[w] = dist[v] + 1
            if w == target:
                return dist[w] % d
            queue.append(w)
            if len(dist) > max_nodes:
                break
    raise ArithmeticError("target not reached; kernel may be reducible")


def kernel_info(mu: StepMeasure) -> KernelInfo:
    return KernelInfo(mu.range_k, period(mu), check_irreducible(mu))


def connecting_excursion(mu: StepMeasure, max_radius: int = 64) -> int:
    """Largest, over neighbour pairs ``(e, s)``, of the smallest excursion
    ``max_i d(w_i, s)`` of an admissible path from ``e`` to ``s``.

    Every oriented tree edge is a translate of some ``(e, s)``.
    """
    g = mu.group
    worst = 0
    for s in g.letters:
        y = (s,)
        for radius in range(1, max_radius + 1):
            if _reaches_within(mu, IDENTITY, y, radius):
                worst = max(worst, radius)
                break
        else:
            raise ArithmeticError("neighbour not reachable; kernel may be reducible")
    return worst


def _reaches_within(mu: StepMeasure, start: Word, target: Word, radius: int) -> bool:
    g = mu.group
    seen = {start}
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for w, _ in mu.step_targets(v):
            if w == target:
                return True
            if w not in seen and g.distance(w, target) <= radius:
                seen.add(w)
                queue.append(w)
    return False
