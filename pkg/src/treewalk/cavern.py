"""Cavern trees of integer height profiles and their path labels.

A profile ``g(0..n)`` with ``g(t) >= g(0) > g(n)`` for ``0 <= t < n`` is a
cavern function.  Its admissible intervals ``[i, j]`` (the same inequality
on the sub-profile) form a rooted tree: each interval has as children the
pieces between consecutive new strict minima after its left end.

Applied to ``g(i) = d(w_i, y)`` along a restricted path, each interval is
labelled by the anchored pair it traverses.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .group_tree import Word
from .walk_kernel import StepMeasure
from .xi_psi import PsiSystem, XiElement

Interval = tuple[int, int]


class CavernError(ValueError):
    pass


def is_admissible(g: Sequence[int], i: int, j: int) -> bool:
    """``g(t) >= g(i) > g(j)`` for ``i <= t < j``."""
    if not 0 <= i < j < len(g):
        return False
    gi = g[i]
    if not gi > g[j]:
        return False
    return all(g[t] >= gi for t in range(i, j))


def validate_cavern(g: Sequence[int]) -> None:
    if len(g) < 2:
        raise CavernError("cavern function needs length at least one")
    if not is_admissible(g, 0, len(g) - 1):
        raise CavernError("profile is not a cavern function")


def decompose(g: Sequence[int], interval: Interval) -> list[Interval]:
    """Children of an admissible interval, left to right."""
    a, b = interval
    cuts = [a + 1]
    while cuts[-1] != b:
        s = cuts[-1]
        t = s + 1
        while g[t] >= g[s]:
            t += 1
        cuts.append(t)
    return [(cuts[i], cuts[i + 1]) for i in range(len(cuts) - 1)]


@dataclass(frozen=True)
class CavernTree:
    heights: tuple[int, ...]
    root: Interval
    children: dict[Interval, tuple[Interval, ...]]
    parent: dict[Interval, Interval]

    @property
    def intervals(self) -> tuple[Interval, ...]:
        return tuple(self.children)

    @property
    def edges(self) -> tuple[tuple[Interval, Interval], ...]:
        """Edges ``child -> parent``."""
        return tuple((c, p) for c, p in self.parent.items())

    def depth(self, interval: Interval) -> int:
        d = 0
        while interval != self.root:
            interval = self.parent[interval]
            d += 1
        return d

    def theta(self, m: int) -> tuple[Interval, ...]:
        """Sources of directed paths of length ``m`` ending at the root."""
        return tuple(sorted(i for i in self.children if self.depth(i) == m))

    def path_to_root(self, interval: Interval) -> list[Interval]:
        out = [interval]
        while out[-1] != self.root:
            out.append(self.parent[out[-1]])
        return out

    def render(self) -> str:
        lines: list[str] = []

        def walk(node: Interval, depth: int):
            lines.append("  " * depth + f"[{node[0]},{node[1]}]")
            for c in self.children[node]:
                walk(c, depth + 1)

        walk(self.root, 0)
        return "\n".join(lines)

    def to_dot(self, labels: dict[Interval, str] | None = None) -> str:
        def name(i: Interval) -> str:
            return f"i{i[0]}_{i[1]}"

        out = ["digraph cavern {"]
        for node in sorted(self.children):
            text = f"[{node[0]},{node[1]}]"
            if labels and node in labels:
                text += " " + labels[node]
            out.append(f'  {name(node)} [label="{text}"];')
        for c, p in sorted(self.edges):
            out.append(f"  {name(c)} -> {name(p)};")
        out.append("}")
        return "\n".join(out)


def build_cavern(g: Sequence[int]) -> CavernTree:
    g = tuple(int(v) for v in g)
    validate_cavern(g)
    root = (0, len(g) - 1)
    children: dict[Interval, tuple[Interval, ...]] = {}
    parent: dict[Interval, Interval] = {}
    stack = [root]
    while stack:
        node = stack.pop()
        kids = tuple(decompose(g, node))
        children[node] = kids
        for c in kids:
            parent[c] = node
            stack.append(c)
    return CavernTree(g, root, children, parent)


@dataclass(frozen=True)
class LabeledCavernTree:
    tree: CavernTree
    path: tuple[Word, ...]
    y: Word
    labels: dict[Interval, XiElement]
    orbit_ids: dict[Interval, int | None]

    def label_text(self, system: PsiSystem) -> dict[Interval, str]:
        g = system.group
        return {i: f"({g.format(e.a)},{g.format(e.b)})_{g.format(e.y)}"
                for i, e in self.labels.items()}


def check_restricted_path(mu: StepMeasure, path: Sequence[Word], y: Word) -> None:
    """Raise unless ``path`` is an admissible path anchored at ``y``."""
    g = mu.group
    k = mu.range_k
    if len(path) < 2:
        raise CavernError("path needs at least one step")
    if g.distance(path[0], y) != k + 1:
        raise CavernError("path must start at distance k+1 from the anchor")
    if any(g.distance(w, y) <= k for w in path[:-1]):
        raise CavernError("path enters the ball before its end")
    if g.distance(path[-1], y) > k:
        raise CavernError("path must end inside the ball")
    for u, v in zip(path, path[1:]):
        if mu.kernel(u, v) == 0:
            raise CavernError("path uses a step outside the support")


def cavern_of_path(mu: StepMeasure, path: Sequence[Word], y: Word,
                   system: PsiSystem | None = None) -> LabeledCavernTree:
    """Cavern tree of ``d(w_i, y)`` with every interval labelled by its pair."""
    g = mu.group
    k = mu.range_k
    path = tuple(path)
    check_restricted_path(mu, path, y)
    tree = build_cavern([g.distance(w, y) for w in path])
    labels = {}
    ids = {}
    for i, j in tree.intervals:
        anchor = g.point_on_geodesic(path[i], y, k + 1)
        elem = XiElement(path[i], path[j], anchor)
        labels[(i, j)] = elem
        ids[(i, j)] = system.orbit_id(elem) if system is not None else None
    return LabeledCavernTree(tree, path, y, labels, ids)
