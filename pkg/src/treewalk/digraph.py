"""Dependency digraph of the orbit system and its strongly connected pieces.

There is an edge ``t -> s`` when ``J[t]`` occurs in a monomial of
``psi_s``.  An orbit is *finite* when its restricted paths have bounded
excursion from the anchor; the finite orbits form the non-sink part of the
condensation.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

import networkx as nx

from .group_tree import IDENTITY, Word, bfs_path
from .walk_kernel import StepMeasure, connecting_excursion
from .xi_psi import PsiSystem, XiElement

INFINITE = None  # level of an orbit with unbounded excursions


@dataclass(frozen=True)
class DependencyDigraph:
    system: PsiSystem
    edges: frozenset[tuple[int, int]]

    @property
    def graph(self) -> nx.DiGraph:
        gr = nx.DiGraph()
        gr.add_nodes_from(range(len(self.system)))
        gr.add_edges_from(sorted(self.edges))
        return gr


@dataclass(frozen=True)
class Condensation:
    """Strong components in topological order, sources first."""

    components: tuple[tuple[int, ...], ...]
    component_of: dict[int, int]
    dag_edges: frozenset[tuple[int, int]]
    sinks: tuple[int, ...]

    @property
    def sink(self) -> int:
        if len(self.sinks) != 1:
            raise ValueError("condensation has more than one sink")
        return self.sinks[0]

    @property
    def sink_members(self) -> tuple[int, ...]:
        return self.components[self.sink]

    def precedes(self, c1: int, c2: int) -> bool:
        """Whether component ``c1`` reaches ``c2`` (reflexive)."""
        if c1 == c2:
            return True
        seen = {c1}
        queue = deque([c1])
        while queue:
            u = queue.popleft()
            for s, t in self.dag_edges:
                if s == u and t not in seen:
                    if t == c2:
                        return True
                    seen.add(t)
                    queue.append(t)
        return False


@dataclass(frozen=True)
class Grading:
    """Excursion level per orbit; ``None`` marks unbounded excursions."""

    bound: int
    levels: tuple[int | None, ...]

    def is_infinite(self, oid: int) -> bool:
        return self.levels[oid] is INFINITE


@dataclass(frozen=True)
class Realization:
    """Concrete path realising a chain of digraph edges."""

    path: tuple[Word, ...]
    intervals: tuple[tuple[int, int], ...]   # innermost first, root last
    inner_shift: Word = field(default=())


@dataclass(frozen=True)
class EcluseWitness:
    prefix: tuple[Word, ...]
    suffix: tuple[Word, ...]
    shift: Word
    verified: bool


def build_digraph(system: PsiSystem) -> DependencyDigraph:
    edges = set()
    for m in system.monomials:
        for f in m.factors:
            edges.add((f, m.row))
    return DependencyDigraph(system, frozenset(edges))


def condense(digraph: DependencyDigraph) -> Condensation:
    gr = digraph.graph
    comps = [tuple(sorted(c)) for c in nx.strongly_connected_components(gr)]
    cond = nx.condensation(gr, scc=[set(c) for c in comps])
    order = list(nx.lexicographical_topological_sort(
        cond, key=lambda n: min(cond.nodes[n]["members"])))
    renum = {old: new for new, old in enumerate(order)}
    components = tuple(tuple(sorted(cond.nodes[old]["members"])) for old in order)
    component_of = {v: i for i, c in enumerate(components) for v in c}
    dag_edges = frozenset((renum[s], renum[t]) for s, t in cond.edges)
    sinks = tuple(i for i in range(len(components)) if not any(s == i for s, _ in dag_edges))
    return Condensation(components, component_of, dag_edges, sinks)


def stagnation_bound(mu: StepMeasure) -> int:
    """Excursion threshold beyond which restricted paths can reach arbitrarily far."""
    return connecting_excursion(mu) + mu.range_k


def _forward_region(mu: StepMeasure, a: Word, y: Word, radius: int) -> set[Word]:
    g = mu.group
    k = mu.range_k
    seen = {a}
    queue = deque([a])
    while queue:
        v = queue.popleft()
        for u, _ in mu.step_targets(v):
            d = g.distance(u, y)
            if k < d <= radius and u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def _backward_region(mu: StepMeasure, b: Word, y: Word, radius: int) -> set[Word]:
    g = mu.group
    k = mu.range_k
    back = mu.reversed()
    seen: set[Word] = set()
    queue = deque()
    for u, _ in back.step_targets(b):
        if k < g.distance(u, y) <= radius and u not in seen:
            seen.add(u)
            queue.append(u)
    while queue:
        v = queue.popleft()
        for u, _ in back.step_targets(v):
            if k < g.distance(u, y) <= radius and u not in seen:
                seen.add(u)
                queue.append(u)
    return seen


def excursion_set(mu: StepMeasure, elem: XiElement, radius: int) -> set[Word]:
    """Vertices within ``radius`` lying on some restricted path of ``elem``."""
    fwd = _forward_region(mu, elem.a, elem.y, radius)
    bwd = _backward_region(mu, elem.b, elem.y, radius)
    return fwd & bwd


def classify_orbit(system: PsiSystem, oid: int, bound: int | None = None,
                   radius: int | None = None) -> int | None:
    """Maximal excursion of the orbit's paths, or ``INFINITE`` beyond ``bound``."""
    mu = system.mu
    g = mu.group
    bound = stagnation_bound(mu) if bound is None else bound
    radius = bound + 2 * mu.range_k + 1 if radius is None else radius
    elem = system.element(oid)
    live = excursion_set(mu, elem, radius)
    level = max(g.distance(w, elem.y) for w in live)
    return INFINITE if level > bound else level


def grading(system: PsiSystem, bound: int | None = None) -> Grading:
    bound = stagnation_bound(system.mu) if bound is None else bound
    levels = tuple(classify_orbit(system, o.id, bound) for o in system.orbits)
    return Grading(bound, levels)


def grading_violations(digraph: DependencyDigraph, grades: Grading) -> list[tuple[int, int]]:
    """Edges whose source sits at a strictly higher level than their aim."""
    def rank(level):
        return float("inf") if level is INFINITE else level

    return sorted((s, t) for s, t in digraph.edges
                  if rank(grades.levels[s]) > rank(grades.levels[t]))


# -- realising digraph paths ---------------------------------------------


def shortest_restricted_path(mu: StepMeasure, elem: XiElement, radius: int) -> tuple[Word, ...]:
    g = mu.group
    k = mu.range_k
    y = elem.y

    def allowed(w):
        return k < g.distance(w, y) <= radius

    path = bfs_path(elem.a, lambda w: w == elem.b,
                    lambda v: [u for u, _ in mu.step_targets(v)], allowed)
    if path is None:
        raise ValueError("no restricted path for this pair")
    return tuple(path)


def _splice(pieces: Sequence[Sequence[Word]]) -> tuple[tuple[Word, ...], list[int]]:
    """Concatenate paths sharing endpoints; returns the path and piece offsets."""
    out = list(pieces[0])
    starts = [0]
    for p in pieces[1:]:
        if p[0] != out[-1]:
            raise ValueError("pieces do not join")
        starts.append(len(out) - 1)
        out.extend(p[1:])
    return tuple(out), starts


def _expand_edge(system: PsiSystem, child: int, parent: int):
    """A one-step expansion of ``parent`` with ``child`` among its pieces."""
    for c, t in system.provenance[parent]:
        if child in t.orbit_ids:
            return c, t, t.orbit_ids.index(child)
    raise ValueError(f"no edge {child} -> {parent}")


def realize_digraph_path(system: PsiSystem, chain: Sequence[int]) -> Realization:
    """Path for ``chain[-1]`` whose cavern contains the edges of ``chain``.

    ``chain`` lists orbit ids from the innermost source to the final aim,
    each consecutive pair being a digraph edge.
    """
    if len(chain) < 2:
        raise ValueError("no path of length zero")
    mu = system.mu
    g = mu.group
    radius = system.truncation
    inner = system.element(chain[0])
    path = shortest_restricted_path(mu, inner, radius)
    intervals = [(0, len(path) - 1)]
    shift: Word = IDENTITY
    for child, parent in zip(chain, chain[1:]):
        elem = system.element(parent)
        c, t, pos = _expand_edge(system, child, parent)
        segs = []
        for q, piece in enumerate(t.pieces):
            if q == pos:
                segs.append(tuple(g.multiply(piece.y, w) for w in path))
            else:
                segs.append(shortest_restricted_path(mu, piece, radius))
        body, starts = _splice(segs)
        new_path = (elem.a,) + body
        off = starts[pos] + 1
        intervals = [(i + off, j + off) for i, j in intervals] + [(0, len(new_path) - 1)]
        shift = g.multiply(t.pieces[pos].y, shift)
        path = new_path
    return Realization(path, tuple(intervals), shift)


def digraph_path(digraph: DependencyDigraph, source: int, target: int) -> list[int] | None:
    """Shortest chain of edges ``source -> ... -> target``."""
    try:
        return nx.shortest_path(digraph.graph, source, target)
    except nx.NetworkXNoPath:
        return None


def ecluse_check(system: PsiSystem, inner: int, outer: int, samples: Sequence[Sequence[Word]] = ()):
    """Whether every path of ``inner`` sits inside some path of ``outer``.

    Returns ``None`` when no digraph chain links the two orbits, otherwise
    an :class:`EcluseWitness` with a fixed prefix and suffix.  Each sample
    path of ``inner`` (anchored at the identity) is spliced in and checked.
    """
    from .cavern import CavernError, check_restricted_path

    if inner == outer:
        return EcluseWitness((), (), IDENTITY, True)
    digraph = build_digraph(system)
    chain = digraph_path(digraph, inner, outer)
    if chain is None:
        return None
    mu = system.mu
    g = mu.group
    real = realize_digraph_path(system, chain)
    i, j = real.intervals[0]
    prefix, suffix = real.path[:i], real.path[j + 1:]
    ok = True
    outer_elem = system.element(outer)
    for gamma in samples:
        moved = tuple(g.multiply(real.inner_shift, w) for w in gamma)
        full = prefix + moved + suffix
        try:
            check_restricted_path(mu, full, outer_elem.y)
        except CavernError:
            ok = False
            continue
        if full[0] != outer_elem.a or full[-1] != outer_elem.b:
            ok = False
    return EcluseWitness(prefix, suffix, real.inner_shift, ok)


def to_dot(digraph: DependencyDigraph, cond: Condensation | None = None) -> str:
    """Graphviz text with one cluster per strong component; the sink is bold."""
    system = digraph.system
    cond = condense(digraph) if cond is None else cond
    out = ["digraph psi {"]
    for ci, comp in enumerate(cond.components):
        out.append(f"  subgraph cluster_scc{ci} {{")
        if ci in cond.sinks:
            out.append("    style=bold;")
        out.append(f'    label="scc{ci}";')
        for v in comp:
            out.append(f'    o{v} [label="{system.label(v)}"];')
        out.append("  }")
    for s, t in sorted(digraph.edges):
        out.append(f"  o{s} -> o{t};")
    out.append("}")
    return "\n".join(out)
