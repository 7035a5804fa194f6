import networkx as nx
import numpy as np
import pytest

from conftest import ALL_WALKS, EXAMPLE_WALKS, measure, system
from treewalk.cavern import cavern_of_path
from treewalk.digraph import (INFINITE, DependencyDigraph, build_digraph, classify_orbit,
                              condense, digraph_path, ecluse_check, grading, grading_violations,
                              realize_digraph_path, stagnation_bound, to_dot)
from treewalk.group_tree import IDENTITY
from treewalk.oracle import sample_restricted_path

COMPONENTS = {"nn3": 1, "w1": 1, "w2": 3, "w3": 5, "f2": 1}
STAGNATION = {"nn3": 2, "w1": 3, "w2": 4, "w3": 4, "f2": 2}


def test_edges_come_from_monomials():
    s = system("nn3")
    d = build_digraph(s)
    assert len(d.edges) == 18
    assert {src for src, dst in d.edges if dst == 0} == {0, 2, 3}
    for m in s.monomials:
        assert all((f, m.row) in d.edges for f in m.factors)


@pytest.mark.parametrize("name", ALL_WALKS)
def test_condensation(name):
    d = build_digraph(system(name))
    cond = condense(d)
    assert len(cond.components) == COMPONENTS[name]
    assert len(cond.sinks) == 1
    assert sorted(v for c in cond.components for v in c) == list(range(len(system(name))))
    # topological: dag edges go forward
    assert all(s < t for s, t in cond.dag_edges)
    assert nx.number_strongly_connected_components(d.graph) == len(cond.components)
    sink = cond.sink
    assert all(cond.precedes(c, sink) for c in range(len(cond.components)))


def test_nn3_strongly_connected():
    cond = condense(build_digraph(system("nn3")))
    assert cond.sink_members == tuple(range(6))


def test_w3_not_strongly_connected():
    cond = condense(build_digraph(system("w3")))
    assert len(cond.components) >= 2
    assert len(cond.sink_members) == 12
    assert all(len(c) == 1 for i, c in enumerate(cond.components) if i != cond.sink)


class _One:
    def __len__(self):
        return 1


def test_single_vertex_is_its_own_sink():
    cond = condense(DependencyDigraph(_One(), frozenset()))
    assert cond.components == ((0,),) and cond.sink == 0


@pytest.mark.parametrize("name", ALL_WALKS)
def test_stagnation_bound(name):
    assert stagnation_bound(measure(name)) == STAGNATION[name]


@pytest.mark.parametrize("name", ALL_WALKS)
def test_grading_matches_sink(name):
    s = system(name)
    d = build_digraph(s)
    cond = condense(d)
    grades = grading(s)
    sink = set(cond.sink_members)
    for o in s.orbits:
        assert grades.is_infinite(o.id) == (o.id in sink)
        level = grades.levels[o.id]
        assert level is INFINITE or s.mu.range_k < level <= grades.bound
    assert grading_violations(d, grades) == []


def test_nn3_all_infinite():
    assert grading(system("nn3")).levels == (INFINITE,) * 6


def test_finite_levels_bound_sampled_excursions():
    s = system("w3")
    g = s.group
    grades = grading(s)
    rng = np.random.default_rng(30)
    for o in s.orbits:
        if grades.is_infinite(o.id):
            continue
        for _ in range(20):
            path = sample_restricted_path(s.mu, o.a, o.b, IDENTITY, 15, rng)
            assert max(g.distance(w, IDENTITY) for w in path) <= grades.levels[o.id]


def test_classification_stable_in_radius():
    s = system("w2")
    for o in s.orbits:
        assert classify_orbit(s, o.id) == classify_orbit(s, o.id, radius=s.truncation + 4)


def test_grading_violation_detection():
    s = system("w3")
    d = build_digraph(s)
    grades = grading(s)
    cond = condense(d)
    sink = cond.sink_members[0]
    finite = cond.components[0][0]
    bad = DependencyDigraph(s, d.edges | {(sink, finite)})
    assert grading_violations(bad, grades) == [(sink, finite)]


class TestRealisation:
    def test_rejects_empty_chain(self):
        with pytest.raises(ValueError, match="no path of length zero"):
            realize_digraph_path(system("nn3"), [0])

    @pytest.mark.parametrize("name", EXAMPLE_WALKS + ("nn3",))
    def test_single_edges(self, name):
        s = system(name)
        d = build_digraph(s)
        for child, parent in sorted(d.edges):
            real = realize_digraph_path(s, [child, parent])
            lab = cavern_of_path(s.mu, real.path, IDENTITY, s)
            inner, root = real.intervals
            assert lab.orbit_ids[root] == parent
            assert lab.orbit_ids[inner] == child
            assert lab.tree.parent[inner] == root

    @pytest.mark.parametrize("name", ["nn3", "w3"])
    def test_longer_chains(self, name):
        s = system(name)
        d = build_digraph(s)
        rng = np.random.default_rng(31)
        for _ in range(15):
            chain = [int(rng.integers(len(s)))]
            for _ in range(3):
                preds = sorted(src for src, dst in d.edges if dst == chain[0])
                if not preds:
                    break
                chain.insert(0, preds[int(rng.integers(len(preds)))])
            if len(chain) < 2:
                continue
            real = realize_digraph_path(s, chain)
            lab = cavern_of_path(s.mu, real.path, IDENTITY, s)
            assert [lab.orbit_ids[i] for i in real.intervals] == chain
            for inner, outer in zip(real.intervals, real.intervals[1:]):
                assert lab.tree.parent[inner] == outer

    def test_digraph_path(self):
        d = build_digraph(system("w3"))
        cond = condense(d)
        first = cond.components[0][0]
        sink = cond.sink_members[0]
        chain = digraph_path(d, first, sink)
        assert chain[0] == first and chain[-1] == sink
        assert digraph_path(d, sink, first) is None


class TestEcluse:
    def test_trivial(self):
        w = ecluse_check(system("nn3"), 2, 2)
        assert w.verified and w.prefix == () and w.suffix == ()

    def test_nn3_sandwich(self):
        s = system("nn3")
        rng = np.random.default_rng(32)
        inner = s.element(3)
        samples = [sample_restricted_path(s.mu, inner.a, inner.b, IDENTITY, 9, rng)
                   for _ in range(3)]
        assert len(set(samples)) > 1
        w = ecluse_check(s, 3, 0, samples)
        assert w is not None and w.verified

    def test_grading_blocks_sink_to_finite(self):
        s = system("w3")
        cond = condense(build_digraph(s))
        assert ecluse_check(s, cond.sink_members[0], cond.components[0][0]) is None
        assert ecluse_check(s, cond.components[0][0], cond.sink_members[0]).verified


def test_dot_output():
    s = system("w3")
    text = to_dot(build_digraph(s))
    assert text.startswith("digraph psi {")
    assert text.count("subgraph cluster_scc") == COMPONENTS["w3"]
    assert text.count("style=bold;") == 1
    assert 'o0 [label="(aba,a)"];' in text
    assert text == to_dot(build_digraph(s))
