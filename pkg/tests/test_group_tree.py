import pytest
from hypothesis import given, settings, strategies as st

from treewalk.group_tree import IDENTITY, GroupSpec, bfs_path, shortlex_key

Z23 = GroupSpec(involutions="abc")
F2 = GroupSpec(free="st")
MIXED = GroupSpec(involutions="a", free="x")


def P(text, g=Z23):
    return g.parse(text)


def words(g, max_len=8):
    return st.lists(st.sampled_from(g.letters), max_size=max_len).map(g.reduce)


class TestReduceAndMultiply:
    def test_involution_squares_to_identity(self):
        assert Z23.reduce("aa") == IDENTITY

    def test_inner_cancellation(self):
        assert Z23.reduce("abbc") == P("ac")

    def test_free_inverse_cancels(self):
        g = GroupSpec(free="xy")
        assert g.reduce(["x", "x^", "y"]) == g.parse("y")

    def test_products(self):
        assert Z23.multiply(P("ab"), P("b")) == P("a")
        assert Z23.multiply(IDENTITY, P("abc")) == P("abc")
        # ab * bab = a(bb)ab = b
        assert Z23.multiply(Z23.inverse(P("ba")), P("bab")) == P("b")

    def test_parse_identity_spellings(self):
        for text in ("", "e", "1", "ε"):
            assert Z23.parse(text) == IDENTITY

    def test_parse_free_inverse(self):
        assert F2.parse("s t^") == F2.parse("st^")
        assert F2.format(F2.parse("st^s^")) == "st^s^"

    def test_parse_rejects_unknown_letter(self):
        with pytest.raises(ValueError, match="cannot parse"):
            Z23.parse("abd")

    @given(words(F2), words(F2))
    def test_inverse_of_product(self, u, v):
        lhs = F2.inverse(F2.multiply(u, v))
        assert lhs == F2.multiply(F2.inverse(v), F2.inverse(u))

    @given(words(MIXED), words(MIXED), words(MIXED))
    def test_associative(self, u, v, w):
        g = MIXED
        assert g.multiply(g.multiply(u, v), w) == g.multiply(u, g.multiply(v, w))

    @given(words(Z23))
    def test_format_parse_round_trip(self, w):
        assert Z23.parse(Z23.format(w)) == w


class TestValidation:
    def test_two_involutions_rejected(self):
        with pytest.raises(ValueError, match="valence < 3"):
            GroupSpec(involutions="ab")

    def test_single_free_generator_rejected(self):
        with pytest.raises(ValueError, match="valence < 3"):
            GroupSpec(free="x")

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            GroupSpec(involutions="ab", free="a")

    def test_valence(self):
        assert Z23.valence == 3
        assert F2.valence == 4
        assert MIXED.valence == 3


class TestGeometry:
    def test_distances(self):
        assert Z23.distance(IDENTITY, P("ab")) == 2
        assert Z23.distance(P("a"), P("ab")) == 1
        assert Z23.distance(P("ab"), P("ac")) == 2

    def test_geodesics(self):
        assert Z23.geodesic(IDENTITY, P("ab")) == (IDENTITY, P("a"), P("ab"))
        assert Z23.geodesic(P("abc"), P("abc")) == (P("abc"),)
        assert Z23.geodesic(P("ba"), IDENTITY) == (P("ba"), P("b"), IDENTITY)

    def test_balls(self):
        assert Z23.ball(IDENTITY, 0) == (IDENTITY,)
        assert set(Z23.ball(IDENTITY, 1)) == {IDENTITY, P("a"), P("b"), P("c")}
        assert len(Z23.ball(IDENTITY, 2)) == 10
        assert len(F2.sphere(IDENTITY, 3)) == 4 * 3 * 3

    def test_ball_is_shortlex_sorted(self):
        ball = Z23.ball(IDENTITY, 3)
        assert list(ball) == sorted(ball, key=shortlex_key)

    @given(words(Z23, 5), st.integers(0, 3))
    def test_ball_around_any_centre(self, y, r):
        ball = Z23.ball(y, r)
        assert len(set(ball)) == len(ball) == len(Z23.ball(IDENTITY, r))
        assert all(Z23.distance(y, w) <= r for w in ball)

    @given(words(F2), words(F2), words(F2))
    def test_distance_is_invariant(self, g, u, v):
        assert F2.distance(F2.multiply(g, u), F2.multiply(g, v)) == F2.distance(u, v)

    @given(words(Z23), words(Z23))
    def test_geodesic_consecutive_vertices_adjacent(self, u, v):
        path = Z23.geodesic(u, v)
        assert len(path) == Z23.distance(u, v) + 1
        assert all(Z23.distance(p, q) == 1 for p, q in zip(path, path[1:]))
        assert all(Z23.on_geodesic(p, u, v) for p in path)

    def test_shadow(self):
        a = P("a")
        assert Z23.shadow_contains(a, IDENTITY, P("ab"))
        assert not Z23.shadow_contains(a, IDENTITY, P("b"))
        assert Z23.shadow_contains(a, IDENTITY, a)
        with pytest.raises(ValueError):
            Z23.shadow_contains(P("ab"), IDENTITY, a)

    def test_visibility(self):
        a, ab, b = P("a"), P("ab"), P("b")
        assert Z23.is_visible((a, IDENTITY), (a, IDENTITY))
        assert Z23.is_visible((ab, a), (a, IDENTITY))
        assert not Z23.is_visible((b, IDENTITY), (a, IDENTITY))

    def test_visible_translate(self):
        assert Z23.find_visible_translate((P("a"), IDENTITY), (P("a"), IDENTITY)) == IDENTITY
        g = Z23.find_visible_translate((P("b"), IDENTITY), (P("a"), IDENTITY))
        assert Z23.is_visible((Z23.multiply(g, P("b")), g), (P("a"), IDENTITY))
        x, y = P("ab"), P("a")
        g = Z23.find_visible_translate((x, y), (y, x))
        assert Z23.is_visible((Z23.multiply(g, x), Z23.multiply(g, y)), (y, x))

    def test_canonicalize(self):
        tup = (P("ba"), P("b"), IDENTITY)
        assert Z23.canonicalize(tup) == (tup, IDENTITY)
        w, u = P("abc"), P("ba")
        canon, g = Z23.canonicalize((w, Z23.multiply(w, u)), anchor=0)
        assert canon == (IDENTITY, u)
        assert g == Z23.inverse(w)

    @given(words(F2, 4), words(F2, 4), words(F2, 4))
    def test_canonical_form_is_translation_invariant(self, h, u, v):
        moved = (F2.multiply(h, u), F2.multiply(h, v))
        assert F2.canonicalize(moved)[0] == F2.canonicalize((u, v))[0]


def test_bfs_path_respects_filter():
    goal = P("bcb")

    def nbrs(w):
        return Z23.neighbors(w)

    path = bfs_path(IDENTITY, lambda w: w == goal, nbrs)
    assert path == list(Z23.geodesic(IDENTITY, goal))
    assert bfs_path(IDENTITY, lambda w: w == goal, nbrs, allowed=lambda w: len(w) <= 1) is None
