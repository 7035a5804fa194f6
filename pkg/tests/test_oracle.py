import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from treewalk import walks
from treewalk.cavern import check_restricted_path
from treewalk.group_tree import IDENTITY
from treewalk.oracle import (SeriesTable, dp_first_passage, dp_full, dp_isotropic, dp_restricted,
                             dp_restricted_all, fit_asymptotics, is_radial, sample_restricted_path)


def enumerate_paths(mu, x, n):
    """Every weighted step sequence of length ``n`` from ``x``; test-only brute force."""
    g = mu.group
    for seq in itertools.product(mu.steps, repeat=n):
        path = [x]
        w = Fraction(1)
        for s, p in seq:
            path.append(g.multiply(path[-1], s))
            w *= p
        yield path, w


def brute_restricted(mu, a, b, y, n):
    g = mu.group
    k = mu.range_k
    total = Fraction(0)
    for path, w in enumerate_paths(mu, a, n):
        inside = [g.distance(v, y) <= k for v in path[1:]]
        if path[-1] == b and inside[-1] and not any(inside[:-1]):
            total += w
    return total


def test_small_return_probabilities():
    mu = walks.nn3()
    t = dp_full(mu, IDENTITY, IDENTITY, 4)
    assert t[0] == 1
    assert t[2] == Fraction(1, 3)
    assert t[4] == Fraction(5, 27)
    assert dp_full(mu, IDENTITY, mu.group.parse("a"), 0)[0] == 0


@pytest.mark.parametrize("name", ["nn3", "w1", "w3", "f2"])
def test_full_and_restricted_match_enumeration(name):
    mu = walks.NAMED[name]()
    g = mu.group
    k = mu.range_k
    nmax = 5 if len(mu.steps) <= 3 else 4
    x = g.parse("ab") if name != "f2" else g.parse("st")
    full = dp_full(mu, IDENTITY, x, nmax)
    for n in range(nmax + 1):
        brute = sum((w for p, w in enumerate_paths(mu, IDENTITY, n) if p[-1] == x), Fraction(0))
        assert full[n] == brute
    a = g.sphere(IDENTITY, k + 1)[0]
    tables = dp_restricted_all(mu, a, IDENTITY, nmax)
    for b in g.ball(IDENTITY, k):
        got = tables.get(b)
        for n in range(1, nmax + 1):
            expected = brute_restricted(mu, a, b, IDENTITY, n)
            assert (got[n] if got else 0) == expected


def test_restricted_basics():
    mu = walks.nn3()
    g = mu.group
    ba, b = g.parse("ba"), g.parse("b")
    t = dp_restricted(mu, ba, b, IDENTITY, 9)
    assert t[1] == Fraction(1, 3)
    assert all(t[n] == 0 for n in range(0, 10, 2))
    assert all(c == 0 for c in dp_restricted(mu, ba, g.parse("a"), IDENTITY, 9).coefficients)
    with pytest.raises(ValueError):
        dp_restricted_all(mu, b, IDENTITY, 3)


def test_restricted_is_translation_invariant():
    mu = walks.w3()
    g = mu.group
    h = g.parse("bca")
    a = g.parse("aba")
    base = dp_restricted_all(mu, a, IDENTITY, 7)
    moved = dp_restricted_all(mu, g.multiply(h, a), h, 7)
    assert {g.multiply(h, b): t.coefficients for b, t in base.items()} == \
        {b: t.coefficients for b, t in moved.items()}


def test_first_passage():
    mu = walks.nn3()
    g = mu.group
    assert dp_first_passage(mu, IDENTITY, IDENTITY, 5).coefficients[0] == 1
    f = dp_first_passage(mu, g.parse("a"), IDENTITY, 7)
    assert f[1] == Fraction(1, 3)
    assert f[3] == Fraction(2, 27)
    # last-exit decomposition: p(a, e) = sum_m f_m(a, e) p_{n-m}(e, e)
    full = dp_full(mu, g.parse("a"), IDENTITY, 7)
    ret = dp_full(mu, IDENTITY, IDENTITY, 7)
    for n in range(8):
        assert full[n] == sum(f[m] * ret[n - m] for m in range(n + 1))


class TestIsotropic:
    def test_radial_detection(self):
        assert is_radial(walks.nn3())
        assert is_radial(walks.f2())
        assert not is_radial(walks.w1())
        with pytest.raises(ValueError):
            dp_isotropic(walks.w3(), 10)

    def test_exact_matches_full(self):
        mu = walks.nn3()
        assert dp_isotropic(mu, 14, exact=True).coefficients == \
            dp_full(mu, IDENTITY, IDENTITY, 14).coefficients
        f2 = walks.f2()
        assert dp_isotropic(f2, 12, exact=True).coefficients == \
            dp_full(f2, IDENTITY, IDENTITY, 12).coefficients

    def test_odd_steps_vanish(self):
        t = dp_isotropic(walks.nn3(), 15, exact=True)
        assert all(t[n] == 0 for n in range(1, 16, 2))

    @pytest.mark.parametrize("name", ["nn3", "f2"])
    def test_float_mode_matches_exact(self, name):
        mu = walks.NAMED[name]()
        exact = dp_isotropic(mu, 60, exact=True)
        approx = dp_isotropic(mu, 60)
        for n in range(0, 61, 2):
            assert math.isclose(approx[n], float(exact[n]), rel_tol=1e-11)

    def test_deep_tables_stay_finite(self):
        t = dp_isotropic(walks.f2(), 4000)
        assert np.isfinite(t.logs[4000])
        assert t.logs[4001 - 1] < t.logs[2000]


class TestFit:
    def test_planted_power_law(self):
        ns = np.arange(0, 2001)
        logs = -ns * math.log(2.0) - 1.5 * np.log(np.maximum(ns, 1))
        table = SeriesTable(tuple(np.exp(logs)), False, logs)
        fit = fit_asymptotics(table)
        assert abs(fit.R - 2.0) < 1e-10
        assert abs(fit.exponent + 1.5) < 1e-9
        assert abs(fit.C - 1.0) < 1e-8
        # the one-step ratio still carries the polynomial factor
        assert abs(fit.R_ratio - 2.0 * (2000 / 1999) ** 1.5) < 1e-9
        assert abs(fit.R_root - 2.0 * 2000 ** (1.5 / 2000)) < 1e-9

    def test_residue_class_and_insufficient_data(self):
        ns = np.arange(0, 401)
        logs = np.where(ns % 2 == 0, -ns * math.log(1.5) - 1.5 * np.log(np.maximum(ns, 1)),
                        -np.inf)
        table = SeriesTable(tuple(np.exp(logs)), False, logs)
        fit = fit_asymptotics(table, d=2, r=0)
        assert abs(fit.R - 1.5) < 1e-10
        assert all(n % 2 == 0 for n in fit.ns)
        with pytest.raises(ValueError, match="not enough"):
            fit_asymptotics(SeriesTable((1.0, 0.5, 0.25), False))


@pytest.mark.parametrize("name", ["nn3", "w2", "w3"])
def test_sampled_paths_are_admissible(name):
    mu = walks.NAMED[name]()
    g = mu.group
    k = mu.range_k
    rng = np.random.default_rng(3)
    a = g.sphere(IDENTITY, k + 1)[1]
    tables = dp_restricted_all(mu, a, IDENTITY, 9)
    for b in tables:
        for _ in range(5):
            path = sample_restricted_path(mu, a, b, IDENTITY, 9, rng)
            assert path[0] == a and path[-1] == b
            check_restricted_path(mu, path, IDENTITY)
    inner = g.ball(IDENTITY, k)
    missing = [b for b in inner if b not in tables]
    for b in missing:
        assert sample_restricted_path(mu, a, b, IDENTITY, 9, rng) is None


def test_sampler_is_seeded():
    mu = walks.w3()
    g = mu.group
    a, b = g.parse("aba"), g.parse("ab")
    one = [sample_restricted_path(mu, a, b, IDENTITY, 11, np.random.default_rng(5)) for _ in range(3)]
    two = [sample_restricted_path(mu, a, b, IDENTITY, 11, np.random.default_rng(5)) for _ in range(3)]
    assert one == two
