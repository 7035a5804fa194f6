"""Restricted Green functions as the solution of a positive polynomial system.

For a vertex ``y`` and ``a`` with ``d(a, y) = k + 1`` write ``(a, b)_y`` for
the set of admissible paths from ``a`` to ``b`` in ``B(y, k)`` whose other
vertices avoid that ball.  Up to left translation there are finitely many
such pairs with at least one path; these orbits index the unknowns ``J``.

A path from ``c`` outside the ball down to ``b`` splits uniquely at the
successive strict minima of the distance to ``y``.  Each piece lives in an
orbit of the family above, which yields the system ``J = z psi(J)``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .group_tree import IDENTITY, Word, shortlex_key
from .walk_kernel import StepMeasure, connecting_excursion


@dataclass(frozen=True)
class XiElement:
    """Concrete pair ``(a, b)`` anchored at ``y``."""

    a: Word
    b: Word
    y: Word


@dataclass(frozen=True)
class XiOrbit:
    """Canonical representative, anchored at the identity."""

    id: int
    a: Word
    b: Word


@dataclass(frozen=True)
class CrossingTuple:
    """Decomposition of a restricted path ``c -> b`` into anchored pieces."""

    pieces: tuple[XiElement, ...]
    orbit_ids: tuple[int, ...]


@dataclass(frozen=True)
class Monomial:
    row: int
    coef: Fraction
    factors: tuple[int, ...]


class PsiSystem:
    """Orbits, the polynomial map ``psi`` and its derivatives.

    Build with :func:`build_psi`.  Numerical evaluation accepts real or
    complex vectors indexed by orbit id.
    """

    def __init__(self, mu: StepMeasure, orbits: list[XiOrbit],
                 entries: dict[Word, tuple[Word, ...]], truncation: int):
        self.mu = mu
        self.group = mu.group
        self.k = mu.range_k
        self.orbits = tuple(orbits)
        self.truncation = truncation
        self._entries = entries
        self._index = {(o.a, o.b): o.id for o in orbits}
        self._tuple_cache: dict[tuple[Word, Word], tuple[CrossingTuple, ...]] = {}
        self.constants: tuple[Fraction, ...] = ()
        self.monomials: tuple[Monomial, ...] = ()
        # provenance[row] lists (c, CrossingTuple) for each one-step expansion
        self.provenance: tuple[tuple[tuple[Word, CrossingTuple], ...], ...] = ()

    def __len__(self):
        return len(self.orbits)

    # -- orbit bookkeeping -------------------------------------------

    def orbit_id(self, elem: XiElement) -> int | None:
        g = self.group
        h = g.inverse(elem.y)
        return self._index.get((g.multiply(h, elem.a), g.multiply(h, elem.b)))

    def element(self, oid: int) -> XiElement:
        o = self.orbits[oid]
        return XiElement(o.a, o.b, IDENTITY)

    def entries_from(self, a: Word) -> tuple[Word, ...]:
        """Entrance points ``b`` with ``(a, b)_e`` nonempty, for ``|a| = k+1``."""
        return self._entries.get(a, ())

    def label(self, oid: int) -> str:
        o = self.orbits[oid]
        g = self.group
        return f"({g.format(o.a)},{g.format(o.b)})"

    # -- crossing tuples ---------------------------------------------

    def crossing_tuples(self, c: Word, b: Word, y: Word) -> tuple[CrossingTuple, ...]:
        """All decompositions of restricted paths from ``c`` to ``b`` around ``y``.

        ``c`` must lie outside ``B(y, k)`` and ``b`` inside it.
        """
        g = self.group
        h = g.inverse(y)
        c0, b0 = g.multiply(h, c), g.multiply(h, b)
        if len(c0) <= self.k or len(b0) > self.k:
            raise ValueError("need c outside and b inside the ball")
        key = (c0, b0)
        if key not in self._tuple_cache:
            self._tuple_cache[key] = tuple(self._tuples_at_identity(c0, b0))
        cached = self._tuple_cache[key]
        if y == IDENTITY:
            return cached
        out = []
        for t in cached:
            pieces = tuple(XiElement(g.multiply(y, p.a), g.multiply(y, p.b),
                                     g.multiply(y, p.y)) for p in t.pieces)
            out.append(CrossingTuple(pieces, t.orbit_ids))
        return tuple(out)

    def _tuples_at_identity(self, c: Word, b: Word):
        g = self.group
        k = self.k
        results = []

        def extend(cur: Word, acc: list[XiElement], ids: list[int]):
            yj = g.point_on_geodesic(cur, IDENTITY, k + 1)
            h = g.inverse(yj)
            a0 = g.multiply(h, cur)
            for b0 in self.entries_from(a0):
                cj = g.multiply(yj, b0)
                piece = XiElement(cur, cj, yj)
                oid = self._index[(a0, b0)]
                if len(cj) <= k:
                    if cj == b:
                        results.append(CrossingTuple(tuple(acc + [piece]), tuple(ids + [oid])))
                    continue
                if g.distance(cj, b) > 0:
                    extend(cj, acc + [piece], ids + [oid])

        extend(c, [], [])
        return results

    def j_bracket_terms(self, c: Word, y: Word, b: Word) -> list[tuple[int, ...]]:
        """Factor lists of ``G(c, b; outside B(y, k))`` as a polynomial in ``J``.

        ``c = b`` inside the ball gives the empty product.
        """
        g = self.group
        if g.distance(c, y) <= self.k:
            if c == b:
                return [()]
            raise ValueError("c inside the ball must equal b")
        return [t.orbit_ids for t in self.crossing_tuples(c, b, y)]

    def j_bracket(self, J, c: Word, y: Word, b: Word):
        terms = self.j_bracket_terms(c, y, b)
        J = np.asarray(J)
        total = 0.0 * J[0] if len(J) else 0.0
        for f in terms:
            total = total + (np.prod(J[list(f)]) if f else 1.0)
        return total

    # -- numerics ----------------------------------------------------

    @cached_property
    def _arrays(self):
        const = np.array([float(c) for c in self.constants])
        by_deg: dict[int, list[Monomial]] = {}
        for m in self.monomials:
            by_deg.setdefault(len(m.factors), []).append(m)
        groups = []
        for deg in sorted(by_deg):
            ms = by_deg[deg]
            rows = np.array([m.row for m in ms], dtype=np.intp)
            coef = np.array([float(m.coef) for m in ms])
            fac = np.array([m.factors for m in ms], dtype=np.intp).reshape(len(ms), deg)
            groups.append((rows, coef, fac))
        return const, groups

    def eval(self, J):
        """``psi(J)``."""
        J = np.asarray(J)
        const, groups = self._arrays
        out = const.astype(np.result_type(J.dtype, float)).copy()
        for rows, coef, fac in groups:
            np.add.at(out, rows, coef * np.prod(J[fac], axis=1))
        return out

    def _partials(self, J, fac, skip):
        """Product of ``J`` over factor columns not listed in ``skip``."""
        cols = [q for q in range(fac.shape[1]) if q not in skip]
        if not cols:
            return np.ones(fac.shape[0], dtype=J.dtype)
        return np.prod(J[fac[:, cols]], axis=1)

    def jacobian(self, J):
        """``D psi(J)`` with ``[beta, alpha] = d psi_beta / d J_alpha``."""
        J = np.asarray(J)
        n = len(self.orbits)
        out = np.zeros((n, n), dtype=np.result_type(J.dtype, float))
        _, groups = self._arrays
        for rows, coef, fac in groups:
            for q in range(fac.shape[1]):
                np.add.at(out, (rows, fac[:, q]), coef * self._partials(J, fac, (q,)))
        return out

    def hessian_vector(self, J, v):
        """Matrix ``H`` with ``H u = D^2 psi(J)[v, u]``."""
        J = np.asarray(J)
        v = np.asarray(v)
        n = len(self.orbits)
        out = np.zeros((n, n), dtype=np.result_type(J.dtype, v.dtype, float))
        _, groups = self._arrays
        for rows, coef, fac in groups:
            deg = fac.shape[1]
            for q in range(deg):
                for r in range(deg):
                    if q != r:
                        w = coef * v[fac[:, r]] * self._partials(J, fac, (q, r))
                        np.add.at(out, (rows, fac[:, q]), w)
        return out

    def second_derivative(self, J, u, v):
        return self.hessian_vector(J, v) @ np.asarray(u)

    # -- exact series ------------------------------------------------

    def series_iterate(self, nmax: int) -> list[list[Fraction]]:
        """Taylor coefficients of ``v_z`` through ``z^nmax`` from ``J = z psi(J)``.

        Works in the scaled variable ``x = z / Q`` where all coefficients
        are integers.
        """
        q = self.mu.denominator
        n_orb = len(self.orbits)
        const = [int(c * q) for c in self.constants]
        monos = [(m.row, int(m.coef * q), m.factors) for m in self.monomials]
        series = [[0] * (nmax + 1) for _ in range(n_orb)]
        for _ in range(nmax):
            new = [[0] * (nmax + 1) for _ in range(n_orb)]
            for i, c in enumerate(const):
                if nmax >= 1:
                    new[i][1] += c
            for row, w, factors in monos:
                prod = _series_product([series[f] for f in factors], nmax - 1)
                if prod is None:
                    continue
                target = new[row]
                for d, val in enumerate(prod):
                    if val:
                        target[d + 1] += w * val
            series = new
        return [[Fraction(c, q ** d) for d, c in enumerate(s)] for s in series]

    def series_float(self, nmax: int, scale: float = 1.0) -> np.ndarray:
        """Float coefficients of ``v`` in ``w = z / scale``, order by order.

        Row ``n`` holds the coefficients of ``w^n``.  Choosing ``scale``
        near the radius keeps high orders in range.  Monomials of degree
        three go through cached pairwise products.
        """
        n_orb = len(self.orbits)
        out = np.zeros((nmax + 1, n_orb))
        const = np.array([float(c) for c in self.constants])
        pairs: dict[tuple[int, int], np.ndarray] = {}
        monos = [(m.row, float(m.coef), m.factors) for m in self.monomials]
        for m in self.monomials:
            if len(m.factors) > 3:
                raise NotImplementedError("series_float handles degree <= 3")
            if len(m.factors) == 3:
                pairs.setdefault(m.factors[:2], np.zeros(nmax + 1))
        for n in range(1, nmax + 1):
            m = n - 1
            # pairwise products need coefficients up to m, all known now
            for (i, j), arr in pairs.items():
                arr[m] = out[: m + 1, i] @ out[m::-1, j]
            row = np.zeros(n_orb)
            if m == 0:
                row += const
            for r, c, fac in monos:
                if len(fac) == 1:
                    row[r] += c * out[m, fac[0]]
                elif len(fac) == 2:
                    row[r] += c * (out[: m + 1, fac[0]] @ out[m::-1, fac[1]])
                else:
                    row[r] += c * (pairs[fac[:2]][: m + 1] @ out[m::-1, fac[2]])
            out[n] = scale * row
        return out

    def dump(self) -> str:
        lines = []
        by_row: dict[int, list[Monomial]] = {}
        for m in self.monomials:
            by_row.setdefault(m.row, []).append(m)
        for i in range(len(self.orbits)):
            parts = [str(self.constants[i])]
            for m in by_row.get(i, []):
                parts.append(f"{m.coef}*" + "*".join(f"J[{f}]" for f in m.factors))
            lines.append(f"J[{i}] = " + " + ".join(parts))
        return "\n".join(lines)


def _series_product(factors: list[list[int]], deg: int):
    """Truncated product of integer series, or ``None`` if it vanishes."""
    acc = [1] + [0] * deg
    for s in factors:
        if not any(s[: deg + 1]):
            return None
        nxt = [0] * (deg + 1)
        for i, ai in enumerate(acc):
            if ai:
                for j in range(0, deg + 1 - i):
                    sj = s[j]
                    if sj:
                        nxt[i + j] += ai * sj
        acc = nxt
    return acc


def default_truncation(mu: StepMeasure) -> int:
    k = mu.range_k
    return connecting_excursion(mu) + k + 2 * k + 1


def restricted_reachable(mu: StepMeasure, a: Word, b: Word, y: Word,
                         radius: int | None = None) -> bool:
    """Whether some admissible path ``a -> b`` avoids ``B(y, k)`` before its end.

    The search is confined to ``B(y, radius)``.
    """
    g = mu.group
    h = g.inverse(y)
    a0, b0 = g.multiply(h, a), g.multiply(h, b)
    radius = default_truncation(mu) if radius is None else radius
    return b0 in _entries_from(mu, a0, radius)


def _entries_from(mu: StepMeasure, a: Word, radius: int) -> set[Word]:
    g = mu.group
    k = mu.range_k
    seen = {a}
    queue = deque([a])
    hits: set[Word] = set()
    while queue:
        v = queue.popleft()
        for s, _ in mu.int_steps:
            u = g.multiply(v, s)
            lu = len(u)
            if lu <= k:
                hits.add(u)
            elif lu <= radius and u not in seen:
                seen.add(u)
                queue.append(u)
    return hits


def enumerate_xi_orbits(mu: StepMeasure, radius: int | None = None):
    """Canonical orbits ``(a, b)_e`` in shortlex order of ``(a, b)``."""
    g = mu.group
    k = mu.range_k
    radius = default_truncation(mu) if radius is None else radius
    entries: dict[Word, tuple[Word, ...]] = {}
    pairs = []
    for a in sorted(g.sphere(IDENTITY, k + 1), key=shortlex_key):
        hits = tuple(sorted(_entries_from(mu, a, radius), key=shortlex_key))
        entries[a] = hits
        pairs += [(a, b) for b in hits]
    orbits = [XiOrbit(i, a, b) for i, (a, b) in enumerate(pairs)]
    return orbits, entries


def build_psi(mu: StepMeasure, radius: int | None = None) -> PsiSystem:
    """Enumerate the orbits and expand ``psi`` one step at a time."""
    g = mu.group
    k = mu.range_k
    radius = default_truncation(mu) if radius is None else radius
    orbits, entries = enumerate_xi_orbits(mu, radius)
    system = PsiSystem(mu, orbits, entries, radius)
    constants = []
    monomials: dict[tuple[int, tuple[int, ...]], Fraction] = {}
    provenance = []
    for o in orbits:
        constants.append(mu.kernel(o.a, o.b))
        prov = []
        for s, p in mu.steps:
            c = g.multiply(o.a, s)
            if len(c) <= k:
                continue
            for t in system.crossing_tuples(c, o.b, IDENTITY):
                key = (o.id, tuple(sorted(t.orbit_ids)))
                monomials[key] = monomials.get(key, Fraction(0)) + p
                prov.append((c, t))
        provenance.append(tuple(prov))
    system.constants = tuple(constants)
    system.monomials = tuple(Monomial(r, c, f) for (r, f), c in sorted(monomials.items()))
    system.provenance = tuple(provenance)
    return system
