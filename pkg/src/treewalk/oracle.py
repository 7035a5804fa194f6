"""Brute-force path-counting oracles.

All exact routines count paths with integer weights over the common
denominator ``Q`` of the step measure, so the coefficient of ``z^n`` is
``count / Q^n``.  Layers are pruned to vertices that can still reach the
target in the remaining number of steps.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .group_tree import IDENTITY, Word
from .walk_kernel import StepMeasure


@dataclass(frozen=True)
class SeriesTable:
    """Coefficients ``p_0, ..., p_nmax`` of a generating function."""

    coefficients: tuple
    exact: bool
    logs: np.ndarray | None = None

    def __getitem__(self, n):
        return self.coefficients[n]

    def __len__(self):
        return len(self.coefficients)

    @property
    def nmax(self) -> int:
        return len(self.coefficients) - 1


def _as_table(counts: list[int], q: int) -> SeriesTable:
    return SeriesTable(tuple(Fraction(c, q ** n) for n, c in enumerate(counts)), True)


def dp_full(mu: StepMeasure, x: Word, y: Word, nmax: int) -> SeriesTable:
    """``p^(n)(x, y)`` for ``n <= nmax``."""
    g = mu.group
    k = mu.range_k
    target = g.multiply(g.inverse(x), y)
    layer = {IDENTITY: 1}
    counts = [1 if target == IDENTITY else 0]
    for n in range(1, nmax + 1):
        left = nmax - n
        nxt: dict[Word, int] = {}
        for v, c in layer.items():
            for s, w in mu.int_steps:
                u = g.multiply(v, s)
                if g.distance(u, target) <= k * left:
                    nxt[u] = nxt.get(u, 0) + c * w
        layer = nxt
        counts.append(layer.get(target, 0))
    return _as_table(counts, mu.denominator)


def dp_restricted_all(mu: StepMeasure, a: Word, y: Word, nmax: int) -> dict[Word, SeriesTable]:
    """Generating coefficients of ``G(a, b; outside B(y,k))`` for every entry ``b``.

    Paths start at ``a`` (outside the ball), keep every vertex but the last
    outside the ``k``-ball around ``y`` and stop at the first entrance ``b``.
    """
    g = mu.group
    k = mu.range_k
    a0 = g.multiply(g.inverse(y), a)
    if len(a0) <= k:
        raise ValueError("start vertex lies inside the ball")
    layer = {a0: 1}
    hits: dict[Word, list[int]] = {}
    for n in range(1, nmax + 1):
        left = nmax - n
        nxt: dict[Word, int] = {}
        for v, c in layer.items():
            for s, w in mu.int_steps:
                u = g.multiply(v, s)
                lu = len(u)
                if lu <= k:
                    row = hits.setdefault(u, [0] * (nmax + 1))
                    row[n] += c * w
                elif lu - k <= k * left:
                    nxt[u] = nxt.get(u, 0) + c * w
        layer = nxt
    q = mu.denominator
    return {g.multiply(y, b): _as_table(row, q) for b, row in hits.items()}


def dp_restricted(mu: StepMeasure, a: Word, b: Word, y: Word, nmax: int) -> SeriesTable:
    tables = dp_restricted_all(mu, a, y, nmax)
    if b in tables:
        return tables[b]
    return SeriesTable(tuple(Fraction(0) for _ in range(nmax + 1)), True)


def dp_first_passage(mu: StepMeasure, x: Word, y: Word, nmax: int) -> SeriesTable:
    """First-passage coefficients ``f^(n)(x, y)``; ``f(y, y) = 1``."""
    g = mu.group
    k = mu.range_k
    target = g.multiply(g.inverse(x), y)
    if target == IDENTITY:
        return SeriesTable((Fraction(1),) + tuple(Fraction(0) for _ in range(nmax)), True)
    layer = {IDENTITY: 1}
    counts = [0]
    for n in range(1, nmax + 1):
        left = nmax - n
        nxt: dict[Word, int] = {}
        hit = 0
        for v, c in layer.items():
            for s, w in mu.int_steps:
                u = g.multiply(v, s)
                if u == target:
                    hit += c * w
                elif g.distance(u, target) <= k * left:
                    nxt[u] = nxt.get(u, 0) + c * w
        layer = nxt
        counts.append(hit)
    return _as_table(counts, mu.denominator)


# -- radial walks ------------------------------------------------------


def _representative(mu: StepMeasure, m: int) -> Word:
    """A reduced word of length ``m`` built greedily from the letters."""
    g = mu.group
    w: Word = ()
    while len(w) < m:
        for s in g.letters:
            if not w or s != g.letter_inverse(w[-1]):
                w = w + (s,)
                break
    return w


def is_radial(mu: StepMeasure) -> bool:
    """Whether ``mu`` is constant on spheres and charges whole spheres."""
    g = mu.group
    by_len: dict[int, set] = {}
    for s, p in mu.steps:
        by_len.setdefault(len(s), set()).add(p)
    for length, values in by_len.items():
        if len(values) != 1:
            return False
        if sum(1 for _ in g.sphere(IDENTITY, length)) != sum(
                1 for s, _ in mu.steps if len(s) == length):
            return False
    return True


def radial_transitions(mu: StepMeasure) -> list[dict[int, int]]:
    """Integer jump weights ``m -> m'`` of the distance chain for ``m = 0..k+1``.

    For ``m > k`` the offsets ``m' - m`` no longer depend on ``m``.
    """
    g = mu.group
    out = []
    for m in range(mu.range_k + 2):
        w0 = _representative(mu, m)
        row: dict[int, int] = {}
        for s, w in mu.int_steps:
            m2 = len(g.multiply(w0, s))
            row[m2] = row.get(m2, 0) + w
        out.append(row)
    return out


def _zero_drift_tilt(tail: dict[int, int]) -> float:
    """``t`` with ``sum_d d w_d t^d = 0``, by bisection on ``log t``."""
    def drift(s):
        return sum(d * w * math.exp(s * d) for d, w in tail.items())

    lo, hi = -30.0, 30.0
    if drift(lo) > 0 or drift(hi) < 0:
        return 1.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if drift(mid) > 0:
            hi = mid
        else:
            lo = mid
    return math.exp(0.5 * (lo + hi))


def dp_isotropic(mu: StepMeasure, nmax: int, exact: bool = False) -> SeriesTable:
    """Return probabilities ``p^(n)(e, e)`` of a radial walk via its distance chain.

    The float mode tilts the chain to zero drift and keeps a log-scale
    accumulator, so ``nmax`` may be in the hundreds of thousands without
    underflow.
    """
    if not is_radial(mu):
        raise ValueError("measure is not radial")
    k = mu.range_k
    rows = radial_transitions(mu)
    q = mu.denominator
    tail = {m2 - (k + 1): w for m2, w in rows[k + 1].items()}
    if exact:
        vec = {0: 1}
        counts = [1]
        for n in range(1, nmax + 1):
            left = nmax - n
            nxt: dict[int, int] = {}
            for m, c in vec.items():
                jumps = rows[m].items() if m <= k + 1 else ((m + d, w) for d, w in tail.items())
                for m2, w in jumps:
                    if m2 <= k * left:
                        nxt[m2] = nxt.get(m2, 0) + c * w
            vec = nxt
            counts.append(vec.get(0, 0))
        return _as_table(counts, q)

    size = k * (nmax // 2) + k + 2
    # tilt by t^m so the tail has no drift; coordinate 0 is unchanged
    t = _zero_drift_tilt(tail)
    head = [(m, np.array(list(r.keys())),
             np.array([w * t ** (m2 - m) for m2, w in r.items()]) / q)
            for m, r in enumerate(rows)]
    offsets = [(d, w * t ** d / q) for d, w in sorted(tail.items())]
    lo = k + 2
    vec = np.zeros(size)
    vec[0] = 1.0
    logscale = 0.0
    logs = np.full(nmax + 1, -np.inf)
    logs[0] = 0.0
    for n in range(1, nmax + 1):
        nxt = np.zeros(size)
        for m, targets, weights in head:
            if vec[m]:
                keep = targets < size
                np.add.at(nxt, targets[keep], weights[keep] * vec[m])
        src = vec[lo:]
        for d, w in offsets:
            nxt[lo + d:lo + d + len(src)] += w * src[: max(0, size - lo - d)]
        nxt[k * (nmax - n) + 1:] = 0.0
        scale = nxt.max()
        if scale <= 0:
            raise ArithmeticError("distance chain died out")
        vec = nxt / scale
        logscale += math.log(scale)
        if vec[0] > 0:
            logs[n] = logscale + math.log(vec[0])
    with np.errstate(under="ignore"):
        values = tuple(float(v) for v in np.exp(logs))
    return SeriesTable(values, False, logs)


@dataclass(frozen=True)
class AsymptoticFit:
    """Least-squares fit of ``log p_n = log C - n log R + e log n``."""

    R: float
    exponent: float
    C: float
    C_pinned: float
    R_ratio: float
    R_root: float
    residual: float
    ns: np.ndarray


def fit_asymptotics(table: SeriesTable, d: int = 1, r: int = 0,
                    decade: float = 10.0, R: float | None = None) -> AsymptoticFit:
    """Fit the return law on the residue class ``n = r mod d`` over the last decade.

    ``C_pinned`` refits with the exponent fixed at ``-3/2`` and a ``1/n``
    correction term (and ``R`` fixed when given) so it can be compared with
    a predicted constant.  The two
    Cauchy-Hadamard style estimates are the one-period ratio
    ``(p_{N-d} / p_N)^(1/d)`` and the root ``p_N^(-1/N)``.
    """
    logs = table.logs if table.logs is not None else np.array(
        [math.log(float(c)) if c > 0 else -np.inf for c in table.coefficients])
    N = table.nmax
    ns = np.array([n for n in range(max(1, int(N / decade)), N + 1) if n % d == r % d
                   and np.isfinite(logs[n])])
    if len(ns) < 4:
        raise ValueError("not enough nonzero coefficients to fit")
    y = logs[ns]
    A = np.column_stack([np.ones(len(ns)), -ns.astype(float), np.log(ns)])
    sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = float(np.sqrt(np.mean((A @ sol - y) ** 2)))
    log_c, log_r, expo = sol
    inv_n = 1.0 / ns
    if R is None:
        B = np.column_stack([A[:, :2], inv_n])
        pinned, *_ = np.linalg.lstsq(B, y + 1.5 * np.log(ns), rcond=None)
    else:
        B = np.column_stack([np.ones(len(ns)), inv_n])
        pinned, *_ = np.linalg.lstsq(B, y + ns * math.log(R) + 1.5 * np.log(ns), rcond=None)
    c_pinned = math.exp(pinned[0])
    last = int(ns[-1])
    prev = last - d
    r_ratio = math.exp((logs[prev] - logs[last]) / d)
    r_root = math.exp(-logs[last] / last)
    return AsymptoticFit(math.exp(log_r), float(expo), math.exp(log_c), c_pinned,
                         r_ratio, r_root, resid, ns)


def sample_restricted_path(mu: StepMeasure, a: Word, b: Word, y: Word, nmax: int,
                           rng: np.random.Generator) -> tuple[Word, ...] | None:
    """Random admissible path ``a -> b`` avoiding ``B(y, k)`` before its end.

    The length is drawn uniformly among those ``<= nmax`` that occur; given
    the length the path has probability proportional to its weight.
    """
    g = mu.group
    k = mu.range_k
    h = g.inverse(y)
    a0, b0 = g.multiply(h, a), g.multiply(h, b)
    layers = [{a0: 1}]
    hits = []
    for n in range(1, nmax + 1):
        left = nmax - n
        nxt: dict[Word, int] = {}
        hit = 0
        for v, c in layers[-1].items():
            for s, w in mu.int_steps:
                u = g.multiply(v, s)
                if len(u) <= k:
                    if u == b0:
                        hit += c * w
                elif g.distance(u, b0) <= k * left:
                    nxt[u] = nxt.get(u, 0) + c * w
        if hit:
            hits.append(n)
        layers.append(nxt)
    if not hits:
        return None
    n = int(hits[rng.integers(len(hits))])
    path = [b0]
    for t in range(n - 1, -1, -1):
        cur = path[-1]
        cands = []
        for v, c in layers[t].items():
            for s, w in mu.int_steps:
                if g.multiply(v, s) == cur:
                    cands.append((v, c * w))
        total = sum(c for _, c in cands)
        pick = int(rng.integers(total))
        for v, c in cands:
            if pick < c:
                path.append(v)
                break
            pick -= c
    return tuple(g.multiply(y, v) for v in reversed(path))
