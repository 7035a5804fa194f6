"""Numerics on the curve ``J = z psi(J)``.

The branch through the origin, ``z -> v_z``, gives the restricted Green
functions.  It is monotone on ``[0, R]`` and folds at ``z = R`` where
``R * rho(D psi(v_R)) = 1``.  Everything downstream (Green functions,
tangent data, the leading constant of return probabilities) is read off
at or near that fold.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .digraph import Condensation, build_digraph, condense
from .group_tree import IDENTITY, Word
from .walk_kernel import path_length_residue, period
from .xi_psi import PsiSystem


class CurveError(ArithmeticError):
    pass


class DivergenceError(CurveError):
    """Fixed-point iteration left every bounded region: ``z`` is beyond the branch."""


@dataclass(frozen=True)
class CurvePoint:
    z: complex
    J: np.ndarray
    residual: float


@dataclass(frozen=True)
class RadiusResult:
    R: float
    point: CurvePoint
    nu: np.ndarray
    rho: float
    newton_steps: int


@dataclass(frozen=True)
class SpectralReport:
    rho: float
    block_spectra: tuple[float, ...]
    right_perron: np.ndarray | None = None
    left_perron: np.ndarray | None = None
    condensation: Condensation | None = None


@dataclass(frozen=True)
class Tangent:
    nu: np.ndarray
    u: np.ndarray
    lambda_prime: float
    singular_values: tuple[float, float]
    eigen_residual: float


@dataclass
class DerivativeReport:
    lambda_prime: float
    r_second: float
    r_second_fd: float
    g_derivatives: dict = field(default_factory=dict)
    f_classification: dict = field(default_factory=dict)


# -- spectral radius ------------------------------------------------------


def spectral_radius(A, tol: float = 1e-13, max_iter: int = 20000) -> float:
    """Spectral radius; power iteration on ``A + I`` for nonnegative ``A``.

    The shift makes the Perron root strictly dominant even for periodic
    matrices.  Other inputs, or a stalled iteration, fall back to the
    eigenvalues.
    """
    A = np.asarray(A)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("spectral radius needs a square matrix")
    n = A.shape[0]
    if n == 0 or not np.any(A):
        return 0.0
    if np.isrealobj(A) and np.all(A >= 0):
        B = A + np.eye(n)
        x = np.ones(n) / n
        prev = 0.0
        for _ in range(max_iter):
            y = B @ x
            lam = y.sum() / x.sum()
            x = y / y.sum()
            if abs(lam - prev) <= tol * lam:
                # Collatz-Wielandt bounds certify the estimate
                ratios = (B @ x)[x > 0] / x[x > 0]
                if ratios.max() - ratios.min() <= 1e3 * tol * lam and np.all(x > 0):
                    return float(lam - 1.0)
                break
            prev = lam
    return float(np.max(np.abs(np.linalg.eigvals(A))))


@dataclass(frozen=True)
class SpectralComparison:
    rho_a: float
    rho_b: float

    @property
    def weak(self) -> bool:
        return self.rho_a <= self.rho_b * (1 + 1e-12) + 1e-14

    @property
    def strict(self) -> bool:
        return self.rho_a < self.rho_b * (1 - 1e-12)


def compare_spectral(A, B) -> SpectralComparison:
    """Spectral radii of a dominated pair ``|A| <= B``."""
    A = np.asarray(A)
    B = np.asarray(B)
    if np.any(np.abs(A) > B + 1e-15):
        raise ValueError("need |A| <= B entrywise")
    return SpectralComparison(spectral_radius(A), spectral_radius(B))


def is_perron_irreducible(B) -> bool:
    """Some partial sum of powers of ``B >= 0`` is entrywise positive."""
    B = np.asarray(B) > 0
    n = B.shape[0]
    reach = np.eye(n, dtype=bool) | B
    for _ in range(max(1, math.ceil(math.log2(max(n, 2)))) + 1):
        reach = reach | ((reach.astype(int) @ reach.astype(int)) > 0)
    return bool(reach.all()) and bool((B.astype(int) @ reach.astype(int) > 0).all())


# -- fixed points ---------------------------------------------------------


def _newton(system: PsiSystem, z, J, tol: float, steps: int = 30):
    n = len(J)
    eye = np.eye(n)
    for _ in range(steps):
        F = J - z * system.eval(J)
        if np.max(np.abs(F)) <= tol:
            return J
        A = eye - z * system.jacobian(J)
        J = J - np.linalg.solve(A, F)
        if not np.all(np.isfinite(J)):
            break
    F = J - z * system.eval(J)
    return J if np.max(np.abs(F)) <= tol else None


def _iterate(system: PsiSystem, z: float, max_iter: int, cap: float, tol: float):
    J = np.zeros(len(system))
    for i in range(max_iter):
        new = z * system.eval(J)
        if np.max(np.abs(new)) > cap or not np.all(np.isfinite(new)):
            raise DivergenceError(f"iteration diverged at z={z}")
        step = np.max(np.abs(new - J))
        J = new
        if step <= tol:
            return J, True
    return J, False


def solve_v(system: PsiSystem, z, tol: float = 1e-12, max_iter: int = 20000,
            cap: float = 1e6) -> CurvePoint:
    """Point ``(z, v_z)`` of the branch through the origin."""
    z = complex(z)
    n = len(system)
    if z == 0:
        return CurvePoint(0j, np.zeros(n), 0.0)
    if z.imag == 0 and z.real > 0:
        r = z.real
        # Newton from below the least fixed point stays below it, so a short
        # warm-up iteration is enough unless Newton fails
        J, done = _iterate(system, r, 200, cap, 1e-3 * tol)
        polished = None if done else _newton(system, r, J, tol, steps=60)
        if polished is None or np.any(polished < J - 1e-9):
            J, done = _iterate(system, r, max_iter, cap, 1e-3 * tol)
            polished = _newton(system, r, J, tol)
            if polished is None or np.any(polished < J - 1e-9):
                if not done:
                    raise CurveError(f"fixed point not reached at z={r}")
                polished = J
        res = float(np.max(np.abs(polished - r * system.eval(polished))))
        return CurvePoint(complex(r), polished, res)
    return _continue_along_ray(system, z, tol)


def _continue_along_ray(system: PsiSystem, z: complex, tol: float) -> CurvePoint:
    """Newton continuation ``t z``, ``t: 0 -> 1``, from the origin."""
    n = len(system)
    J = np.zeros(n, dtype=complex)
    t, dt = 0.0, 0.05
    prev_J, prev_t = J.copy(), 0.0
    while t < 1.0:
        t_new = min(1.0, t + dt)
        guess = J + (J - prev_J) * ((t_new - t) / (t - prev_t)) if t > 0 else J
        sol = _newton(system, t_new * z, guess, tol, steps=12)
        if sol is None:
            dt /= 2
            if dt < 1e-7:
                raise CurveError(f"continuation stalled at t={t} for z={z}")
            continue
        prev_J, prev_t = J, t
        J, t = sol, t_new
        dt = min(0.1, dt * 1.5)
    res = float(np.max(np.abs(J - z * system.eval(J))))
    return CurvePoint(z, J, res)


# -- radius of convergence -------------------------------------------------


def _eig_radius(A: np.ndarray) -> float:
    return float(np.max(np.abs(np.linalg.eigvals(A)))) if len(A) else 0.0


def _below_radius(system: PsiSystem, r: float, max_iter: int = 4000) -> tuple[bool, np.ndarray]:
    """Predicate ``r < R`` with the iterate reached.

    Iterates from 0 increase to ``v_r`` when ``r <= R``; so if
    ``r * rho(D psi(J_n)) > 1`` at some iterate, ``r`` exceeds ``R``.
    """
    J = np.zeros(len(system))
    for i in range(max_iter):
        J_new = r * system.eval(J)
        if np.max(J_new) > 1e6:
            return False, J
        step = np.max(np.abs(J_new - J))
        J = J_new
        if i % 8 == 7 or step < 1e-13:
            if r * _eig_radius(system.jacobian(J)) >= 1.0:
                return False, J
        if step < 1e-13:
            return True, J
    polished = _newton(system, r, J, 1e-12)
    if polished is not None and np.all(polished >= J - 1e-10):
        if r * _eig_radius(system.jacobian(polished)) < 1.0:
            return True, polished
    return False, J


def _fold_newton(system: PsiSystem, z: float, J: np.ndarray, nu: np.ndarray,
                 weights: np.ndarray, tol: float = 1e-15, steps: int = 40):
    """Solve ``J = z psi(J)``, ``(I - z D psi(J)) nu = 0``, ``<w, nu> = 1``."""
    n = len(J)
    eye = np.eye(n)
    for it in range(steps):
        P = system.eval(J)
        D = system.jacobian(J)
        A = eye - z * D
        F = np.concatenate([J - z * P, A @ nu, [weights @ nu - 1.0]])
        if np.max(np.abs(F)) <= tol:
            return z, J, nu, it
        H = system.hessian_vector(J, nu)
        jac = np.zeros((2 * n + 1, 2 * n + 1))
        jac[:n, 0] = -P
        jac[:n, 1:n + 1] = A
        jac[n:2 * n, 0] = -(D @ nu)
        jac[n:2 * n, 1:n + 1] = -z * H
        jac[n:2 * n, n + 1:] = A
        jac[2 * n, n + 1:] = weights
        delta = np.linalg.solve(jac, -F)
        z, J, nu = z + delta[0], J + delta[1:n + 1], nu + delta[n + 1:]
        if np.max(np.abs(delta)) < 1e-16 * max(1.0, np.max(np.abs(J))):
            return z, J, nu, it + 1
    P = system.eval(J)
    F = np.concatenate([J - z * P, (eye - z * system.jacobian(J)) @ nu])
    if np.max(np.abs(F)) > 1e-11:
        raise CurveError("fold Newton did not converge")
    return z, J, nu, steps


def _perron_right(M: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eig(M)
    i = int(np.argmax(vals.real))
    v = np.abs(vecs[:, i].real)
    return v / v.max()


def find_R(system: PsiSystem, tol: float = 1e-12, r_max: float = 64.0,
           bisect_tol: float = 1e-6) -> RadiusResult:
    """Radius of convergence of ``v_z``: bisection, then Newton on the fold."""
    lo, hi = 0.0, 1.0
    while _below_radius(system, hi)[0]:
        lo, hi = hi, 2 * hi
        if hi > r_max:
            raise CurveError("no bracket for R below r_max")
    J_lo = np.zeros(len(system))
    while hi - lo > bisect_tol * hi:
        mid = 0.5 * (lo + hi)
        ok, J = _below_radius(system, mid)
        if ok:
            lo, J_lo = mid, J
        else:
            hi = mid
    cond = condense(build_digraph(system))
    weights = np.zeros(len(system))
    weights[list(cond.sink_members)] = 1.0
    nu0 = _perron_right(system.jacobian(J_lo))
    nu0 = nu0 / (weights @ nu0)
    R, J, nu, steps = _fold_newton(system, lo, J_lo, nu0, weights, tol=1e-15)
    if not lo - 1e-6 <= R <= hi + 1e-6:
        raise CurveError("fold Newton left the bisection bracket")
    nu = np.abs(nu) / np.max(np.abs(nu))
    rho = spectral_radius(system.jacobian(J))
    res = float(np.max(np.abs(J - R * system.eval(J))))
    if abs(R * rho - 1) > max(tol, 1e-9):
        raise CurveError(f"|R rho - 1| = {abs(R * rho - 1):.3g} above tolerance")
    return RadiusResult(float(R), CurvePoint(complex(R), J, res), nu, rho, steps)


def block_spectra(system: PsiSystem, point: CurvePoint,
                  cond: Condensation | None = None) -> SpectralReport:
    """Spectral radii of the diagonal blocks in the component order."""
    cond = condense(build_digraph(system)) if cond is None else cond
    D = system.jacobian(point.J)
    order = [v for comp in cond.components for v in comp]
    pos = {v: i for i, v in enumerate(order)}
    # entry [beta, alpha] needs alpha's component to precede beta's
    rows, cols = np.nonzero(np.abs(D) > 0)
    for b, a in zip(rows, cols):
        if not cond.precedes(cond.component_of[int(a)], cond.component_of[int(b)]):
            raise CurveError("Jacobian is not block triangular")
    del pos
    spectra = []
    for comp in cond.components:
        idx = np.array(comp)
        spectra.append(spectral_radius(D[np.ix_(idx, idx)]))
    return SpectralReport(spectral_radius(D), tuple(spectra), condensation=cond)


def tangent_at_R(system: PsiSystem, rad: RadiusResult, rank_tol: float = 1e-8) -> Tangent:
    """Perron vectors at the fold and the kernel of the linearised curve."""
    R = rad.R
    J = rad.point.J
    n = len(J)
    D = system.jacobian(J)
    A = np.eye(n) - R * D
    full = np.hstack([-system.eval(J)[:, None], A])
    _, s, vt = np.linalg.svd(full)
    kernel = vt[-1]
    smallest = s[-1] if len(s) == n + 1 else 0.0
    second = s[-2] if len(s) == n + 1 else s[-1]
    if second < rank_tol:
        raise CurveError("kernel of the linearised curve is not one-dimensional")
    jdot = kernel[1:]
    scale = jdot[np.argmax(np.abs(jdot))]
    kernel = kernel / scale
    lam = float(kernel[0])
    _, _, vtr = np.linalg.svd(A)
    nu = np.abs(rad.nu)
    nu = nu / nu.max()
    _, _, vtl = np.linalg.svd(A.T)
    u = vtl[-1]
    u = u * np.sign(u[np.argmax(np.abs(u))])
    u = u / np.max(np.abs(u))
    res = float(np.max(np.abs(D @ nu - nu / R)))
    return Tangent(nu, u, lam, (float(smallest), float(second)), res)


def second_derivative(system: PsiSystem, rad: RadiusResult, tangent: Tangent,
                      floor: float = 1e-6) -> float:
    """``r''(0)`` along the curve parametrised with ``J'(0) = nu``."""
    J = rad.point.J
    u, nu = tangent.u, tangent.nu
    num = u @ system.second_derivative(J, nu, nu)
    den = u @ system.eval(J)
    r2 = float(-rad.R * num / den)
    if abs(r2) < floor:
        raise CurveError("second derivative vanishes")
    return r2


def curve_through(system: PsiSystem, rad: RadiusResult, nu: np.ndarray, tau: float):
    """Point of the curve with ``J[i] = v_R[i] + tau`` at the largest ``nu`` coordinate."""
    n = len(nu)
    i = int(np.argmax(nu))
    z = rad.R
    J = rad.point.J + tau * nu
    target = rad.point.J[i] + tau
    eye = np.eye(n)
    for _ in range(50):
        P = system.eval(J)
        F = np.concatenate([J - z * P, [J[i] - target]])
        if np.max(np.abs(F)) < 1e-15:
            break
        jac = np.zeros((n + 1, n + 1))
        jac[:n, 0] = -P
        jac[:n, 1:] = eye - z * system.jacobian(J)
        jac[n, 1 + i] = 1.0
        delta = np.linalg.solve(jac, -F)
        z, J = z + delta[0], J + delta[1:]
        if np.max(np.abs(delta)) < 1e-16:
            break
    return z, J


def second_derivative_fd(system: PsiSystem, rad: RadiusResult, tangent: Tangent,
                         h: float = 1e-3) -> float:
    """Central difference ``(r(h) + r(-h) - 2R) / h^2`` along the curve."""
    zp, _ = curve_through(system, rad, tangent.nu, h)
    zm, _ = curve_through(system, rad, tangent.nu, -h)
    return float((zp + zm - 2 * rad.R) / h ** 2)


def circle_spectrum_scan(system: PsiSystem, R: float, eps: float, angles) -> list[dict]:
    """Modulus domination and ``|z| rho`` on the circle of radius ``R - eps``."""
    r = R - eps
    base = solve_v(system, r).J
    out = []
    for phi in angles:
        z = r * np.exp(1j * phi)
        p = solve_v(system, z)
        rho = spectral_radius(system.jacobian(p.J))
        out.append({
            "phi": float(phi),
            "dominated": bool(np.all(np.abs(p.J) <= base * (1 + 1e-9) + 1e-12)),
            "abs_z_rho": float(r * rho),
            "modulus_ratio": float(np.min(np.abs(p.J)[base > 0] / base[base > 0])),
        })
    return out


# -- first-passage and Green functions --------------------------------------


class GreenStructure:
    """Rational functions ``f_{x,y}(z, J)`` and ``g_{x,y}(z, J)``.

    By invariance everything is computed with ``y`` moved to the identity.
    ``M`` and ``q`` split paths from the punctured ball into a first step
    and a restricted excursion outside the ball.
    """

    def __init__(self, system: PsiSystem):
        self.system = system
        mu = system.mu
        g = mu.group
        k = mu.range_k
        ball = g.ball(IDENTITY, k)
        self.inner = tuple(w for w in ball if w != IDENTITY)
        self._pos = {w: i for i, w in enumerate(self.inner)}
        # terms[(c, d)] = list of (weight, factor ids) for c in inner, d in ball
        self._terms: dict[tuple[Word, Word], list[tuple[float, tuple[int, ...]]]] = {}
        for c in self.inner:
            for s, p in mu.steps:
                c1 = g.multiply(c, s)
                if len(c1) <= k:
                    self._terms.setdefault((c, c1), []).append((float(p), ()))
                    continue
                for d in ball:
                    for factors in system.j_bracket_terms(c1, IDENTITY, d):
                        self._terms.setdefault((c, d), []).append((float(p), factors))
        self._outer_cache: dict[Word, dict[Word, list]] = {}

    @staticmethod
    def _value(terms, J):
        total = 0.0
        for w, f in terms:
            total = total + w * (np.prod(J[list(f)]) if f else 1.0)
        return total

    def _inner_f(self, z, J):
        n = len(self.inner)
        dtype = np.result_type(np.asarray(J).dtype, type(z), float)
        M = np.zeros((n, n), dtype=dtype)
        q = np.zeros(n, dtype=dtype)
        for (c, d), terms in self._terms.items():
            val = self._value(terms, J)
            if d == IDENTITY:
                q[self._pos[c]] += val
            else:
                M[self._pos[c], self._pos[d]] += val
        A = np.eye(n) - z * M
        try:
            return np.linalg.solve(A, z * q)
        except np.linalg.LinAlgError as exc:
            raise CurveError("singular system for f") from exc

    def f(self, x: Word, y: Word, z, J):
        """First-passage function ``f_{x,y}`` at ``(z, J)``."""
        g = self.system.group
        J = np.asarray(J)
        x0 = g.multiply(g.inverse(y), x)
        if x0 == IDENTITY:
            return 1.0 + 0 * z
        inner = self._inner_f(z, J)
        if x0 in self._pos:
            return inner[self._pos[x0]]
        if x0 not in self._outer_cache:
            sys_ = self.system
            self._outer_cache[x0] = {
                c: sys_.j_bracket_terms(x0, IDENTITY, c)
                for c in g.ball(IDENTITY, self.system.k)}
        total = 0.0
        for c, terms in self._outer_cache[x0].items():
            fc = 1.0 if c == IDENTITY else inner[self._pos[c]]
            total = total + sum(np.prod(J[list(t)]) if t else 1.0 for t in terms) * fc
        return total

    def g(self, x: Word, y: Word, z, J):
        """Green function ``g_{x,y} = f_{x,y} g_{y,y}``."""
        mu = self.system.mu
        grp = mu.group
        J = np.asarray(J)
        inner = self._inner_f(z, J)
        s = 0.0
        for step, p in mu.steps:
            fc = 1.0 if step == IDENTITY else inner[self._pos[step]]
            s = s + z * float(p) * fc
        denom = 1.0 - s
        if abs(denom) < 1e-300:
            raise CurveError("vanishing denominator in g")
        gyy = 1.0 / denom
        x0 = grp.multiply(grp.inverse(y), x)
        if x0 == IDENTITY:
            return gyy
        return self.f(x0, IDENTITY, z, J) * gyy

    def directional(self, which: str, x: Word, y: Word, z: float, J, v, h: float = 1e-30):
        """Derivative of ``f`` or ``g`` in ``J`` along ``v`` by the complex step."""
        fn = self.f if which == "f" else self.g
        val = fn(x, y, z, np.asarray(J, dtype=complex) + 1j * h * np.asarray(v))
        return float(np.imag(val) / h)


def f_function(system: PsiSystem, x: Word, y: Word, point: CurvePoint, green=None):
    green = GreenStructure(system) if green is None else green
    return green.f(x, y, point.z.real if point.z.imag == 0 else point.z, point.J)


def g_function(system: PsiSystem, x: Word, y: Word, point: CurvePoint, green=None):
    green = GreenStructure(system) if green is None else green
    return green.g(x, y, point.z.real if point.z.imag == 0 else point.z, point.J)


@dataclass(frozen=True)
class FRadiusClass:
    beyond_R: bool
    derivative: float
    max_excursion: int
    threshold: int

    @property
    def label(self) -> str:
        return "BeyondR" if self.beyond_R else "AtR"


def first_passage_excursion(system: PsiSystem, x: Word, y: Word, radius: int) -> int:
    """Largest ``d(w, y)`` over vertices on first-passage paths ``x -> y``.

    Only vertices within ``radius`` of ``y`` are explored.
    """
    from collections import deque

    mu = system.mu
    g = mu.group
    x = g.multiply(g.inverse(y), x)
    if x == IDENTITY:
        return 0

    def closure(starts, steps):
        seen = set()
        queue = deque()
        for w in starts:
            if w and len(w) <= radius and w not in seen:
                seen.add(w)
                queue.append(w)
        while queue:
            v = queue.popleft()
            for s in steps:
                u = g.multiply(v, s)
                if u and len(u) <= radius and u not in seen:
                    seen.add(u)
                    queue.append(u)
        return seen

    fwd_steps = [s for s, _ in mu.int_steps]
    bwd_steps = [g.inverse(s) for s in fwd_steps]
    fwd = closure([x], fwd_steps)
    bwd = closure(bwd_steps, bwd_steps)
    live = fwd & bwd
    if not live:
        raise CurveError("no first-passage path")
    return max(len(w) for w in live)


def classify_f_radius(system: PsiSystem, x: Word, y: Word, rad: RadiusResult,
                      tangent: Tangent, green=None, threshold: float = 1e-8) -> FRadiusClass:
    """Bounded excursions versus a nonzero derivative of ``f`` at the fold."""
    from .digraph import stagnation_bound

    mu = system.mu
    g = mu.group
    green = GreenStructure(system) if green is None else green
    bound = stagnation_bound(mu) + g.distance(x, y)
    radius = bound + 2 * mu.range_k + 1
    exc = first_passage_excursion(system, x, y, radius)
    deriv = green.directional("f", x, y, rad.R, rad.point.J, tangent.nu)
    return FRadiusClass(exc <= bound, deriv, exc, bound)


# -- leading constant -------------------------------------------------------


@dataclass(frozen=True)
class LeadingConstant:
    C: float
    g1: float
    g1_fit: float
    period: int
    residue: int
    G_R: float
    fit_residual: float


def leading_constant(system: PsiSystem, x: Word, y: Word, rad: RadiusResult,
                     tangent: Tangent, r_second: float, green=None,
                     fit_tol: float = 1e-3) -> LeadingConstant:
    """``C`` in ``p^(n)(x, y) ~ C R^-n n^-3/2`` on the residue class of ``(x, y)``."""
    mu = system.mu
    green = GreenStructure(system) if green is None else green
    d = period(mu)
    res = path_length_residue(mu, x, y, d)
    R = rad.R
    dg = green.directional("g", x, y, R, rad.point.J, tangent.nu)
    g1 = dg * math.sqrt(2 * R / abs(r_second))
    # independent estimate from values of G below R
    G_R = float(np.real(green.g(x, y, R, rad.point.J)))
    deltas = np.geomspace(1e-10, 1e-6, 9)
    ys = []
    for delta in deltas:
        z = R * (1 - delta)
        p = solve_v(system, z, tol=1e-15)
        ys.append((G_R - float(np.real(green.g(x, y, z, p.J)))) / math.sqrt(delta))
    s = np.sqrt(deltas)
    coef = np.polyfit(s, ys, 2)
    fitted = np.polyval(coef, s)
    resid = float(np.max(np.abs(fitted - ys)) / max(abs(coef[-1]), 1e-300))
    g1_fit = float(coef[-1])
    if resid > fit_tol:
        raise CurveError(f"singular expansion fit residual {resid:.3g}")
    C = d * g1 / (2 * math.sqrt(math.pi))
    return LeadingConstant(float(C), float(g1), g1_fit, d, res, G_R, resid)
