"""Gauge-fixed matrix model around symmetric vacua.

Vacuum amplitudes, the four-index kinetic operator and its tridiagonal
reduction at Omega^2 = 1/3, the closed-form eigensystem of the truncations,
the propagator, the interaction vertices and the one-loop tadpole.

Conventions
-----------
``G`` is the reduced kinetic operator ``mu^2 (2 delta_ml - delta_{m,l+1} -
delta_{l,m+1})`` with ``mu^2 = -kappa``.  The associated Jacobi operator is
``J = -G/mu^2`` (a = 1, b = -2), so J-unit eigenvalues are ``2(cos th - 1)``
and G-eigenvalues are ``2 mu^2 (1 - cos th)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable

import numpy as np

from .jacobi_core import TridiagonalTruncation

ONE_THIRD = Fraction(1, 3)


class InvalidVacuumError(ValueError):
    """Vacuum parameters outside their regime, or a negative ``u_m``."""


class QuadratureError(RuntimeError):
    """Propagator quadrature did not settle under doubling."""


def exact_sqrt(x):
    """Square root that stays rational when ``x`` is a rational square."""
    if isinstance(x, Rational):
        q = Fraction(x)
        if q < 0:
            raise ValueError(f"square root of negative {q}")
        rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
        if rn * rn == q.numerator and rd * rd == q.denominator:
            return Fraction(rn, rd)
        return math.sqrt(q)
    if x < 0:
        raise ValueError(f"square root of negative {x}")
    return math.sqrt(x)


# ---------------------------------------------------------------- vacua

@dataclass(frozen=True)
class VacuumParams:
    """``(Omega^2, kappa, alpha)``; ``alpha`` only enters for ``0 < Omega^2 < 1/3``."""

    omega_sq: float
    kappa: float
    alpha: float = 0.0

    def __post_init__(self):
        w, k, al = self.omega_sq, self.kappa, self.alpha
        if not 0 < w <= 1:
            raise InvalidVacuumError(f"Omega^2 = {w} must lie in (0, 1]")
        if al < 0:
            raise InvalidVacuumError(f"alpha = {al} must be >= 0")
        regime = self.regime
        if regime == "critical" and not k < 0:
            raise InvalidVacuumError(f"Omega^2 = 1/3 requires kappa < 0, got {k}")
        if regime in ("upper", "unit") and k > 0:
            raise InvalidVacuumError(f"Omega^2 = {w} requires kappa <= 0, got {k}")
        if regime == "lower" and not self.r > 1:
            raise InvalidVacuumError(f"recursion ratio r = {self.r} must exceed 1")
        if regime == "upper" and not self.r <= -1:
            raise InvalidVacuumError(f"recursion ratio r = {self.r} must be <= -1")

    @property
    def is_critical(self) -> bool:
        w = self.omega_sq
        if isinstance(w, Rational):
            return Fraction(w) == ONE_THIRD
        return math.isclose(w, 1.0 / 3.0, rel_tol=0.0, abs_tol=1e-14)

    @property
    def regime(self) -> str:
        if self.is_critical:
            return "critical"
        if self.omega_sq == 1:
            return "unit"
        return "lower" if self.omega_sq < 1.0 / 3.0 else "upper"

    @property
    def r(self) -> float:
        """``(1 + W + sqrt(8 W (1 - W))) / (1 - 3W)``; undefined at ``W = 1/3``."""
        if self.is_critical:
            raise InvalidVacuumError("r is undefined at Omega^2 = 1/3")
        w = float(self.omega_sq)
        return (1.0 + w + math.sqrt(8.0 * w * (1.0 - w))) / (1.0 - 3.0 * w)


@dataclass(frozen=True)
class VacuumSequence:
    """Lazy ``u_m`` and ``a_m = sqrt(u_m)``, with ``a_{-1} = 0``."""

    params: VacuumParams
    u_rule: Callable[[int], float]

    def u(self, m: int):
        if m < 0:
            return 0
        val = self.u_rule(m)
        if val < 0:
            # tiny negatives are rounding in 1 - r^-m at m = 0
            if abs(val) <= 1e-15 * max(1.0, abs(float(self.params.kappa))):
                return 0.0
            raise InvalidVacuumError(
                f"u_{m} = {val} < 0: parameters {self.params} give no real vacuum"
            )
        return val

    def a(self, m: int):
        return exact_sqrt(self.u(m))


def vacuum_sequence(p: VacuumParams) -> VacuumSequence:
    """Rotationally symmetric vacuum selected by the regime of ``Omega^2``."""
    kappa = p.kappa
    regime = p.regime
    if regime == "critical":
        u0 = -3 * kappa / 4 if isinstance(kappa, Rational) else -0.75 * kappa
        return VacuumSequence(p, lambda m: u0)
    if regime == "unit":
        return VacuumSequence(p, lambda m: -kappa / 4.0 * (1 - (-1) ** m))
    w = float(p.omega_sq)
    r = p.r
    c = -float(kappa) / (4.0 * w)
    if regime == "upper":
        return VacuumSequence(p, lambda m: c * (1.0 - r ** (-m)))
    alpha = float(p.alpha)
    return VacuumSequence(p, lambda m: alpha * (r ** m - r ** (-m)) + c * (1.0 - r ** (-m)))


def eom_residual(seq: VacuumSequence, p: VacuumParams, m: int) -> float:
    """``|a_m ((3W - 1)(a_{m+1}^2 + a_{m-1}^2) + 2(1 + W) a_m^2 + 2 kappa)|``."""
    if m < 0:
        raise ValueError("m must be >= 0")
    w, kappa = p.omega_sq, p.kappa
    if p.is_critical and isinstance(kappa, Rational):
        w = ONE_THIRD
    bracket = (3 * w - 1) * (seq.u(m + 1) + seq.u(m - 1)) + 2 * (1 + w) * seq.u(m) + 2 * kappa
    return abs(float(seq.a(m) * bracket))


def trivial_vacuum(p: VacuumParams) -> VacuumSequence:
    return VacuumSequence(p, lambda m: 0.0)


# ---------------------------------------------------------------- kinetic operator

def _d(i: int, j: int) -> int:
    return 1 if i == j else 0


def kinetic_4index(seq: VacuumSequence, p: VacuumParams, m: int, n: int, k: int, l: int,
                   a_minus1=None):
    """``G_{mn;kl}`` around the vacuum ``seq``.

    ``a_minus1`` is the value used for ``a_{-1}``, which appears only in the
    diagonal group at ``n = 0``.  The default 0 is the lattice edge.  The
    reduced form at Omega^2 = 1/3 assumes the constant sequence extends to
    ``-1`` as well; pass ``a_minus1=seq.a(0)`` for that reading.
    """
    if min(m, n, k, l) < 0:
        raise ValueError("indices must be >= 0")
    w, kappa = p.omega_sq, p.kappa
    if p.is_critical and isinstance(kappa, Rational):
        w = ONE_THIRD

    def a(i):
        if i == -1:
            return 0 if a_minus1 is None else a_minus1
        return seq.a(i)

    an = a(n)
    g = (1 + 5 * w) * _d(m, l) * _d(n, k) * (an * a(n + 1) + an * a(n - 1))
    g -= (3 * w - 1) * (
        _d(m, l) * _d(n + 1, k - 1) * an * a(n + 1)
        + _d(m, l) * _d(n - 1, k + 1) * (an * a(n - 1) if n >= 1 else 0)
        - 2 * _d(m, l + 1) * _d(k + 1, n) * an * a(l)
    )
    g -= (1 + w) * (
        _d(k, n + 1) * _d(m, l + 1) * an * a(l) + _d(n, k + 1) * _d(l, m + 1) * an * a(l)
    )
    g += 2 * kappa * _d(m, l) * _d(n, k)
    return g


def kinetic13(kappa, m: int, n: int, k: int, l: int):
    """Reduced four-index form at Omega^2 = 1/3: ``-kappa (2 dd - dd - dd)``."""
    return (-kappa) * (2 * _d(m, l) * _d(n, k) - _d(k, n + 1) * _d(m, l + 1)
                       - _d(n, k + 1) * _d(l, m + 1))


@dataclass(frozen=True)
class KineticReduced:
    """``G^N = mu^2 (2 delta_ml - delta_{m,l+1} - delta_{l,m+1})``, ``N x N``."""

    mu_sq: float
    N: int

    def __post_init__(self):
        if not self.mu_sq > 0:
            raise ValueError(f"mu^2 must be positive, got {self.mu_sq}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")

    @property
    def truncation(self) -> TridiagonalTruncation:
        mu = float(self.mu_sq)
        return TridiagonalTruncation(np.full(self.N, 2.0 * mu), np.full(self.N - 1, -mu))

    def to_dense(self) -> np.ndarray:
        return self.truncation.to_dense()

    def quadratic_form(self, v) -> float:
        """``<v, G v>`` written as ``mu^2 (v_0^2 + sum (v_m - v_{m+1})^2 + v_{N-1}^2)``."""
        v = np.asarray(v, dtype=float)
        if v.shape != (self.N,):
            raise ValueError(f"expected length {self.N}")
        diffs = np.diff(v)
        return float(self.mu_sq) * math.fsum(np.concatenate(([v[0] ** 2], diffs ** 2, [v[-1] ** 2])))


def kinetic_reduced(mu_sq: float, N: int) -> KineticReduced:
    return KineticReduced(mu_sq, N)


def alpha_slice(seq: VacuumSequence, p: VacuumParams, alpha: int, N: int, a_minus1=None) -> list:
    """``[[G_{m, alpha-m; alpha-l, l}]]`` for ``m, l < N``; needs ``alpha >= N - 1``."""
    if alpha < N - 1:
        raise ValueError("alpha must be >= N - 1 so that all indices are non-negative")
    return [[kinetic_4index(seq, p, m, alpha - m, alpha - l, l, a_minus1=a_minus1)
             for l in range(N)] for m in range(N)]


def spectrum_closed_form(mu_sq: float, N: int) -> np.ndarray:
    """``2 mu^2 (1 - cos((k+1) pi/(N+1)))``, ascending."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    k = np.arange(N)
    return 2.0 * mu_sq * (1.0 - np.cos((k + 1) * np.pi / (N + 1)))


@dataclass(frozen=True)
class EigvecClosedForm:
    N: int
    m: int
    lam: float
    components: np.ndarray

    def g_eigenvalue(self, mu_sq: float = 1.0) -> float:
        """Eigenvalue of ``G^N``, ``-mu^2 * lam``."""
        return -mu_sq * self.lam


def normalization(N: int, m: int) -> float:
    """Unit-norm prefactor ``sin th * sqrt(2/(N+1))``."""
    th = (m + 1) * math.pi / (N + 1)
    return math.sin(th) * math.sqrt(2.0 / (N + 1))


def printed_normalization(N: int, m: int) -> float:
    """``((-1)^m (N+1) sin(N th) / sin^3 th)^(-1/2)`` evaluated as written.

    Since ``(-1)^m sin(N th) = sin th`` this is ``sin th / sqrt(N+1)``, a
    factor ``sqrt 2`` below :func:`normalization`.
    """
    th = (m + 1) * math.pi / (N + 1)
    return ((-1) ** m * (N + 1) * math.sin(N * th) / math.sin(th) ** 3) ** -0.5


def eigenvector_closed_form(N: int, m: int) -> EigvecClosedForm:
    """m-th eigenpair of the truncation: ``v_p = f U_p(cos th) = sqrt(2/(N+1)) sin((p+1) th)``."""
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not 0 <= m < N:
        raise IndexError(f"eigenvector index {m} out of range for N = {N}")
    th = (m + 1) * math.pi / (N + 1)
    p = np.arange(N)
    comps = math.sqrt(2.0 / (N + 1)) * np.sin((p + 1) * th)
    comps.setflags(write=False)
    return EigvecClosedForm(N, m, 2.0 * (math.cos(th) - 1.0), comps)


def eigenvector_matrix(N: int) -> np.ndarray:
    """Columns are the closed-form eigenvectors, ordered by ascending G-eigenvalue."""
    p = np.arange(N)[:, None]
    th = (np.arange(N)[None, :] + 1) * np.pi / (N + 1)
    return math.sqrt(2.0 / (N + 1)) * np.sin((p + 1) * th)


def eigen_residual(N: int, m: int, mu_sq: float = 1.0) -> float:
    """``||G^N v - lambda v||_2``."""
    ev = eigenvector_closed_form(N, m)
    T = KineticReduced(mu_sq, N).truncation
    return float(np.linalg.norm(T.matvec(ev.components) - ev.g_eigenvalue(mu_sq) * ev.components))


def embedding_residual(N: int, m: int, mu_sq: float = 1.0) -> float:
    """Residual of the semi-infinite ``G`` on the zero-padded truncated eigenvector.

    Computed on an ``(N+1)``-window; the only nonzero entry is row ``N``,
    ``-mu^2 v_{N-1}``.
    """
    ev = eigenvector_closed_form(N, m)
    v = np.zeros(N + 1)
    v[:N] = ev.components
    W = KineticReduced(mu_sq, N + 1).truncation
    return float(np.linalg.norm(W.matvec(v) - ev.g_eigenvalue(mu_sq) * v))


# ---------------------------------------------------------------- propagator

PROPAGATOR_K = 2 ** 16


def _theta_weight(K: int):
    th = (np.arange(K) + 0.5) * np.pi / K
    return th, 1.0 / (2.0 * np.sin(th / 2.0) ** 2)


def _propagator_midpoint(mu_sq: float, m: int, l: int, K: int) -> float:
    th, w = _theta_weight(K)
    vals = np.sin((m + 1) * th) * np.sin((l + 1) * th) * w
    return math.fsum(vals) / K / mu_sq


def propagator_entry(mu_sq: float, m: int, l: int, K: int = PROPAGATOR_K,
                     rtol: float = 1e-9, max_K: int = 2 ** 22) -> float:
    """``P_ml = (1/(pi mu^2)) int sqrt((1+x)/(1-x)) U_m U_l dx``.

    With ``x = cos th`` the integrand becomes
    ``sin((m+1)th) sin((l+1)th) / (2 sin^2(th/2))`` on ``(0, pi)``, which is
    bounded; the composite midpoint rule is doubled until two successive
    values agree to ``rtol``.
    """
    if not mu_sq > 0:
        raise ValueError("mu^2 must be positive")
    if m < 0 or l < 0:
        raise ValueError("indices must be >= 0")
    if K < (m + l) // 2 + 1:
        raise ValueError(f"K = {K} too small for degree m + l = {m + l}")
    if not rtol > 0:
        raise ValueError("rtol must be positive")
    m, l = min(m, l), max(m, l)
    prev = _propagator_midpoint(mu_sq, m, l, K)
    while K < max_K:
        K *= 2
        cur = _propagator_midpoint(mu_sq, m, l, K)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    raise QuadratureError(f"propagator entry ({m}, {l}) unsettled at K = {K}")


def propagator_matrix(mu_sq: float, n: int, K: int = PROPAGATOR_K, rtol: float = 1e-9,
                      max_K: int = 2 ** 20) -> np.ndarray:
    """All ``P_ml``, ``m, l < n``, from one midpoint grid (same rule as :func:`propagator_entry`)."""
    if not mu_sq > 0:
        raise ValueError("mu^2 must be positive")

    def at(K):
        th, w = _theta_weight(K)
        S = np.sin(np.outer(th, np.arange(1, n + 1)))
        return (S.T * w) @ S / K / mu_sq

    prev = at(K)
    while K < max_K:
        K *= 2
        cur = at(K)
        if np.all(np.abs(cur - prev) <= rtol * np.abs(cur)):
            return cur
        prev = cur
    raise QuadratureError(f"propagator matrix unsettled at K = {K}")


def closed_form_propagator(mu_sq, m: int, l: int):
    """``(min(m, l) + 1) / mu^2``; exact for rational ``mu^2``."""
    if isinstance(mu_sq, Rational):
        return Fraction(min(m, l) + 1) / Fraction(mu_sq)
    return (min(m, l) + 1) / mu_sq


def propagator_identity_residual(mu_sq: float, N: int, P: np.ndarray | None = None) -> float:
    """``max |sum_{l<N} G_ml P_lr - delta_mr|`` over rows ``m <= N-2``, ``r < N``.

    ``P`` defaults to the quadrature propagator.
    """
    if N < 3:
        raise ValueError("N must be >= 3")
    if P is None:
        P = propagator_matrix(mu_sq, N)
    P = np.asarray(P, dtype=float)[:N, :N]
    G = KineticReduced(mu_sq, N).to_dense()
    R = G[: N - 1] @ P - np.eye(N)[: N - 1]
    return float(np.max(np.abs(R)))


# ---------------------------------------------------------------- interactions

QUARTIC_COUPLING = Fraction(4, 3)   # 4 Omega^2 at Omega^2 = 1/3


def vertex_cubic(mu_sq: float, m: int, p: int, q: int, r: int) -> complex:
    """Coefficient of ``phi_pq phi_qr phi_mp``: ``i 8 W a_r (delta_{m+1,r} - delta_{r+1,m})`` at W = 1/3."""
    a_r = 0.5 * math.sqrt(3.0 * mu_sq)
    return 1j * (8.0 / 3.0) * a_r * (_d(m + 1, r) - _d(r + 1, m))


def tadpole_sigma(mu_sq: float) -> complex:
    """``i (2/3) sqrt(3 mu^2)``."""
    return 1j * (2.0 / 3.0) * math.sqrt(3.0 * mu_sq)


def tadpole_coefficient(mu_sq, k: int, cutoff_N: int, propagator=closed_form_propagator):
    """Coefficient of ``sigma (phi_{k,k+1} - phi_{k+1,k})`` in the one-loop one-point function.

    ``sum_{l<N} (2 P_ll - P_{l,l+1}) + P_kk + P_{k+1,k+1} - P_{k,k+1}`` with
    the internal index cut off at ``N``.  Returns ``(c, sigma)``.
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k + 2 > cutoff_N:
        raise ValueError(f"k + 2 = {k + 2} exceeds the cutoff N = {cutoff_N}")
    P = propagator
    c = sum((2 * P(mu_sq, l, l) - P(mu_sq, l, l + 1) for l in range(cutoff_N)), start=0)
    c += P(mu_sq, k, k) + P(mu_sq, k + 1, k + 1) - P(mu_sq, k, k + 1)
    return c, tadpole_sigma(float(mu_sq))


def tadpole_closed_form(mu_sq, k: int, cutoff_N: int):
    """``(N(N+1)/2 + k + 2) / mu^2``."""
    num = Fraction(cutoff_N * (cutoff_N + 1), 2) + k + 2
    if isinstance(mu_sq, Rational):
        return num / Fraction(mu_sq)
    return float(num) / mu_sq


def divergence_exponent(mu_sq: float, k: int, cutoffs) -> float:
    """Least-squares slope of ``log c_N`` against ``log N``."""
    cutoffs = np.asarray(cutoffs)
    c = np.array([float(tadpole_coefficient(mu_sq, k, int(n))[0]) for n in cutoffs])
    slope, _ = np.polyfit(np.log(cutoffs), np.log(c), 1)
    return float(slope)
