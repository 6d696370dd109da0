"""Orthonormal polynomials of a Jacobi operator, their zeros, and a Sturm eigensolver.

The family is fixed by ``P_0 = 1``, ``P_{-1} = 0`` and

    t P_n(t) = a_n P_{n+1}(t) + b_n P_n(t) + a_{n-1} P_{n-1}(t).

Two routes to the spectrum of a truncation are kept deliberately apart:
:func:`zeros` bisects on sign changes of ``P_N`` (no matrix is formed) and
:func:`eigenvalues` counts negative pivots of ``T - t`` (no polynomial is
evaluated).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .jacobi_core import JacobiCoefficients, TridiagonalTruncation, norm_bound


class BracketError(RuntimeError):
    """Interlacing broke down while bracketing zeros."""


@dataclass(frozen=True)
class RecurrencePolynomials:
    coeffs: JacobiCoefficients

    def arrays(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        return self.coeffs.arrays(n)


@dataclass(frozen=True)
class ZeroSet:
    n: int
    zeros: np.ndarray

    def __post_init__(self):
        z = np.array(self.zeros, dtype=float)
        if z.shape != (self.n,):
            raise ValueError(f"expected {self.n} zeros, got shape {z.shape}")
        if self.n > 1 and not np.all(np.diff(z) > 0):
            raise ValueError("zeros must be strictly increasing")
        z.setflags(write=False)
        object.__setattr__(self, "zeros", z)


def eval_all(fam: RecurrencePolynomials, n: int, t: float) -> tuple[np.ndarray, np.ndarray]:
    """``(P_0(t), ..., P_n(t))`` as mantissas and base-2 exponents.

    The true value is ``np.ldexp(mantissa, exponent)``.  The running pair is
    rescaled by ``2**-100`` whenever it passes ``2**100`` (and back up when
    both fall under ``2**-100``), so signs survive for any ``n``.
    """
    if n < 0:
        raise ValueError(f"degree must be >= 0, got {n}")
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"evaluation point must be finite, got {t!r}")
    a, b = fam.arrays(n)
    vals = np.empty(n + 1)
    exps = np.empty(n + 1, dtype=np.int64)
    _kernels.recurrence_scaled(a, b, n, t, vals, exps)
    return vals, exps


def evaluate(fam: RecurrencePolynomials, n: int, t) -> np.ndarray:
    """Unscaled ``P_k(t_j)`` for k <= n, shape ``t.shape + (n + 1,)``."""
    t = np.asarray(t, dtype=float)
    a, b = fam.arrays(n)
    out = np.empty(t.shape + (n + 1,))
    out[..., 0] = 1.0
    if n >= 1:
        out[..., 1] = (t - b[0]) / a[0]
    for k in range(1, n):
        out[..., k + 1] = ((t - b[k]) * out[..., k] - a[k - 1] * out[..., k - 1]) / a[k]
    return out


def evaluate_with_derivative(fam: RecurrencePolynomials, n: int, t) -> tuple[np.ndarray, np.ndarray]:
    """``P_k(t)`` and ``P'_k(t)`` for k <= n from the differentiated recurrence."""
    t = np.asarray(t, dtype=float)
    a, b = fam.arrays(n)
    p = np.empty(t.shape + (n + 1,))
    dp = np.empty_like(p)
    p[..., 0] = 1.0
    dp[..., 0] = 0.0
    if n >= 1:
        p[..., 1] = (t - b[0]) / a[0]
        dp[..., 1] = 1.0 / a[0]
    for k in range(1, n):
        p[..., k + 1] = ((t - b[k]) * p[..., k] - a[k - 1] * p[..., k - 1]) / a[k]
        dp[..., k + 1] = ((t - b[k]) * dp[..., k] + p[..., k] - a[k - 1] * dp[..., k - 1]) / a[k]
    return p, dp


def chebyshev_u(n: int, x: float) -> float:
    """``U_n(x)``: trigonometric form on [-1, 1], recurrence outside."""
    if n < 0:
        return 0.0
    x = float(x)
    if x == 1.0:
        return float(n + 1)
    if x == -1.0:
        return float((n + 1) * (-1) ** n)
    if -1.0 < x < 1.0:
        theta = math.acos(x)
        return math.sin((n + 1) * theta) / math.sin(theta)
    return chebyshev_u_recurrence(n, x)


def chebyshev_u_recurrence(n: int, x: float) -> float:
    """``U_n(x)`` from ``U_{k+1} = 2x U_k - U_{k-1}``."""
    if n < 0:
        return 0.0
    u_prev, u = 0.0, 1.0
    for _ in range(n):
        u_prev, u = u, 2.0 * x * u - u_prev
    return u


def chebyshev_u_zeros(n: int) -> np.ndarray:
    """Zeros ``cos((k+1) pi/(n+1))`` of ``U_n``, ascending."""
    k = np.arange(n)
    return np.sort(np.cos((k + 1) * np.pi / (n + 1)))


def _search_interval(fam: RecurrencePolynomials) -> tuple[float, float]:
    r = norm_bound(fam.coeffs)
    pad = 1e-12 * r + 1e-300
    return -r - pad, r + pad


def zeros_by_level(fam: RecurrencePolynomials, N: int, rtol: float = 1e-13) -> list[ZeroSet]:
    """Zeros of ``P_1, ..., P_N``.

    Each level is bracketed by the previous one: the zeros of ``P_{n-1}``,
    padded with the endpoints of ``[-2M, 2M]``, cut the line into ``n``
    intervals holding exactly one zero of ``P_n`` each.  A bracket without a
    sign change means the coefficients are not a valid Jacobi family.
    Bisection stops at width ``rtol * 2M``.
    """
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    a, b = fam.arrays(N)
    lo, hi = _search_interval(fam)
    tol = rtol * norm_bound(fam.coeffs)
    levels = []
    prev = np.empty(0)
    for n in range(1, N + 1):
        brackets = np.concatenate(([lo], prev, [hi]))
        z, status = _kernels.zero_level(a, b, n, brackets, tol)
        if status >= 0:
            raise BracketError(
                f"no sign change of P_{n} on [{brackets[status]!r}, {brackets[status + 1]!r}]; "
                "interlacing failed, check a_m > 0"
            )
        levels.append(ZeroSet(n, z))
        prev = z
    return levels


def zeros(fam: RecurrencePolynomials, N: int, rtol: float = 1e-13) -> ZeroSet:
    """The ``N`` simple real zeros of ``P_N`` (eigenvalues of the ``N x N`` truncation)."""
    return zeros_by_level(fam, N, rtol)[-1]


def eigenvalues(T: TridiagonalTruncation, rtol: float = 1e-13) -> np.ndarray:
    """Ascending eigenvalues by Sturm-count bisection, absolute accuracy ``rtol * ||T||``.

    Off-diagonal zeros are allowed here.
    """
    lo, hi = T.gershgorin()
    scale = max(abs(lo), abs(hi))
    if scale == 0.0:
        return np.zeros(T.size)
    offsq = np.asarray(T.offdiag, dtype=float) ** 2
    pivmin = np.finfo(float).tiny * max(1.0, float(offsq.max(initial=0.0)))
    pad = 4 * np.finfo(float).eps * scale
    return _kernels.sturm_bisect_all(
        np.ascontiguousarray(T.diag, dtype=float), offsq, lo - pad, hi + pad, rtol * scale, pivmin
    )


class CDResidual(NamedTuple):
    summation: float
    confluent: float


def christoffel_darboux_residual(fam: RecurrencePolynomials, n: int, t: float, z: float,
                                 relative: bool = False) -> CDResidual:
    """Residuals of the two Christoffel-Darboux identities.

    ``summation``: ``(t - z) sum_{k<=n} P_k(t) P_k(z)`` against
    ``a_n (P_{n+1}(t) P_n(z) - P_n(t) P_{n+1}(z))``.

    ``confluent`` (at ``x = t``, ``N = n + 1``): ``sum_{k<N} P_k(x)^2``
    against ``a_{N-1} (P'_N P_{N-1} - P'_{N-1} P_N)``, the ``z -> t`` limit
    of the first identity.

    With ``relative=True`` each residual is divided by the sum of absolute
    values of the terms entering it.
    """
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    a, _ = fam.arrays(n + 1)
    pt, dpt = evaluate_with_derivative(fam, n + 1, t)
    pz = evaluate(fam, n + 1, z)

    prod = pt[: n + 1] * pz[: n + 1]
    lhs1 = (t - z) * prod.sum()
    cross1, cross2 = pt[n + 1] * pz[n], pt[n] * pz[n + 1]
    rhs1 = a[n] * (cross1 - cross2)
    res1 = abs(lhs1 - rhs1)
    scale1 = abs(t - z) * np.abs(prod).sum() + a[n] * (abs(cross1) + abs(cross2))

    N = n + 1
    lhs2 = (pt[:N] ** 2).sum()
    c1, c2 = dpt[N] * pt[N - 1], dpt[N - 1] * pt[N]
    rhs2 = a[N - 1] * (c1 - c2)
    res2 = abs(lhs2 - rhs2)
    scale2 = lhs2 + a[N - 1] * (abs(c1) + abs(c2))

    if relative:
        return CDResidual(res1 / scale1 if scale1 else res1, res2 / scale2 if scale2 else res2)
    return CDResidual(float(res1), float(res2))
