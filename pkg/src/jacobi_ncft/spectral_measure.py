"""Orthogonality measures of Jacobi operators.

The measure attached to ``J`` is the ``(e_0, e_0)`` entry of its spectral
resolution: a compactly supported probability measure in which the
recurrence polynomials are orthonormal and ``<e_m, f(J) e_l> = int f P_m P_l``.
It is represented either by a known density or by the Gauss rule of the
Jacobi matrix; where both exist they must agree.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .jacobi_core import JacobiCoefficients, truncate
from .orthopoly import RecurrencePolynomials, evaluate


class SupportError(ValueError):
    """Evaluation point lies on the support of the measure."""


@dataclass(frozen=True)
class SpectralMeasure:
    """Absolutely continuous measure on ``support`` with an optional closed-form Stieltjes transform."""

    support: tuple[float, float]
    density: Callable[[np.ndarray], np.ndarray]
    total_mass: float = 1.0
    stieltjes: Callable[[complex], complex] | None = None
    name: str = "measure"

    def pdf(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        lo, hi = self.support
        inside = (x >= lo) & (x <= hi)
        out = np.zeros_like(x)
        out[inside] = self.density(x[inside])
        return out

    def contains(self, x: float) -> bool:
        lo, hi = self.support
        return lo <= x <= hi

    def affine(self, scale: float, shift: float, name: str | None = None) -> "SpectralMeasure":
        """Push-forward under ``t = scale * x + shift`` (``scale > 0``)."""
        if scale <= 0:
            raise ValueError("scale must be positive")
        lo, hi = self.support
        dens = self.density
        w = self.stieltjes
        return SpectralMeasure(
            support=(scale * lo + shift, scale * hi + shift),
            density=lambda t: dens((np.asarray(t) - shift) / scale) / scale,
            total_mass=self.total_mass,
            stieltjes=None if w is None else (lambda z: w((z - shift) / scale) / scale),
            name=name or f"{self.name}*{scale}+{shift}",
        )

    def transform(self, z: complex) -> complex:
        """Stieltjes transform ``int dmu(x) / (x - z)`` from the density route."""
        z = complex(z)
        if z.imag == 0.0 and self.contains(z.real):
            raise SupportError(f"z = {z} lies on the support {self.support}")
        if self.stieltjes is not None:
            return complex(self.stieltjes(z))
        from scipy.integrate import quad

        lo, hi = self.support
        re = quad(lambda x: float(self.density(np.array(x))) * ((x - z) / abs(x - z) ** 2).real,
                  lo, hi, limit=400)[0]
        im = quad(lambda x: float(self.density(np.array(x))) * ((x - z) / abs(x - z) ** 2).imag,
                  lo, hi, limit=400)[0]
        return complex(re, im)


def _u_stieltjes(z: complex) -> complex:
    # branch of sqrt(z-1) sqrt(z+1) behaving like z at infinity
    return -2.0 / (z + cmath.sqrt(z - 1.0) * cmath.sqrt(z + 1.0))


def chebyshev_u_measure() -> SpectralMeasure:
    """``(2/pi) sqrt(1 - x^2) dx`` on [-1, 1], making ``U_n`` orthonormal."""
    return SpectralMeasure(
        support=(-1.0, 1.0),
        density=lambda x: (2.0 / np.pi) * np.sqrt(np.clip(1.0 - np.asarray(x) ** 2, 0.0, None)),
        stieltjes=_u_stieltjes,
        name="chebyshev-U",
    )


def kinetic_measure() -> SpectralMeasure:
    """Measure of ``J = -G/mu^2`` on [-4, 0]: density ``(1/pi) sqrt(-t/2 (2 + t/2))``.

    It is the image of the U-measure under ``t = 2x - 2``.
    """
    return chebyshev_u_measure().affine(2.0, -2.0, name="kinetic")


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    exact_degree: int

    def __post_init__(self):
        for attr in ("nodes", "weights"):
            arr = np.array(getattr(self, attr), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, attr, arr)
        if self.nodes.shape != self.weights.shape:
            raise ValueError("nodes and weights must have equal shape")
        if np.any(self.weights < 0):
            raise ValueError("Gauss weights must be non-negative")

    def integrate(self, values) -> float:
        return float(math.fsum(self.weights * np.asarray(values, dtype=float)))


def gauss_rule(coeffs: JacobiCoefficients, K: int, total_mass: float = 1.0) -> QuadratureRule:
    """K-node Gauss rule of the measure of ``J``, exact through degree ``2K - 1``.

    Nodes are the eigenvalues of the ``K x K`` truncation and each weight is
    the squared first component of the matching unit eigenvector.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    T = truncate(coeffs, K)
    if K == 1:
        return QuadratureRule(T.diag.copy(), np.array([total_mass]), 1)
    nodes, vecs = eigh_tridiagonal(T.diag, T.offdiag)
    weights = total_mass * vecs[0, :] ** 2
    return QuadratureRule(nodes, weights, 2 * K - 1)


def _check_degree(rule: QuadratureRule, degree: int):
    if degree > rule.exact_degree:
        raise ValueError(
            f"integrand of degree {degree} exceeds the rule's exactness degree {rule.exact_degree}"
        )


def moments(measure: SpectralMeasure, rule: QuadratureRule, n: int) -> float:
    """``s_n = int x^n dmu``."""
    if n < 0:
        raise ValueError("moment order must be >= 0")
    _check_degree(rule, n)
    lo, hi = measure.support
    slack = 1e-12 * max(1.0, abs(lo), abs(hi))
    if np.any(rule.nodes < lo - slack) or np.any(rule.nodes > hi + slack):
        raise ValueError("rule nodes fall outside the measure's support")
    return rule.integrate(rule.nodes ** n)


def stieltjes_transform(measure: SpectralMeasure, rule: QuadratureRule, z: complex) -> complex:
    """``w(z) = int dmu(x) / (x - z)`` by quadrature."""
    z = complex(z)
    if z.imag == 0.0 and measure.contains(z.real):
        raise SupportError(f"z = {z} lies on the support {measure.support}")
    terms = rule.weights / (rule.nodes - z)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


def stieltjes_series(measure: SpectralMeasure, rule: QuadratureRule, z: complex, terms: int) -> complex:
    """Moment expansion ``-sum_{n<terms} s_n / z^{n+1}``, valid for ``|z| > sup |support|``."""
    z = complex(z)
    radius = max(abs(measure.support[0]), abs(measure.support[1]))
    if abs(z) <= radius:
        raise SupportError(f"|z| = {abs(z)} is inside the convergence radius {radius}")
    s = [moments(measure, rule, n) for n in range(terms)]
    total = 0j
    # Horner in 1/z
    for sn in reversed(s):
        total = total / z + sn
    return -total / z


def adaptive_simpson(f: Callable[[float], float], a: float, b: float, tol: float = 1e-10,
                     max_depth: int = 60) -> float:
    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    def recurse(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, m - a)
        right = simpson(fm, frm, fb, b - m)
        if depth <= 0 or abs(left + right - whole) <= 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (recurse(a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + recurse(m, b, fm, frm, fb, right, tol / 2.0, depth - 1))

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    return recurse(a, b, fa, fm, fb, simpson(fa, fm, fb, b - a), tol, max_depth)


def perron_inversion(measure: SpectralMeasure, a: float, b: float, nu: float,
                     eps: float | None = None, tol: float = 1e-10) -> float:
    """``(1/pi) int_{a+eps}^{b-eps} Im w(t + i nu) dt``, tending to ``mu([a, b])`` as ``nu, eps -> 0``.

    ``eps`` defaults to ``nu``: the boundary layers of ``Im w`` have width ``nu``.
    """
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")
    eps = nu if eps is None else eps
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if not a < b:
        raise ValueError("need a < b")
    lo, hi = a + eps, b - eps
    if lo >= hi:
        return 0.0
    # split at the support endpoints, where Im w has its kinks
    cuts = [lo] + [x for x in measure.support if lo < x < hi] + [hi]
    total = 0.0
    for x0, x1 in zip(cuts[:-1], cuts[1:]):
        total += adaptive_simpson(lambda t: measure.transform(complex(t, nu)).imag, x0, x1, tol)
    return total / math.pi


Weight = Literal["identity", "t", "1/t"]


def _improper_inverse_element(measure: SpectralMeasure, fam: RecurrencePolynomials, m: int, l: int,
                              K: int = 1024, rtol: float = 1e-12, max_K: int = 2 ** 20) -> float:
    """``int P_m P_l / t dmu`` when 0 is an endpoint of the support.

    ``t = lo + (hi - lo)(1 - cos phi)/2`` turns the inverse-square-root
    endpoint singularity into a bounded integrand in ``phi``, integrated by
    the composite midpoint rule with doubling.
    """
    lo, hi = measure.support
    n = max(m, l)

    def midpoint(K):
        phi = (np.arange(K) + 0.5) * np.pi / K
        t = lo + (hi - lo) * (1.0 - np.cos(phi)) / 2.0
        jac = (hi - lo) * np.sin(phi) / 2.0
        p = evaluate(fam, n, t)
        vals = measure.pdf(t) * jac / t * p[:, m] * p[:, l]
        return math.fsum(vals) * np.pi / K

    prev = midpoint(K)
    while K < max_K:
        K *= 2
        cur = midpoint(K)
        if abs(cur - prev) <= rtol * max(1.0, abs(cur)):
            return cur
        prev = cur
    raise RuntimeError("improper integral did not converge")


def matrix_element(coeffs: JacobiCoefficients, fam: RecurrencePolynomials, measure: SpectralMeasure,
                   rule: QuadratureRule, m: int, l: int, weight: Weight = "identity",
                   improper: bool = False) -> float:
    """``int w(t) P_m(t) P_l(t) dmu(t)`` for ``w`` in {1, t, 1/t}.

    Gives ``delta_ml``, ``<e_m, J e_l>`` and ``<e_m, J^{-1} e_l>`` respectively.
    For ``1/t`` with 0 an endpoint of the support, pass ``improper=True``.
    """
    if m < 0 or l < 0:
        raise ValueError("indices must be >= 0")
    lo, hi = measure.support
    if weight == "1/t":
        if lo < 0.0 < hi:
            raise SupportError("spectrum contains 0: J is not invertible")
        if lo == 0.0 or hi == 0.0:
            if not improper:
                raise SupportError("spectrum contains 0 as an endpoint; use improper=True")
            return _improper_inverse_element(measure, fam, m, l)
    degree = m + l + (1 if weight == "t" else 0)
    if weight != "1/t":
        _check_degree(rule, degree)
    p = evaluate(fam, max(m, l), rule.nodes)
    integrand = p[:, m] * p[:, l]
    if weight == "t":
        integrand = integrand * rule.nodes
    elif weight == "1/t":
        integrand = integrand / rule.nodes
    elif weight != "identity":
        raise ValueError(f"unknown weight {weight!r}")
    return rule.integrate(integrand)
