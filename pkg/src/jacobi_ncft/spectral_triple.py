"""Finite-truncation checks of the spectral triple built on the kinetic operator.

The Dirac operator is a square root of ``G^N`` in its own eigenbasis,
``D = sum s_k sqrt(lambda_k) |v_k><v_k|``.  On ``l^2 (x) C^4`` it becomes
``D (x) gamma_3`` with grading ``-sigma_3 (x) sigma_3`` and the antilinear
real structure ``(1 (x) gamma_2) o conj``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .ncft_gauge import KineticReduced, eigenvector_matrix, spectrum_closed_form


@dataclass(frozen=True)
class SpectralDecomposition:
    level_N: int
    lambdas: np.ndarray
    vectors: np.ndarray  # columns

    def projector(self, k: int) -> np.ndarray:
        v = self.vectors[:, k]
        return np.outer(v, v)

    def reconstruct(self, values=None) -> np.ndarray:
        values = self.lambdas if values is None else np.asarray(values, dtype=float)
        return (self.vectors * values) @ self.vectors.T

    def orthonormality_residual(self) -> float:
        V = self.vectors
        return float(np.linalg.norm(V.T @ V - np.eye(self.level_N)))


def decompose(G: KineticReduced) -> SpectralDecomposition:
    """Eigenpairs of ``G^N`` from the closed forms, ascending."""
    lam = spectrum_closed_form(G.mu_sq, G.N)
    V = eigenvector_matrix(G.N)
    for arr in (lam, V):
        arr.setflags(write=False)
    return SpectralDecomposition(G.N, lam, V)


def reconstruction_residual(dec: SpectralDecomposition, G: KineticReduced) -> float:
    return float(np.linalg.norm(dec.reconstruct() - G.to_dense()))


@dataclass(frozen=True)
class DiracTruncation:
    level_N: int
    matrix: np.ndarray
    sign_choices: tuple


def dirac_sqrt(dec: SpectralDecomposition, signs: Sequence[int] | None = None) -> DiracTruncation:
    """``D = sum s_k sqrt(lambda_k) |v_k><v_k|``; all ``s_k = +1`` by default."""
    if np.any(dec.lambdas <= 0):
        raise ValueError("eigenvalues must be positive to take a square root")
    s = np.ones(dec.level_N) if signs is None else np.asarray(signs, dtype=float)
    if s.shape != (dec.level_N,) or not np.all(np.abs(s) == 1):
        raise ValueError("signs must be a vector of +1/-1 of length N")
    D = dec.reconstruct(s * np.sqrt(dec.lambdas))
    D = 0.5 * (D + D.T)
    D.setflags(write=False)
    return DiracTruncation(dec.level_N, D, tuple(int(x) for x in s))


def isometry_J(dec: SpectralDecomposition, u: Sequence[int]) -> np.ndarray:
    """``sum u_k |v_k><v_k|`` with ``u_k = +-1``: a symmetric involution commuting with D."""
    u = np.asarray(u, dtype=float)
    if u.shape != (dec.level_N,) or not np.all(np.abs(u) == 1):
        raise ValueError("u must be a vector of +1/-1 of length N")
    return dec.reconstruct(u)


# ---------------------------------------------------------------- Clifford data

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, 1j], [-1j, 0]], dtype=complex)   # sign as in sigma_3 = i sigma_1 sigma_2
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class CliffordRep:
    """``gamma_1,2 = 1 (x) sigma_1,2``, ``gamma_3,4 = sigma_1,2 (x) 1``, ``Gamma = gamma_1 gamma_2 gamma_3 gamma_4``."""

    gamma: tuple
    grading: np.ndarray

    def anticommutator_residual(self) -> float:
        res = 0.0
        for block in ((0, 1), (2, 3)):
            for i in block:
                for j in block:
                    g, h = self.gamma[i], self.gamma[j]
                    target = 2.0 * np.eye(4) if i == j else np.zeros((4, 4))
                    res = max(res, float(np.max(np.abs(g @ h + h @ g - target))))
        return res


def clifford_rep() -> CliffordRep:
    g = (np.kron(I2, SIGMA1), np.kron(I2, SIGMA2), np.kron(SIGMA1, I2), np.kron(SIGMA2, I2))
    grading = g[0] @ g[1] @ g[2] @ g[3]
    return CliffordRep(g, grading)


@dataclass(frozen=True)
class AntilinearOperator:
    """``x -> L conj(x)`` (or ``L x`` when ``conjugate`` is false)."""

    linear: np.ndarray
    conjugate: bool = True

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.linear @ (np.conj(x) if self.conjugate else x)

    def then(self, other: "AntilinearOperator") -> "AntilinearOperator":
        """``self o other``: ``L1 conj(L2 conj x) = L1 conj(L2) x``."""
        L2 = np.conj(other.linear) if self.conjugate else other.linear
        return AntilinearOperator(self.linear @ L2, self.conjugate != other.conjugate)


def _spanning_set(n: int) -> list:
    # {e_j} and {i e_j}: enough to pin down an antilinear map over C
    eye = np.eye(n, dtype=complex)
    return [eye[:, j] for j in range(n)] + [1j * eye[:, j] for j in range(n)]


def _map_residual(f: Callable, g: Callable, n: int) -> float:
    return max(float(np.max(np.abs(f(x) - g(x)))) for x in _spanning_set(n))


def ko_relations(D: DiracTruncation, cl: CliffordRep) -> dict:
    """Max-norm residuals of the five real-structure and grading relations.

    ``calJ^2 = -1``, ``calJ calD = calD calJ``, ``calJ Gamma = -Gamma calJ``,
    ``Gamma^2 = 1``, ``calD Gamma = -Gamma calD`` on ``C^N (x) C^4``.
    """
    N = D.level_N
    IN = np.eye(N)
    calD = np.kron(D.matrix, cl.gamma[2])
    Gam = np.kron(IN, cl.grading)
    calJ = AntilinearOperator(np.kron(IN, cl.gamma[1]))
    n = 4 * N
    return {
        "J^2 = -1": _map_residual(lambda x: calJ(calJ(x)), lambda x: -x, n),
        "JD = DJ": _map_residual(lambda x: calJ(calD @ x), lambda x: calD @ calJ(x), n),
        "J Gamma = -Gamma J": _map_residual(lambda x: calJ(Gam @ x), lambda x: -(Gam @ calJ(x)), n),
        "Gamma^2 = 1": float(np.max(np.abs(Gam @ Gam - np.eye(n)))),
        "D Gamma = -Gamma D": float(np.max(np.abs(calD @ Gam + Gam @ calD))),
    }


# ---------------------------------------------------------------- commutant and HS bounds

def distance_to_scalars(a: np.ndarray) -> float:
    """``min_lambda ||a - lambda 1||`` in operator norm, for Hermitian ``a``."""
    w = np.linalg.eigvalsh(a)
    return float(0.5 * (w[-1] - w[0]))


def commutant_witness(dec: SpectralDecomposition, k: int, D: DiracTruncation | None = None):
    """``(a_c, ||[D, a_c]||, dist(a_c, scalars))`` with ``a_c = |v_k><v_k|``.

    A non-scalar element commuting with ``D``: the commutant of ``D`` is
    larger than the scalars.
    """
    if dec.level_N < 2:
        raise ValueError("N = 1: every operator is scalar, no witness exists")
    if not 0 <= k < dec.level_N:
        raise IndexError(f"eigenpair index {k} out of range")
    D = dirac_sqrt(dec) if D is None else D
    a = dec.projector(k)
    comm = D.matrix @ a - a @ D.matrix
    return a, float(np.linalg.norm(comm, 2)), distance_to_scalars(a)


@dataclass(frozen=True)
class HSReport:
    comm_op: float
    comm_hs: float
    comm_bound: float
    res_lhs: float
    res_rhs: float
    min_slack: float


def hs_bound_check(D: np.ndarray, a: np.ndarray, z: complex) -> HSReport:
    """``||[D,a]|| <= ||[D,a]||_2 <= 2 ||D|| ||a||_2`` and ``||a R(z)||_2 <= ||a||_2 ||R(z)||``."""
    D = np.asarray(D)
    a = np.asarray(a)
    n = D.shape[0]
    spec = np.linalg.eigvalsh(D)
    gap = float(np.min(np.abs(spec - z)))
    if gap <= 1e-12 * max(1.0, float(np.max(np.abs(spec)))):
        raise ValueError(f"z = {z} lies in the spectrum of D")
    comm = D @ a - a @ D
    c_op = float(np.linalg.norm(comm, 2))
    c_hs = float(np.linalg.norm(comm, "fro"))
    a_hs = float(np.linalg.norm(a, "fro"))
    bound = 2.0 * float(np.linalg.norm(D, 2)) * a_hs
    R = np.linalg.inv(D - z * np.eye(n))
    lhs = float(np.linalg.norm(a @ R, "fro"))
    rhs = a_hs * float(np.linalg.norm(R, 2))
    # rounding allowance of a few ulps on the larger side of each inequality
    ulp = 8 * np.finfo(float).eps
    slack = min(c_hs * (1 + ulp) - c_op, bound * (1 + ulp) - c_hs, rhs * (1 + ulp) - lhs)
    return HSReport(c_op, c_hs, bound, lhs, rhs, slack)


# ---------------------------------------------------------------- strong convergence

def _check_square_summable(f: Callable[[int], float], start: int = 64, doublings: int = 6):
    def block(lo, hi):
        return math.fsum(float(f(m)) ** 2 for m in range(lo, hi))

    W = start
    prev = block(W, 2 * W)
    for _ in range(doublings):
        W *= 2
        cur = block(W, 2 * W)
        if prev == 0.0 and cur == 0.0:
            return
        if not math.isfinite(cur) or (prev > 0 and cur / prev > 0.9):
            raise ValueError("f is not square summable: dyadic tail blocks do not decay")
        prev = cur


def strong_convergence_profile(f: Callable[[int], float], levels: Sequence[int], mu_sq: float = 1.0,
                               rtol: float = 1e-10, max_window: int = 2 ** 22) -> np.ndarray:
    """``||(Pi_N G Pi_N - G) f||_2`` for each level ``N``.

    ``Pi_N`` is the projection on the first ``N`` coordinates.  The error
    vector is ``mu^2 f_N`` on coordinate ``N - 1`` and ``(G f)_m`` for
    ``m >= N``.  ``G f`` lives on a finite window that doubles until the
    squared mass of its upper half drops below ``(rtol * smallest residual)^2``.
    """
    _check_square_summable(f)
    levels = [int(n) for n in levels]
    if min(levels) < 1:
        raise ValueError("levels must be >= 1")
    W = max(2 * max(levels), 64)
    while True:
        fv = np.array([float(f(m)) for m in range(W + 1)])
        Gf = 2.0 * fv[:W]
        Gf[1:] -= fv[: W - 1]
        Gf -= fv[1: W + 1]
        Gf *= mu_sq
        sq = Gf ** 2
        out = np.array([math.sqrt((mu_sq * fv[N]) ** 2 + math.fsum(sq[N:])) for N in levels])
        tail = math.fsum(sq[W // 2:])
        if tail <= (rtol * float(out.min())) ** 2:
            return out
        if W >= max_window:
            raise ValueError("G f tail did not settle within the maximal window")
        W *= 2
