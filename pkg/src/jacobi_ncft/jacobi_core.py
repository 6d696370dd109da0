"""Bounded Jacobi operators on l^2(N): coefficients, action on finite vectors, truncations.

A Jacobi operator is the semi-infinite symmetric tridiagonal matrix with
diagonal ``b_m`` and off-diagonals ``a_m > 0``.  Coefficient sequences are
kept as functions of the index together with a declared bound ``M`` on
``|a_m| + |b_m|``; nothing infinite is ever materialized, and every
coefficient that is read is checked.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

# off-diagonals smaller than this are treated as a decoupled block and rejected
A_FLOOR = 1e-300


class InvalidCoefficientsError(ValueError):
    """A queried coefficient violates positivity or the declared bound."""


def _frozen(x) -> np.ndarray:
    arr = np.array(x, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class JacobiCoefficients:
    """Coefficient sequences ``a, b : N -> R`` of a bounded Jacobi operator.

    ``bound_M`` must satisfy ``sup_m (|a_m| + |b_m|) <= bound_M``.  The
    supremum cannot be checked, so each index is validated when read.
    """

    a: Callable[[int], float]
    b: Callable[[int], float]
    bound_M: float
    name: str = "jacobi"

    def coefficient_pair(self, m: int) -> tuple[float, float]:
        if m < 0:
            raise IndexError(f"coefficient index must be >= 0, got {m}")
        am = float(self.a(m))
        bm = float(self.b(m))
        if not am > A_FLOOR:
            raise InvalidCoefficientsError(
                f"{self.name}: a_{m} = {am!r} must be strictly positive"
            )
        if not np.isfinite(bm):
            raise InvalidCoefficientsError(f"{self.name}: b_{m} = {bm!r} is not finite")
        if abs(am) + abs(bm) > self.bound_M * (1.0 + 1e-14):
            raise InvalidCoefficientsError(
                f"{self.name}: |a_{m}| + |b_{m}| = {abs(am) + abs(bm)!r} exceeds "
                f"declared bound M = {self.bound_M!r}"
            )
        return am, bm

    def arrays(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        """Validated ``(a_0..a_{n-1}, b_0..b_{n-1})``."""
        pairs = [self.coefficient_pair(m) for m in range(n)]
        a = np.array([p[0] for p in pairs], dtype=float)
        b = np.array([p[1] for p in pairs], dtype=float)
        return a, b

    @classmethod
    def constant(cls, a: float, b: float, bound_M: float | None = None,
                 name: str = "constant") -> "JacobiCoefficients":
        bound = abs(a) + abs(b) if bound_M is None else bound_M
        return cls(lambda m: a, lambda m: b, bound, name)

    @classmethod
    def from_sequences(cls, a: Sequence[float], b: Sequence[float],
                       bound_M: float | None = None,
                       name: str = "tabulated") -> "JacobiCoefficients":
        """Finite tables; reading past their end raises ``IndexError``."""
        a_t = tuple(float(x) for x in a)
        b_t = tuple(float(x) for x in b)
        if len(a_t) != len(b_t):
            raise ValueError("a and b tables must have equal length")
        if bound_M is None:
            bound_M = max(abs(x) + abs(y) for x, y in zip(a_t, b_t))
        return cls(a_t.__getitem__, b_t.__getitem__, bound_M, name)


def chebyshev_u_coefficients() -> JacobiCoefficients:
    """``x U_n = U_{n+1}/2 + U_{n-1}/2``: a = 1/2, b = 0, spectrum [-1, 1]."""
    return JacobiCoefficients.constant(0.5, 0.0, name="chebyshev-U")


def shifted_chebyshev_coefficients() -> JacobiCoefficients:
    """``J = -G/mu^2`` of the gauge model: a = 1, b = -2, M = 3, spectrum [-4, 0]."""
    return JacobiCoefficients.constant(1.0, -2.0, name="shifted-chebyshev")


@dataclass(frozen=True)
class TridiagonalTruncation:
    """Symmetric tridiagonal ``N x N`` matrix stored as diagonal and off-diagonal."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        d = _frozen(self.diag)
        e = _frozen(self.offdiag)
        if d.ndim != 1 or d.size == 0:
            raise ValueError("diagonal must be a non-empty 1-d array")
        if e.shape != (d.size - 1,):
            raise ValueError(f"off-diagonal must have length {d.size - 1}, got {e.shape}")
        object.__setattr__(self, "diag", d)
        object.__setattr__(self, "offdiag", e)

    @property
    def size(self) -> int:
        return self.diag.size

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def matvec(self, v) -> np.ndarray:
        v = np.asarray(v)
        if v.shape[0] != self.size:
            raise ValueError(f"vector length {v.shape[0]} != matrix size {self.size}")
        out = self.diag * v
        out[:-1] += self.offdiag * v[1:]
        out[1:] += self.offdiag * v[:-1]
        return out

    def leading(self, n: int) -> "TridiagonalTruncation":
        if not 1 <= n <= self.size:
            raise ValueError(f"leading block size must be in [1, {self.size}]")
        return TridiagonalTruncation(self.diag[:n], self.offdiag[: n - 1])

    def gershgorin(self) -> tuple[float, float]:
        r = np.zeros(self.size)
        r[:-1] += np.abs(self.offdiag)
        r[1:] += np.abs(self.offdiag)
        return float(np.min(self.diag - r)), float(np.max(self.diag + r))

    def norm_estimate(self) -> float:
        lo, hi = self.gershgorin()
        return max(abs(lo), abs(hi))


@dataclass(frozen=True)
class SparseVector:
    """Finitely supported vector of l^2(N)."""

    entries: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for k, v in dict(self.entries).items():
            if int(k) < 0:
                raise IndexError(f"negative coordinate {k}")
            if v != 0:
                clean[int(k)] = float(v)
        object.__setattr__(self, "entries", clean)

    @classmethod
    def basis(cls, m: int) -> "SparseVector":
        return cls({m: 1.0})

    @classmethod
    def from_dense(cls, values) -> "SparseVector":
        return cls({i: v for i, v in enumerate(np.asarray(values, dtype=float))})

    def __getitem__(self, m: int) -> float:
        return self.entries.get(m, 0.0)

    @property
    def support(self) -> list[int]:
        return sorted(self.entries)

    def to_dense(self, n: int | None = None) -> np.ndarray:
        top = max(self.entries, default=-1) + 1
        n = top if n is None else n
        out = np.zeros(n)
        for k, v in self.entries.items():
            if k < n:
                out[k] = v
        return out

    def __add__(self, other: "SparseVector") -> "SparseVector":
        keys = set(self.entries) | set(other.entries)
        return SparseVector({k: self[k] + other[k] for k in keys})

    def __rmul__(self, alpha: float) -> "SparseVector":
        return SparseVector({k: alpha * v for k, v in self.entries.items()})

    def norm(self) -> float:
        return float(np.sqrt(sum(v * v for v in self.entries.values())))


def apply(coeffs: JacobiCoefficients, v: SparseVector) -> SparseVector:
    """``(Jv)_m = a_m v_{m+1} + b_m v_m + a_{m-1} v_{m-1}`` with ``a_{-1} = 0``."""
    out: dict[int, float] = {}
    for j, vj in v.entries.items():
        # column j of J: a_{j-1} e_{j-1} + b_j e_j + a_j e_{j+1}
        a_j, b_j = coeffs.coefficient_pair(j)
        out[j] = out.get(j, 0.0) + b_j * vj
        out[j + 1] = out.get(j + 1, 0.0) + a_j * vj
        if j > 0:
            a_prev, _ = coeffs.coefficient_pair(j - 1)
            out[j - 1] = out.get(j - 1, 0.0) + a_prev * vj
    return SparseVector(out)


def truncate(coeffs: JacobiCoefficients, N: int) -> TridiagonalTruncation:
    """Leading ``N x N`` block of the Jacobi matrix."""
    if N < 1:
        raise ValueError(f"truncation size must be >= 1, got {N}")
    a, b = coeffs.arrays(N)
    return TridiagonalTruncation(b, a[: N - 1])


def norm_bound(coeffs: JacobiCoefficients) -> float:
    """``||J|| <= 2M`` whenever ``sup (|a_m| + |b_m|) <= M``."""
    return 2.0 * coeffs.bound_M


def symmetry_residual(T: TridiagonalTruncation, u, v) -> float:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != (T.size,) or v.shape != (T.size,):
        raise ValueError(f"vectors must have length {T.size}")
    return abs(float(np.dot(T.matvec(u), v)) - float(np.dot(u, T.matvec(v))))
