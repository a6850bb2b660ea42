"""Truncated power series in a scalar ``lam`` with square-matrix coefficients.

The coefficients do not commute, so products are Cauchy products with the
factor order preserved. All operations truncate at the common order ``K``.
"""

from __future__ import annotations

import math

import numpy as np

from .blockstruct import BlockPartition, block_project
from .errors import DimensionError, NormalizationError

DEFAULT_ORDER = 3
MAX_ORDER = 8
NORMALIZATION_TOL = 1e-12


class MatrixSeries:
    """``C_0 + lam C_1 + ... + lam^K C_K`` stored as a ``(K+1, n, n)`` array."""

    __slots__ = ("coeffs",)
    __array_priority__ = 100

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 3 or c.shape[1] != c.shape[2]:
            raise DimensionError(f"coefficients must have shape (K+1, n, n), got {c.shape}")
        if c.shape[0] - 1 > MAX_ORDER:
            raise DimensionError(f"order {c.shape[0] - 1} exceeds the cap {MAX_ORDER}")
        c.setflags(write=False)
        self.coeffs = c

    @classmethod
    def identity(cls, n: int, order: int = DEFAULT_ORDER) -> MatrixSeries:
        c = np.zeros((order + 1, n, n), dtype=complex)
        c[0] = np.eye(n)
        return cls(c)

    @classmethod
    def zeros(cls, n: int, order: int = DEFAULT_ORDER) -> MatrixSeries:
        return cls(np.zeros((order + 1, n, n), dtype=complex))

    @classmethod
    def from_terms(cls, terms, order: int) -> MatrixSeries:
        """Build from ``[C_0, C_1, ...]``, zero-padding or truncating to ``order``."""
        terms = [np.asarray(t, dtype=complex) for t in terms]
        n = terms[0].shape[0]
        c = np.zeros((order + 1, n, n), dtype=complex)
        for k, t in enumerate(terms[: order + 1]):
            c[k] = t
        return cls(c)

    @property
    def order(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def n(self) -> int:
        return self.coeffs.shape[1]

    def __getitem__(self, k):
        return self.coeffs[k]

    def __iter__(self):
        return iter(self.coeffs)

    def __repr__(self):
        return f"MatrixSeries(n={self.n}, order={self.order})"

    def _check(self, other: MatrixSeries):
        if not isinstance(other, MatrixSeries):
            return NotImplemented
        if other.coeffs.shape != self.coeffs.shape:
            raise DimensionError(
                f"series shapes differ: {self.coeffs.shape} vs {other.coeffs.shape}"
            )
        return None

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return MatrixSeries(self.coeffs + other.coeffs)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return MatrixSeries(self.coeffs - other.coeffs)

    def __neg__(self):
        return MatrixSeries(-self.coeffs)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return MatrixSeries(scalar * self.coeffs)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return series_mul(self, other)

    def adjoint(self) -> MatrixSeries:
        return MatrixSeries(np.conj(np.swapaxes(self.coeffs, 1, 2)))

    def block_project(self, partition: BlockPartition) -> MatrixSeries:
        return MatrixSeries(block_project(self.coeffs, partition))

    def conjugate_by(self, u) -> MatrixSeries:
        """``u @ C_k @ u^dagger`` for every coefficient."""
        u = np.asarray(u)
        return MatrixSeries(u @ self.coeffs @ u.conj().T)

    def truncate(self, order: int) -> MatrixSeries:
        """Drop the coefficients above ``order`` (shape shrinks)."""
        return MatrixSeries(self.coeffs[: order + 1])

    def pad(self, order: int) -> MatrixSeries:
        return MatrixSeries.from_terms(list(self.coeffs), order)

    def __call__(self, lam: float, upto: int | None = None) -> np.ndarray:
        """Evaluate the partial sum up to ``lam**upto`` (default: all terms)."""
        upto = self.order if upto is None else upto
        powers = lam ** np.arange(upto + 1)
        return np.tensordot(powers, self.coeffs[: upto + 1], axes=1)


def series_mul(a: MatrixSeries, b: MatrixSeries) -> MatrixSeries:
    """Truncated Cauchy product, ``result_k = sum_{i+j=k} a_i @ b_j``."""
    if a.coeffs.shape != b.coeffs.shape:
        raise DimensionError(f"series shapes differ: {a.coeffs.shape} vs {b.coeffs.shape}")
    K = a.order
    out = np.zeros_like(a.coeffs)
    for i in range(K + 1):
        for j in range(K + 1 - i):
            out[i + j] += a.coeffs[i] @ b.coeffs[j]
    return MatrixSeries(out)


def _power_sum(w: MatrixSeries, weights) -> MatrixSeries:
    """``sum_j weights[j] * w**j`` for a series ``w`` with zero constant term."""
    acc = weights[0] * MatrixSeries.identity(w.n, w.order)
    power = MatrixSeries.identity(w.n, w.order)
    for j in range(1, w.order + 1):
        power = series_mul(power, w)
        acc = acc + weights[j] * power
    return acc


def _require_constant(s: MatrixSeries, value, what: str):
    if np.linalg.norm(s.coeffs[0] - value) > NORMALIZATION_TOL * max(1.0, np.sqrt(s.n)):
        raise NormalizationError(f"{what}: constant term has the wrong value")


def series_inv_sqrt(a: MatrixSeries) -> MatrixSeries:
    """Principal inverse square root of ``I + W`` with ``W = O(lam)``.

    Substitutes ``W`` into the binomial series of ``(1 + x)**(-1/2)``.
    """
    eye = np.eye(a.n)
    _require_constant(a, eye, "series_inv_sqrt")
    w = a - MatrixSeries.identity(a.n, a.order)
    weights = [math.comb(2 * j, j) * (-0.25) ** j for j in range(a.order + 1)]
    return _power_sum(w, weights)


def series_exp(g: MatrixSeries) -> MatrixSeries:
    """Series of ``exp(-1j * G(lam))`` for ``G`` with zero constant term."""
    _require_constant(g, 0.0, "series_exp")
    weights = [1.0 / math.factorial(j) for j in range(g.order + 1)]
    return _power_sum(-1j * g, weights)


def series_log(u: MatrixSeries) -> MatrixSeries:
    """Inverse of :func:`series_exp`: ``G`` with ``exp(-1j G) = U``.

    ``G = 1j * log(U)`` with ``log(I + W) = sum_j (-1)**(j+1) W**j / j``.
    """
    _require_constant(u, np.eye(u.n), "series_log")
    w = u - MatrixSeries.identity(u.n, u.order)
    weights = [0.0] + [(-1.0) ** (j + 1) / j for j in range(1, u.order + 1)]
    return 1j * _power_sum(w, weights)
