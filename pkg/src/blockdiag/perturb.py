"""Perturbative block diagonalization of ``H = H0 + lam H1``.

Two prescriptions are built here as power series in ``lam``:

* least action: expand the eigenvector matrix ``X = exp(-1j Z)`` order by
  order, push it through ``T = X B(X^dagger) (B(X) B(X^dagger))^(-1/2)``
  with series algebra, and take the series logarithm to get the generator;
* block-off-diagonal generator: solve for ``S`` with ``B(S) = 0`` directly,
  one order at a time.

Energy denominators need a diagonal ``H0``. A block-diagonal ``H0`` is
first diagonalized block by block; that unitary is block diagonal, commutes
with ``B`` and is undone on every returned series.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .blockstruct import BlockPartition, block_project, is_hermitian, off_block_norm
from .errors import DegeneracyError, DimensionError, InternalError, NotHermitianError
from .series import (
    DEFAULT_ORDER,
    MAX_ORDER,
    MatrixSeries,
    series_exp,
    series_inv_sqrt,
    series_log,
    series_mul,
)

GAP_REL = 1e-8


@dataclass(frozen=True)
class PerturbedHamiltonian:
    """``H0 + lam H1`` with ``H0`` block diagonal with respect to ``partition``."""

    h0: np.ndarray
    h1: np.ndarray
    partition: BlockPartition

    def __post_init__(self):
        h0 = np.asarray(self.h0, dtype=complex)
        h1 = np.asarray(self.h1, dtype=complex)
        for name, m in (("H0", h0), ("H1", h1)):
            self.partition.check(m)
            if not is_hermitian(m):
                raise NotHermitianError(f"{name} is not Hermitian")
        scale = np.linalg.norm(h0)
        if off_block_norm(h0, self.partition) > 1e-12 * scale:
            raise DimensionError("H0 is not block diagonal with respect to the partition")
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "h1", h1)

    @property
    def n(self) -> int:
        return self.partition.n

    def at(self, lam: float) -> np.ndarray:
        return self.h0 + lam * self.h1

    def series(self, order: int = DEFAULT_ORDER) -> MatrixSeries:
        return MatrixSeries.from_terms([self.h0, self.h1], order)


class GeneratorKind(enum.Enum):
    Z_FULL_DIAG = "z_full_diag"
    S_LEAST_ACTION = "s_least_action"
    S_BLOCK_OFFDIAG = "s_block_offdiag"


@dataclass(frozen=True)
class GeneratorSeries:
    """Hermitian generator ``G(lam) = lam g_1 + lam^2 g_2 + ...`` tagged by prescription."""

    kind: GeneratorKind
    series: MatrixSeries
    partition: BlockPartition

    @property
    def order(self) -> int:
        return self.series.order

    def __getitem__(self, k):
        return self.series[k]

    def unitary(self) -> MatrixSeries:
        """Series of ``exp(-1j G)``."""
        return series_exp(self.series)


def _hermitize(c: np.ndarray) -> np.ndarray:
    return (c + np.conj(np.swapaxes(c, -1, -2))) / 2


@dataclass(frozen=True)
class _Frame:
    u: np.ndarray  # block-diagonal unitary, H0 = u diag(energies) u^dagger
    energies: np.ndarray
    h1: np.ndarray  # H1 in the eigenbasis of H0
    trivial: bool


def _diagonal_frame(ph: PerturbedHamiltonian) -> _Frame:
    h0 = ph.h0
    n = ph.n
    if np.count_nonzero(h0 - np.diag(np.diag(h0))) == 0:
        return _Frame(np.eye(n, dtype=complex), np.diag(h0).real.copy(), ph.h1, True)
    u = np.zeros((n, n), dtype=complex)
    energies = np.empty(n)
    for members in ph.partition.blocks:
        idx = np.array(members)
        w, v = np.linalg.eigh(h0[np.ix_(idx, idx)])
        u[np.ix_(idx, idx)] = v
        energies[idx] = w
    residual = np.linalg.norm(u.conj().T @ h0 @ u - np.diag(energies))
    if residual > 1e-12 * max(np.linalg.norm(h0), 1.0):
        raise InternalError(f"H0 not diagonal after block-wise reduction (residual {residual:.2e})")
    return _Frame(u, energies, u.conj().T @ ph.h1 @ u, False)


def _gap_tol(ph: PerturbedHamiltonian, gap_rel: float) -> float:
    return gap_rel * np.linalg.norm(ph.h0, 2)


def _check_gaps(energies, mask, tol, what):
    diffs = np.abs(energies[:, None] - energies[None, :])
    diffs = np.where(mask, diffs, np.inf)
    m, k = np.unravel_index(np.argmin(diffs), diffs.shape)
    if diffs[m, k] <= tol:
        raise DegeneracyError(
            f"{what} eigenvalue gap {diffs[m, k]:.3e} between H0 levels {m} and {k} "
            f"is below gap_tol {tol:.3e}"
        )


def _solve_orders(frame: _Frame, mask: np.ndarray, order: int) -> MatrixSeries:
    """Generator making the ``mask`` entries of ``exp(iG) H exp(-iG)`` vanish order by order.

    At order ``k`` the unknown enters only through ``1j [g_k, H0]``, whose
    ``(m, n)`` entry is ``1j g_k[m, n] (E_n - E_m)``.
    """
    e = frame.energies
    n = e.size
    denom = e[None, :] - e[:, None]
    denom = np.where(mask, denom, 1.0)
    h = MatrixSeries.from_terms([np.diag(e).astype(complex), frame.h1], order)
    coeffs = np.zeros((order + 1, n, n), dtype=complex)
    for k in range(1, order + 1):
        g = MatrixSeries(coeffs)
        conj = series_mul(series_mul(series_exp(-g), h), series_exp(g))
        residual = conj[k]
        coeffs[k] = _hermitize(np.where(mask, 1j * residual / denom, 0.0))
    return MatrixSeries(coeffs)


def _check_order(order: int):
    if not 1 <= order <= MAX_ORDER:
        raise DimensionError(f"order must lie in 1..{MAX_ORDER}, got {order}")


def z_series(
    ph: PerturbedHamiltonian, order: int = DEFAULT_ORDER, gap_rel: float = GAP_REL
) -> GeneratorSeries:
    """Generator ``Z`` of the full diagonalizer, ``X = exp(-1j Z)``.

    ``diag(z_k) = 0`` in the eigenbasis of ``H0``. Returned in the caller's
    basis; for a block-diagonal but non-diagonal ``H0`` the columns of
    ``exp(-1j Z)`` are eigenvectors up to the block-diagonal frame change,
    which leaves the least-action transform unchanged.
    """
    _check_order(order)
    frame = _diagonal_frame(ph)
    off_diag = ~np.eye(ph.n, dtype=bool)
    _check_gaps(frame.energies, off_diag, _gap_tol(ph, gap_rel), "H0")
    z = _solve_orders(frame, off_diag, order)
    if not frame.trivial:
        z = z.conjugate_by(frame.u)
    return GeneratorSeries(GeneratorKind.Z_FULL_DIAG, z, ph.partition)


def t_series_least_action(z: GeneratorSeries, partition: BlockPartition) -> MatrixSeries:
    """Series of ``T = X B(X^dagger) (B(X) B(X^dagger))^(-1/2)`` with ``X = exp(-1j Z)``."""
    if z.kind is not GeneratorKind.Z_FULL_DIAG:
        raise ValueError(f"expected a Z_FULL_DIAG generator, got {z.kind.name}")
    x = series_exp(z.series)
    bx = x.block_project(partition)
    bxd = x.adjoint().block_project(partition)
    gram = series_mul(bx, bxd)
    return series_mul(series_mul(x, bxd), series_inv_sqrt(gram))


def s_series_least_action(
    z: GeneratorSeries, partition: BlockPartition, order: int | None = None
) -> GeneratorSeries:
    """Generator of the least-action unitary, ``T = exp(-1j S)``."""
    if order is not None and order < z.order:
        z = GeneratorSeries(z.kind, z.series.truncate(order), z.partition)
    t = t_series_least_action(z, partition)
    s = MatrixSeries(_hermitize(series_log(t).coeffs))
    return GeneratorSeries(GeneratorKind.S_LEAST_ACTION, s, partition)


def s_series_block_offdiag(
    ph: PerturbedHamiltonian, order: int = DEFAULT_ORDER, gap_rel: float = GAP_REL
) -> GeneratorSeries:
    """Block-off-diagonal generator: at every order ``B(s_k) = 0``.

    ``s_k`` cancels the cross-block part of the order-``k`` coefficient of
    ``exp(1j S) H exp(-1j S)``. Degeneracies inside a block are harmless;
    only cross-block gaps enter the denominators.
    """
    _check_order(order)
    frame = _diagonal_frame(ph)
    cross = ~ph.partition.same_block
    _check_gaps(frame.energies, cross, _gap_tol(ph, gap_rel), "cross-block")
    s = _solve_orders(frame, cross, order)
    if not frame.trivial:
        s = s.conjugate_by(frame.u)
        s = MatrixSeries(np.where(cross, s.coeffs, 0.0))
    return GeneratorSeries(GeneratorKind.S_BLOCK_OFFDIAG, s, ph.partition)


def h_block_from_generators(
    ph: PerturbedHamiltonian, s: GeneratorSeries, order: int | None = None
) -> MatrixSeries:
    """Series of ``exp(1j S) (H0 + lam H1) exp(-1j S)``."""
    order = s.order if order is None else order
    _check_order(order)
    gen = s.series.pad(order) if order > s.order else s.series.truncate(order)
    h = ph.series(order)
    out = series_mul(series_mul(series_exp(-gen), h), series_exp(gen))
    return MatrixSeries(_hermitize(out.coeffs))


def least_action_series(ph: PerturbedHamiltonian, order: int = DEFAULT_ORDER, gap_rel=GAP_REL):
    """Convenience bundle: ``(Z, T, S)`` series of the least-action prescription."""
    z = z_series(ph, order, gap_rel)
    t = t_series_least_action(z, ph.partition)
    s = s_series_least_action(z, ph.partition)
    return z, t, s


def offdiag_residual_series(ph: PerturbedHamiltonian, z: GeneratorSeries) -> MatrixSeries:
    """Off-diagonal part of ``exp(1j Z) H exp(-1j Z)``, used to verify ``Z``."""
    out = h_block_from_generators(ph, z, z.order)
    coeffs = out.coeffs.copy()
    for k in range(coeffs.shape[0]):
        np.fill_diagonal(coeffs[k], 0.0)
    return MatrixSeries(coeffs)

