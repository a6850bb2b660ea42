"""Closed-form least-action block diagonalization.

Among all unitaries ``T`` for which ``T^dagger H T`` is block diagonal, the
one closest to the identity is

    T = X B(X^dagger) (B(X) B(X^dagger))^(-1/2)

where ``X`` is any eigenvector matrix of ``H`` whose columns are grouped by
block. The formula is invariant under ``X -> X V`` for block-diagonal
unitary ``V``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .blockstruct import BlockPartition, block_project, off_block_norm
from .matfun import (
    EPS_PD,
    Eigendecomposition,
    align_eigenvectors,
    hermitian_eig,
    hpd_inv_sqrt,
    matrix_exp_i,
    unitary_log_principal,
)


@dataclass(frozen=True)
class BlockDiagResult:
    T: np.ndarray
    H_block: np.ndarray
    partition: BlockPartition
    S: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


def least_action_unitary(x, partition: BlockPartition, eps_pd: float = EPS_PD) -> np.ndarray:
    """Evaluate the least-action formula for a block-grouped eigenvector matrix ``x``."""
    x = np.asarray(x, dtype=complex)
    partition.check(x)
    bx = block_project(x, partition)
    bxd = bx.conj().T
    return x @ bxd @ hpd_inv_sqrt(bx @ bxd, eps_pd=eps_pd)


def h_block_formula(x, eigenvalues, partition: BlockPartition, eps_pd: float = EPS_PD):
    """Block Hamiltonian assembled as a block-diagonal back rotation of ``diag(E)``.

    ``(B(X)B(X^dagger))^(-1/2) B(X) . X^dagger H X . B(X^dagger) (B(X)B(X^dagger))^(-1/2)``
    with ``X^dagger H X = diag(E)``.
    """
    bx = block_project(np.asarray(x, dtype=complex), partition)
    r = hpd_inv_sqrt(bx @ bx.conj().T, eps_pd=eps_pd)
    left = r @ bx
    return (left * np.asarray(eigenvalues)) @ left.conj().T


def cederbaum_transform(
    h,
    partition: BlockPartition,
    *,
    decomposition: Eigendecomposition | None = None,
    eps_pd: float = EPS_PD,
    with_generator: bool = False,
) -> BlockDiagResult:
    """Least-action block diagonalization of a Hermitian matrix.

    Parameters
    ----------
    h : (n, n) array_like
        Hermitian matrix.
    partition : BlockPartition
    decomposition : Eigendecomposition, optional
        Precomputed eigendecomposition of ``h``; aligned before use.
    eps_pd : float
        Smallest admissible eigenvalue of ``B(X) B(X^dagger)``. Below it
        the transform is in the large-coupling regime and a
        :class:`~blockdiag.errors.BranchError` is raised.
    with_generator : bool
        Also compute the principal generator ``S`` with ``T = exp(-1j S)``.
    """
    h = np.asarray(h, dtype=complex)
    partition.check(h)
    d = decomposition if decomposition is not None else hermitian_eig(h)
    d = align_eigenvectors(d, partition)
    t = least_action_unitary(d.vectors, partition, eps_pd=eps_pd)
    h_block = t.conj().T @ h @ t
    h_block = (h_block + h_block.conj().T) / 2
    n = partition.n
    diagnostics = {
        "off_block_residual": off_block_norm(h_block, partition),
        "unitarity_residual": float(np.linalg.norm(t.conj().T @ t - np.eye(n))),
        "distance_to_identity": float(np.linalg.norm(t - np.eye(n))),
    }
    result = BlockDiagResult(t, h_block, partition, None, diagnostics)
    if with_generator:
        result = replace(result, S=extract_generator(result))
    return result


def extract_generator(result: BlockDiagResult) -> np.ndarray:
    """Principal Hermitian ``S`` with ``exp(-1j S) = T``."""
    return unitary_log_principal(result.T)


def random_block_unitary(partition: BlockPartition, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary on each block (QR of a complex Ginibre matrix)."""
    v = np.zeros((partition.n, partition.n), dtype=complex)
    for members in partition.blocks:
        m = len(members)
        g = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))) / np.sqrt(2)
        q, r = np.linalg.qr(g)
        d = np.diag(r)
        q = q * (d / np.abs(d))
        v[np.ix_(members, members)] = q
    return v


def random_block_hermitian(partition: BlockPartition, rng: np.random.Generator) -> np.ndarray:
    """Block-diagonal Hermitian matrix with unit Frobenius norm."""
    n = partition.n
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    b = block_project((g + g.conj().T) / 2, partition)
    return b / np.linalg.norm(b)


def norm_increase(t, v) -> float:
    """``||T V - I||_F - ||T - I||_F``."""
    eye = np.eye(t.shape[0])
    return float(np.linalg.norm(t @ v - eye) - np.linalg.norm(t - eye))


def minimality_gap(
    result: BlockDiagResult,
    partition: BlockPartition,
    trials: int = 1000,
    seed: int = 0,
    epsilon: float | None = None,
) -> float:
    """Smallest change of ``||T V - I||_F`` over sampled block-diagonal unitaries ``V``.

    With ``epsilon=None`` the ``V`` are Haar per block; otherwise they are
    near-identity rotations ``exp(-1j epsilon B)`` probing stationarity.
    A nonnegative return value is a sampled certificate that ``T`` is the
    closest block-diagonalizing unitary to the identity. ``trials=0``
    compares against ``V = I`` only and returns ``0.0``.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    gap = 0.0 if trials == 0 else np.inf
    for _ in range(trials):
        if epsilon is None:
            v = random_block_unitary(partition, rng)
        else:
            v = matrix_exp_i(epsilon * random_block_hermitian(partition, rng))
        gap = min(gap, norm_increase(result.T, v))
    return float(gap)
