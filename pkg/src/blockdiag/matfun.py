"""Hermitian eigendecomposition and the matrix functions built on it.

Every argument handled here is normal (Hermitian or unitary), so each
function diagonalizes its argument and applies the scalar function to the
spectrum. That keeps branch selection explicit: the inverse square root
takes the positive root, the logarithm returns angles in ``(-pi, pi)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .blockstruct import BlockPartition, is_hermitian
from .errors import (
    BlockMismatchError,
    BranchError,
    GaugeAmbiguityError,
    InternalError,
    NotHermitianError,
    NotUnitaryError,
)

EPS_PD = 1e-10
MINUS_ONE_CUTOFF = 1e-8
AMBIGUITY_TOL = 1e-10
HERMITIAN_TOL = 1e-12

JACOBI_TOL = 1e-14
JACOBI_MAX_SWEEPS = 60


@dataclass(frozen=True)
class Eigendecomposition:
    """Eigenvalues paired with the columns of a unitary eigenvector matrix."""

    eigenvalues: np.ndarray
    vectors: np.ndarray

    @property
    def min_gap(self) -> float:
        e = np.sort(self.eigenvalues)
        if e.size < 2:
            return np.inf
        return float(np.min(np.diff(e)))

    def reconstruct(self) -> np.ndarray:
        x = self.vectors
        return (x * self.eigenvalues) @ x.conj().T


def _require_hermitian(a, tol=HERMITIAN_TOL) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if not is_hermitian(a, tol):
        raise NotHermitianError("matrix is not Hermitian within tolerance")
    return a


def jacobi_eig(a, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Cyclic Jacobi diagonalization of a complex Hermitian matrix.

    Each (p, q) rotation first removes the phase of ``a[p, q]`` and then
    applies a real Givens rotation. Sweeps stop once the off-diagonal
    Frobenius norm drops below ``tol * ||a||_F``.
    """
    a = _require_hermitian(a).copy()
    n = a.shape[0]
    x = np.eye(n, dtype=complex)
    scale = np.linalg.norm(a)
    off = lambda m: np.linalg.norm(m - np.diag(np.diag(m)))
    for _ in range(max_sweeps):
        if off(a) <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                mod = abs(apq)
                if mod == 0.0:
                    continue
                phase = apq / mod
                theta = (a[q, q].real - a[p, p].real) / (2.0 * mod)
                t = np.copysign(1.0, theta) / (abs(theta) + np.hypot(1.0, theta))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                # v = diag(1, conj(phase)) @ [[c, s], [-s, c]]
                v = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ v
                a[idx, :] = v.conj().T @ a[idx, :]
                a[p, q] = a[q, p] = 0.0
                x[:, idx] = x[:, idx] @ v
    else:
        if off(a) > tol * scale:
            raise InternalError(f"Jacobi did not converge in {max_sweeps} sweeps")
    return Eigendecomposition(np.real(np.diag(a)).copy(), x)


def hermitian_eig(a, method: str = "lapack") -> Eigendecomposition:
    """Eigendecomposition of a Hermitian matrix.

    ``method="lapack"`` calls :func:`numpy.linalg.eigh`; ``method="jacobi"``
    runs the self-contained cyclic Jacobi solver. Both return ascending
    eigenvalues.
    """
    a = _require_hermitian(a)
    if method == "lapack":
        w, x = np.linalg.eigh(a)
        return Eigendecomposition(w, x)
    if method == "jacobi":
        d = jacobi_eig(a)
        order = np.argsort(d.eigenvalues, kind="stable")
        return Eigendecomposition(d.eigenvalues[order], d.vectors[:, order])
    raise ValueError(f"unknown eigensolver {method!r}")


def align_eigenvectors(
    d: Eigendecomposition, partition: BlockPartition, ambiguity_tol: float = AMBIGUITY_TOL
) -> Eigendecomposition:
    """Fix the gauge of an eigenvector matrix so that it tends to the identity.

    Every column is assigned to the block carrying most of its weight;
    within a block, columns are matched greedily to slots ``j`` by
    descending ``|x[j, col]|**2``. Finally each column is rephased so that
    its diagonal entry is real and nonnegative.
    """
    x = d.vectors
    n = partition.n
    partition.check(x)
    weights = np.abs(x) ** 2
    # block_weights[b, col] = ||P_b x[:, col]||^2
    block_weights = np.stack([weights[list(b), :].sum(axis=0) for b in partition.blocks])
    dominant = np.argmax(block_weights, axis=0)

    if len(partition) > 1:
        ranked = np.sort(block_weights, axis=0)
        close = np.flatnonzero(ranked[-1] - ranked[-2] < ambiguity_tol)
        if close.size:
            raise GaugeAmbiguityError(
                f"eigenvectors {close.tolist()} have no dominant block "
                f"(weights tie within {ambiguity_tol:g})"
            )
    counts = np.bincount(dominant, minlength=len(partition))
    if not np.array_equal(counts, partition.sizes):
        raise BlockMismatchError(
            f"eigenvector block occupancy {counts.tolist()} does not match "
            f"block sizes {list(partition.sizes)}"
        )

    perm = np.empty(n, dtype=int)
    for b, members in enumerate(partition.blocks):
        cols = np.flatnonzero(dominant == b)
        rows = np.array(members)
        sub = weights[np.ix_(rows, cols)]
        pairs = sorted(
            ((sub[r, c], r, c) for r in range(len(rows)) for c in range(len(cols))),
            key=lambda item: -item[0],
        )
        used_r, used_c = set(), set()
        for _, r, c in pairs:
            if r in used_r or c in used_c:
                continue
            perm[rows[r]] = cols[c]
            used_r.add(r)
            used_c.add(c)

    x = x[:, perm]
    diag = np.diag(x)
    phases = np.ones(n, dtype=complex)
    nonzero = np.abs(diag) > 0
    phases[nonzero] = diag[nonzero].conj() / np.abs(diag[nonzero])
    x = x * phases
    return Eigendecomposition(d.eigenvalues[perm], x)


def hpd_inv_sqrt(a, eps_pd: float = EPS_PD) -> np.ndarray:
    """Principal inverse square root of a Hermitian positive definite matrix.

    Raises
    ------
    BranchError
        If an eigenvalue is ``<= eps_pd``.
    """
    d = hermitian_eig(_require_hermitian(a))
    w = d.eigenvalues
    if np.min(w) <= eps_pd:
        raise BranchError(
            f"matrix is not safely positive definite: smallest eigenvalue {np.min(w):.3e} "
            f"<= {eps_pd:g}"
        )
    x = d.vectors
    r = (x / np.sqrt(w)) @ x.conj().T
    return (r + r.conj().T) / 2


def matrix_exp_i(s) -> np.ndarray:
    """``exp(-1j * s)`` for Hermitian ``s``."""
    d = hermitian_eig(_require_hermitian(s))
    x = d.vectors
    return (x * np.exp(-1j * d.eigenvalues)) @ x.conj().T


def unitary_log_principal(
    t, unitary_tol: float = 1e-10, cutoff: float = MINUS_ONE_CUTOFF
) -> np.ndarray:
    """Hermitian ``s`` with spectrum in ``(-pi, pi)`` such that ``exp(-1j s) = t``.

    The complex Schur form of a unitary matrix is diagonal, so it provides
    an orthonormal eigenbasis even when eigenvalues are degenerate.
    """
    t = np.asarray(t, dtype=complex)
    n = t.shape[0]
    if t.shape != (n, n) or np.linalg.norm(t.conj().T @ t - np.eye(n)) > unitary_tol * np.sqrt(n):
        raise NotUnitaryError("matrix is not unitary within tolerance")
    form, z = scipy.linalg.schur(t, output="complex")
    mu = np.diag(form)
    near = np.abs(mu + 1.0)
    if np.min(near) < cutoff:
        raise BranchError(
            f"eigenvalue within {np.min(near):.3e} of -1; principal logarithm undefined"
        )
    s = (z * -np.angle(mu)) @ z.conj().T
    return (s + s.conj().T) / 2
