"""Closed-form third-order expressions written out term by term.

Nothing on the main code path imports this module. It exists so the tests
can compare the generic series algebra in :mod:`blockdiag.perturb` against
an independent, literal transcription; a typo here shows up as a test
failure instead of a silently wrong result.

``z1, z2, z3`` are the coefficients of the diagonalizer generator,
``X = exp(-1j Z)`` with ``Z = lam z1 + lam^2 z2 + lam^3 z3 + ...``.
"""

import numpy as np

from .blockstruct import block_project


def _comm(a, b):
    return a @ b - b @ a


def exp_terms(z1, z2, z3):
    """First four coefficients of ``exp(-1j Z)``."""
    eye = np.eye(z1.shape[0])
    return [
        eye,
        -1j * z1,
        -1j * z2 - z1 @ z1 / 2,
        -1j * z3 - (z1 @ z2 + z2 @ z1) / 2 + 1j / 6 * z1 @ z1 @ z1,
    ]


def gram_inv_sqrt_terms(z1, z2, z3, partition):
    """Coefficients of ``(B(X) B(X^dagger))**(-1/2)`` through third order."""
    B = lambda a: block_project(a, partition)
    bz1, bz2 = B(z1), B(z2)
    bz1sq = B(z1 @ z1)
    eye = np.eye(z1.shape[0])
    w2 = -bz1sq + bz1 @ bz1
    w3 = (
        -(B(z1 @ z2) + B(z2 @ z1))
        + (bz1 @ bz2 + bz2 @ bz1)
        + 0.5j * (bz1 @ bz1sq - bz1sq @ bz1)
    )
    return [eye, np.zeros_like(eye, dtype=complex), -w2 / 2, -w3 / 2]


def t_terms(z1, z2, z3, partition):
    """``T_1, T_2, T_3`` of the least-action unitary."""
    B = lambda a: block_project(a, partition)
    bz1, bz2, bz3 = B(z1), B(z2), B(z3)
    z1sq = z1 @ z1
    bz1sq = B(z1sq)
    t1 = -1j * (z1 - bz1)
    t2 = -1j * (z2 - bz2) - z1sq / 2 - bz1 @ bz1 / 2 + z1 @ bz1
    t3 = (
        -1j * (z3 - bz3)
        + 1j / 6 * (z1sq @ z1 - B(z1sq @ z1))
        - 0.5j * bz1 @ bz1 @ bz1
        - (z1 @ z2 + z2 @ z1) / 2
        - (bz1 @ bz2 + bz2 @ bz1) / 2
        + (z1 @ bz2 + z2 @ bz1)
        + 0.25j * (bz1 @ bz1sq + bz1sq @ bz1)
        - 0.5j * (z1sq @ bz1 - z1 @ bz1 @ bz1)
    )
    return [t1, t2, t3]


def s_from_t(t1, t2, t3):
    """Invert ``T = exp(-1j S)`` order by order."""
    s1 = 1j * t1
    s2 = 1j * (t2 + s1 @ s1 / 2)
    s3 = 1j * (t3 + (s1 @ s2 + s2 @ s1) / 2 - 1j / 6 * s1 @ s1 @ s1)
    return [s1, s2, s3]


def s_terms(z1, z2, z3, partition):
    """Least-action generator coefficients ``s_1, s_2, s_3`` in closed form."""
    B = lambda a: block_project(a, partition)
    bz1, bz2, bz3 = B(z1), B(z2), B(z3)
    z1sq = z1 @ z1
    bz1sq = B(z1sq)
    s1 = z1 - bz1
    s2 = (z2 - bz2) + 0.5j * _comm(z1, bz1)
    s3 = (
        (z3 - bz3)
        + B(z1sq @ z1) / 6
        + bz1 @ bz1 @ bz1 / 3
        + 0.5j * (_comm(z1, bz2) + _comm(z2, bz1))
        - (bz1 @ bz1sq + bz1sq @ bz1) / 4
        - (bz1 @ bz1 @ z1 + z1 @ bz1 @ bz1 - z1sq @ bz1 - bz1 @ z1sq) / 12
        - (z1 @ bz1 @ z1 - bz1 @ z1 @ bz1) / 6
    )
    return [s1, s2, s3]


def h_block_terms(h0, h1, s1, s2, s3):
    """Coefficients of ``exp(1j S) (H0 + lam H1) exp(-1j S)`` through third order."""
    c = _comm
    return [
        h0,
        1j * c(s1, h0) + h1,
        1j * c(s2, h0) - c(s1, c(s1, h0)) / 2 + 1j * c(s1, h1),
        1j * c(s3, h0)
        - 1j / 6 * c(s1, c(s1, c(s1, h0)))
        - (c(s1, c(s2, h0)) + c(s2, c(s1, h0))) / 2
        + 1j * c(s2, h1)
        - c(s1, c(s1, h1)) / 2,
    ]
