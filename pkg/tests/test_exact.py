import numpy as np
import pytest
import scipy.linalg

from blockdiag.blockstruct import BlockPartition, block_project, off_block_norm
from blockdiag.errors import BranchError
from blockdiag.exact import (
    BlockDiagResult,
    cederbaum_transform,
    extract_generator,
    h_block_formula,
    least_action_unitary,
    minimality_gap,
    norm_increase,
    random_block_unitary,
)
from blockdiag.harness import fit_loglog_slope
from blockdiag.matfun import align_eigenvectors, hermitian_eig, matrix_exp_i
from blockdiag.perturb import least_action_series

from conftest import make_instance, random_hermitian


def oracle_transform(h, partition):
    """Independent route: Jacobi eigenvectors, per-eigenvalue block labels, scipy sqrtm."""
    d = hermitian_eig(h, method="jacobi")
    x = d.vectors
    n = partition.n
    # contiguous blocks: give block b the |b| columns with the largest weight on it
    order = []
    for members in partition.blocks:
        weights = np.array([np.sum(np.abs(x[list(members), j]) ** 2) for j in range(n)])
        order += sorted(np.argsort(-weights)[: len(members)])
    x = x[:, order]
    mask = partition.same_block
    bx = np.where(mask, x, 0)
    gram = bx @ bx.conj().T
    return x @ bx.conj().T @ np.linalg.inv(scipy.linalg.sqrtm(gram))


def test_single_block_is_trivial(rng):
    h = random_hermitian(rng, 5)
    r = cederbaum_transform(h, BlockPartition.single(5))
    np.testing.assert_allclose(r.T, np.eye(5), atol=1e-14)
    np.testing.assert_allclose(r.H_block, h, atol=1e-13)


def test_block_diagonal_input_is_trivial(partition332, rng):
    h = block_project(random_hermitian(rng, 8), partition332)
    r = cederbaum_transform(h, partition332)
    np.testing.assert_allclose(r.T, np.eye(8), atol=1e-13)
    np.testing.assert_allclose(r.H_block, h, atol=1e-13)
    assert r.diagnostics["distance_to_identity"] < 1e-13


def test_dual_path_oracle():
    ph = make_instance(seed=42)
    h = ph.at(0.05)
    r = cederbaum_transform(h, ph.partition)
    assert np.linalg.norm(r.T - oracle_transform(h, ph.partition)) <= 1e-10


def test_result_invariants():
    ph = make_instance(seed=9)
    h = ph.at(0.1)
    r = cederbaum_transform(h, ph.partition, with_generator=True)
    scale = np.linalg.norm(h)
    assert np.linalg.norm(r.T.conj().T @ r.T - np.eye(8)) <= 1e-11
    assert off_block_norm(r.H_block, ph.partition) <= 1e-11 * scale
    assert np.linalg.norm(r.H_block - r.T.conj().T @ h @ r.T) <= 1e-11 * scale
    np.testing.assert_allclose(np.linalg.eigvalsh(r.H_block), np.linalg.eigvalsh(h), atol=1e-11)
    assert r.diagnostics["off_block_residual"] == off_block_norm(r.H_block, ph.partition)
    assert np.linalg.norm(matrix_exp_i(r.S) - r.T) <= 1e-10


def test_block_hamiltonian_formula_agrees():
    ph = make_instance(seed=10)
    h = ph.at(0.08)
    d = align_eigenvectors(hermitian_eig(h), ph.partition)
    r = cederbaum_transform(h, ph.partition)
    assembled = h_block_formula(d.vectors, d.eigenvalues, ph.partition)
    assert np.linalg.norm(assembled - r.H_block) <= 1e-12 * np.linalg.norm(h)


def test_gauge_independence():
    ph = make_instance(seed=12)
    h = ph.at(0.1)
    d = align_eigenvectors(hermitian_eig(h), ph.partition)
    t = least_action_unitary(d.vectors, ph.partition)
    rng = np.random.default_rng(3)
    for _ in range(10):
        v = random_block_unitary(ph.partition, rng)
        assert np.linalg.norm(least_action_unitary(d.vectors @ v, ph.partition) - t) <= 1e-11


def test_branch_error_at_large_coupling():
    # a swap of two one-dimensional blocks makes B(X) singular
    p = BlockPartition.singletons(2)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    with pytest.raises(BranchError):
        least_action_unitary(x, p)


def test_extract_generator_identity():
    r = BlockDiagResult(np.eye(3, dtype=complex), np.eye(3), BlockPartition.single(3))
    np.testing.assert_allclose(extract_generator(r), 0, atol=1e-15)


def test_two_block_generator_nearly_offdiagonal():
    ph = make_instance((4, 4), seed=2)
    r = cederbaum_transform(ph.at(1e-2), ph.partition, with_generator=True)
    assert np.linalg.norm(block_project(r.S, ph.partition)) / np.linalg.norm(r.S) < 1e-4


def test_three_block_generator_diagonal_part_is_third_order():
    ph = make_instance(seed=42)
    _, _, s = least_action_series(ph, 3)
    predicted = block_project(s[3], ph.partition)
    lams = np.geomspace(1e-3, 1e-1, 8)
    norms = []
    for lam in lams:
        r = cederbaum_transform(ph.at(lam), ph.partition, with_generator=True)
        bs = block_project(r.S, ph.partition)
        norms.append(np.linalg.norm(bs))
        if lam <= 1e-2:
            # cross-check the leading term against the closed-form third-order coefficient
            assert np.linalg.norm(bs - lam**3 * predicted) <= 0.05 * np.linalg.norm(bs)
    slope, r2 = fit_loglog_slope(zip(lams, norms))
    assert 2.7 <= slope <= 3.3 and r2 > 0.999


def test_minimality_trivial():
    ph = make_instance(seed=1)
    r = cederbaum_transform(ph.at(0.1), ph.partition)
    assert norm_increase(r.T, np.eye(8)) == 0.0
    assert minimality_gap(r, ph.partition, trials=0) == 0.0


def test_minimality_sampled():
    ph = make_instance(seed=42)
    r = cederbaum_transform(ph.at(0.1), ph.partition)
    assert minimality_gap(r, ph.partition, trials=1000, seed=5) >= -1e-12


@pytest.mark.parametrize("eps", [1e-3, 1e-2])
def test_minimality_stationarity(eps):
    ph = make_instance(seed=42)
    r = cederbaum_transform(ph.at(0.1), ph.partition)
    assert minimality_gap(r, ph.partition, trials=200, seed=6, epsilon=eps) >= -1e-12


def test_non_minimal_transform_detected():
    """The certificate is not vacuous: a re-gauged T fails it."""
    ph = make_instance(seed=42)
    r = cederbaum_transform(ph.at(0.1), ph.partition)
    v = random_block_unitary(ph.partition, np.random.default_rng(0))
    worse = BlockDiagResult(r.T @ v, r.H_block, ph.partition)
    assert minimality_gap(worse, ph.partition, trials=200, seed=1, epsilon=1e-2) < 0
