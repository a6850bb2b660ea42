import numpy as np
import pytest

from blockdiag.blockstruct import BlockPartition, block_project
from blockdiag.errors import (
    DegeneracyError,
    DimensionError,
    GaugeAmbiguityError,
    InsufficientDataError,
)
from blockdiag.exact import cederbaum_transform
from blockdiag.harness import (
    DEFAULT_SPECTRUM,
    ExperimentConfig,
    default_h0,
    fit_loglog_slope,
    generate_random_hermitian,
    sweep_divergence,
)
from blockdiag.perturb import least_action_series


def test_random_hermitian_contract():
    a = generate_random_hermitian(6, 17, 2.5)
    b = generate_random_hermitian(6, 17, 2.5)
    assert a.tobytes() == b.tobytes()
    np.testing.assert_array_equal(a, a.conj().T)
    assert np.linalg.norm(a) == pytest.approx(2.5, abs=1e-12)
    assert not np.array_equal(a, generate_random_hermitian(6, 18, 2.5))
    with pytest.raises(DimensionError):
        generate_random_hermitian(0, 1)


def test_default_h0():
    np.testing.assert_array_equal(np.diag(default_h0(BlockPartition.parse("0,1,2;3,4,5;6,7"))), DEFAULT_SPECTRUM)
    e = np.diag(default_h0(BlockPartition.from_sizes((2, 4)))).real
    assert len(set(e)) == 6 and e[:2].max() < e[2:].min()


def test_fit_exact_power_laws():
    lams = np.geomspace(1e-3, 1e-1, 5)
    slope, r2 = fit_loglog_slope(zip(lams, lams**4))
    assert slope == pytest.approx(4, abs=1e-10) and r2 == pytest.approx(1, abs=1e-12)
    slope, r2 = fit_loglog_slope(zip(lams, 3 * lams**2))
    assert slope == pytest.approx(2, abs=1e-10) and r2 == pytest.approx(1, abs=1e-12)


def test_fit_perturbed_power_law():
    # log(1 + 0.1 lam) varies by at most 0.01 over the range, so the slope bias is tiny
    lams = np.geomspace(1e-3, 1e-1, 12)
    slope, _ = fit_loglog_slope(zip(lams, lams**4 * (1 + 0.1 * lams)))
    assert 3.95 <= slope <= 4.05


def test_fit_errors():
    with pytest.raises(InsufficientDataError):
        fit_loglog_slope([(0.1, 1.0), (0.2, 2.0), (0.3, 3.0)])
    with pytest.raises(ValueError):
        fit_loglog_slope([(0.1, 1.0), (0.2, 0.0), (0.3, 3.0), (0.4, 1.0)])


def test_config_validation():
    with pytest.raises(ValueError):
        ExperimentConfig(lambda_points=3)
    with pytest.raises(ValueError):
        ExperimentConfig(lambda_min=0.2, lambda_max=0.1)
    with pytest.raises(DimensionError):
        ExperimentConfig(n=6)
    lams = ExperimentConfig().lambdas
    assert len(lams) == 12 and lams[0] == pytest.approx(1e-3) and lams[-1] == pytest.approx(1e-1)
    assert np.all(np.diff(lams) > 0)


@pytest.fixture(scope="module")
def default_report():
    return sweep_divergence(ExperimentConfig())


def test_sweep_slopes(default_report):
    bands = {"r_T1": 2, "r_T2": 3, "r_T3": 4, "r_H": 4, "r_split": 3, "r_BS": 3}
    for name, target in bands.items():
        entry = default_report.slope(name)
        assert abs(entry["exponent"] - target) <= 0.3, (name, entry)
        assert entry["points"] >= 4


def test_sweep_rows_are_reproducible(default_report):
    cfg = ExperimentConfig()
    ph = cfg.instance()
    _, t, _ = least_action_series(ph, 3)
    for lam, value in default_report.values("r_T2")[::5]:
        exact = cederbaum_transform(ph.at(lam), cfg.partition)
        assert np.linalg.norm(exact.T - t(lam, upto=2)) == pytest.approx(value, rel=1e-12)
    for lam, value in default_report.values("r_BS")[::5]:
        exact = cederbaum_transform(ph.at(lam), cfg.partition, with_generator=True)
        assert np.linalg.norm(block_project(exact.S, cfg.partition)) == pytest.approx(value, rel=1e-9)


def test_sweep_rows_are_finite_and_ordered(default_report):
    lams = [lam for lam, _, _ in default_report.rows]
    assert lams == sorted(lams)
    assert all(np.isfinite(v) and v >= 0 for _, _, v in default_report.rows)
    assert default_report.to_csv().splitlines()[0] == "lambda,residual,value"


def test_sweep_deterministic_and_parallel_safe(default_report):
    again = sweep_divergence(ExperimentConfig(), workers=4)
    assert again.to_csv() == default_report.to_csv()
    assert again.to_dict() == default_report.to_dict()


def test_sweep_reports_degeneracy():
    cfg = ExperimentConfig(h0=np.diag([0, 0.3, 0.7, 0.7, 2.4, 2.9, 5, 5.6]))
    with pytest.raises(DegeneracyError, match="gap"):
        sweep_divergence(cfg)


def test_sweep_reports_offending_lambda():
    # H(0.5) = 0.5 * sigma_x: both eigenvectors split evenly across the two blocks
    p = BlockPartition.singletons(2)
    cfg = ExperimentConfig(
        n=2, partition=p, h0=np.diag([0.0, 1.0]), h1=np.array([[0, 1], [1, -2.0]]),
        lambda_min=0.125, lambda_max=2.0, lambda_points=5,
    )
    with pytest.raises(GaugeAmbiguityError, match="at lambda=0.5"):
        sweep_divergence(cfg)
