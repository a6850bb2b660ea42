"""Seeded instances, lambda sweeps and log-log slope fits.

A sweep evaluates, on a geometric grid of couplings, how far the truncated
series sit from the exact least-action transform and how far the two
prescriptions sit from each other. The fitted log-log slopes are the
convergence orders.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import __version__
from .blockstruct import BlockPartition, block_project
from .errors import DimensionError, InsufficientDataError, NumericalError
from .exact import cederbaum_transform
from .matfun import EPS_PD, matrix_exp_i
from .perturb import (
    GAP_REL,
    PerturbedHamiltonian,
    h_block_from_generators,
    least_action_series,
    s_series_block_offdiag,
)

DEFAULT_BLOCKS = "0,1,2;3,4,5;6,7"
DEFAULT_SPECTRUM = (0.0, 0.3, 0.7, 2.0, 2.4, 2.9, 5.0, 5.6)
DEFAULT_SEED = 42
FLOOR_FACTOR = 1e3
MIN_FIT_POINTS = 4


def rng_from_seed(seed: int) -> np.random.Generator:
    """PCG64 bit generator; pinned explicitly so streams never change under us."""
    return np.random.Generator(np.random.PCG64(seed))


def generate_random_hermitian(n: int, seed: int, scale: float = 1.0) -> np.ndarray:
    """GUE-style Hermitian matrix with Frobenius norm ``scale``.

    Independent standard complex Gaussians, hermitized as ``(G + G^dagger)/2``
    (exactly Hermitian in floating point), then rescaled.
    """
    if n < 1:
        raise DimensionError(f"dimension must be positive, got {n}")
    rng = rng_from_seed(seed)
    g = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    a = (g + g.conj().T) / 2
    return a * (scale / np.linalg.norm(a))


def default_h0(partition: BlockPartition) -> np.ndarray:
    """Block-clustered diagonal ``H0``.

    The default 3+3+2 partition gets a fixed spectrum. Otherwise block ``b``
    occupies ``[3b, 3b + 1.5)`` with evenly spaced levels, so blocks never
    overlap and no level is degenerate.
    """
    if partition == BlockPartition.parse(DEFAULT_BLOCKS):
        return np.diag(np.array(DEFAULT_SPECTRUM, dtype=complex))
    e = np.empty(partition.n)
    for b, members in enumerate(partition.blocks):
        for r, i in enumerate(members):
            e[i] = 3.0 * b + 1.5 * r / len(members)
    return np.diag(e.astype(complex))


@dataclass
class ExperimentConfig:
    n: int = 8
    partition: BlockPartition = field(default_factory=lambda: BlockPartition.parse(DEFAULT_BLOCKS))
    seed: int = DEFAULT_SEED
    lambda_min: float = 1e-3
    lambda_max: float = 1e-1
    lambda_points: int = 12
    order: int = 3
    norm_scale: float = 1.0
    gap_rel: float = GAP_REL
    eps_pd: float = EPS_PD
    h0: np.ndarray | None = field(default=None, repr=False)
    h1: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.partition.n != self.n:
            raise DimensionError(f"partition covers {self.partition.n} indices, n = {self.n}")
        if not 0 < self.lambda_min < self.lambda_max:
            raise ValueError("lambda grid needs 0 < lambda_min < lambda_max")
        if self.lambda_points < MIN_FIT_POINTS:
            raise ValueError(f"lambda grid needs at least {MIN_FIT_POINTS} points")

    @property
    def lambdas(self) -> np.ndarray:
        return np.geomspace(self.lambda_min, self.lambda_max, self.lambda_points)

    def instance(self) -> PerturbedHamiltonian:
        h0 = default_h0(self.partition) if self.h0 is None else self.h0
        h1 = (
            generate_random_hermitian(self.n, self.seed, self.norm_scale)
            if self.h1 is None
            else self.h1
        )
        return PerturbedHamiltonian(h0, h1, self.partition)

    def echo(self) -> dict:
        return {
            "n": self.n,
            "blocks": str(self.partition),
            "seed": self.seed,
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "lambda_points": self.lambda_points,
            "order": self.order,
            "norm_scale": self.norm_scale,
            "gap_rel": self.gap_rel,
            "eps_pd": self.eps_pd,
            "h0": "default" if self.h0 is None else "supplied",
            "h1": "seeded" if self.h1 is None else "supplied",
        }


def fit_loglog_slope(points) -> tuple[float, float]:
    """Least-squares slope of ``log(value)`` against ``log(lam)`` and its r^2."""
    pts = np.asarray(list(points), dtype=float).reshape(-1, 2)
    if len(pts) < MIN_FIT_POINTS:
        raise InsufficientDataError(
            f"need at least {MIN_FIT_POINTS} points for a slope, got {len(pts)}"
        )
    if np.any(pts <= 0):
        raise ValueError("log-log fit needs strictly positive lambdas and values")
    fit = stats.linregress(np.log(pts[:, 0]), np.log(pts[:, 1]))
    return float(fit.slope), float(fit.rvalue**2)


@dataclass
class SweepReport:
    rows: list  # (lam, residual_name, value)
    slopes: list  # dicts: residual, exponent, r2, points
    metadata: dict
    coefficients: list = field(default_factory=list)  # dicts: order, quantity, value

    def slope(self, name: str) -> dict:
        for entry in self.slopes:
            if entry["residual"] == name:
                return entry
        raise KeyError(name)

    def values(self, name: str) -> list[tuple[float, float]]:
        return [(lam, v) for lam, r, v in self.rows if r == name]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["lambda", "residual", "value"])
        for lam, name, value in self.rows:
            w.writerow([repr(float(lam)), name, repr(float(value))])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "slopes": self.slopes,
            "coefficients": self.coefficients,
            "metadata": self.metadata,
        }


def residual_names(order: int) -> list[str]:
    return [f"r_T{k}" for k in range(1, order + 1)] + ["r_H", "r_split", "r_BS"]


def sweep_divergence(cfg: ExperimentConfig, workers: int = 1) -> SweepReport:
    """Exact vs series and prescription vs prescription on a lambda grid.

    Residuals per coupling (Frobenius norms):

    ``r_Tk``
        exact least-action ``T`` minus its series truncated at ``lam**k``
    ``r_H``
        exact block Hamiltonian minus its order-``K`` series
    ``r_split``
        ``exp(-1j S_LA)`` minus ``exp(-1j S_SW)`` with both generators
        truncated at order ``K``
    ``r_BS``
        block-diagonal part of the exact generator ``S``
    """
    ph = cfg.instance()
    part = cfg.partition
    K = cfg.order
    _, t_series, s_la = least_action_series(ph, K, cfg.gap_rel)
    s_sw = s_series_block_offdiag(ph, K, cfg.gap_rel)
    h_series = h_block_from_generators(ph, s_la, K)

    def evaluate(lam):
        h = ph.at(lam)
        try:
            exact = cederbaum_transform(h, part, eps_pd=cfg.eps_pd, with_generator=True)
        except NumericalError as exc:
            raise type(exc)(f"at lambda={lam:.6g}: {exc}") from exc
        out = {}
        for k in range(1, K + 1):
            out[f"r_T{k}"] = np.linalg.norm(exact.T - t_series(lam, upto=k))
        out["r_H"] = np.linalg.norm(exact.H_block - h_series(lam))
        out["r_split"] = np.linalg.norm(
            matrix_exp_i(s_la.series(lam)) - matrix_exp_i(s_sw.series(lam))
        )
        out["r_BS"] = np.linalg.norm(block_project(exact.S, part))
        floor = FLOOR_FACTOR * np.finfo(float).eps * np.linalg.norm(h)
        return lam, out, floor

    lambdas = [float(x) for x in cfg.lambdas]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(evaluate, lambdas))
    else:
        results = [evaluate(lam) for lam in lambdas]

    names = residual_names(K)
    rows = [(lam, name, float(out[name])) for lam, out, _ in results for name in names]
    slopes = []
    for name in names:
        usable = [(lam, out[name]) for lam, out, floor in results if out[name] > floor]
        entry = {"residual": name, "exponent": None, "r2": None, "points": len(usable)}
        if len(usable) >= MIN_FIT_POINTS:
            entry["exponent"], entry["r2"] = fit_loglog_slope(usable)
        slopes.append(entry)

    coefficients = []
    for k in range(1, K + 1):
        coefficients += [
            {"order": k, "quantity": "s_LA", "value": float(np.linalg.norm(s_la[k]))},
            {"order": k, "quantity": "s_SW", "value": float(np.linalg.norm(s_sw[k]))},
            {"order": k, "quantity": "s_LA-s_SW", "value": float(np.linalg.norm(s_la[k] - s_sw[k]))},
            {"order": k, "quantity": "B(s_LA)", "value": float(np.linalg.norm(block_project(s_la[k], part)))},
        ]
    metadata = {"config": cfg.echo(), "version": __version__}
    return SweepReport(rows, slopes, metadata, coefficients)
