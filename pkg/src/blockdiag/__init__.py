"""Least-action and block-off-diagonal-generator block diagonalization."""

__version__ = "0.1.0"

from .blockstruct import BlockPartition, block_project, off_block_norm  # noqa: E402
from .errors import *  # noqa: E402,F401,F403
from .exact import BlockDiagResult, cederbaum_transform, extract_generator, minimality_gap  # noqa: E402
from .perturb import (  # noqa: E402
    GeneratorKind,
    GeneratorSeries,
    PerturbedHamiltonian,
    h_block_from_generators,
    s_series_block_offdiag,
    s_series_least_action,
    t_series_least_action,
    z_series,
)
from .series import MatrixSeries, series_exp, series_inv_sqrt, series_log, series_mul  # noqa: E402
