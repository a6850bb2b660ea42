"""``blockdiag`` command line: ``transform``, ``series`` and ``sweep``.

Exit codes: 0 success, 2 bad input, 3 numerical failure (degeneracy,
branch cut, gauge ambiguity), 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .blockstruct import BlockPartition, block_project
from .errors import BranchError, InputError, InternalError, NumericalError, ParseError
from .exact import cederbaum_transform, extract_generator
from .fileio import (
    atomic_write_text,
    matrix_to_dict,
    read_hamiltonian_pair,
    read_matrix,
    write_json,
)
from .harness import DEFAULT_BLOCKS, DEFAULT_SEED, ExperimentConfig, sweep_divergence
from .perturb import h_block_from_generators, least_action_series, s_series_block_offdiag

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_INTERNAL = 0, 2, 3, 4


def _parse_diag(text: str) -> np.ndarray:
    try:
        values = [float(v) for v in text.split(",")]
    except ValueError:
        raise ParseError(f"bad --h0-diag list {text!r}") from None
    return np.diag(np.array(values, dtype=complex))


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="matrix dimension (default: from --blocks)")
    common.add_argument("--blocks", default=DEFAULT_BLOCKS, help='partition, e.g. "0,1,2;3,4;5,6,7"')
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="seed of the random H1")
    common.add_argument("--order", type=int, default=3, help="series order K (1..8)")
    common.add_argument("--norm-scale", type=float, default=1.0, help="Frobenius norm of the random H1")
    common.add_argument("--h0-diag", default=None, help="comma-separated diagonal of H0")
    common.add_argument("--input", default=None, help="input file (see README for formats)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument(
        "--gap-tol", type=float, default=1e-8, help="degeneracy tolerance relative to ||H0||_2"
    )
    common.add_argument("--eps-pd", type=float, default=1e-10, help="branch-cut guard of the inverse sqrt")
    common.add_argument("--format", choices=("csv", "json"), default="json", help="stdout summary format")

    parser = argparse.ArgumentParser(prog="blockdiag", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("transform", parents=[common], help="exact least-action block diagonalization")
    t.add_argument("--lambda", dest="lam", type=float, default=0.05,
                   help="coupling used when no --input matrix is given")

    sub.add_parser("series", parents=[common], help="perturbative generator and block-Hamiltonian series")

    s = sub.add_parser("sweep", parents=[common], help="lambda sweep of residuals with slope fits")
    s.add_argument("--lambda-min", type=float, default=1e-3)
    s.add_argument("--lambda-max", type=float, default=1e-1)
    s.add_argument("--lambda-points", type=int, default=12)
    s.add_argument("--workers", type=int, default=1, help="threads evaluating grid points")
    return parser


def _config(args) -> ExperimentConfig:
    partition = BlockPartition.parse(args.blocks, args.n)
    h0 = h1 = None
    if args.input is not None:
        h0, h1 = read_hamiltonian_pair(args.input)
    if args.h0_diag is not None:
        h0 = _parse_diag(args.h0_diag)
    extra = {}
    if args.command == "sweep":
        extra = dict(
            lambda_min=args.lambda_min,
            lambda_max=args.lambda_max,
            lambda_points=args.lambda_points,
        )
    return ExperimentConfig(
        n=partition.n,
        partition=partition,
        seed=args.seed,
        order=args.order,
        norm_scale=args.norm_scale,
        gap_rel=args.gap_tol,
        eps_pd=args.eps_pd,
        h0=h0,
        h1=h1,
        **extra,
    )


def _table(rows, header, fmt: str) -> str:
    if fmt == "json":
        return json.dumps([dict(zip(header, r)) for r in rows], indent=2) + "\n"
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def cmd_transform(args) -> str:
    if args.input is not None:
        h = read_matrix(args.input)
        partition = BlockPartition.parse(args.blocks, args.n if args.n is not None else h.shape[0])
    else:
        cfg = _config(args)
        partition = cfg.partition
        h = cfg.instance().at(args.lam)
    result = cederbaum_transform(h, partition, eps_pd=args.eps_pd)
    try:
        s = extract_generator(result)
    except BranchError:
        s = None
    out = {
        "blocks": str(partition),
        "T": matrix_to_dict(result.T),
        "H_block": matrix_to_dict(result.H_block),
        "S": None if s is None else matrix_to_dict(s),
        "diagnostics": result.diagnostics,
        "version": __version__,
    }
    write_json(Path(args.out) / "transform.json", out)
    rows = sorted(result.diagnostics.items())
    if s is not None:
        rows.append(("block_diagonal_generator_norm", float(np.linalg.norm(block_project(s, partition)))))
    return _table(rows, ["quantity", "value"], args.format)


def cmd_series(args) -> str:
    cfg = _config(args)
    ph = cfg.instance()
    part = cfg.partition
    z, t, s_la = least_action_series(ph, cfg.order, cfg.gap_rel)
    s_sw = s_series_block_offdiag(ph, cfg.order, cfg.gap_rel)
    h_la = h_block_from_generators(ph, s_la)
    h_sw = h_block_from_generators(ph, s_sw)
    series = {"Z": z.series, "T": t, "S_LA": s_la.series, "S_SW": s_sw.series,
              "H_block_LA": h_la, "H_block_SW": h_sw}
    doc = {
        "config": cfg.echo(),
        "version": __version__,
        "series": {name: [matrix_to_dict(c) for c in ser] for name, ser in series.items()},
    }
    rows = []
    for k in range(1, cfg.order + 1):
        rows += [
            (k, "s_LA", np.linalg.norm(s_la[k])),
            (k, "s_SW", np.linalg.norm(s_sw[k])),
            (k, "B(s_LA)", np.linalg.norm(block_project(s_la[k], part))),
            (k, "s_LA-s_SW", np.linalg.norm(s_la[k] - s_sw[k])),
            (k, "H_block_LA-H_block_SW", np.linalg.norm(h_la[k] - h_sw[k])),
        ]
    rows = [(k, q, float(v)) for k, q, v in rows]
    out = Path(args.out)
    write_json(out / "series.json", doc)
    atomic_write_text(out / "series.csv", _table(rows, ["order", "quantity", "value"], "csv"))
    return _table(rows, ["order", "quantity", "value"], args.format)


def cmd_sweep(args) -> str:
    cfg = _config(args)
    report = sweep_divergence(cfg, workers=args.workers)
    out = Path(args.out)
    atomic_write_text(out / "sweep.csv", report.to_csv())
    write_json(out / "sweep.json", report.to_dict())
    rows = [(s["residual"], s["exponent"], s["r2"], s["points"]) for s in report.slopes]
    return _table(rows, ["residual", "exponent", "r2", "points"], args.format)


COMMANDS = {"transform": cmd_transform, "series": cmd_series, "sweep": cmd_sweep}


def run_experiment(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        sys.stdout.write(COMMANDS[args.command](args))
    except (InputError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except InternalError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def main():
    sys.exit(run_experiment())


if __name__ == "__main__":
    main()
