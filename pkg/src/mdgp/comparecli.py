#! /usr/bin/env python3

import argparse
from pathlib import Path
from typing import Any, Dict, List, Sequence

import numpy as np
import pandas as pd

from .config import RunConfig, load_config
from .dataset import Dataset
from .dirpath import dir_path, make_output_dir
from .draws import PosteriorDraws
from .escape import escape
from .featuremap import approx_kernel_matrix
from .fitcli import load_datasets
from .fitting import (FittedModel, approximate_mlpd, exact_mlpd, fit_exact,
                      fit_model)
from .hyperparams import HyperParams
from .intlist import int_list
from .kernelexpr import KernelExpr, kernel_matrix
from .layout import ParameterLayout
from .logger import logger
from .mainwrap import mainwrap
from .parsecli import parse_cli
from .usererror import ConfigError

COMPARE_FILE = "compare.csv"


def cli_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Fit the exact GP and the approximation for several"
        " numbers of basis functions and compare their test MLPD. Column"
        " mlpd_exact_minus_approx is positive when the exact GP predicts"
        " the test data better.")

    parser.add_argument("--config", type=Path, required=True,
                        help="JSON run configuration with train and test"
                        " files and the gaussian likelihood.")
    parser.add_argument("--B", type=int_list, dest="num_basis",
                        default=[8, 16, 32],
                        help="Comma-separated numbers of basis functions.")
    parser.add_argument("--c", type=float, dest="domain_scale",
                        help="Domain scale factor, L = c * half-range.")
    parser.add_argument("--seed", type=int,
                        help="Random seed, overrides sampler.seed.")
    parser.add_argument("--chains", type=int,
                        help="Number of chains, overrides sampler.chains.")
    parser.add_argument("--output-dir", type=dir_path,
                        help="Directory for compare.csv.")
    return parser


def posterior_mean_theta(expr: KernelExpr,
                         draws: PosteriorDraws) -> HyperParams:
    layout = ParameterLayout.make(expr, ("sigma",), 0)
    _, theta = layout.split_constrained(np.mean(draws.matrix(), axis=0))
    return theta


def kernel_max_error(fitted: FittedModel, train: Dataset,
                     theta: HyperParams) -> float:
    """Largest |K - Psi Psi^T| entry over the training points at `theta`."""

    x = fitted.standardization.transform_x(fitted.space, train.x)
    exact = kernel_matrix(fitted.expr, theta, x, x)
    approx = approx_kernel_matrix(fitted.basis.feature_map(x), theta)
    return float(np.max(np.abs(exact - approx)))


def compare(config: RunConfig, train: Dataset, test: Dataset,
            num_basis: Sequence[int]) -> pd.DataFrame:
    expr, ds, exact_draws, runtime_exact = fit_exact(config, train)
    mlpd_exact = exact_mlpd(expr, ds, exact_draws, test, config.sampler.seed)
    theta = posterior_mean_theta(expr, exact_draws)
    logger.info("Exact model: MLPD %.4f in %.2f seconds.", mlpd_exact,
                runtime_exact)

    rows: List[Dict[str, Any]] = []
    for b in num_basis:
        fitted = fit_model(config.with_overrides(num_basis=b), train)
        mlpd_approx = approximate_mlpd(fitted, test)
        logger.info("B=%s: MLPD %.4f in %.2f seconds.", b, mlpd_approx,
                    fitted.seconds)
        rows.append({
            "B": b,
            "M": fitted.basis.num_columns,
            "mlpd_exact": mlpd_exact,
            "mlpd_approx": mlpd_approx,
            "mlpd_exact_minus_approx": mlpd_exact - mlpd_approx,
            "kernel_max_error": kernel_max_error(fitted, train, theta),
            "runtime_exact": runtime_exact,
            "runtime_approx": fitted.seconds,
        })
    return pd.DataFrame(rows)


def main_parsed(config: RunConfig, num_basis: Sequence[int]) -> int:
    if config.output_dir is None:
        raise ConfigError("No output directory: set output_dir in the"
                          " config or pass --output-dir.")
    train, test = load_datasets(config)
    if test is None:
        raise ConfigError("Comparing models needs a test file.")
    frame = compare(config, train, test, num_basis)
    path = make_output_dir(config.output_dir) / COMPARE_FILE
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info("Wrote %s rows to %s.", len(frame), escape(path))
    return 0


def main(argv: Sequence[str]) -> int:
    parser = cli_parser()
    args = parse_cli(parser, argv)
    config = load_config(args.config).with_overrides(
        seed=args.seed,
        chains=args.chains,
        domain_scale=args.domain_scale,
        output_dir=args.output_dir,
    )
    return main_parsed(config, args.num_basis)


def cli() -> None:
    mainwrap(main)


if __name__ == '__main__':
    cli()
