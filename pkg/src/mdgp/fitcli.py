#! /usr/bin/env python3

import argparse
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple

import pandas as pd

from .config import RunConfig, load_config
from .dataset import Dataset, load_csv
from .dirpath import dir_path
from .escape import escape
from .fitting import FittedModel, approximate_mlpd, fit_model
from .formula import split_formula
from .logger import logger
from .mainwrap import mainwrap
from .modelstore import save_model
from .parsecli import parse_cli
from .usererror import ConfigError

CONVERGENCE_WARNING_EXIT = 2


def cli_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Fit an approximate mixed-domain GP model and save its"
        " posterior draws.")

    parser.add_argument("--config", type=Path, required=True,
                        help="JSON run configuration.")
    parser.add_argument("--seed", type=int,
                        help="Random seed, overrides sampler.seed.")
    parser.add_argument("--chains", type=int,
                        help="Number of chains, overrides sampler.chains.")
    parser.add_argument("--output-dir", type=dir_path,
                        help="Directory for the saved model.")
    parser.add_argument("--B", type=int, dest="num_basis",
                        help="Basis functions per continuous dimension.")
    parser.add_argument("--c", type=float, dest="domain_scale",
                        help="Domain scale factor, L = c * half-range.")
    parser.add_argument("--marginalized", action="store_true", default=None,
                        help="Integrate out the basis weights (gaussian"
                        " only) and sample the hyperparameters alone.")
    parser.add_argument("--dump-features", type=Path,
                        help="Write the feature matrix of the training"
                        " points to this CSV file.")
    return parser


def response_name(config: RunConfig) -> str:
    name, _ = split_formula(config.formula)
    return name


def load_datasets(config: RunConfig) -> Tuple[Dataset, Optional[Dataset]]:
    """Training data, and test data on the training levels if configured."""

    if config.train is None:
        raise ConfigError("Config needs a train file.")
    response = config.response_spec(response_name(config))
    train = load_csv(config.train, config.covariates, response)
    test = None
    if config.test is not None:
        test = load_csv(config.test, train.space, response)
    return train, test


def dump_features(fitted: FittedModel, train: Dataset, path: Path) -> None:
    x = fitted.standardization.transform_x(fitted.space, train.x)
    frame = pd.DataFrame(fitted.basis.evaluate(x),
                         columns=fitted.basis.column_labels())
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info("Wrote %s x %s feature matrix to %s.", frame.shape[0],
                frame.shape[1], escape(path))


def main_parsed(config: RunConfig, dump: Optional[Path]) -> int:
    if config.output_dir is None:
        raise ConfigError("No output directory: set output_dir in the"
                          " config or pass --output-dir.")
    train, test = load_datasets(config)
    fitted = fit_model(config, train)

    extra: Dict[str, Any] = {}
    if test is not None:
        extra["mlpd_test"] = approximate_mlpd(fitted, test)
        logger.info("Test MLPD: %.4f.", extra["mlpd_test"])
    save_model(fitted, config.output_dir, extra)
    if dump is not None:
        dump_features(fitted, train, dump)

    if fitted.diagnostics is not None and fitted.diagnostics.suspect():
        return CONVERGENCE_WARNING_EXIT
    return 0


def main(argv: Sequence[str]) -> int:
    parser = cli_parser()
    args = parse_cli(parser, argv)
    config = load_config(args.config).with_overrides(
        seed=args.seed,
        chains=args.chains,
        num_basis=args.num_basis,
        domain_scale=args.domain_scale,
        marginalized=args.marginalized,
        output_dir=args.output_dir,
    )
    return main_parsed(config, args.dump_features)


def cli() -> None:
    mainwrap(main)


if __name__ == '__main__':
    cli()
