#! /usr/bin/env python3

import argparse
from pathlib import Path
from typing import Any, Dict, Sequence

import pandas as pd

from .dataset import write_csv
from .dirpath import dir_path, make_output_dir
from .escape import escape
from .logger import logger
from .mainwrap import mainwrap
from .modelstore import write_json
from .parsecli import parse_cli
from .simulate import (SimulatedData, simulate_beta_binomial,
                       simulate_experiment1)

LIKELIHOODS = ("gaussian", "beta_binomial")


def cli_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Simulate grouped longitudinal data from an additive GP"
        " prior, with a matching run configuration.")

    parser.add_argument("--n-train", type=int, default=60,
                        help="Training points (gaussian: a multiple of 6;"
                        " beta_binomial: a multiple of 3).")
    parser.add_argument("--n-test", type=int, default=150,
                        help="Test points, a multiple of 3.")
    parser.add_argument("--seed", type=int, default=0,
                        help="Random seed.")
    parser.add_argument("--likelihood", choices=LIKELIHOODS,
                        default="gaussian",
                        help="Observation model of the simulated response.")
    parser.add_argument("--trials", type=int, default=20,
                        help="Trials per observation (beta_binomial).")
    parser.add_argument("--output-dir", type=dir_path, required=True,
                        help="Directory for the simulated files.")
    return parser


def run_config(data: SimulatedData, seed: int) -> Dict[str, Any]:
    return {
        "formula": data.formula,
        "likelihood": data.likelihood,
        "covariates": {"age": "continuous", "z": "categorical"},
        "sampler": {"seed": seed},
        "train": "train.csv",
        "test": "test.csv",
        "output_dir": "model",
    }


def write_simulation(data: SimulatedData, directory: Path,
                     seed: int) -> None:
    make_output_dir(directory)
    write_csv(data.train, directory / "train.csv",
              extra={"id": data.train_ids})
    write_csv(data.test, directory / "test.csv",
              extra={"id": data.test_ids})
    truth = pd.DataFrame(data.truth_columns())
    truth_path = directory / "truth.csv"
    truth.to_csv(truth_path, index=False, float_format="%.17g")
    logger.info("Wrote %s rows to %s.", len(truth), escape(truth_path))
    write_json(directory / "config.json", run_config(data, seed))


def main_parsed(n_train: int, n_test: int, seed: int, likelihood: str,
                trials: int, output_dir: Path) -> int:
    if likelihood == "gaussian":
        data = simulate_experiment1(n_train, n_test, seed)
    else:
        data = simulate_beta_binomial(n_train // 3, seed, trials,
                                      n_test // 3)
    write_simulation(data, output_dir, seed)
    return 0


def main(argv: Sequence[str]) -> int:
    parser = cli_parser()
    args = parse_cli(parser, argv)
    return main_parsed(n_train=args.n_train,
                       n_test=args.n_test,
                       seed=args.seed,
                       likelihood=args.likelihood,
                       trials=args.trials,
                       output_dir=args.output_dir,
                       )


def cli() -> None:
    mainwrap(main)


if __name__ == '__main__':
    cli()
