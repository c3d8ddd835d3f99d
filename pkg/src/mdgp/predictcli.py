#! /usr/bin/env python3

import argparse
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .dataset import ResponseSpec, load_csv
from .dirpath import dir_path, existing_dir_path, make_output_dir
from .escape import escape
from .fitcli import response_name
from .fitting import prediction_tables
from .logger import logger
from .mainwrap import mainwrap
from .modelstore import load_model
from .parsecli import parse_cli

PREDICTIONS_FILE = "predictions.csv"
SUMMARY_FILE = "summary.csv"


def cli_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Predict with a fitted model at new covariate values.")

    parser.add_argument("--model", type=existing_dir_path, required=True,
                        help="Directory written by 'mdgp fit'.")
    parser.add_argument("--input", type=Path, required=True,
                        help="CSV file with the covariate columns.")
    parser.add_argument("--trials-column",
                        help="Column with trial counts for beta-binomial"
                        " predictive draws.")
    parser.add_argument("--seed", type=int, default=0,
                        help="Seed for the predictive draws.")
    parser.add_argument("--output-dir", type=dir_path,
                        help="Directory for the tables, default the model"
                        " directory.")
    return parser


def main_parsed(model_dir: Path, input: Path, trials_column: Optional[str],
                seed: int, output_dir: Optional[Path]) -> int:
    fitted = load_model(model_dir)
    config = fitted.config
    response: ResponseSpec = config.response_spec(response_name(config))
    if trials_column is not None:
        response = ResponseSpec(response.likelihood, response.column,
                                response.successes, trials_column)
    ds = load_csv(input, fitted.space, response, require_response=False)

    long, summary = prediction_tables(fitted, ds,
                                      np.random.default_rng(seed))
    directory = make_output_dir(output_dir or model_dir)
    for frame, name in ((long, PREDICTIONS_FILE), (summary, SUMMARY_FILE)):
        path = directory / name
        frame.to_csv(path, index=False, float_format="%.17g")
        logger.info("Wrote %s rows to %s.", len(frame), escape(path))
    return 0


def main(argv: Sequence[str]) -> int:
    parser = cli_parser()
    args = parse_cli(parser, argv)
    return main_parsed(model_dir=args.model,
                       input=args.input,
                       trials_column=args.trials_column,
                       seed=args.seed,
                       output_dir=args.output_dir,
                       )


def cli() -> None:
    mainwrap(main)


if __name__ == '__main__':
    cli()
