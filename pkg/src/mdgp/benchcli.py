#! /usr/bin/env python3

import argparse
from dataclasses import dataclass
from pathlib import Path
import time
import tracemalloc
import threading
from typing import List, Sequence, Tuple

import numpy as np
import pandas as pd

from .dataset import Dataset, standardize
from .dirpath import dir_path, make_output_dir
from .escape import escape
from .featuremap import BasisConfig, build_basis
from .floatarray import FloatArray
from .formula import parse_formula
from .hmc import SamplerConfig, hmc_sample
from .intlist import int_list
from .logger import logger
from .mainwrap import mainwrap
from .obsmodels import get_obs_model
from .parsecli import parse_cli
from .posterior import ApproximatePosterior
from .priors import PriorSpec
from .simulate import FORMULA, simulate_grouped
from .target import Target, evaluate

BENCH_FILE = "bench.csv"
MEMORY_EVALUATIONS = 5


@dataclass(frozen=True)
class BenchRow:
    N: int
    B: int
    M: int
    seconds: float
    seconds_per_iteration: float
    gradients: int
    seconds_per_gradient: float
    peak_bytes: int


def cli_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Time the approximate sampler on simulated data for"
        " several data sizes and numbers of basis functions.")

    parser.add_argument("--n", type=int_list, dest="sizes",
                        default=[250, 500, 1000],
                        help="Comma-separated numbers of data points.")
    parser.add_argument("--B", type=int_list, dest="num_basis",
                        default=[16],
                        help="Comma-separated numbers of basis functions.")
    parser.add_argument("--c", type=float, dest="domain_scale", default=1.5,
                        help="Domain scale factor, L = c * half-range.")
    parser.add_argument("--iters", type=int, default=200,
                        help="Sampler iterations per run, warmup included.")
    parser.add_argument("--warmup", type=int, default=100,
                        help="Warmup iterations per run.")
    parser.add_argument("--seed", type=int, default=0,
                        help="Random seed.")
    parser.add_argument("--output-dir", type=dir_path, required=True,
                        help="Directory for bench.csv.")
    return parser


class CountingTarget(Target):
    """Counts density and gradient evaluations of a wrapped target."""

    def __init__(self, target: Target):
        self.target = target
        self.count = 0
        self.lock = threading.Lock()

    @property
    def names(self) -> Tuple[str, ...]:
        return self.target.names

    def log_density_gradient(self, u: FloatArray) -> Tuple[float, FloatArray]:
        with self.lock:
            self.count += 1
        return self.target.log_density_gradient(u)

    def constrained(self, u: FloatArray) -> FloatArray:
        return self.target.constrained(u)


def peak_bytes(target: ApproximatePosterior, u: FloatArray) -> int:
    """Peak traced allocation over a few gradient evaluations at `u`."""

    tracemalloc.start()
    try:
        for _ in range(MEMORY_EVALUATIONS):
            evaluate(target, u)
        _, peak = tracemalloc.get_traced_memory()
    finally:
        tracemalloc.stop()
    return int(peak)


def bench_one(ds: Dataset, num_basis: int, domain_scale: float,
              sampler: SamplerConfig) -> BenchRow:
    std = standardize(ds)
    assert std.y is not None
    expr = parse_formula(FORMULA, std.space)
    fm = build_basis(std.x, expr,
                     BasisConfig(num_basis, domain_scale)).feature_map(std.x)
    target = ApproximatePosterior(fm, std.y, get_obs_model("gaussian"),
                                  PriorSpec())

    counting = CountingTarget(target)
    start = time.perf_counter()
    hmc_sample(counting, sampler)
    seconds = time.perf_counter() - start
    # Counts warmup and step size search as well as kept iterations.
    gradients = counting.count
    per_gradient = seconds / max(gradients, 1)

    return BenchRow(ds.num_points, num_basis, fm.num_columns, seconds,
                    seconds / sampler.iters, gradients, per_gradient,
                    peak_bytes(target, np.zeros(target.dim)))


def bench(sizes: Sequence[int], num_basis: Sequence[int],
          domain_scale: float, sampler: SamplerConfig) -> pd.DataFrame:
    rows: List[BenchRow] = []
    for n in sizes:
        ds = simulate_grouped(n, sampler.seed)
        for b in num_basis:
            row = bench_one(ds, b, domain_scale, sampler)
            logger.info("N=%s, B=%s: %.3f seconds per iteration.", n, b,
                        row.seconds_per_iteration)
            rows.append(row)
    return pd.DataFrame([vars(row) for row in rows])


def main_parsed(sizes: Sequence[int], num_basis: Sequence[int],
                domain_scale: float, iters: int, warmup: int, seed: int,
                output_dir: Path) -> int:
    sampler = SamplerConfig(chains=1, iters=iters, warmup=warmup, seed=seed)
    frame = bench(sizes, num_basis, domain_scale, sampler)
    path = make_output_dir(output_dir) / BENCH_FILE
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info("Wrote %s rows to %s.", len(frame), escape(path))
    return 0


def main(argv: Sequence[str]) -> int:
    parser = cli_parser()
    args = parse_cli(parser, argv)
    return main_parsed(sizes=args.sizes,
                       num_basis=args.num_basis,
                       domain_scale=args.domain_scale,
                       iters=args.iters,
                       warmup=args.warmup,
                       seed=args.seed,
                       output_dir=args.output_dir,
                       )


def cli() -> None:
    mainwrap(main)


if __name__ == '__main__':
    cli()
