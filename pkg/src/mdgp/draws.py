from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Sequence, Tuple

import numpy as np
import pandas as pd

from .escape import escape
from .floatarray import FloatArray
from .logger import logger
from .usererror import DataError

SAMPLER_STATS = ("accept_stat", "step_size", "tree_depth", "n_leapfrog",
                 "divergent", "energy")


@dataclass(frozen=True, eq=False)
class PosteriorDraws:
    """
    Kept draws on the constrained scale, shaped chains x iterations x
    parameters, with per-iteration sampler statistics shaped chains x
    iterations.
    """

    names: Tuple[str, ...]
    values: FloatArray
    stats: Dict[str, FloatArray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 3 or values.shape[2] != len(self.names):
            raise DataError("Draws of shape %r do not match %s parameters.",
                            values.shape, len(self.names))
        for name, stat in self.stats.items():
            if np.shape(stat) != values.shape[:2]:
                raise DataError("Sampler statistic %r has shape %r,"
                                " expected %r.", name, np.shape(stat),
                                values.shape[:2])
        object.__setattr__(self, "values", values)

    @property
    def num_chains(self) -> int:
        return int(self.values.shape[0])

    @property
    def num_iterations(self) -> int:
        return int(self.values.shape[1])

    @property
    def num_draws(self) -> int:
        return self.num_chains * self.num_iterations

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise DataError("No parameter named %r in the draws.",
                            name) from None

    def matrix(self) -> FloatArray:
        """S x parameters, chain by chain."""

        ret: FloatArray = self.values.reshape(self.num_draws, -1)
        return ret

    def column(self, name: str) -> FloatArray:
        ret: FloatArray = self.matrix()[:, self.index(name)]
        return ret

    def chains(self, name: str) -> FloatArray:
        ret: FloatArray = self.values[:, :, self.index(name)]
        return ret

    def block(self, prefix: str) -> FloatArray:
        """All parameters whose names start with `prefix`, as S x k."""

        columns = [i for i, n in enumerate(self.names) if n.startswith(prefix)]
        ret: FloatArray = self.matrix()[:, columns]
        return ret

    @property
    def divergences(self) -> Tuple[int, ...]:
        if "divergent" not in self.stats:
            return tuple(0 for _ in range(self.num_chains))
        return tuple(int(np.sum(row)) for row in self.stats["divergent"])

    def to_frame(self) -> pd.DataFrame:
        chain, iteration = np.divmod(np.arange(self.num_draws),
                                     self.num_iterations)
        frame = pd.DataFrame(self.matrix(), columns=list(self.names))
        frame.insert(0, "iteration", iteration + 1)
        frame.insert(0, "chain", chain + 1)
        return frame

    def stats_frame(self) -> pd.DataFrame:
        chain, iteration = np.divmod(np.arange(self.num_draws),
                                     self.num_iterations)
        columns: Dict[str, object] = {"chain": chain + 1,
                                      "iteration": iteration + 1}
        for name in SAMPLER_STATS:
            if name in self.stats:
                columns[name] = np.asarray(self.stats[name]).reshape(-1)
        return pd.DataFrame(columns)


def concat_chains(names: Sequence[str], chains: Sequence[FloatArray],
                  stats: Sequence[Dict[str, FloatArray]]) -> PosteriorDraws:
    merged = {name: np.vstack([s[name] for s in stats])
              for name in (stats[0] if stats else {})}
    return PosteriorDraws(tuple(names), np.stack(chains), merged)


def write_draws(draws: PosteriorDraws, directory: Path) -> None:
    draws_path = directory / "draws.csv"
    stats_path = directory / "sampler.csv"
    draws.to_frame().to_csv(draws_path, index=False, float_format="%.17g")
    draws.stats_frame().to_csv(stats_path, index=False, float_format="%.17g")
    logger.info("Wrote %s draws to %s.", draws.num_draws, escape(draws_path))


def _reshape(frame: pd.DataFrame, columns: List[str]) -> FloatArray:
    num_chains = int(frame["chain"].nunique())
    ret: FloatArray = frame[columns].to_numpy(dtype=float)\
        .reshape(num_chains, -1, len(columns))
    return ret


def read_draws(directory: Path) -> PosteriorDraws:
    draws_path = directory / "draws.csv"
    if not draws_path.exists():
        raise DataError("Missing draws file %s.", escape(draws_path))
    frame = pd.read_csv(draws_path).sort_values(["chain", "iteration"],
                                                kind="stable")
    names = [c for c in frame.columns if c not in ("chain", "iteration")]
    values = _reshape(frame, names)

    stats: Dict[str, FloatArray] = {}
    stats_path = directory / "sampler.csv"
    if stats_path.exists():
        stats_frame = pd.read_csv(stats_path).sort_values(
            ["chain", "iteration"], kind="stable")
        present = [s for s in SAMPLER_STATS if s in stats_frame.columns]
        block = _reshape(stats_frame, present)
        stats = {s: block[:, :, i] for i, s in enumerate(present)}
    return PosteriorDraws(tuple(names), values, stats)
