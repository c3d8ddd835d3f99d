import logging
import math

import numpy as np
import pytest

from mdgp.diagnostics import bulk_ess, compute_diagnostics, mcse_mean, \
    split_rhat
from mdgp.draws import PosteriorDraws
from mdgp.floatarray import FloatArray
from mdgp.usererror import InsufficientDrawsError


def normal_chains(seed: int, chains: int = 4,
                  iterations: int = 1000) -> FloatArray:
    ret: FloatArray = np.random.default_rng(seed).normal(
        size=(chains, iterations))
    return ret


def ar1_chains(seed: int, phi: float, chains: int = 4,
               iterations: int = 1000) -> FloatArray:
    rng = np.random.default_rng(seed)
    ret = np.zeros((chains, iterations))
    ret[:, 0] = rng.normal(size=chains)
    scale = math.sqrt(1 - phi ** 2)
    for t in range(1, iterations):
        ret[:, t] = phi * ret[:, t - 1] + scale * rng.normal(size=chains)
    return ret


def test_good_chains() -> None:
    ary = normal_chains(0)
    assert split_rhat(ary) < 1.01
    assert 3000 < bulk_ess(ary) < 5000
    assert mcse_mean(ary) == pytest.approx(1 / math.sqrt(4000), rel=0.25)


def test_shifted_chain() -> None:
    ary = normal_chains(1)
    ary[0] += 5.0
    assert split_rhat(ary) > 1.5


def test_trending_chains_are_flagged() -> None:
    ary = normal_chains(2) + np.linspace(0, 3, 1000)
    assert split_rhat(ary) > 1.05


def test_constant_draws() -> None:
    ary = np.ones((4, 200))
    assert math.isnan(split_rhat(ary))
    assert math.isnan(bulk_ess(ary))
    assert math.isnan(mcse_mean(ary))


def test_autocorrelated_ess() -> None:
    ess = bulk_ess(ar1_chains(3, 0.9))
    # 4000 (1 - phi) / (1 + phi) is about 210.
    assert 100 < ess < 400


def test_insufficient_draws() -> None:
    with pytest.raises(InsufficientDrawsError):
        split_rhat(normal_chains(4, chains=1))
    with pytest.raises(InsufficientDrawsError):
        bulk_ess(normal_chains(4, iterations=50))


def test_compute_diagnostics(caplog: pytest.LogCaptureFixture) -> None:
    values = np.stack([normal_chains(5), normal_chains(6)], axis=2)
    values[1, :, 1] += 5.0
    stats = {"divergent": np.zeros((4, 1000)),
             "step_size": np.full((4, 1000), 0.5),
             "tree_depth": np.full((4, 1000), 3.0)}
    stats["divergent"][2, :3] = 1.0
    draws = PosteriorDraws(("a", "b"), values, stats)
    with caplog.at_level(logging.WARNING, logger="mdgp"):
        diag = compute_diagnostics(draws)
    assert diag.suspect() == ("b",)
    assert diag.divergences == (0, 0, 3, 0)
    assert diag.step_size == (0.5, 0.5, 0.5, 0.5)
    assert diag.max_rhat > 1.5
    assert "R-hat above" in caplog.text

    raw = diag.to_json()
    parameters = raw["parameters"]
    assert isinstance(parameters, dict)
    assert set(parameters) == {"a", "b"}
    assert raw["divergences"] == [0, 0, 3, 0]


def test_nan_is_reported_as_null() -> None:
    draws = PosteriorDraws(("c",), np.ones((2, 100, 1)))
    diag = compute_diagnostics(draws)
    assert math.isnan(diag.rhat[0])
    assert math.isnan(diag.max_rhat)
    raw = diag.to_json()
    assert raw["max_rhat"] is None
    assert diag.suspect() == ()
