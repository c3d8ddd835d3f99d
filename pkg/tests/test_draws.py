from pathlib import Path

import numpy as np
import pytest

from mdgp.draws import PosteriorDraws, concat_chains, read_draws, write_draws
from mdgp.usererror import DataError


def sample_draws() -> PosteriorDraws:
    rng = np.random.default_rng(0)
    chains = [rng.normal(size=(5, 3)) for _ in range(2)]
    stats = [{"accept_stat": rng.uniform(size=5),
              "divergent": np.zeros(5)} for _ in range(2)]
    return concat_chains(("xi[1]", "alpha[1]", "sigma"), chains, stats)


def test_layout() -> None:
    draws = sample_draws()
    assert draws.num_chains == 2
    assert draws.num_iterations == 5
    assert draws.matrix().shape == (10, 3)
    np.testing.assert_array_equal(draws.column("sigma"),
                                  draws.values[:, :, 2].reshape(-1))
    assert draws.block("xi").shape == (10, 1)
    assert draws.divergences == (0, 0)
    frame = draws.to_frame()
    assert list(frame.columns[:2]) == ["chain", "iteration"]
    assert frame["chain"].tolist() == [1] * 5 + [2] * 5


def test_write_read(tmp_path: Path) -> None:
    draws = sample_draws()
    write_draws(draws, tmp_path)
    back = read_draws(tmp_path)
    assert back.names == draws.names
    np.testing.assert_array_equal(back.values, draws.values)
    np.testing.assert_array_equal(back.stats["accept_stat"],
                                  draws.stats["accept_stat"])


def test_missing_file(tmp_path: Path) -> None:
    with pytest.raises(DataError):
        read_draws(tmp_path)


def test_shape_checks() -> None:
    with pytest.raises(DataError):
        PosteriorDraws(("a", "b"), np.zeros((2, 5, 3)))
    with pytest.raises(DataError):
        PosteriorDraws(("a",), np.zeros((2, 5, 1)),
                       {"divergent": np.zeros((2, 4))})
    with pytest.raises(DataError):
        sample_draws().index("nope")
