import json
from pathlib import Path
from typing import Any, Dict

import numpy as np
import pytest

from mdgp.config import load_config, parse_config
from mdgp.formula import CSOptions
from mdgp.usererror import ConfigError


def minimal() -> Dict[str, Any]:
    return {"formula": "y ~ gp(age) + zs(z)*gp(age)",
            "covariates": {"age": "continuous", "z": "categorical"}}


def test_defaults(tmp_path: Path) -> None:
    config = parse_config(minimal(), tmp_path)
    assert config.likelihood == "gaussian"
    assert config.basis.num_basis == 16
    assert config.basis.domain_scale == 1.5
    assert config.sampler.chains == 4
    assert config.sampler.iters == 2000
    assert config.sampler.warmup == 1000
    assert config.sampler.target_accept == 0.95
    assert config.sampler.max_treedepth == 10
    assert config.priors.alpha_df == 20.0
    assert not config.marginalized
    assert config.train is None
    assert config.covariates.names == ("age", "z")


def test_sections(tmp_path: Path) -> None:
    raw = minimal()
    raw.update({"basis": {"B": 8, "c": 2.0},
                "sampler": {"chains": 2, "seed": 3},
                "priors": {"w0_sd": 1.0},
                "train": "train.csv",
                "output_dir": "out"})
    config = parse_config(raw, tmp_path)
    assert config.basis.num_basis == 8
    assert config.basis.domain_scale == 2.0
    assert config.sampler.chains == 2
    assert config.sampler.seed == 3
    assert config.priors.w0_sd == 1.0
    assert config.train == tmp_path / "train.csv"
    assert config.output_dir == tmp_path / "out"


@pytest.mark.parametrize("change", [
    {"formula_typo": "y ~ gp(age)"},
    {"basis": {"b": 8}},
    {"sampler": {"chain": 2}},
    {"priors": {"alpha": 1.0}},
    {"sampler": {"warmup": 3000}},
    {"basis": {"c": 0.5}},
    {"likelihood": "poisson"},
    {"marginalized": "yes"},
    {"covariates": {"age": "ordinal"}},
    {"categorical": {"z": {"kind": "diagonal"}}},
    {"categorical": {"z": {"kind": "custom"}}},
    {"categorical": {"z": {"kind": "cs", "variance": 1.0, "rh": 0.1}}},
    {"likelihood": "beta_binomial", "marginalized": True},
])
def test_rejects(tmp_path: Path, change: Dict[str, Any]) -> None:
    raw = minimal()
    raw.update(change)
    with pytest.raises(ConfigError):
        parse_config(raw, tmp_path)


def test_missing_sections(tmp_path: Path) -> None:
    with pytest.raises(ConfigError):
        parse_config({"covariates": {}}, tmp_path)
    with pytest.raises(ConfigError):
        parse_config({"formula": "y ~ gp(age)"}, tmp_path)


def test_categorical_options(tmp_path: Path) -> None:
    (tmp_path / "k.csv").write_text("1,0.5\n0.5,1\n")
    raw = minimal()
    raw["categorical"] = {"z": {"kind": "custom", "matrix": "k.csv"},
                          "g": {"kind": "cs", "variance": 2.0, "rho": 0.5},
                          "h": {"kind": "custom",
                                "matrix": [[1.0, 0.0], [0.0, 1.0]]}}
    config = parse_config(raw, tmp_path)
    np.testing.assert_array_equal(config.categorical["z"],
                                  [[1.0, 0.5], [0.5, 1.0]])
    assert config.categorical["g"] == CSOptions(2.0, 0.5)
    np.testing.assert_array_equal(config.categorical["h"], np.eye(2))

    again = parse_config(json.loads(json.dumps(config.to_json())), tmp_path)
    np.testing.assert_array_equal(again.categorical["z"],
                                  config.categorical["z"])
    assert again.categorical["g"] == CSOptions(2.0, 0.5)


def test_overrides(tmp_path: Path) -> None:
    config = parse_config(minimal(), tmp_path).with_overrides(
        seed=9, chains=1, num_basis=4, domain_scale=3.0, marginalized=True,
        output_dir=tmp_path / "m")
    assert config.sampler.seed == 9
    assert config.sampler.chains == 1
    assert config.basis.num_basis == 4
    assert config.basis.domain_scale == 3.0
    assert config.marginalized
    assert config.output_dir == tmp_path / "m"
    unchanged = config.with_overrides()
    assert unchanged.sampler == config.sampler
    assert unchanged.marginalized


def test_to_json_reparses(tmp_path: Path) -> None:
    raw = minimal()
    raw.update({"basis": {"B": 6}, "sampler": {"iters": 300, "warmup": 100},
                "train": "train.csv"})
    config = parse_config(raw, tmp_path).with_overrides(seed=4)
    again = parse_config(json.loads(json.dumps(config.to_json())),
                         tmp_path / "elsewhere")
    assert again.basis == config.basis
    assert again.sampler == config.sampler
    assert again.priors == config.priors
    assert again.train == (tmp_path / "train.csv").resolve()


def test_load_config(tmp_path: Path) -> None:
    path = tmp_path / "config.json"
    path.write_text(json.dumps(minimal()))
    assert load_config(path).formula == minimal()["formula"]
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)
