"""
Run configuration, read from a JSON document.

    {
      "formula": "y ~ gp(age) + zs(z) * gp(age)",
      "likelihood": "gaussian",
      "covariates": {"age": "continuous", "z": "categorical"},
      "basis": {"B": 16, "c": 1.5},
      "sampler": {"chains": 4, "iters": 2000, "warmup": 1000},
      "train": "train.csv"
    }

Unknown keys at any level are rejected. Relative paths are resolved
against the directory of the configuration file.
"""

from dataclasses import dataclass, field, fields, replace
import json
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
import pandas as pd

from .covariates import CovariateSchema
from .dataset import ResponseSpec
from .escape import escape
from .featuremap import BasisConfig
from .floatarray import FloatArray
from .formula import CategoricalOption, CSOptions
from .hmc import SamplerConfig
from .obsmodels import OBS_MODELS
from .priors import PriorSpec
from .usererror import ConfigError, UserError

TOP_LEVEL_KEYS = ("formula", "likelihood", "covariates", "successes",
                  "trials", "basis", "priors", "sampler", "categorical",
                  "marginalized", "train", "test", "output_dir")
BASIS_KEYS = {"B": "num_basis", "c": "domain_scale",
              "max_basis_total": "max_basis_total"}


@dataclass(frozen=True, eq=False)
class RunConfig:
    formula: str
    covariates: CovariateSchema
    likelihood: str = "gaussian"
    successes: str = "successes"
    trials: str = "trials"
    basis: BasisConfig = field(default_factory=BasisConfig)
    priors: PriorSpec = field(default_factory=PriorSpec)
    sampler: SamplerConfig = field(default_factory=SamplerConfig)
    categorical: Dict[str, CategoricalOption] = field(default_factory=dict)
    marginalized: bool = False
    train: Optional[Path] = None
    test: Optional[Path] = None
    output_dir: Optional[Path] = None
    raw: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.likelihood not in OBS_MODELS:
            raise ConfigError("Unknown likelihood %r (choose from %s).",
                              self.likelihood, ", ".join(OBS_MODELS))
        if self.marginalized and self.likelihood != "gaussian":
            raise ConfigError("The marginalized fit needs the gaussian"
                              " likelihood, got %r.", self.likelihood)

    def response_spec(self, response: str) -> ResponseSpec:
        """`response` is the left-hand side of the formula."""

        if self.likelihood == "gaussian":
            return ResponseSpec("gaussian", column=response)
        return ResponseSpec(self.likelihood, successes=self.successes,
                            trials=self.trials)

    def with_overrides(self, seed: Optional[int] = None,
                       chains: Optional[int] = None,
                       num_basis: Optional[int] = None,
                       domain_scale: Optional[float] = None,
                       marginalized: Optional[bool] = None,
                       output_dir: Optional[Path] = None) -> 'RunConfig':
        sampler = self.sampler
        if seed is not None:
            sampler = replace(sampler, seed=seed)
        if chains is not None:
            sampler = replace(sampler, chains=chains)
        basis = self.basis
        if num_basis is not None:
            basis = replace(basis, num_basis=num_basis)
        if domain_scale is not None:
            basis = replace(basis, domain_scale=domain_scale)
        return replace(
            self, sampler=sampler, basis=basis,
            marginalized=self.marginalized if marginalized is None
            else marginalized,
            output_dir=self.output_dir if output_dir is None else output_dir)

    def to_json(self) -> Dict[str, Any]:
        """The effective configuration, with overrides applied."""

        ret = dict(self.raw)
        ret["formula"] = self.formula
        ret["likelihood"] = self.likelihood
        ret["covariates"] = dict(self.covariates.kinds)
        ret["basis"] = {key: getattr(self.basis, attr)
                        for key, attr in BASIS_KEYS.items()}
        ret["priors"] = {f.name: getattr(self.priors, f.name)
                         for f in fields(self.priors)}
        ret["sampler"] = {f.name: getattr(self.sampler, f.name)
                          for f in fields(self.sampler)}
        ret["marginalized"] = self.marginalized
        if self.categorical:
            ret["categorical"] = {
                dim: {"kind": "cs", "variance": o.variance, "rho": o.rho}
                if isinstance(o, CSOptions) else
                {"kind": "custom", "matrix": np.asarray(o).tolist()}
                for dim, o in self.categorical.items()}
        if self.likelihood != "gaussian":
            ret["successes"] = self.successes
            ret["trials"] = self.trials
        for name in ("train", "test", "output_dir"):
            value = getattr(self, name)
            if value is not None:
                ret[name] = str(Path(value).resolve())
        return ret


def check_keys(raw: Mapping[str, Any], allowed: Tuple[str, ...],
               where: str) -> None:
    if not isinstance(raw, Mapping):
        raise ConfigError("Config entry %s must be an object.", where)
    for key in raw:
        if key not in allowed:
            raise ConfigError("Unknown config key %s%s (allowed: %s).",
                              where, key, ", ".join(allowed))


def make_section(cls: Any, raw: Mapping[str, Any], where: str,
                 names: Optional[Dict[str, str]] = None) -> Any:
    names = names or {f.name: f.name for f in fields(cls)}
    check_keys(raw, tuple(names), where)
    try:
        return cls(**{names[key]: value for key, value in raw.items()})
    except ConfigError:
        raise
    except UserError as ex:
        raise ConfigError("Invalid %s: %s", where.rstrip("."), ex) from ex
    except TypeError as ex:
        raise ConfigError("Invalid %s: %s", where.rstrip("."), ex) from ex


def read_matrix(path: Path) -> FloatArray:
    try:
        frame = pd.read_csv(path, header=None)
    except (OSError, pd.errors.ParserError,
            pd.errors.EmptyDataError) as ex:
        raise ConfigError("Cannot read kernel matrix %s: %s",
                          escape(path), ex) from ex
    try:
        return frame.to_numpy(dtype=float)
    except ValueError as ex:
        raise ConfigError("Kernel matrix %s is not numeric: %s",
                          escape(path), ex) from ex


def parse_categorical(raw: Mapping[str, Any],
                      base: Path) -> Dict[str, CategoricalOption]:
    ret: Dict[str, CategoricalOption] = {}
    if not isinstance(raw, Mapping):
        raise ConfigError("Config entry categorical must be an object.")
    for dim, entry in raw.items():
        where = f"categorical.{dim}."
        kind = entry.get("kind") if isinstance(entry, Mapping) else None
        if kind == "cs":
            check_keys(entry, ("kind", "variance", "rho"), where)
            ret[dim] = CSOptions(float(entry.get("variance", 1.0)),
                                 float(entry.get("rho", 0.0)))
        elif kind == "custom":
            check_keys(entry, ("kind", "matrix"), where)
            matrix = entry.get("matrix")
            if matrix is None:
                raise ConfigError("Config entry %smatrix is required.", where)
            if isinstance(matrix, list):
                ret[dim] = np.asarray(matrix, dtype=float)
            else:
                ret[dim] = read_matrix(base / str(matrix))
        else:
            raise ConfigError("Config entry %skind must be 'cs' or"
                              " 'custom', got %r.", where, kind)
    return ret


def parse_config(raw: Mapping[str, Any], base: Path) -> RunConfig:
    check_keys(raw, TOP_LEVEL_KEYS, "")
    if "formula" not in raw:
        raise ConfigError("Config needs a formula.")
    if "covariates" not in raw:
        raise ConfigError("Config needs a covariates block.")
    covariates = raw["covariates"]
    if not isinstance(covariates, Mapping):
        raise ConfigError("Config entry covariates must be an object.")
    try:
        schema = CovariateSchema.make([(str(k), str(v))
                                       for k, v in covariates.items()])
    except UserError as ex:
        raise ConfigError("Invalid covariates: %s", ex) from ex

    def path(key: str) -> Optional[Path]:
        value = raw.get(key)
        return None if value is None else base / str(value)

    marginalized = raw.get("marginalized", False)
    if not isinstance(marginalized, bool):
        raise ConfigError("Config entry marginalized must be true or false.")

    return RunConfig(
        formula=str(raw["formula"]),
        covariates=schema,
        likelihood=str(raw.get("likelihood", "gaussian")),
        successes=str(raw.get("successes", "successes")),
        trials=str(raw.get("trials", "trials")),
        basis=make_section(BasisConfig, raw.get("basis", {}), "basis.",
                           BASIS_KEYS),
        priors=make_section(PriorSpec, raw.get("priors", {}), "priors."),
        sampler=make_section(SamplerConfig, raw.get("sampler", {}),
                             "sampler."),
        categorical=parse_categorical(raw.get("categorical", {}), base),
        marginalized=marginalized,
        train=path("train"),
        test=path("test"),
        output_dir=path("output_dir"),
        raw=dict(raw),
    )


def load_config(path: Path) -> RunConfig:
    try:
        with open(path) as reader:
            raw = json.load(reader)
    except FileNotFoundError:
        raise ConfigError("Config file %s does not exist.",
                          escape(path)) from None
    except json.JSONDecodeError as ex:
        raise ConfigError("Config file %s is not valid JSON: %s",
                          escape(path), ex) from ex
    return parse_config(raw, Path(path).parent)
