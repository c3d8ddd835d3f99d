"""
A fitted model on disk: everything `predict` needs, without the training
data.
"""

import json
from pathlib import Path
from typing import Any, Dict, Optional

from .config import parse_config
from .covariates import CovariateSpace
from .dataset import Standardization
from .dirpath import make_output_dir
from .draws import read_draws, write_draws
from .escape import escape
from .featuremap import FeatureBasis
from .fitting import FittedModel
from .formula import parse_formula
from .logger import logger
from .obsmodels import get_obs_model
from .usererror import DataError

CONFIG_FILE = "config.json"
STANDARDIZATION_FILE = "standardization.json"
SPACE_FILE = "space.json"
BASIS_FILE = "basis.json"
DIAGNOSTICS_FILE = "diagnostics.json"


def write_json(path: Path, value: Dict[str, Any]) -> None:
    with open(path, "w") as writer:
        json.dump(value, writer, indent=2)
        writer.write("\n")
    logger.debug("Wrote %s.", escape(path))


def read_json(path: Path) -> Dict[str, Any]:
    try:
        with open(path) as reader:
            ret = json.load(reader)
    except FileNotFoundError:
        raise DataError("Model file %s does not exist.",
                        escape(path)) from None
    except json.JSONDecodeError as ex:
        raise DataError("Model file %s is not valid JSON: %s",
                        escape(path), ex) from ex
    if not isinstance(ret, dict):
        raise DataError("Model file %s must hold a JSON object.",
                        escape(path))
    return ret


def save_model(fitted: FittedModel, directory: Path,
               extra: Optional[Dict[str, Any]] = None) -> None:
    make_output_dir(directory)
    write_json(directory / CONFIG_FILE, fitted.config.to_json())
    write_json(directory / STANDARDIZATION_FILE,
               fitted.standardization.to_json())
    write_json(directory / SPACE_FILE, fitted.space.to_json())
    write_json(directory / BASIS_FILE, fitted.basis.to_json())
    write_draws(fitted.draws, directory)
    diagnostics: Dict[str, Any] = {
        "num_columns": fitted.basis.num_columns,
        "num_columns_full": fitted.basis.num_columns_full,
        "seconds": fitted.seconds,
    }
    if fitted.diagnostics is not None:
        diagnostics.update(fitted.diagnostics.to_json())
    diagnostics.update(extra or {})
    write_json(directory / DIAGNOSTICS_FILE, diagnostics)
    logger.info("Saved model to %s.", escape(directory))


def load_model(directory: Path) -> FittedModel:
    directory = Path(directory)
    if not directory.is_dir():
        raise DataError("Model directory %s does not exist.",
                        escape(directory))
    config = parse_config(read_json(directory / CONFIG_FILE), directory)
    space = CovariateSpace.from_json(read_json(directory / SPACE_FILE))
    expr = parse_formula(config.formula, space, config.categorical)
    basis = FeatureBasis.from_json(read_json(directory / BASIS_FILE), expr)
    standardization = Standardization.from_json(
        read_json(directory / STANDARDIZATION_FILE))
    draws = read_draws(directory)
    logger.info("Loaded model from %s: %s draws of %s parameters.",
                escape(directory), draws.num_draws, len(draws.names))
    return FittedModel(config, expr, basis, get_obs_model(config.likelihood),
                       standardization, draws, None)
