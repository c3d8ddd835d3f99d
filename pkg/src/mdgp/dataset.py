"""
Tabular data: CSV ingestion into covariate points and a response, and the
standardization applied before fitting.

Categorical covariates are stored as 0-based codes into the labels of the
covariate space; labels are enumerated in order of first appearance when
the space is built from training data.
"""

from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd

from .covariates import (Categorical, Continuous, CovariateSchema,
                         CovariateSpace, DimSpec)
from .escape import escape
from .floatarray import FloatArray, IntArray
from .logger import logger
from .obsmodels import Counts, Response
from .usererror import DataError, KernelSpecError


@dataclass(frozen=True)
class ResponseSpec:
    likelihood: str = "gaussian"
    column: str = "y"
    successes: str = "successes"
    trials: str = "trials"

    @property
    def columns(self) -> Tuple[str, ...]:
        if self.likelihood == "gaussian":
            return (self.column,)
        return (self.successes, self.trials)


@dataclass(frozen=True)
class ColumnScale:
    mean: float
    sd: float

    def forward(self, values: FloatArray) -> FloatArray:
        ret: FloatArray = (np.asarray(values, dtype=float) - self.mean) \
            / self.sd
        return ret

    def inverse(self, values: FloatArray) -> FloatArray:
        ret: FloatArray = np.asarray(values, dtype=float) * self.sd \
            + self.mean
        return ret

    @staticmethod
    def fit(name: str, values: FloatArray) -> 'ColumnScale':
        values = np.asarray(values, dtype=float)
        if values.size < 2:
            raise DataError("Cannot standardize %r from fewer than 2"
                            " values.", name)
        sd = float(np.std(values, ddof=1))
        if not sd > 0:
            raise DataError("Column %r has zero variance and cannot be"
                            " standardized.", name)
        return ColumnScale(float(np.mean(values)), sd)


@dataclass(frozen=True, eq=False)
class Standardization:
    covariates: Dict[str, ColumnScale] = field(default_factory=dict)
    response: Optional[ColumnScale] = None

    def transform_x(self, space: CovariateSpace, x: FloatArray) -> FloatArray:
        ret: FloatArray = np.array(x, dtype=float, copy=True)
        for name, scale in self.covariates.items():
            d = space.index(name)
            ret[:, d] = scale.forward(ret[:, d])
        return ret

    def inverse_x(self, space: CovariateSpace, x: FloatArray) -> FloatArray:
        ret: FloatArray = np.array(x, dtype=float, copy=True)
        for name, scale in self.covariates.items():
            d = space.index(name)
            ret[:, d] = scale.inverse(ret[:, d])
        return ret

    def transform_y(self, y: Response) -> Response:
        if self.response is None or isinstance(y, Counts):
            return y
        return self.response.forward(y)

    def inverse_y(self, y: FloatArray) -> FloatArray:
        """Map latent or response values back to the data scale."""

        if self.response is None:
            return np.asarray(y, dtype=float)
        return self.response.inverse(y)

    @property
    def response_sd(self) -> float:
        return 1.0 if self.response is None else self.response.sd

    def to_json(self) -> Dict[str, object]:
        return {
            "covariates": {name: {"mean": s.mean, "sd": s.sd}
                           for name, s in self.covariates.items()},
            "response": None if self.response is None else
            {"mean": self.response.mean, "sd": self.response.sd},
        }

    @staticmethod
    def from_json(raw: Dict[str, object]) -> 'Standardization':
        covariates = raw.get("covariates") or {}
        assert isinstance(covariates, dict)
        response = raw.get("response")
        return Standardization(
            {str(name): ColumnScale(float(s["mean"]), float(s["sd"]))
             for name, s in covariates.items()},
            None if response is None else
            ColumnScale(float(response["mean"]),  # type: ignore[index]
                        float(response["sd"])))  # type: ignore[index]


@dataclass(frozen=True, eq=False)
class Dataset:
    space: CovariateSpace
    x: FloatArray
    y: Optional[Response] = None
    trials: Optional[IntArray] = None
    standardization: Optional[Standardization] = None

    def __post_init__(self) -> None:
        x = np.atleast_2d(np.asarray(self.x, dtype=float))
        if x.shape[1] != len(self.space.dims):
            raise DataError("Data has %s covariate columns, the space has"
                            " %s.", x.shape[1], len(self.space.dims))
        if self.y is not None and len(self.y) != x.shape[0]:
            raise DataError("Response has %s values for %s rows.",
                            len(self.y), x.shape[0])
        object.__setattr__(self, "x", x)

    @property
    def num_points(self) -> int:
        return int(self.x.shape[0])

    @property
    def is_standardized(self) -> bool:
        return self.standardization is not None

    def subset(self, index: Union[slice, IntArray]) -> 'Dataset':
        y: Optional[Response] = None
        if isinstance(self.y, Counts):
            y = self.y.subset(index)
        elif self.y is not None:
            y = np.asarray(self.y)[index]
        trials = None if self.trials is None else self.trials[index]
        return replace(self, x=self.x[index], y=y, trials=trials)


def parse_numeric(frame: pd.DataFrame, column: str,
                  path: Path) -> FloatArray:
    values = pd.to_numeric(frame[column], errors="coerce")
    bad = np.flatnonzero(values.isna().to_numpy())
    if bad.size:
        row = int(bad[0])
        raise DataError("Cannot parse %r in column %r, row %s of %s.",
                        frame[column].iloc[row], column, row + 2,
                        escape(path))
    ret: FloatArray = values.to_numpy(dtype=float)
    return ret


def parse_counts(frame: pd.DataFrame, column: str, path: Path) -> IntArray:
    values = parse_numeric(frame, column, path)
    if np.any(values != np.round(values)):
        raise DataError("Column %r of %s must hold integer counts.",
                        column, escape(path))
    ret: IntArray = values.astype(np.int64)
    return ret


def read_frame(path: Path, required: List[str]) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=True,
                            skipinitialspace=True)
    except FileNotFoundError:
        raise DataError("Data file %s does not exist.",
                        escape(path)) from None
    except (pd.errors.EmptyDataError, pd.errors.ParserError) as ex:
        raise DataError("Cannot read %s as CSV: %s",
                        escape(path), ex) from ex

    missing = [c for c in required if c not in frame.columns]
    if missing:
        raise DataError("Data file %s lacks columns %s.", escape(path),
                        ", ".join(map(repr, missing)))
    nulls = frame[required].isna()
    if nulls.to_numpy().any():
        column = str(nulls.any()[nulls.any()].index[0])
        row = int(np.flatnonzero(nulls[column].to_numpy())[0])
        raise DataError("Missing value in column %r, row %s of %s.",
                        column, row + 2, escape(path))
    return frame


def build_space(schema: CovariateSchema, frame: pd.DataFrame,
                path: Path) -> CovariateSpace:
    dims: List[DimSpec] = []
    try:
        for name, kind in schema.kinds:
            if kind == "continuous":
                values = parse_numeric(frame, name, path)
                dims.append(Continuous(name, float(np.min(values)),
                                       float(np.max(values))))
            else:
                labels = tuple(str(v) for v in pd.unique(frame[name]))
                dims.append(Categorical(name, labels))
    except KernelSpecError as ex:
        raise DataError("%s", ex) from ex
    return CovariateSpace(tuple(dims))


def encode(space: CovariateSpace, frame: pd.DataFrame,
           path: Path) -> FloatArray:
    x = np.zeros((len(frame), len(space.dims)))
    for d, dim in enumerate(space.dims):
        if isinstance(dim, Continuous):
            x[:, d] = parse_numeric(frame, dim.name, path)
            continue
        codes = {label: i for i, label in enumerate(dim.labels)}
        column = frame[dim.name].astype(str)
        unseen = sorted(set(column) - set(codes))
        if unseen:
            raise DataError("Covariate %r in %s has levels %s not seen in"
                            " training (known: %s).", dim.name,
                            escape(path), ", ".join(map(repr, unseen)),
                            ", ".join(dim.labels))
        x[:, d] = column.map(codes).to_numpy(dtype=float)
    return x


def load_csv(path: Path,
             space: Union[CovariateSpace, CovariateSchema],
             response: Optional[ResponseSpec] = None,
             require_response: bool = True) -> Dataset:
    """
    Read a dataset. A schema builds a new covariate space from the file; a
    space (from a fitted model) encodes the file against known levels.
    """

    path = Path(path)
    names = list(space.names)
    required = list(names)
    if response is not None and require_response:
        required.extend(response.columns)
    frame = read_frame(path, required)
    if isinstance(space, CovariateSchema):
        space = build_space(space, frame, path)
    x = encode(space, frame, path)

    y: Optional[Response] = None
    trials: Optional[IntArray] = None
    if response is not None:
        present = all(c in frame.columns for c in response.columns)
        if response.likelihood == "gaussian" and present:
            y = parse_numeric(frame, response.column, path)
        elif response.likelihood != "gaussian" and present:
            y = Counts(parse_counts(frame, response.successes, path),
                       parse_counts(frame, response.trials, path))
            trials = y.trials
        elif response.likelihood != "gaussian" \
                and response.trials in frame.columns:
            trials = parse_counts(frame, response.trials, path)

    for dim in space.dims:
        if isinstance(dim, Categorical):
            logger.debug("Covariate %r has %s levels: %s.", dim.name,
                         dim.num_categories, ", ".join(dim.labels))
    logger.info("Loaded %s rows from %s.", len(frame), escape(path))
    return Dataset(space, x, y, trials)


def standardize(ds: Dataset,
                standardization: Optional[Standardization] = None) \
        -> Dataset:
    """
    Continuous covariates and a real response to zero mean and unit sample
    standard deviation. Passing the training standardization applies it
    unchanged, as for test data.
    """

    if ds.is_standardized:
        raise DataError("Dataset is already standardized.")
    if standardization is None:
        covariates = {dim.name: ColumnScale.fit(dim.name,
                                                ds.x[:, ds.space.index(dim.name)])
                      for dim in ds.space.dims
                      if isinstance(dim, Continuous)}
        response = None
        if ds.y is not None and not isinstance(ds.y, Counts):
            response = ColumnScale.fit("response", np.asarray(ds.y))
        standardization = Standardization(covariates, response)
    y = None if ds.y is None else standardization.transform_y(ds.y)
    return replace(ds, x=standardization.transform_x(ds.space, ds.x), y=y,
                   standardization=standardization)


def unstandardize(ds: Dataset) -> Dataset:
    st = ds.standardization
    if st is None:
        return ds
    y: Optional[Response] = ds.y
    if y is not None and not isinstance(y, Counts):
        y = st.inverse_y(y)
    return replace(ds, x=st.inverse_x(ds.space, ds.x), y=y,
                   standardization=None)


def to_frame(ds: Dataset, response: Optional[ResponseSpec] = None) \
        -> pd.DataFrame:
    raw = unstandardize(ds)
    columns: Dict[str, object] = {}
    for d, dim in enumerate(raw.space.dims):
        if isinstance(dim, Continuous):
            columns[dim.name] = raw.x[:, d]
        else:
            codes = raw.x[:, d].astype(np.int64)
            columns[dim.name] = [dim.labels[c] for c in codes]
    spec = response or ResponseSpec(
        "beta_binomial" if isinstance(raw.y, Counts) else "gaussian")
    if isinstance(raw.y, Counts):
        columns[spec.successes] = raw.y.successes
        columns[spec.trials] = raw.y.trials
    elif raw.y is not None:
        columns[spec.column] = np.asarray(raw.y)
    elif raw.trials is not None:
        columns[spec.trials] = raw.trials
    return pd.DataFrame(columns)


def write_csv(ds: Dataset, path: Path,
              response: Optional[ResponseSpec] = None,
              extra: Optional[Dict[str, object]] = None) -> None:
    frame = to_frame(ds, response)
    for name, values in reversed(list((extra or {}).items())):
        frame.insert(0, name, values)
    frame.to_csv(path, index=False, float_format="%.17g")
    logger.info("Wrote %s rows to %s.", len(frame), escape(path))
