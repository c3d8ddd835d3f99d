
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple, Union

from .usererror import KernelSpecError


@dataclass(frozen=True)
class Continuous:
    name: str
    observed_min: float
    observed_max: float

    def __post_init__(self) -> None:
        if not self.observed_min < self.observed_max:
            raise KernelSpecError(
                "Continuous covariate %r needs observed_min < observed_max,"
                " got %r and %r.",
                self.name, self.observed_min, self.observed_max)


@dataclass(frozen=True)
class Categorical:
    name: str
    labels: Tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.labels) < 2:
            raise KernelSpecError(
                "Categorical covariate %r needs at least 2 categories,"
                " got %s.", self.name, len(self.labels))
        if len(set(self.labels)) != len(self.labels):
            raise KernelSpecError(
                "Categorical covariate %r has duplicate labels.", self.name)

    @property
    def num_categories(self) -> int:
        return len(self.labels)

    def code(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KernelSpecError("Unknown category %r for covariate %r.",
                                  label, self.name) from None


DimSpec = Union[Continuous, Categorical]


@dataclass(frozen=True)
class CovariateSpace:
    """
    Ordered covariate dimensions.

    A point in the space is a row of floats in `dims` order; categorical
    entries hold the 0-based category code.
    """

    dims: Tuple[DimSpec, ...]

    def __post_init__(self) -> None:
        names = [d.name for d in self.dims]
        if len(set(names)) != len(names):
            raise KernelSpecError("Covariate names must be unique, got %r.",
                                  names)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(d.name for d in self.dims)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KernelSpecError("Unknown covariate %r.", name) from None

    def get(self, name: str) -> DimSpec:
        return self.dims[self.index(name)]

    def to_json(self) -> Dict[str, object]:
        dims: List[Dict[str, object]] = []
        for d in self.dims:
            if isinstance(d, Continuous):
                dims.append({"name": d.name, "kind": "continuous",
                             "observed_min": d.observed_min,
                             "observed_max": d.observed_max})
            else:
                dims.append({"name": d.name, "kind": "categorical",
                             "labels": list(d.labels)})
        return {"dims": dims}

    @staticmethod
    def from_json(raw: Dict[str, object]) -> 'CovariateSpace':
        dims: List[DimSpec] = []
        entries = raw["dims"]
        assert isinstance(entries, list)
        for entry in entries:
            if entry["kind"] == "continuous":
                dims.append(Continuous(str(entry["name"]),
                                       float(entry["observed_min"]),
                                       float(entry["observed_max"])))
            else:
                dims.append(Categorical(str(entry["name"]),
                                        tuple(map(str, entry["labels"]))))
        return CovariateSpace(tuple(dims))


@dataclass(frozen=True)
class CovariateSchema:
    """Declared covariate names and kinds, before any data is seen."""

    kinds: Tuple[Tuple[str, str], ...]

    def __post_init__(self) -> None:
        for name, kind in self.kinds:
            if kind not in ("continuous", "categorical"):
                raise KernelSpecError(
                    "Covariate %r has unknown kind %r.", name, kind)

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(name for name, _ in self.kinds)

    @staticmethod
    def make(kinds: Sequence[Tuple[str, str]]) -> 'CovariateSchema':
        return CovariateSchema(tuple(kinds))
