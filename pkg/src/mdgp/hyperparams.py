
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .floatarray import FloatArray
from .usererror import KernelSpecError


@dataclass(frozen=True, eq=False)
class HyperParams:
    """
    Kernel parameters (alpha per term, lengthscale per continuous factor)
    and observation parameters (sigma, or gamma and w0).
    """

    alpha: FloatArray
    ell: Tuple[FloatArray, ...]
    obs: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        alpha = np.asarray(self.alpha, dtype=float).reshape(-1)
        ell = tuple(np.asarray(e, dtype=float).reshape(-1) for e in self.ell)
        if len(ell) != alpha.size:
            raise KernelSpecError("Got %s magnitudes but %s lengthscale"
                                  " groups.", alpha.size, len(ell))
        if not np.all(alpha > 0):
            raise KernelSpecError("Magnitudes must be positive, got %r.",
                                  alpha.tolist())
        for group in ell:
            if not np.all(group > 0):
                raise KernelSpecError("Lengthscales must be positive,"
                                      " got %r.", group.tolist())
        for name in ("sigma", "gamma"):
            if name in self.obs and not self.obs[name] > 0:
                raise KernelSpecError("Parameter %s must be positive,"
                                      " got %r.", name, self.obs[name])
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "ell", ell)

    @property
    def sigma(self) -> float:
        return self.obs["sigma"]

    def to_vector(self, obs_names: Sequence[str]) -> FloatArray:
        """Pack as [alpha_1, ell_1.., alpha_2, ell_2.., obs...]."""

        values: List[float] = []
        for a, group in zip(self.alpha, self.ell):
            values.append(float(a))
            values.extend(float(e) for e in group)
        values.extend(self.obs[name] for name in obs_names)
        return np.asarray(values)

    @staticmethod
    def from_vector(counts: Sequence[int], obs_names: Sequence[str],
                    vector: FloatArray) -> 'HyperParams':
        """Inverse of `to_vector`; `counts` holds Q_j for every term."""

        expected = len(counts) + sum(counts) + len(obs_names)
        if len(vector) != expected:
            raise KernelSpecError("Expected %s hyperparameters, got %s.",
                                  expected, len(vector))
        alpha = []
        ell = []
        pos = 0
        for q in counts:
            alpha.append(vector[pos])
            ell.append(np.asarray(vector[pos + 1:pos + 1 + q], dtype=float))
            pos += 1 + q
        obs = {name: float(vector[pos + i])
               for i, name in enumerate(obs_names)}
        return HyperParams(np.asarray(alpha), tuple(ell), obs)

    @staticmethod
    def make(alpha: Sequence[float],
             ell: Sequence[Sequence[float]],
             sigma: Optional[float] = None,
             gamma: Optional[float] = None,
             w0: Optional[float] = None) -> 'HyperParams':
        obs: Dict[str, float] = {}
        if sigma is not None:
            obs["sigma"] = float(sigma)
        if gamma is not None:
            obs["gamma"] = float(gamma)
        if w0 is not None:
            obs["w0"] = float(w0)
        return HyperParams(np.asarray(alpha, dtype=float),
                           tuple(np.asarray(e, dtype=float) for e in ell),
                           obs)
