"""INAR(p) model parameters: thinning coefficients plus innovation distribution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError
from .pmf import Pmf


@dataclass(frozen=True, eq=False)
class InarModel:
    """Parameter pair (alphas, innovations) of an INAR(p) recursion.

    Construction applies permissive bounds (each alpha in [0, 1]), which is
    what the likelihood maximization needs; `validate_strict` enforces the
    stationarity/interior conditions required for simulation and inference:
    each alpha in (0, 1), sum below 1, and 0 < G(0) < 1.
    """

    alphas: tuple[float, ...]
    innovations: Pmf

    def __post_init__(self):
        alphas = tuple(float(a) for a in np.atleast_1d(self.alphas))
        if len(alphas) < 1:
            raise ParameterError("model order p must be at least 1")
        for a in alphas:
            if not (np.isfinite(a) and 0.0 <= a <= 1.0):
                raise ParameterError(f"thinning coefficient {a} outside [0, 1]")
        object.__setattr__(self, "alphas", alphas)
        if not isinstance(self.innovations, Pmf):
            object.__setattr__(self, "innovations", Pmf(self.innovations))

    @property
    def p(self) -> int:
        return len(self.alphas)

    def validate_strict(self) -> "InarModel":
        """Enforce interior coefficients and a non-degenerate innovation start."""
        for a in self.alphas:
            if not (0.0 < a < 1.0):
                raise ParameterError(f"strict mode requires alphas in (0,1), got {a}")
        if sum(self.alphas) >= 1.0:
            raise ParameterError(f"strict mode requires sum(alphas) < 1, got {sum(self.alphas)}")
        g0 = self.innovations[0]
        if not (0.0 < g0 < 1.0):
            raise ParameterError(f"strict mode requires 0 < G(0) < 1, got G(0)={g0}")
        return self

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, InarModel)
            and self.alphas == other.alphas
            and self.innovations == other.innovations
        )

    def __repr__(self) -> str:
        return f"InarModel(alphas={self.alphas}, k_max={self.innovations.k_max})"
