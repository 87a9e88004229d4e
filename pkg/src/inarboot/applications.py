"""Functionals of the fitted model: predictive probabilities and dispersion indices.

Both inference routines share one resampling pass: every requested functional
is evaluated on the point estimate and on each refitted draw, and the
intervals come from the centered empirical quantiles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bootstrap import BootstrapDraws, ConfidenceInterval, hall_interval, sp_inar_bootstrap
from .errors import ParameterError, UndefinedDispersionError
from .estimation import FitResult, OptimizerConfig
from .kernel import TransitionQuery, transition_probability
from .model import InarModel
from .pmf import Pmf
from .rng import SeedSpec
from .series import CountSeries


@dataclass(frozen=True)
class PredictiveTarget:
    """Event {X_{n+1} in s_set} conditional on X_n = x_n."""

    s_set: frozenset[int]
    x_n: int

    def __post_init__(self):
        s = frozenset(int(v) for v in self.s_set)
        if not s:
            raise ParameterError("the target set must be non-empty")
        if any(v < 0 for v in s):
            raise ParameterError("the target set must contain non-negative integers")
        if self.x_n < 0:
            raise ParameterError("the conditioning value must be non-negative")
        object.__setattr__(self, "s_set", s)
        object.__setattr__(self, "x_n", int(self.x_n))


@dataclass(frozen=True)
class DispersionPair:
    """Variance-to-mean ratios of the innovations and of the observations."""

    id_innovations: float
    id_observations: float


@dataclass(frozen=True)
class PredictiveInference:
    point: float
    ci: ConfidenceInterval
    b_effective: int

    def to_json_dict(self, target: PredictiveTarget) -> dict:
        return {
            "schema_version": 1,
            "target": {"S": sorted(target.s_set), "x_n": target.x_n},
            "point": self.point,
            "ci": self.ci.to_json_dict(),
            "B_effective": self.b_effective,
        }


@dataclass(frozen=True)
class DispersionInference:
    innovations: tuple[float, ConfidenceInterval]
    observations: tuple[float, ConfidenceInterval]
    b_effective: int
    undefined_count: int

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "innovations": {"point": self.innovations[0], "ci": self.innovations[1].to_json_dict()},
            "observations": {"point": self.observations[0], "ci": self.observations[1].to_json_dict()},
            "B_effective": self.b_effective,
            "undefined_count": self.undefined_count,
        }


def predictive_probability(model: InarModel, target: PredictiveTarget) -> float:
    """P(X_{n+1} in S | X_n = x_n) under the model; exact one-step transition mass."""
    if model.p != 1:
        raise ParameterError("predictive probability is defined for p=1 models")
    total = sum(
        transition_probability(model, TransitionQuery((target.x_n,), s))
        for s in sorted(target.s_set)
    )
    return float(min(max(total, 0.0), 1.0))


def predictive_ci(
    series: CountSeries,
    fit: FitResult,
    target: PredictiveTarget,
    b_count: int,
    delta: float,
    cfg: OptimizerConfig | None = None,
    rng: SeedSpec | None = None,
    draws: BootstrapDraws | None = None,
) -> PredictiveInference:
    """Point estimate and Hall interval for the predictive probability.

    A precomputed `draws` object may be supplied to share one resampling pass
    across several functionals; otherwise the semi-parametric bootstrap runs
    here.
    """
    if draws is None:
        draws = sp_inar_bootstrap(series, fit, b_count, cfg, rng)
    point = predictive_probability(fit.model, target)
    stars = [predictive_probability(d.model(), target) for d in draws.draws]
    ci = hall_interval(point, stars, delta, target="predictive")
    return PredictiveInference(point=point, ci=ci, b_effective=len(stars))


def dispersion_innovations(pmf: Pmf) -> float:
    """Variance-to-mean ratio of the innovation distribution."""
    mean = pmf.mean()
    if mean <= 0.0:
        raise UndefinedDispersionError("dispersion index undefined for a zero-mean pmf")
    return pmf.variance() / mean


def dispersion_observations(id_innov: float, alpha: float) -> float:
    """Observation dispersion implied by innovation dispersion: (ID + a) / (1 + a)."""
    if not (0.0 <= alpha < 1.0):
        raise ParameterError(f"alpha must be in [0,1), got {alpha}")
    if id_innov < 0.0:
        raise ParameterError(f"dispersion index must be non-negative, got {id_innov}")
    return (id_innov + alpha) / (1.0 + alpha)


def _dispersion_pair(model: InarModel) -> DispersionPair:
    id_e = dispersion_innovations(model.innovations)
    return DispersionPair(id_e, dispersion_observations(id_e, model.alphas[0]))


def dispersion_ci(
    series: CountSeries,
    fit: FitResult,
    b_count: int,
    delta: float,
    cfg: OptimizerConfig | None = None,
    rng: SeedSpec | None = None,
    draws: BootstrapDraws | None = None,
) -> DispersionInference:
    """Joint intervals for both dispersion indices from a single resampling pass.

    Draws whose refitted pmf has zero mean (undefined dispersion) are dropped
    from both functionals so the two intervals use the identical draw set;
    more than 10% such draws raises.
    """
    if fit.model.p != 1:
        raise ParameterError("dispersion inference is defined for p=1 fits")
    if draws is None:
        draws = sp_inar_bootstrap(series, fit, b_count, cfg, rng)
    point = _dispersion_pair(fit.model)

    innov_stars = []
    obs_stars = []
    undefined = 0
    for d in draws.draws:
        try:
            pair = _dispersion_pair(d.model())
        except UndefinedDispersionError:
            undefined += 1
            continue
        innov_stars.append(pair.id_innovations)
        obs_stars.append(pair.id_observations)
    if undefined > 0.10 * max(len(draws.draws), 1) or not innov_stars:
        raise UndefinedDispersionError(
            f"{undefined} of {len(draws.draws)} draws have undefined dispersion"
        )

    ci_innov = hall_interval(point.id_innovations, innov_stars, delta, target="dispersion_innovations")
    ci_obs = hall_interval(point.id_observations, obs_stars, delta, target="dispersion_observations")
    return DispersionInference(
        innovations=(point.id_innovations, ci_innov),
        observations=(point.id_observations, ci_obs),
        b_effective=len(innov_stars),
        undefined_count=undefined,
    )
