"""Model-based resampling of fitted INAR processes and Hall confidence intervals.

The semi-parametric scheme simulates pseudo-series from the fitted
(coefficients, pmf) pair with fresh thinnings and innovations, refits the
same estimator on every pseudo-series, and summarizes any functional of the
refitted parameters through empirical quantiles of the centered draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import BootstrapError, InputError, ParameterError
from .estimation import FitResult, OptimizerConfig, npmle_fit, poisson_ml_fit
from .model import InarModel
from .pmf import Pmf
from .rng import SeedSpec
from .series import CountSeries
from .simulate import DEFAULT_BURN_IN, simulate_inar


@dataclass(frozen=True)
class ConfidenceInterval:
    lower: float
    upper: float
    level: float
    target: str = ""

    def __post_init__(self):
        if not (0.0 < self.level < 1.0):
            raise ParameterError(f"confidence level must be in (0,1), got {self.level}")
        if self.lower > self.upper:
            raise ParameterError(f"interval endpoints out of order: [{self.lower}, {self.upper}]")

    @property
    def length(self) -> float:
        return self.upper - self.lower

    def covers(self, value: float) -> bool:
        return self.lower <= value <= self.upper

    def to_json_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper, "level": self.level}


@dataclass(frozen=True, eq=False)
class DrawSnapshot:
    """Parameters of one refitted draw; pmf padded to the common support length."""

    alphas: tuple[float, ...]
    pmf: np.ndarray = field(repr=False)
    degenerate: bool
    converged: bool
    lam: float | None = None

    def model(self) -> InarModel:
        return InarModel(self.alphas, Pmf(self.pmf))

    def g(self, k: int) -> float:
        """Coordinate k of the draw's pmf; exactly 0 beyond its support."""
        return float(self.pmf[k]) if 0 <= k < self.pmf.size else 0.0


@dataclass(frozen=True, eq=False)
class BootstrapDraws:
    """B refitted parameter snapshots plus the origin they were resampled from."""

    b_count: int
    draws: list[DrawSnapshot]
    origin: FitResult
    seeds: list[SeedSpec]
    excluded_count: int = 0

    @property
    def b_effective(self) -> int:
        return len(self.draws)

    def alpha_stars(self, i: int = 0) -> np.ndarray:
        return np.array([d.alphas[i] for d in self.draws])

    def g_stars(self, k: int) -> np.ndarray:
        return np.array([d.g(k) for d in self.draws])

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "B": self.b_count,
            "origin": self.origin.to_json_dict(),
            "draws": [
                {
                    "alphas": [float(a) for a in d.alphas],
                    "pmf": [float(v) for v in d.pmf],
                    "flags": {"degenerate": d.degenerate, "converged": d.converged},
                    **({"lambda": d.lam} if d.lam is not None else {}),
                }
                for d in self.draws
            ],
            "excluded_count": self.excluded_count,
        }


def _pad(probs: np.ndarray, width: int) -> np.ndarray:
    out = np.zeros(width)
    out[: probs.size] = probs
    return out


def _resample(series, fit, b_count, cfg, rng, refit) -> BootstrapDraws:
    if b_count < 1:
        raise ParameterError(f"B must be >= 1, got {b_count}")
    cfg = cfg or OptimizerConfig()
    rng = rng if rng is not None else cfg.seed.child(1000)
    if not isinstance(rng, SeedSpec):
        raise ParameterError("bootstrap rng must be a SeedSpec (draws own seed sub-paths)")

    results = []
    seeds = []
    excluded = 0
    for b in range(b_count):
        sim_seed = rng.child(b, 0)
        fit_cfg = replace(cfg, seed=rng.child(b, 1))
        try:
            pseudo = simulate_inar(fit.model, series.n, DEFAULT_BURN_IN, sim_seed)
            refitted = refit(pseudo, fit_cfg)
        except Exception:
            excluded += 1
            continue
        if not math.isfinite(refitted.loglik):
            excluded += 1
            continue
        results.append(refitted)
        seeds.append(sim_seed)

    if excluded > 0.10 * b_count:
        raise BootstrapError(
            f"{excluded} of {b_count} bootstrap refits failed (threshold is 10%)"
        )

    width = max([fit.model.innovations.probs.size] + [r.model.innovations.probs.size for r in results])
    draws = [
        DrawSnapshot(
            alphas=r.model.alphas,
            pmf=_pad(r.model.innovations.probs, width),
            degenerate=r.degenerate,
            converged=r.converged,
            lam=r.lam,
        )
        for r in results
    ]
    return BootstrapDraws(
        b_count=b_count, draws=draws, origin=fit, seeds=seeds, excluded_count=excluded
    )


def sp_inar_bootstrap(
    series: CountSeries,
    fit: FitResult,
    b_count: int,
    cfg: OptimizerConfig | None = None,
    rng: SeedSpec | None = None,
) -> BootstrapDraws:
    """Simulate from the fitted (alphas, pmf) and refit the free-pmf estimator per draw.

    Each pseudo-series matches the input's length and presample convention;
    its support bounds are recomputed from the pseudo-sample.  Failed refits
    are dropped and counted; more than 10% failures raises.
    """
    p = fit.model.p
    return _resample(series, fit, b_count, cfg, rng, lambda s, c: npmle_fit(s, p, c))


def parametric_poi_bootstrap(
    series: CountSeries,
    fit: FitResult,
    b_count: int,
    cfg: OptimizerConfig | None = None,
    rng: SeedSpec | None = None,
) -> BootstrapDraws:
    """Parametric resampling: innovations drawn Poisson(lambda-hat), refit by Poisson ML."""
    if fit.lam is None:
        raise ParameterError("parametric bootstrap requires a Poisson ML fit (lambda missing)")
    return _resample(series, fit, b_count, cfg, rng, lambda s, c: poisson_ml_fit(s, 1, c))


def empirical_quantile(values, q: float) -> float:
    """Order-statistic quantile: the ceil(q*B)-th smallest value (1-based)."""
    arr = np.sort(np.asarray(values, dtype=float))
    if arr.size == 0:
        raise InputError("cannot take a quantile of an empty sample")
    if not (0.0 < q < 1.0):
        raise ParameterError(f"quantile level must be in (0,1), got {q}")
    idx = math.ceil(q * arr.size)
    idx = min(max(idx, 1), arr.size)
    return float(arr[idx - 1])


def hall_interval(theta_hat: float, star_values, delta: float, target: str = "") -> ConfidenceInterval:
    """Percentile-of-differences interval from the centered draws theta* - theta-hat.

    Endpoints are theta-hat minus the upper/lower empirical quantiles of the
    differences, so shifting estimate and draws together shifts the interval.
    """
    if not (0.0 < delta < 1.0):
        raise ParameterError(f"delta must be in (0,1), got {delta}")
    diffs = np.asarray(star_values, dtype=float) - theta_hat
    lower = theta_hat - empirical_quantile(diffs, 1.0 - delta / 2.0)
    upper = theta_hat - empirical_quantile(diffs, delta / 2.0)
    return ConfidenceInterval(lower=lower, upper=upper, level=1.0 - delta, target=target)
