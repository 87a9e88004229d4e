"""Exact one-step transition law of the INAR(p) chain and derived quantities.

The transition probability is the convolution of p binomial thinning laws
with the innovation pmf, evaluated at the observed outcome.  Everything else
here (conditional log-likelihood, innovation posterior, the conditional
expectation operator, the score in the thinning coefficients) is computed
from that convolution in linear space; logs are taken at the end.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, ParameterError
from .model import InarModel
from .pmf import Pmf
from .series import CountSeries


@dataclass(frozen=True)
class TransitionQuery:
    """One conditioning event: past = (x_{t-1}, ..., x_{t-p}), current = x_t."""

    past: tuple[int, ...]
    current: int

    def __post_init__(self):
        past = tuple(int(v) for v in np.atleast_1d(self.past))
        if len(past) < 1 or any(v < 0 for v in past):
            raise ParameterError("past values must be non-negative integers")
        if self.current < 0:
            raise ParameterError("current value must be a non-negative integer")
        object.__setattr__(self, "past", past)
        object.__setattr__(self, "current", int(self.current))


@dataclass(frozen=True)
class SupportBounds:
    """Data-driven support [u_minus, u_plus] of the estimated innovation pmf."""

    u_minus: int
    u_plus: int

    def __post_init__(self):
        if not (0 <= self.u_minus <= self.u_plus):
            raise ParameterError(
                f"need 0 <= u_minus <= u_plus, got [{self.u_minus}, {self.u_plus}]"
            )


def binom_pmf_vector(n: int, alpha: float) -> np.ndarray:
    """Binomial(n, alpha) pmf on 0..n, built by the stable ratio recurrence."""
    out = np.empty(n + 1)
    if alpha <= 0.0:
        out[:] = 0.0
        out[0] = 1.0
        return out
    if alpha >= 1.0:
        out[:] = 0.0
        out[n] = 1.0
        return out
    v = (1.0 - alpha) ** n
    ratio = alpha / (1.0 - alpha)
    out[0] = v
    for j in range(n):
        v *= ((n - j) / (j + 1.0)) * ratio
        out[j + 1] = v
    return out


def _binom_pmf_derivative(n: int, alpha: float) -> np.ndarray:
    """d/d(alpha) of the Binomial(n, alpha) pmf, valid on the closed interval [0,1]."""
    out = np.zeros(n + 1)
    if n == 0:
        return out
    inner = binom_pmf_vector(n - 1, alpha)
    out[1:] += n * inner
    out[:-1] -= n * inner
    return out


def _check_query(model: InarModel, q: TransitionQuery) -> None:
    if len(q.past) != model.p:
        raise ParameterError(f"query past has length {len(q.past)}, model order is {model.p}")


def _thinning_convolution(model: InarModel, past, derivative_of: int | None = None):
    """Convolution of the p binomial laws Bin(x_{t-i}, alpha_i).

    If derivative_of = i, the i-th factor is replaced by its alpha-derivative,
    giving the partial derivative of the convolution.
    """
    dist = np.ones(1)
    for i, (x, a) in enumerate(zip(past, model.alphas)):
        if derivative_of == i:
            factor = _binom_pmf_derivative(x, a)
        else:
            factor = binom_pmf_vector(x, a)
        dist = np.convolve(dist, factor)
    return dist


def transition_probability(model: InarModel, q: TransitionQuery) -> float:
    """P(X_t = current | past) by iterated discrete convolution with G."""
    _check_query(model, q)
    dist = np.convolve(_thinning_convolution(model, q.past), model.innovations.probs)
    if q.current >= dist.size:
        return 0.0
    return float(dist[q.current])


def transition_probability_inar1(x_prev: int, x_cur: int, alpha: float, g: Pmf) -> float:
    """Direct p=1 sum over surviving counts j, compensated accumulation."""
    b = binom_pmf_vector(x_prev, alpha)
    terms = [
        b[j] * g[x_cur - j] for j in range(min(x_cur, x_prev) + 1)
    ]
    return math.fsum(terms)


def conditional_log_likelihood(model: InarModel, series: CountSeries) -> float:
    """Sum over t = 0..n of log P(X_t | past); -inf if any transition has probability 0."""
    if series.p != model.p:
        raise ParameterError(f"series presample length {series.p} != model order {model.p}")
    values = series.values()
    p = model.p
    logs = []
    for t in range(series.n + 1):
        idx = p + t
        past = tuple(int(values[idx - i]) for i in range(1, p + 1))
        prob = transition_probability(model, TransitionQuery(past, int(values[idx])))
        if prob <= 0.0:
            return -math.inf
        logs.append(math.log(prob))
    return math.fsum(logs)


def innovation_posterior(model: InarModel, q: TransitionQuery) -> Pmf:
    """Posterior pmf of the innovation given (X_{t-1}, X_t), p=1 only.

    Joint mass at j is G(j) * Bin(x_{t-1}, alpha) at (x_t - j) for j between
    max(0, x_t - x_{t-1}) and x_t; dividing by the transition probability
    gives the posterior.
    """
    if model.p != 1:
        raise ParameterError("innovation posterior is defined for p=1 models")
    _check_query(model, q)
    x_prev = q.past[0]
    x_cur = q.current
    b = binom_pmf_vector(x_prev, model.alphas[0])
    joint = np.zeros(x_cur + 1)
    g = model.innovations
    for j in range(max(0, x_cur - x_prev), x_cur + 1):
        joint[j] = g[j] * b[x_cur - j]
    denom = math.fsum(joint)
    if denom <= 0.0:
        raise ConditioningError(
            f"conditioning event (past={x_prev}, current={x_cur}) has probability zero"
        )
    return Pmf(joint / denom)


def conditional_expectation_A(model: InarModel, h, q: TransitionQuery) -> float:
    """E(h(innovation) | X_t, X_{t-1}) for p=1, via the explicit survivor-sum ratio."""
    if model.p != 1:
        raise ParameterError("conditional expectation operator is defined for p=1 models")
    _check_query(model, q)
    x_prev = q.past[0]
    x_cur = q.current
    b = binom_pmf_vector(x_prev, model.alphas[0])
    g = model.innovations
    num = []
    den = []
    for s in range(min(x_cur, x_prev) + 1):
        w = b[s] * g[x_cur - s]
        num.append(h(x_cur - s) * w)
        den.append(w)
    total = math.fsum(den)
    if total <= 0.0:
        raise ConditioningError(
            f"conditioning event (past={x_prev}, current={x_cur}) has probability zero"
        )
    return math.fsum(num) / total


def score_alpha(model: InarModel, series: CountSeries) -> np.ndarray:
    """Gradient in the thinning coefficients of the conditional log-likelihood / n.

    Transitions with probability zero contribute nothing.  The 1/n prefactor
    follows the sample-average convention of the estimating equations.
    """
    if series.p != model.p:
        raise ParameterError(f"series presample length {series.p} != model order {model.p}")
    values = series.values()
    p = model.p
    terms = [[] for _ in range(p)]
    for t in range(series.n + 1):
        idx = p + t
        past = tuple(int(values[idx - i]) for i in range(1, p + 1))
        x_cur = int(values[idx])
        dist = np.convolve(_thinning_convolution(model, past), model.innovations.probs)
        prob = float(dist[x_cur]) if x_cur < dist.size else 0.0
        if prob <= 0.0:
            continue
        for i in range(p):
            ddist = np.convolve(
                _thinning_convolution(model, past, derivative_of=i),
                model.innovations.probs,
            )
            dprob = float(ddist[x_cur]) if x_cur < ddist.size else 0.0
            terms[i].append(dprob / prob)
    denom = max(series.n, 1)
    return np.array([math.fsum(ts) / denom for ts in terms])


def support_bounds(series: CountSeries, p: int) -> SupportBounds:
    """u_minus = max(0, min_t(X_t - sum of p lags)), u_plus = max_t X_t, over t = 0..n."""
    if p < 1:
        raise ParameterError(f"order p must be >= 1, got {p}")
    if series.p < p:
        raise ParameterError(f"series provides {series.p} presample values, need {p}")
    values = series.values()
    idx = np.arange(series.n + 1) + series.p
    lag_sum = sum(values[idx - i] for i in range(1, p + 1))
    u_minus = max(0, int((values[idx] - lag_sum).min()))
    u_plus = int(series.body.max())
    return SupportBounds(u_minus, u_plus)
