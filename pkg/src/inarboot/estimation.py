"""Joint maximum-likelihood estimation of (alphas, G).

Two estimators share the FitResult contract:

* `npmle_fit` maximizes the conditional likelihood jointly over the thinning
  coefficients and a completely free innovation pmf restricted to the
  data-driven support [u_minus, u_plus].  The ascent alternates a projected
  gradient step on the coefficients (backtracking keeps the objective
  non-decreasing) with a multiplicative posterior-frequency update of the pmf
  followed by exact renormalization, restarted from perturbed moment
  initializations.
* `poisson_ml_fit` maximizes the same conditional likelihood with the
  innovation family pinned to Poisson(lambda), jointly over (alpha, lambda).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special, stats

from . import _fastpath
from .errors import DegenerateSeriesError, InputError, ParameterError
from .kernel import (
    SupportBounds,
    binom_pmf_vector,
    _binom_pmf_derivative,
    conditional_log_likelihood,
    score_alpha,
    support_bounds,
)
from .model import InarModel
from .pmf import Pmf, poisson_pmf
from .rng import SeedSpec
from .series import CountSeries

G_FLOOR = 1e-6
_LAM_FLOOR = 1e-8


@dataclass(frozen=True)
class OptimizerConfig:
    """Knobs of the likelihood ascent; defaults suit the Monte Carlo studies."""

    max_iter: int = 5000
    tol: float = 1e-8
    restarts: int = 3
    seed: SeedSpec = SeedSpec()
    alpha_clip: float = 1e-6

    def __post_init__(self):
        if self.max_iter < 1:
            raise ParameterError("max_iter must be >= 1")
        if not (self.tol > 0):
            raise ParameterError("tol must be positive")
        if self.restarts < 1:
            raise ParameterError("restarts must be >= 1")
        if not (0 < self.alpha_clip < 0.5):
            raise ParameterError("alpha_clip must be in (0, 0.5)")


@dataclass(frozen=True, eq=False)
class FitResult:
    """Estimated model plus optimizer diagnostics."""

    model: InarModel
    loglik: float
    iterations: int
    converged: bool
    grad_norm: float
    support: SupportBounds
    degenerate: bool = False
    lam: float | None = None
    method: str = "npmle"
    loglik_trace: np.ndarray | None = field(default=None, repr=False)

    def to_json_dict(self) -> dict:
        out = {
            "schema_version": 1,
            "method": self.method,
            "p": self.model.p,
            "alphas": [float(a) for a in self.model.alphas],
            "pmf": [float(v) for v in self.model.innovations.probs],
            "u_minus": self.support.u_minus,
            "u_plus": self.support.u_plus,
            "loglik": self.loglik,
            "converged": self.converged,
            "iterations": self.iterations,
            "degenerate": self.degenerate,
            "grad_norm": self.grad_norm,
        }
        if self.lam is not None:
            out["lambda"] = self.lam
        return out


def _autocovariances(body: np.ndarray, max_lag: int) -> np.ndarray:
    x = body.astype(float)
    xc = x - x.mean()
    n = x.size
    return np.array([float(xc[: n - h] @ xc[h:]) / n for h in range(max_lag + 1)])


def _residual_pmf(series: CountSeries, p: int, bounds: SupportBounds, alpha) -> np.ndarray:
    """Empirical pmf of floor(X_t - sum_i alpha_i X_{t-i}) on [u_minus, u_plus], floored."""
    values = series.values().astype(float)
    idx = np.arange(series.n + 1) + series.p
    resid = values[idx] - sum(alpha[i] * values[idx - 1 - i] for i in range(p))
    ks = np.clip(np.floor(resid).astype(int), bounds.u_minus, bounds.u_plus)
    probs = np.bincount(ks, minlength=bounds.u_plus + 1).astype(float)
    probs[bounds.u_minus :] = np.maximum(probs[bounds.u_minus :] / probs.sum(), G_FLOOR)
    return probs / probs.sum()


def moment_init(series: CountSeries, p: int, eps: float = 1e-6) -> InarModel:
    """Yule-Walker coefficients plus the empirical pmf of the rounded pseudo-residuals.

    Coefficients are clipped into [eps, 1-eps] with sum at most 1-eps; the
    residual pmf lives on [u_minus, u_plus] with floor 1e-6, renormalized.
    """
    body = series.body
    if body.size < 2 or np.all(series.values() == series.values()[0]):
        raise DegenerateSeriesError("constant series carries no moment information")
    gamma = _autocovariances(body, p)
    if gamma[0] <= 0:
        raise DegenerateSeriesError("constant series carries no moment information")
    if p == 1:
        alpha = np.array([gamma[1] / gamma[0]])
    else:
        toeplitz = np.array([[gamma[abs(i - j)] for j in range(p)] for i in range(p)])
        alpha = np.linalg.solve(toeplitz + 1e-12 * np.eye(p), gamma[1 : p + 1])
    alpha = np.clip(alpha, eps, 1.0 - eps)
    total = alpha.sum()
    if total > 1.0 - eps:
        alpha = np.clip(alpha * (1.0 - eps) / total, eps, 1.0 - eps)

    bounds = support_bounds(series, p)
    return InarModel(tuple(alpha), Pmf(_residual_pmf(series, p, bounds, alpha)))


def _restart_init(series, p, bounds, base: InarModel, r: int, cfg) -> InarModel:
    """Restart ladder: moment init, a near-zero-alpha start, a high-alpha start,
    then seeded random starts; the joint likelihood is multimodal in alpha and
    one hill climb cannot cross basins."""
    clip = cfg.alpha_clip
    if r == 0:
        return base
    if r == 1:
        alpha = np.full(p, clip)
    elif r == 2:
        alpha = np.full(p, 0.85 * (1.0 - clip) / p)
    else:
        gen = cfg.seed.child(r).generator()
        alpha = gen.uniform(clip, 1.0 - clip, size=p)
        if alpha.sum() > 1.0 - clip:
            alpha = np.clip(alpha * (1.0 - clip) / alpha.sum(), clip, 1.0 - clip)
    return InarModel(tuple(alpha), Pmf(_residual_pmf(series, p, bounds, alpha)))


def _degenerate_fit(series: CountSeries, p: int, cfg: OptimizerConfig) -> FitResult:
    # all observations equal: the pmf collapses to a point mass and the
    # coefficients sit at the clip boundary
    c = int(series.body[0])
    probs = np.zeros(c + 1)
    probs[c] = 1.0
    model = InarModel((cfg.alpha_clip,) * p, Pmf(probs))
    ll = conditional_log_likelihood(model, series)
    return FitResult(
        model=model,
        loglik=ll,
        iterations=0,
        converged=True,
        grad_norm=float(np.max(np.abs(score_alpha(model, series)))),
        support=support_bounds(series, p),
        degenerate=True,
        method="npmle",
    )


def _pair_multiset(values: np.ndarray):
    """Unique (x_{t-1}, x_t) pairs (p=1) with multiplicities."""
    m = int(values.max())
    keys = values[:-1] * (m + 1) + values[1:]
    uniq, counts = np.unique(keys, return_counts=True)
    pa = (uniq // (m + 1)).astype(np.int64)
    pb = (uniq % (m + 1)).astype(np.int64)
    return pa, pb, counts.astype(float), m


def _run_fast_restart(pa, pb, pw, m, bounds, init, cfg):
    g0 = np.zeros(m + 1)
    k = min(init.innovations.k_max, bounds.u_plus) + 1
    g0[:k] = init.innovations.probs[:k]
    trace = np.empty(cfg.max_iter + 1)
    alpha, g, ll, iters, conv, grad = _fastpath.fit_npmle1(
        pa,
        pb,
        pw,
        m,
        bounds.u_minus,
        bounds.u_plus,
        float(init.alphas[0]),
        g0,
        cfg.tol,
        cfg.max_iter,
        cfg.alpha_clip,
        trace,
    )
    return (alpha,), g[: bounds.u_plus + 1], ll, iters, conv, trace[: iters + 1].copy(), np.array([grad])


def _project_alpha(v: np.ndarray, clip: float) -> np.ndarray:
    """Euclidean projection onto {clip <= a_i <= 1-clip, sum(a) <= 1-clip}."""
    x = np.clip(v, clip, 1.0 - clip)
    budget = 1.0 - clip
    if x.sum() <= budget or x.size == 1:
        return x
    lo, hi = 0.0, float(np.max(v) + 1.0)
    for _ in range(200):
        lam = 0.5 * (lo + hi)
        s = np.clip(v - lam, clip, 1.0 - clip).sum()
        if s > budget:
            lo = lam
        else:
            hi = lam
    return np.clip(v - hi, clip, 1.0 - clip)


class _GenericObjective:
    """Likelihood machinery on the grouped (past, current) rows for any order p."""

    def __init__(self, series: CountSeries, p: int, bounds: SupportBounds):
        values = series.values()
        sp = series.p
        rows = np.stack(
            [values[sp + np.arange(series.n + 1) - i] for i in range(1, p + 1)]
            + [values[sp : sp + series.n + 1]],
            axis=1,
        )
        uniq, counts = np.unique(rows, axis=0, return_counts=True)
        self.pasts = uniq[:, :p]
        self.curs = uniq[:, p]
        self.weights = counts.astype(float)
        self.p = p
        self.bounds = bounds
        # map each row to its unique past tuple
        keys = [tuple(row) for row in self.pasts]
        order = sorted(set(keys))
        lookup = {k: i for i, k in enumerate(order)}
        self.unique_pasts = order
        self.row_past = np.array([lookup[k] for k in keys])

    def _thin_convs(self, alphas, derivative_of=None):
        convs = []
        for past in self.unique_pasts:
            dist = np.ones(1)
            for i, (x, a) in enumerate(zip(past, alphas)):
                if derivative_of == i:
                    factor = _binom_pmf_derivative(int(x), a)
                else:
                    factor = binom_pmf_vector(int(x), a)
                dist = np.convolve(dist, factor)
            convs.append(dist)
        return convs

    def _pair_prob(self, conv, cur, g):
        lo = max(self.bounds.u_minus, cur - (conv.size - 1))
        hi = min(self.bounds.u_plus, cur)
        if lo > hi:
            return 0.0, lo, hi
        return float(np.dot(g[lo : hi + 1], conv[cur - np.arange(lo, hi + 1)])), lo, hi

    def loglik(self, alphas, g) -> float:
        convs = self._thin_convs(alphas)
        total = 0.0
        for r in range(self.weights.size):
            prob, _, _ = self._pair_prob(convs[self.row_past[r]], int(self.curs[r]), g)
            if prob <= 0.0:
                return -math.inf
            total += self.weights[r] * math.log(prob)
        return total

    def loglik_grad_post(self, alphas, g):
        """Objective, gradient in alphas, and summed innovation posteriors."""
        convs = self._thin_convs(alphas)
        dconvs = [self._thin_convs(alphas, derivative_of=i) for i in range(self.p)]
        total = 0.0
        grad = np.zeros(self.p)
        post = np.zeros(self.bounds.u_plus + 1)
        for r in range(self.weights.size):
            cur = int(self.curs[r])
            w = self.weights[r]
            conv = convs[self.row_past[r]]
            prob, lo, hi = self._pair_prob(conv, cur, g)
            if prob <= 0.0:
                return -math.inf, grad, post
            total += w * math.log(prob)
            for i in range(self.p):
                dprob, _, _ = self._pair_prob(dconvs[i][self.row_past[r]], cur, g)
                grad[i] += w * dprob / prob
            es = np.arange(lo, hi + 1)
            post[lo : hi + 1] += (w / prob) * g[lo : hi + 1] * conv[cur - es]
        return total, grad, post


def _run_generic_restart(obj: _GenericObjective, init: InarModel, cfg: OptimizerConfig):
    bounds = obj.bounds
    clip = cfg.alpha_clip
    alphas = _project_alpha(np.asarray(init.alphas, dtype=float), clip)
    g = np.zeros(bounds.u_plus + 1)
    k = min(init.innovations.k_max, bounds.u_plus) + 1
    g[:k] = init.innovations.probs[:k]
    g[: bounds.u_minus] = 0.0
    if g.sum() <= 0:
        g[bounds.u_minus :] = 1.0
    g /= g.sum()

    ll, grad, post = obj.loglik_grad_post(alphas, g)
    trace = [ll]
    step = 0.1
    converged = False
    iters = 0
    # phase 1: settle g at the starting coefficients before releasing them
    for it in range(1, cfg.max_iter + 1):
        total = post[bounds.u_minus :].sum()
        if total > 0:
            g = np.zeros_like(g)
            g[bounds.u_minus :] = post[bounds.u_minus :] / total
        ll_new, grad, post = obj.loglik_grad_post(alphas, g)
        trace.append(ll_new)
        iters = it
        gain = ll_new - ll
        warm_done = np.isfinite(ll) and gain <= cfg.tol * max(abs(ll), 1.0)
        ll = ll_new
        if warm_done:
            break
    for it in range(iters + 1, cfg.max_iter + 1):
        ll_start = ll
        if np.isfinite(ll) and np.any(grad != 0.0):
            s = step
            for _ in range(60):
                cand = _project_alpha(alphas + s * grad, clip)
                if np.array_equal(cand, alphas):
                    s *= 0.5
                    continue
                llc = obj.loglik(cand, g)
                if llc >= ll:
                    alphas = cand
                    ll = llc
                    step = s * 2.0
                    break
                s *= 0.5
            else:
                step = max(step * 0.5, 1e-12)
            # refresh posteriors at the accepted coefficients
            ll, grad, post = obj.loglik_grad_post(alphas, g)
        total = post[bounds.u_minus :].sum()
        if total > 0:
            g = np.zeros_like(g)
            g[bounds.u_minus :] = post[bounds.u_minus :] / total
        ll_new, grad, post = obj.loglik_grad_post(alphas, g)
        trace.append(ll_new)
        iters = it
        denom = max(abs(ll_start), 1.0)
        gain = ll_new - ll_start
        ll = ll_new
        if np.isfinite(ll_start) and gain <= cfg.tol * denom:
            converged = True
            break
    return tuple(alphas), g, ll, iters, converged, np.asarray(trace), grad.copy()


def npmle_fit(series: CountSeries, p: int, cfg: OptimizerConfig | None = None) -> FitResult:
    """Maximize the conditional likelihood over coefficients and free innovation pmf.

    The fitted pmf carries mass only on [u_minus, u_plus]; the best of
    `cfg.restarts` ascents (moment initialization, then perturbed copies)
    is returned.  A constant series yields a flagged degenerate fit.
    """
    cfg = cfg or OptimizerConfig()
    if p < 1:
        raise ParameterError(f"order p must be >= 1, got {p}")
    if series.p != p:
        raise ParameterError(f"series presample length {series.p} != requested order {p}")
    if series.body.size < 1:
        raise InputError("empty series")
    values = series.values()
    if np.all(values == values[0]):
        return _degenerate_fit(series, p, cfg)

    bounds = support_bounds(series, p)
    width = bounds.u_plus - bounds.u_minus + 1
    recommended = 5 * (p + width)
    if series.n + 1 < recommended:
        warnings.warn(
            f"series has {series.n + 1} observations; fewer than the recommended "
            f"{recommended} for p={p} and support width {width}",
            stacklevel=2,
        )

    base_init = moment_init(series, p, eps=cfg.alpha_clip)
    if p == 1:
        pa, pb, pw, m = _pair_multiset(values)
        runner = lambda init: _run_fast_restart(pa, pb, pw, m, bounds, init, cfg)
    else:
        obj = _GenericObjective(series, p, bounds)
        runner = lambda init: _run_generic_restart(obj, init, cfg)

    best = None
    for r in range(cfg.restarts):
        init = _restart_init(series, p, bounds, base_init, r, cfg)
        alphas, g, ll, iters, conv, trace, grad = runner(init)
        if best is None or ll > best[2]:
            best = (alphas, g, ll, iters, conv, trace, grad)

    alphas, g, ll, iters, conv, trace, grad = best
    model = InarModel(alphas, Pmf(g))
    return FitResult(
        model=model,
        loglik=ll,
        iterations=iters,
        converged=conv,
        grad_norm=float(np.max(np.abs(grad)) / max(series.n, 1)),
        support=bounds,
        method="npmle",
        loglik_trace=trace,
    )


def _poisson_objective(pa, pb, pw, m):
    """Negative conditional log-likelihood of the Poisson-innovation model and its gradient."""
    rows = np.arange(m + 1)[:, None]
    cols = np.arange(m + 1)[None, :]
    mask = cols <= rows
    log_comb = special.gammaln(rows + 1) - special.gammaln(cols + 1) - special.gammaln(rows - cols + 1)
    diff = cols - rows  # diff[j, b] = b - j
    toep_valid = diff >= 0
    diff_idx = np.where(toep_valid, diff, 0)

    def build(theta):
        a, lam = theta
        with np.errstate(divide="ignore"):
            log_b = log_comb + cols * math.log(a) + (rows - cols) * math.log1p(-a)
        B = np.where(mask, np.exp(log_b), 0.0)
        g = stats.poisson.pmf(np.arange(m + 1), lam)
        dg = np.empty(m + 1)
        dg[0] = -g[0]
        dg[1:] = g[:-1] - g[1:]
        T = np.where(toep_valid, g[diff_idx], 0.0)
        dT = np.where(toep_valid, dg[diff_idx], 0.0)
        P = (B @ T)[pa, pb]
        dPa = ((B * (cols - rows * a)) @ T)[pa, pb] / (a * (1.0 - a))
        dPl = (B @ dT)[pa, pb]
        safe = np.maximum(P, 1e-300)
        nll = -float(pw @ np.log(safe))
        return nll, -np.array([pw @ (dPa / safe), pw @ (dPl / safe)])

    return build


def poisson_ml_fit(series: CountSeries, p: int = 1, cfg: OptimizerConfig | None = None) -> FitResult:
    """Conditional ML for the Poisson-innovation INAR(1): joint (alpha, lambda) fit."""
    cfg = cfg or OptimizerConfig()
    if p != 1:
        raise ParameterError("the parametric Poisson fit supports p=1 only")
    if series.p != 1:
        raise ParameterError(f"series presample length {series.p} != 1")
    values = series.values()
    clip = cfg.alpha_clip

    if np.all(values == values[0]):
        c = int(values[0])
        lam = float(c) if c > 0 else _LAM_FLOOR
        model = InarModel((clip,), poisson_pmf(lam) if lam > _LAM_FLOOR else Pmf([1.0]))
        return FitResult(
            model=model,
            loglik=conditional_log_likelihood(model, series),
            iterations=0,
            converged=True,
            grad_norm=float(np.max(np.abs(score_alpha(model, series)))),
            support=SupportBounds(0, model.innovations.k_max),
            degenerate=True,
            lam=lam,
            method="poisson_ml",
        )

    pa, pb, pw, m = _pair_multiset(values)
    objective = _poisson_objective(pa, pb, pw, m)

    body = series.body.astype(float)
    gamma = _autocovariances(series.body, 1)
    rho1 = gamma[1] / gamma[0] if gamma[0] > 0 else 0.0
    a0 = float(np.clip(rho1, clip, 1.0 - clip))
    lam0 = max(body.mean() * (1.0 - a0), 1e-3)

    best = None
    total_iters = 0
    for r in range(cfg.restarts):
        if r == 0:
            start = np.array([a0, lam0])
        else:
            gen = cfg.seed.child(r).generator()
            start = np.array(
                [
                    np.clip(a0 * math.exp(0.3 * gen.standard_normal()), clip, 1.0 - clip),
                    max(lam0 * math.exp(0.3 * gen.standard_normal()), 1e-3),
                ]
            )
        res = optimize.minimize(
            objective,
            start,
            jac=True,
            method="L-BFGS-B",
            bounds=[(clip, 1.0 - clip), (_LAM_FLOOR, None)],
        )
        total_iters += int(res.nit)
        if best is None or -res.fun > -best.fun:
            best = res

    a_hat, lam_hat = float(best.x[0]), float(best.x[1])
    model = InarModel((a_hat,), poisson_pmf(lam_hat, 1e-12))
    return FitResult(
        model=model,
        loglik=-float(best.fun),
        iterations=total_iters,
        converged=bool(best.success),
        grad_norm=float(abs(best.jac[0]) / max(series.n, 1)),
        support=SupportBounds(0, model.innovations.k_max),
        lam=lam_hat,
        method="poisson_ml",
    )
