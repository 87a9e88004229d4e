"""Numba kernels for the hot loops: chain simulation and the p=1 NPMLE ascent.

Everything here operates on plain arrays; the public modules own validation
and types.  The p=1 likelihood is evaluated on the (past, current) pair
multiset, so one ascent iteration costs O(#unique pairs * max count)
independent of the series length.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True)
def _binom_inv(n: int, prob: float, u: float) -> int:
    """Binomial(n, prob) draw by cdf inversion of a single uniform."""
    if n <= 0:
        return 0
    q = (1.0 - prob) ** n
    cdf = q
    k = 0
    ratio = prob / (1.0 - prob)
    while u > cdf and k < n:
        q *= ((n - k) / (k + 1.0)) * ratio
        k += 1
        cdf += q
    return k


@njit(cache=True)
def _pmf_inv(cdf: np.ndarray, u: float) -> int:
    """Finite-support pmf draw by walking its cdf."""
    k = 0
    last = cdf.size - 1
    while k < last and u > cdf[k]:
        k += 1
    return k


@njit(cache=True)
def _poisson_inv(mu: float, u: float) -> int:
    p = math.exp(-mu)
    cdf = p
    k = 0
    while u > cdf and k < 100000:
        k += 1
        p *= mu / k
        cdf += p
    return k


@njit(cache=True)
def simulate_inar_chain(alphas, g_cdf, init_state, n_generate, thin_u, innov_u):
    """Generate an INAR(p) chain: p initial values followed by n_generate steps.

    thin_u has shape (n_generate, p); innov_u has length n_generate.
    """
    p = alphas.size
    out = np.empty(p + n_generate, dtype=np.int64)
    for i in range(p):
        out[i] = init_state[i]
    for t in range(n_generate):
        x = 0
        for i in range(p):
            x += _binom_inv(out[p + t - 1 - i], alphas[i], thin_u[t, i])
        out[p + t] = x + _pmf_inv(g_cdf, innov_u[t])
    return out


@njit(cache=True)
def simulate_inarch_chain(alpha, beta, init_value, n_generate, u):
    """Generate an INARCH(1) chain: X_t | X_{t-1} ~ Poisson(beta + alpha * X_{t-1})."""
    out = np.empty(1 + n_generate, dtype=np.int64)
    out[0] = init_value
    for t in range(n_generate):
        out[t + 1] = _poisson_inv(beta + alpha * out[t], u[t])
    return out


@njit(cache=True)
def _fill_binom(B, m: int, alpha: float):
    """B[a, j] = Binomial(a, alpha) pmf at j for a, j = 0..m (j > a left stale)."""
    r = alpha / (1.0 - alpha)
    for a in range(m + 1):
        v = (1.0 - alpha) ** a
        B[a, 0] = v
        for j in range(a):
            v *= ((a - j) / (j + 1.0)) * r
            B[a, j + 1] = v


@njit(cache=True)
def _pairs_loglik(pa, pb, pw, B, g) -> float:
    ll = 0.0
    for u in range(pa.size):
        a = pa[u]
        b = pb[u]
        smax = a if a < b else b
        acc = 0.0
        for s in range(smax + 1):
            acc += B[a, s] * g[b - s]
        if acc <= 0.0:
            return -np.inf
        ll += pw[u] * math.log(acc)
    return ll


@njit(cache=True)
def _pairs_loglik_grad(pa, pb, pw, B, g, alpha: float):
    """Log-likelihood and its derivative in alpha, on the pair multiset."""
    ll = 0.0
    grad = 0.0
    for u in range(pa.size):
        a = pa[u]
        b = pb[u]
        smax = a if a < b else b
        acc = 0.0
        dacc = 0.0
        for s in range(smax + 1):
            term = B[a, s] * g[b - s]
            acc += term
            dacc += term * (s - a * alpha)
        if acc <= 0.0:
            return -np.inf, 0.0
        ll += pw[u] * math.log(acc)
        grad += pw[u] * dacc / acc
    return ll, grad / (alpha * (1.0 - alpha))


@njit(cache=True)
def _em_update_g(pa, pb, pw, B, g, u_minus, u_plus, s_buf):
    """Posterior innovation mass per support point, summed over the pairs."""
    for k in range(s_buf.size):
        s_buf[k] = 0.0
    for u in range(pa.size):
        a = pa[u]
        b = pb[u]
        smax = a if a < b else b
        acc = 0.0
        for s in range(smax + 1):
            acc += B[a, s] * g[b - s]
        if acc <= 0.0:
            continue
        r = pw[u] / acc
        elo = b - a
        if elo < u_minus:
            elo = u_minus
        ehi = b if b < u_plus else u_plus
        for e in range(elo, ehi + 1):
            s_buf[e] += r * g[e] * B[a, b - e]


@njit(cache=True)
def fit_npmle1(pa, pb, pw, m, u_minus, u_plus, alpha0, g0, tol, max_iter, clip, trace):
    """Alternating ascent for the p=1 joint likelihood.

    Phase 1 updates g alone (EM at the starting alpha) until its gain falls
    below tol, so each restart begins from a profile point of its alpha
    basin; phase 2 alternates a projected-gradient step on alpha
    (backtracking keeps the objective non-decreasing) with the multiplicative
    posterior-frequency update of g, renormalized exactly on
    [u_minus, u_plus].

    Returns (alpha, g, loglik, iterations, converged, grad) with grad the
    final objective derivative in alpha; trace[0..iterations] holds the
    objective after each full iteration.
    """
    alpha = alpha0
    if alpha < clip:
        alpha = clip
    if alpha > 1.0 - clip:
        alpha = 1.0 - clip
    g = g0.copy()
    total = 0.0
    for k in range(u_minus, u_plus + 1):
        total += g[k]
    if total <= 0.0:
        total = float(u_plus - u_minus + 1)
        for k in range(u_minus, u_plus + 1):
            g[k] = 1.0
    for k in range(g.size):
        if k < u_minus or k > u_plus:
            g[k] = 0.0
        else:
            g[k] /= total

    B = np.zeros((m + 1, m + 1))
    Bc = np.zeros((m + 1, m + 1))
    s_buf = np.zeros(m + 1)

    _fill_binom(B, m, alpha)
    ll, grad = _pairs_loglik_grad(pa, pb, pw, B, g, alpha)
    trace[0] = ll
    step = 0.1
    iters = 0
    converged = False

    for it in range(1, max_iter + 1):
        _em_update_g(pa, pb, pw, B, g, u_minus, u_plus, s_buf)
        total = 0.0
        for k in range(u_minus, u_plus + 1):
            total += s_buf[k]
        if total > 0.0:
            for k in range(u_minus, u_plus + 1):
                g[k] = s_buf[k] / total
        ll_new = _pairs_loglik(pa, pb, pw, B, g)
        trace[it] = ll_new
        iters = it
        denom = abs(ll) if abs(ll) > 1.0 else 1.0
        gain = ll_new - ll
        warm_done = np.isfinite(ll) and gain <= tol * denom
        ll = ll_new
        if warm_done:
            break

    ll, grad = _pairs_loglik_grad(pa, pb, pw, B, g, alpha)
    for it in range(iters + 1, max_iter + 1):
        ll_start = ll
        # alpha step: ascend along the gradient, projected into [clip, 1-clip]
        if grad != 0.0 and np.isfinite(ll):
            s = step
            accepted = False
            for _ in range(60):
                cand = alpha + s * grad
                if cand < clip:
                    cand = clip
                elif cand > 1.0 - clip:
                    cand = 1.0 - clip
                if cand == alpha:
                    s *= 0.5
                    continue
                _fill_binom(Bc, m, cand)
                llc = _pairs_loglik(pa, pb, pw, Bc, g)
                if llc >= ll:
                    alpha = cand
                    ll = llc
                    B, Bc = Bc, B
                    step = s * 2.0
                    accepted = True
                    break
                s *= 0.5
            if not accepted and step > 1e-12:
                step *= 0.5

        # g step: exact EM update on the restricted support
        _em_update_g(pa, pb, pw, B, g, u_minus, u_plus, s_buf)
        total = 0.0
        for k in range(u_minus, u_plus + 1):
            total += s_buf[k]
        if total > 0.0:
            for k in range(u_minus, u_plus + 1):
                g[k] = s_buf[k] / total

        ll_new, grad = _pairs_loglik_grad(pa, pb, pw, B, g, alpha)
        trace[it] = ll_new
        iters = it
        denom = abs(ll_start) if abs(ll_start) > 1.0 else 1.0
        gain = ll_new - ll_start
        ll = ll_new
        if np.isfinite(ll_start) and gain <= tol * denom:
            converged = True
            break

    return alpha, g, ll, iters, converged, grad
