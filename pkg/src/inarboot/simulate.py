"""Binomial thinning and simulation of INAR(p) and INARCH(1) processes."""

from __future__ import annotations

import numpy as np

from . import _fastpath
from .errors import ParameterError
from .model import InarModel
from .rng import as_generator
from .series import CountSeries

DEFAULT_BURN_IN = 500


def binomial_thinning(alpha: float, x: int, rng=None) -> int:
    """Thin a count x: sum of x independent Bernoulli(alpha) survivals."""
    if not (0.0 < alpha < 1.0):
        raise ParameterError(f"thinning coefficient must be in (0,1), got {alpha}")
    if x < 0 or int(x) != x:
        raise ParameterError(f"count to thin must be a non-negative integer, got {x}")
    gen = as_generator(rng)
    return int(gen.binomial(int(x), alpha))


def _validate_sim_args(n: int, burn_in: int) -> None:
    if n < 1:
        raise ParameterError(f"series length n must be >= 1, got {n}")
    if burn_in < 0:
        raise ParameterError(f"burn_in must be >= 0, got {burn_in}")


def simulate_inar(
    model: InarModel, n: int, burn_in: int = DEFAULT_BURN_IN, rng=None
) -> CountSeries:
    """Simulate X_t = sum_i alpha_i o X_{t-i} + eps_t with eps_t ~ G.

    The chain starts from p innovations drawn from G, runs burn_in + n + 1
    steps, and discards the first burn_in generated values.  The returned
    presample holds the p values immediately preceding X_0.  Coefficients
    must be strictly inside (0,1) with sum below 1; G may be any pmf
    (a point mass at zero yields the absorbing all-zero series).
    """
    for a in model.alphas:
        if not (0.0 < a < 1.0):
            raise ParameterError(f"simulation requires alphas in (0,1), got {a}")
    if sum(model.alphas) >= 1.0:
        raise ParameterError("simulation requires sum(alphas) < 1")
    _validate_sim_args(n, burn_in)

    gen = as_generator(rng)
    p = model.p
    n_generate = burn_in + n + 1
    init_state = model.innovations.sample(p, gen)
    innov_u = gen.random(n_generate)
    thin_u = gen.random((n_generate, p))
    chain = _fastpath.simulate_inar_chain(
        np.asarray(model.alphas, dtype=float),
        model.innovations.cdf(),
        init_state,
        n_generate,
        thin_u,
        innov_u,
    )
    return CountSeries(chain[burn_in : burn_in + p], chain[p + burn_in :])


def simulate_inarch(
    alpha: float, beta: float, n: int, burn_in: int = DEFAULT_BURN_IN, rng=None
) -> CountSeries:
    """Simulate the conditional-Poisson recursion X_t | X_{t-1} ~ Poisson(beta + alpha X_{t-1})."""
    if not (0.0 <= alpha < 1.0):
        raise ParameterError(f"INARCH coefficient must be in [0,1), got {alpha}")
    if not (beta > 0):
        raise ParameterError(f"INARCH intercept must be positive, got {beta}")
    _validate_sim_args(n, burn_in)

    gen = as_generator(rng)
    n_generate = burn_in + n + 1
    u = gen.random(n_generate)
    init_value = _fastpath._poisson_inv(beta / (1.0 - alpha), gen.random())
    chain = _fastpath.simulate_inarch_chain(alpha, beta, init_value, n_generate, u)
    return CountSeries(chain[burn_in : burn_in + 1], chain[1 + burn_in :])
