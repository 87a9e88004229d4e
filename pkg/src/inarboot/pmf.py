"""Probability mass functions on the non-negative integers with finite stored support.

A :class:`Pmf` stores mass at ``k = 0..k_max`` as a dense array; mass beyond
``k_max`` is exactly zero.  Construction renormalizes so the entries sum to 1
to machine precision, which makes construction idempotent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .errors import DomainError, ParameterError
from .rng import as_generator

_MAX_TAIL_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class Pmf:
    """Distribution on {0, 1, ..., k_max} given by its probability mass entries."""

    probs: np.ndarray = field(repr=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise DomainError("pmf must be a non-empty 1-D array")
        if not np.all(np.isfinite(p)):
            raise DomainError("pmf entries must be finite")
        if np.any(p < 0):
            raise DomainError("pmf entries must be non-negative")
        total = p.sum()
        if total <= 0:
            raise DomainError("pmf must have positive total mass")
        p = p / total
        p.setflags(write=False)
        object.__setattr__(self, "probs", p)

    @property
    def k_max(self) -> int:
        return self.probs.size - 1

    def __len__(self) -> int:
        return self.probs.size

    def __getitem__(self, k: int) -> float:
        """Mass at k; exactly zero outside the stored support."""
        if k < 0 or k > self.k_max:
            return 0.0
        return float(self.probs[k])

    def __eq__(self, other) -> bool:
        return isinstance(other, Pmf) and np.array_equal(self.probs, other.probs)

    def mean(self) -> float:
        return float(np.arange(self.probs.size) @ self.probs)

    def variance(self) -> float:
        k = np.arange(self.probs.size)
        m = float(k @ self.probs)
        return float((k - m) ** 2 @ self.probs)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def sample(self, size: int, rng=None) -> np.ndarray:
        """Draw `size` values by inversion from one uniform each."""
        gen = as_generator(rng)
        u = gen.random(size)
        idx = np.searchsorted(self.cdf(), u, side="right")
        return np.minimum(idx, self.k_max).astype(np.int64)


def _truncate(dist, tail_tol: float) -> Pmf:
    """Smallest support prefix whose omitted tail mass is below tail_tol, renormalized."""
    k = int(dist.ppf(1.0 - tail_tol))
    while dist.sf(k) >= tail_tol:
        k += 1
    return Pmf(dist.pmf(np.arange(k + 1)))


def _check_tail_tol(tail_tol: float) -> float:
    if not (0 < tail_tol <= _MAX_TAIL_TOL):
        raise ParameterError(f"tail_tol must be in (0, {_MAX_TAIL_TOL}], got {tail_tol}")
    return tail_tol


def poisson_pmf(lam: float, tail_tol: float = 1e-12) -> Pmf:
    """Poisson(lam) truncated to the smallest prefix with tail mass below tail_tol."""
    if not (lam > 0 and np.isfinite(lam)):
        raise ParameterError(f"Poisson rate must be positive, got {lam}")
    return _truncate(stats.poisson(lam), _check_tail_tol(tail_tol))


def negbin_pmf(n: int, pi: float, tail_tol: float = 1e-12) -> Pmf:
    """Negative binomial NB(n, pi): mass pi^n * (1-pi)^k * C(n+k-1, k) at k."""
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise ParameterError(f"negative binomial size must be a positive integer, got {n}")
    if not (0 < pi < 1):
        raise ParameterError(f"negative binomial probability must be in (0,1), got {pi}")
    return _truncate(stats.nbinom(n, pi), _check_tail_tol(tail_tol))


def geometric_pmf(pi: float, tail_tol: float = 1e-12) -> Pmf:
    """Geometric on {0,1,...}: mass pi * (1-pi)^k at k."""
    if not (0 < pi < 1):
        raise ParameterError(f"geometric probability must be in (0,1), got {pi}")
    return _truncate(stats.geom(pi, loc=-1), _check_tail_tol(tail_tol))


def explicit_pmf(weights) -> Pmf:
    """Pmf from explicit weights on {0, ..., len-1}; renormalized."""
    return Pmf(np.asarray(weights, dtype=float))


_FAMILIES = {
    "poisson": (poisson_pmf, 1),
    "negbin": (negbin_pmf, 2),
    "geometric": (geometric_pmf, 1),
}


def make_pmf(family: str, params, tail_tol: float = 1e-12) -> Pmf:
    """Build an innovation distribution by family name.

    Supported families: ``poisson`` (rate), ``negbin`` (size, probability),
    ``geometric`` (probability), ``explicit`` (list of weights on 0..K).
    """
    name = family.strip().lower().replace("-", "").replace("_", "")
    if name in ("explicit", "custom"):
        return explicit_pmf(params)
    if name == "negativebinomial" or name == "nb":
        name = "negbin"
    if name not in _FAMILIES:
        raise ParameterError(f"unknown pmf family {family!r}")
    fn, arity = _FAMILIES[name]
    args = list(np.atleast_1d(params))
    if len(args) != arity:
        raise ParameterError(f"{family} takes {arity} parameter(s), got {len(args)}")
    if name == "negbin":
        size = args[0]
        if float(size) != int(size):
            raise ParameterError(f"negative binomial size must be an integer, got {size}")
        return negbin_pmf(int(size), float(args[1]), tail_tol)
    return fn(*[float(a) for a in args], tail_tol)
