"""Monte Carlo coverage/length studies with deterministic parallel execution.

Every replicate owns a seed sub-path derived from (n, replicate index), so
results do not depend on execution order or worker count, and the two
estimation methods see identical simulated data (paired comparison).
"""

from __future__ import annotations

import json
import math
import os
import re
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field, replace

from scipy import stats

from .applications import (
    PredictiveTarget,
    dispersion_innovations,
    dispersion_observations,
    predictive_probability,
)
from .bootstrap import hall_interval, parametric_poi_bootstrap, sp_inar_bootstrap
from .errors import ConfigError, ParameterError
from .estimation import OptimizerConfig, npmle_fit, poisson_ml_fit
from .kernel import binom_pmf_vector
from .model import InarModel
from .pmf import negbin_pmf, poisson_pmf
from .rng import SeedSpec
from .simulate import simulate_inar, simulate_inarch

SEMI_PARAMETRIC = "semi_parametric"
PARAMETRIC_POISSON = "parametric_poisson"
DEFAULT_TARGETS = ("alpha", "G0", "G1", "G2", "G3", "G4")


@dataclass(frozen=True)
class PoiInarDgp:
    lam: float
    alpha: float

    def label(self) -> str:
        return f"poi_inar(lam={self.lam}, alpha={self.alpha})"


@dataclass(frozen=True)
class NbInarDgp:
    size: int
    pi: float
    alpha: float

    def label(self) -> str:
        return f"nb_inar(size={self.size}, pi={self.pi}, alpha={self.alpha})"


@dataclass(frozen=True)
class InarchDgp:
    alpha: float
    beta: float

    def label(self) -> str:
        return f"inarch(alpha={self.alpha}, beta={self.beta})"


def simulate_dgp(dgp, n: int, burn_in: int, seed: SeedSpec):
    if isinstance(dgp, PoiInarDgp):
        model = InarModel((dgp.alpha,), poisson_pmf(dgp.lam))
        return simulate_inar(model, n, burn_in, seed)
    if isinstance(dgp, NbInarDgp):
        model = InarModel((dgp.alpha,), negbin_pmf(dgp.size, dgp.pi))
        return simulate_inar(model, n, burn_in, seed)
    if isinstance(dgp, InarchDgp):
        return simulate_inarch(dgp.alpha, dgp.beta, n, burn_in, seed)
    raise ParameterError(f"unknown DGP {dgp!r}")


def _exact_innovation_pmf(dgp, k: int) -> float:
    if isinstance(dgp, PoiInarDgp):
        return float(stats.poisson.pmf(k, dgp.lam))
    if isinstance(dgp, NbInarDgp):
        return float(stats.nbinom.pmf(k, dgp.size, dgp.pi))
    raise ParameterError(f"innovation pmf is not defined for {dgp!r}")


_G_TARGET = re.compile(r"^G\(?(\d+)\)?$")


def parse_g_target(target: str) -> int | None:
    m = _G_TARGET.match(target)
    return int(m.group(1)) if m else None


def true_functional(dgp, target: str, s_set=None, x_n: int | None = None) -> float:
    """Ground-truth value of a functional under the data-generating process.

    Predictive targets additionally need the conditioning value x_n (and the
    event set); for the conditional-Poisson DGP the truth comes from its own
    transition law, which is what the misspecification study measures against.
    """
    k = parse_g_target(target)
    if k is not None:
        return _exact_innovation_pmf(dgp, k)
    if target == "alpha":
        if isinstance(dgp, (PoiInarDgp, NbInarDgp)):
            return dgp.alpha
        raise ParameterError("the thinning coefficient is not defined for this DGP")
    if target in ("dispersion_innovations", "dispersion_observations"):
        if isinstance(dgp, PoiInarDgp):
            id_e = 1.0
        elif isinstance(dgp, NbInarDgp):
            id_e = 1.0 / dgp.pi
        else:
            raise ParameterError("innovation dispersion is not defined for this DGP")
        if target == "dispersion_innovations":
            return id_e
        return dispersion_observations(id_e, dgp.alpha)
    if target == "predictive":
        if s_set is None or x_n is None:
            raise ParameterError("predictive truth needs the event set and x_n")
        if isinstance(dgp, InarchDgp):
            mu = dgp.beta + dgp.alpha * x_n
            return float(sum(stats.poisson.pmf(s, mu) for s in sorted(s_set)))
        total = 0.0
        b = binom_pmf_vector(x_n, dgp.alpha)
        for s in sorted(s_set):
            total += sum(
                b[j] * _exact_innovation_pmf(dgp, s - j) for j in range(min(s, x_n) + 1)
            )
        return float(total)
    raise ParameterError(f"unknown target {target!r}")


@dataclass(frozen=True)
class StudyConfig:
    dgp: PoiInarDgp | NbInarDgp | InarchDgp
    n_grid: tuple[int, ...]
    replicates: int
    b_draws: int
    delta: float = 0.05
    method: str = SEMI_PARAMETRIC
    targets: tuple[str, ...] = DEFAULT_TARGETS
    seed: SeedSpec = SeedSpec()
    burn_in: int = 500
    predictive_s: tuple[int, ...] = (0,)
    predictive_xn: int | str = "last"
    optimizer: OptimizerConfig = OptimizerConfig()

    def validate(self) -> "StudyConfig":
        if not isinstance(self.dgp, (PoiInarDgp, NbInarDgp, InarchDgp)):
            raise ConfigError("/dgp", "unknown DGP")
        if not self.n_grid or any(n < 1 for n in self.n_grid):
            raise ConfigError("/n_grid", "need a non-empty list of positive lengths")
        if self.replicates < 1:
            raise ConfigError("/K", "replicate count must be >= 1")
        if self.b_draws < 1:
            raise ConfigError("/B", "bootstrap draw count must be >= 1")
        if not (0.0 < self.delta < 1.0):
            raise ConfigError("/delta", "delta must be in (0, 1)")
        if self.method not in (SEMI_PARAMETRIC, PARAMETRIC_POISSON):
            raise ConfigError("/method", f"unknown method {self.method!r}")
        if self.burn_in < 0:
            raise ConfigError("/burn_in", "burn-in must be >= 0")
        for i, t in enumerate(self.targets):
            known = t in ("alpha", "predictive", "dispersion_innovations", "dispersion_observations")
            if not known and parse_g_target(t) is None:
                raise ConfigError(f"/targets/{i}", f"unknown target {t!r}")
            if t.startswith("dispersion") and self.method != SEMI_PARAMETRIC:
                raise ConfigError(f"/targets/{i}", "dispersion targets need the semi-parametric method")
        if not self.targets:
            raise ConfigError("/targets", "need at least one target")
        if isinstance(self.predictive_xn, str) and self.predictive_xn != "last":
            raise ConfigError("/predictive/x_n", "must be \"last\" or a non-negative integer")
        if isinstance(self.predictive_xn, int) and self.predictive_xn < 0:
            raise ConfigError("/predictive/x_n", "must be \"last\" or a non-negative integer")
        if not self.predictive_s or any(s < 0 for s in self.predictive_s):
            raise ConfigError("/predictive/s", "need a non-empty set of non-negative integers")
        return self

    def to_json_dict(self) -> dict:
        if isinstance(self.dgp, PoiInarDgp):
            dgp = {"kind": "poi_inar", "lam": self.dgp.lam, "alpha": self.dgp.alpha}
        elif isinstance(self.dgp, NbInarDgp):
            dgp = {"kind": "nb_inar", "size": self.dgp.size, "pi": self.dgp.pi, "alpha": self.dgp.alpha}
        else:
            dgp = {"kind": "inarch", "alpha": self.dgp.alpha, "beta": self.dgp.beta}
        return {
            "schema_version": 1,
            "dgp": dgp,
            "n_grid": list(self.n_grid),
            "K": self.replicates,
            "B": self.b_draws,
            "delta": self.delta,
            "method": self.method,
            "targets": list(self.targets),
            "seed": {"master": self.seed.master, "path": list(self.seed.path)},
            "burn_in": self.burn_in,
            "predictive": {"s": list(self.predictive_s), "x_n": self.predictive_xn},
            "optimizer": {
                "max_iter": self.optimizer.max_iter,
                "tol": self.optimizer.tol,
                "restarts": self.optimizer.restarts,
                "alpha_clip": self.optimizer.alpha_clip,
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "StudyConfig":
        def need(container, key, pointer):
            if key not in container:
                raise ConfigError(pointer, "missing field")
            return container[key]

        dgp_data = need(data, "dgp", "/dgp")
        kind = need(dgp_data, "kind", "/dgp/kind")
        try:
            if kind == "poi_inar":
                dgp = PoiInarDgp(float(dgp_data["lam"]), float(dgp_data["alpha"]))
            elif kind == "nb_inar":
                dgp = NbInarDgp(int(dgp_data["size"]), float(dgp_data["pi"]), float(dgp_data["alpha"]))
            elif kind == "inarch":
                dgp = InarchDgp(float(dgp_data["alpha"]), float(dgp_data["beta"]))
            else:
                raise ConfigError("/dgp/kind", f"unknown kind {kind!r}")
        except KeyError as exc:
            raise ConfigError(f"/dgp/{exc.args[0]}", "missing field") from None

        seed_data = data.get("seed", {})
        seed = SeedSpec(seed_data.get("master", SeedSpec().master), tuple(seed_data.get("path", ())))
        pred = data.get("predictive", {})
        xn = pred.get("x_n", "last")
        if not isinstance(xn, str):
            xn = int(xn)
        opt_data = data.get("optimizer", {})
        defaults = OptimizerConfig()
        try:
            optimizer = OptimizerConfig(
                max_iter=int(opt_data.get("max_iter", defaults.max_iter)),
                tol=float(opt_data.get("tol", defaults.tol)),
                restarts=int(opt_data.get("restarts", defaults.restarts)),
                alpha_clip=float(opt_data.get("alpha_clip", defaults.alpha_clip)),
            )
        except ParameterError as exc:
            raise ConfigError("/optimizer", str(exc)) from None

        cfg = cls(
            dgp=dgp,
            n_grid=tuple(int(n) for n in need(data, "n_grid", "/n_grid")),
            replicates=int(need(data, "K", "/K")),
            b_draws=int(need(data, "B", "/B")),
            delta=float(data.get("delta", 0.05)),
            method=str(data.get("method", SEMI_PARAMETRIC)),
            targets=tuple(str(t) for t in data.get("targets", DEFAULT_TARGETS)),
            seed=seed,
            burn_in=int(data.get("burn_in", 500)),
            predictive_s=tuple(int(s) for s in pred.get("s", (0,))),
            predictive_xn=xn,
            optimizer=optimizer,
        )
        return cfg.validate()


@dataclass(frozen=True)
class CellStats:
    """Aggregate for one (n, target) cell; None values mean no usable replicate."""

    coverage: float | None
    avg_length: float | None
    mc_se: float | None
    failures: int
    k_effective: int

    def to_json_dict(self) -> dict:
        return {
            "coverage": self.coverage,
            "avg_length": self.avg_length,
            "mc_se": self.mc_se,
            "failures": self.failures,
            "k_effective": self.k_effective,
        }


@dataclass(frozen=True, eq=False)
class StudyResult:
    dgp_label: str
    method: str
    replicates: int
    b_draws: int
    delta: float
    n_grid: tuple[int, ...]
    targets: tuple[str, ...]
    cells: dict = field(repr=False)

    def cell(self, n: int, target: str) -> CellStats:
        return self.cells[(n, target)]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, StudyResult)
            and self.dgp_label == other.dgp_label
            and self.method == other.method
            and self.replicates == other.replicates
            and self.b_draws == other.b_draws
            and self.delta == other.delta
            and self.n_grid == other.n_grid
            and self.targets == other.targets
            and self.cells == other.cells
        )

    def to_json_dict(self) -> dict:
        return {
            "schema_version": 1,
            "dgp": self.dgp_label,
            "method": self.method,
            "K": self.replicates,
            "B": self.b_draws,
            "delta": self.delta,
            "n_grid": list(self.n_grid),
            "targets": list(self.targets),
            "cells": {
                target: {str(n): self.cells[(n, target)].to_json_dict() for n in self.n_grid}
                for target in self.targets
            },
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "StudyResult":
        n_grid = tuple(int(n) for n in data["n_grid"])
        targets = tuple(data["targets"])
        cells = {}
        for target in targets:
            for n in n_grid:
                raw = data["cells"][target][str(n)]
                cells[(n, target)] = CellStats(
                    coverage=raw["coverage"],
                    avg_length=raw["avg_length"],
                    mc_se=raw["mc_se"],
                    failures=int(raw["failures"]),
                    k_effective=int(raw["k_effective"]),
                )
        return cls(
            dgp_label=data["dgp"],
            method=data["method"],
            replicates=int(data["K"]),
            b_draws=int(data["B"]),
            delta=float(data["delta"]),
            n_grid=n_grid,
            targets=targets,
            cells=cells,
        )


def _replicate_outcomes(cfg: StudyConfig, n: int, k: int):
    """One replicate: simulate, fit, resample, build an interval per target.

    Returns {target: (covered, length) | None}; None marks a target-level
    failure.  A replicate-level failure returns None for the whole record.
    """
    sim_seed = cfg.seed.child(n, k, 0)
    opt = replace(cfg.optimizer, seed=cfg.seed.child(n, k, 1))
    boot_rng = cfg.seed.child(n, k, 2)
    try:
        series = simulate_dgp(cfg.dgp, n, cfg.burn_in, sim_seed)
        if cfg.method == SEMI_PARAMETRIC:
            fit = npmle_fit(series, 1, opt)
            draws = sp_inar_bootstrap(series, fit, cfg.b_draws, opt, boot_rng)
        else:
            fit = poisson_ml_fit(series, 1, opt)
            draws = parametric_poi_bootstrap(series, fit, cfg.b_draws, opt, boot_rng)
    except Exception:
        return None

    outcomes = {}
    disp_stars = None
    for target in cfg.targets:
        try:
            if target == "alpha":
                point = fit.model.alphas[0]
                stars = draws.alpha_stars(0)
                truth = true_functional(cfg.dgp, target)
            elif (g_k := parse_g_target(target)) is not None:
                point = fit.model.innovations[g_k]
                stars = draws.g_stars(g_k)
                truth = true_functional(cfg.dgp, target)
            elif target == "predictive":
                x_n = int(series.body[-1]) if cfg.predictive_xn == "last" else int(cfg.predictive_xn)
                ptarget = PredictiveTarget(frozenset(cfg.predictive_s), x_n)
                point = predictive_probability(fit.model, ptarget)
                stars = [predictive_probability(d.model(), ptarget) for d in draws.draws]
                truth = true_functional(cfg.dgp, target, s_set=cfg.predictive_s, x_n=x_n)
            else:  # dispersion targets share one star computation
                if disp_stars is None:
                    disp_stars = _dispersion_stars(fit, draws)
                point, stars = disp_stars[target]
                truth = true_functional(cfg.dgp, target)
            ci = hall_interval(float(point), stars, cfg.delta, target=target)
            outcomes[target] = (bool(ci.covers(truth)), float(ci.length))
        except Exception:
            outcomes[target] = None
    return outcomes


def _dispersion_stars(fit, draws):
    """Point and star values for both dispersion indices from the shared draw set."""
    point_innov = dispersion_innovations(fit.model.innovations)
    point_obs = dispersion_observations(point_innov, fit.model.alphas[0])
    innov, obs = [], []
    dropped = 0
    for d in draws.draws:
        try:
            id_e = dispersion_innovations(d.model().innovations)
        except Exception:
            dropped += 1
            continue
        innov.append(id_e)
        obs.append(dispersion_observations(id_e, d.alphas[0]))
    if dropped > 0.10 * max(len(draws.draws), 1) or not innov:
        raise ParameterError("too many draws with undefined dispersion")
    return {
        "dispersion_innovations": (point_innov, innov),
        "dispersion_observations": (point_obs, obs),
    }


def run_study(cfg: StudyConfig, workers: int | None = None, progress=None, _task_order=None) -> StudyResult:
    """Execute the study; results are independent of worker count and task order."""
    cfg.validate()
    tasks = [(n, k) for n in cfg.n_grid for k in range(cfg.replicates)]
    if _task_order is not None:
        tasks = [tasks[i] for i in _task_order]
    if workers is None:
        workers = os.cpu_count() or 1

    records = {}
    done = 0
    if workers <= 1:
        for n, k in tasks:
            records[(n, k)] = _replicate_outcomes(cfg, n, k)
            done += 1
            if progress:
                progress(done, len(tasks))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(_replicate_outcomes, cfg, n, k): (n, k) for n, k in tasks}
            for fut in as_completed(futures):
                records[futures[fut]] = fut.result()
                done += 1
                if progress:
                    progress(done, len(tasks))

    cells = {}
    for n in cfg.n_grid:
        ordered = [records[(n, k)] for k in range(cfg.replicates)]
        for target in cfg.targets:
            outs = [
                rec[target]
                for rec in ordered
                if rec is not None and rec.get(target) is not None
            ]
            k_eff = len(outs)
            failures = cfg.replicates - k_eff
            if k_eff == 0:
                cells[(n, target)] = CellStats(None, None, None, failures, 0)
                continue
            coverage = sum(1 for covered, _ in outs if covered) / k_eff
            avg_length = sum(length for _, length in outs) / k_eff
            mc_se = math.sqrt(coverage * (1.0 - coverage) / k_eff)
            cells[(n, target)] = CellStats(coverage, avg_length, mc_se, failures, k_eff)

    return StudyResult(
        dgp_label=cfg.dgp.label(),
        method=cfg.method,
        replicates=cfg.replicates,
        b_draws=cfg.b_draws,
        delta=cfg.delta,
        n_grid=cfg.n_grid,
        targets=cfg.targets,
        cells=cells,
    )


def _format_cell(cell: CellStats) -> str:
    if cell.coverage is None:
        return "-"
    return f"{cell.coverage:.3f}/{cell.avg_length:.3f}"


def emit_table(result: StudyResult, fmt: str = "markdown") -> str:
    """Render a study as csv, markdown, or json (coverage/length cells, 3 decimals)."""
    if fmt == "json":
        return json.dumps(result.to_json_dict(), indent=2, sort_keys=True)
    header = ["target"] + [f"n={n}" for n in result.n_grid]
    rows = [
        [target] + [_format_cell(result.cells[(n, target)]) for n in result.n_grid]
        for target in result.targets
    ]
    if fmt == "csv":
        lines = [",".join(header)] + [",".join(row) for row in rows]
        return "\n".join(lines) + "\n"
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(row) + " |" for row in rows]
        return "\n".join(lines) + "\n"
    raise ParameterError(f"unknown table format {fmt!r}")
