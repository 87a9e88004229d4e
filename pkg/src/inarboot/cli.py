"""Command-line interface: simulate / fit / bootstrap-ci / predict / dispersion / study.

Exit codes: 0 success, 1 input error, 2 completed with flags (degenerate or
non-converged fit), 3 internal failure.  Every command honors --seed; when
omitted, a fixed documented constant keeps runs reproducible.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .applications import PredictiveTarget, dispersion_ci, predictive_ci
from .bootstrap import hall_interval, parametric_poi_bootstrap, sp_inar_bootstrap
from .errors import ConfigError, InarBootError, InputError
from .estimation import OptimizerConfig, npmle_fit, poisson_ml_fit
from .model import InarModel
from .pmf import make_pmf
from .rng import DEFAULT_SEED, SeedSpec
from .series import read_series_csv, write_series_csv
from .simulate import simulate_inar, simulate_inarch
from .study import StudyConfig, emit_table, parse_g_target, run_study

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FLAGGED = 2
EXIT_INTERNAL = 3


def _write_output(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _parse_innovations(spec: str):
    """Parse "poisson:1.0", "negbin:2,0.667", "geometric:0.5", "explicit:0.5,0.5"."""
    if ":" not in spec:
        raise InputError(f"innovation spec needs family:params, got {spec!r}")
    family, _, raw = spec.partition(":")
    params = [float(v) for v in raw.split(",") if v.strip() != ""]
    return make_pmf(family, params)


def _seed_spec(args) -> SeedSpec:
    return SeedSpec(args.seed)


def _cmd_simulate(args) -> int:
    if args.model == "inar":
        alphas = tuple(float(v) for v in args.alphas.split(","))
        model = InarModel(alphas, _parse_innovations(args.innov))
        series = simulate_inar(model, args.n, args.burn_in, _seed_spec(args))
    else:
        series = simulate_inarch(args.alpha, args.beta, args.n, args.burn_in, _seed_spec(args))
    if args.out:
        write_series_csv(series, args.out)
    else:
        sys.stdout.write("count\n")
        for v in series.values():
            sys.stdout.write(f"{int(v)}\n")
    return EXIT_OK


def _load_series(args):
    return read_series_csv(args.series, args.p, args.presample_rows)


def _fit_for(args, series, cfg):
    if args.method == "poi":
        return poisson_ml_fit(series, args.p, cfg)
    return npmle_fit(series, args.p, cfg)


def _optimizer_config(args) -> OptimizerConfig:
    return OptimizerConfig(seed=_seed_spec(args).child(0))


def _cmd_fit(args) -> int:
    series = _load_series(args)
    fit = _fit_for(args, series, _optimizer_config(args))
    _write_output(json.dumps(fit.to_json_dict(), indent=2), args.out)
    return EXIT_FLAGGED if (fit.degenerate or not fit.converged) else EXIT_OK


def _cmd_bootstrap_ci(args) -> int:
    series = _load_series(args)
    cfg = _optimizer_config(args)
    fit = _fit_for(args, series, cfg)
    boot_rng = _seed_spec(args).child(1)
    if args.method == "poi":
        draws = parametric_poi_bootstrap(series, fit, args.B, cfg, boot_rng)
    else:
        draws = sp_inar_bootstrap(series, fit, args.B, cfg, boot_rng)

    targets = [t.strip() for t in args.targets.split(",") if t.strip()]
    intervals = {}
    for target in targets:
        if target == "alpha":
            point, stars = fit.model.alphas[0], draws.alpha_stars(0)
        else:
            k = parse_g_target(target)
            if k is None:
                raise InputError(f"unknown target {target!r}")
            point, stars = fit.model.innovations[k], draws.g_stars(k)
        intervals[target] = hall_interval(float(point), stars, args.delta, target).to_json_dict()

    payload = {
        "schema_version": 1,
        "fit": fit.to_json_dict(),
        "B": args.B,
        "B_effective": draws.b_effective,
        "excluded_count": draws.excluded_count,
        "intervals": intervals,
    }
    if args.draws_out:
        Path(args.draws_out).write_text(json.dumps(draws.to_json_dict(), indent=2), encoding="utf-8")
    _write_output(json.dumps(payload, indent=2), args.out)
    return EXIT_FLAGGED if (fit.degenerate or not fit.converged) else EXIT_OK


def _cmd_predict(args) -> int:
    series = _load_series(args)
    cfg = _optimizer_config(args)
    fit = npmle_fit(series, args.p, cfg)
    s_set = frozenset(int(v) for v in args.S.split(","))
    x_n = int(series.body[-1]) if args.xn == "auto" else int(args.xn)
    target = PredictiveTarget(s_set, x_n)
    result = predictive_ci(series, fit, target, args.B, args.delta, cfg, _seed_spec(args).child(1))
    _write_output(json.dumps(result.to_json_dict(target), indent=2), args.out)
    return EXIT_FLAGGED if (fit.degenerate or not fit.converged) else EXIT_OK


def _cmd_dispersion(args) -> int:
    series = _load_series(args)
    cfg = _optimizer_config(args)
    fit = npmle_fit(series, args.p, cfg)
    result = dispersion_ci(series, fit, args.B, args.delta, cfg, _seed_spec(args).child(1))
    _write_output(json.dumps(result.to_json_dict(), indent=2), args.out)
    return EXIT_FLAGGED if (fit.degenerate or not fit.converged) else EXIT_OK


def _cmd_study(args) -> int:
    try:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read study config: {exc}") from None
    cfg = StudyConfig.from_json_dict(data)

    def progress(done, total):
        if done == total or done % 10 == 0:
            sys.stderr.write(f"\rreplicates {done}/{total}")
            sys.stderr.flush()
            if done == total:
                sys.stderr.write("\n")

    result = run_study(cfg, workers=args.threads, progress=progress)
    _write_output(emit_table(result, args.format), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="inarboot",
        description="Semi-parametric estimation and bootstrap inference for INAR count series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, series=True):
        p.add_argument("--seed", type=int, default=DEFAULT_SEED,
                       help=f"master seed (default {DEFAULT_SEED:#x})")
        p.add_argument("--out", default=None, help="write output to this path instead of stdout")
        if series:
            p.add_argument("series", help="CSV of counts, one per line, optional 'count' header")
            p.add_argument("--p", type=int, default=1, help="model order (default 1)")
            p.add_argument("--presample-rows", type=int, default=None,
                           help="rows used as presample; defaults to the first p rows")

    sim = sub.add_parser("simulate", help="simulate an INAR or INARCH series to CSV")
    sim.add_argument("--model", choices=["inar", "inarch"], default="inar")
    sim.add_argument("--alphas", default="0.5", help="comma-separated INAR coefficients")
    sim.add_argument("--innov", default="poisson:1.0",
                     help="innovation pmf, e.g. poisson:1.0, negbin:2,0.6667, explicit:0.5,0.5")
    sim.add_argument("--alpha", type=float, default=0.5, help="INARCH feedback coefficient")
    sim.add_argument("--beta", type=float, default=1.0, help="INARCH intercept")
    sim.add_argument("--n", type=int, required=True, help="body length is n+1 observations")
    sim.add_argument("--burn-in", type=int, default=500)
    add_common(sim, series=False)
    sim.set_defaults(func=_cmd_simulate)

    fit = sub.add_parser("fit", help="maximum-likelihood fit, JSON result")
    add_common(fit)
    fit.add_argument("--method", choices=["sp", "poi"], default="sp",
                     help="sp: free innovation pmf; poi: Poisson innovations")
    fit.set_defaults(func=_cmd_fit)

    boot = sub.add_parser("bootstrap-ci", help="Hall intervals for alpha and pmf entries")
    add_common(boot)
    boot.add_argument("--method", choices=["sp", "poi"], default="sp")
    boot.add_argument("--B", type=int, default=500)
    boot.add_argument("--delta", type=float, default=0.05)
    boot.add_argument("--targets", default="alpha,G0,G1,G2,G3,G4")
    boot.add_argument("--draws-out", default=None, help="also dump all draws as JSON to this path")
    boot.set_defaults(func=_cmd_bootstrap_ci)

    pred = sub.add_parser("predict", help="interval for P(X_{n+1} in S | X_n = x_n)")
    add_common(pred)
    pred.add_argument("--S", default="0", help="comma-separated event set, e.g. '0,2'")
    pred.add_argument("--xn", default="auto", help="conditioning value; 'auto' uses the last observation")
    pred.add_argument("--B", type=int, default=500)
    pred.add_argument("--delta", type=float, default=0.05)
    pred.set_defaults(func=_cmd_predict)

    disp = sub.add_parser("dispersion", help="joint intervals for both dispersion indices")
    add_common(disp)
    disp.add_argument("--B", type=int, default=500)
    disp.add_argument("--delta", type=float, default=0.05)
    disp.set_defaults(func=_cmd_dispersion)

    study = sub.add_parser("study", help="Monte Carlo coverage/length study from a JSON config")
    study.add_argument("--config", required=True)
    study.add_argument("--format", choices=["csv", "markdown", "json"], default="markdown")
    study.add_argument("--threads", type=int, default=None,
                       help="worker processes (default: available parallelism)")
    study.add_argument("--out", default=None)
    study.set_defaults(func=_cmd_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InputError, ConfigError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except InarBootError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover - defensive
        sys.stderr.write(f"internal error: {type(exc).__name__}: {exc}\n")
        return EXIT_INTERNAL


if __name__ == "__main__":
    raise SystemExit(main())
