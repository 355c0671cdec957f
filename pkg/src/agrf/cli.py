"""Command-line interface: ``agrf {fit,predict,eval,reproduce,datagen}``.

Exit codes: 0 success, 2 unreadable or malformed input, 3 invalid input,
4 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__, experiments
from .datagen import (
    COMPOSITE,
    COMPOSITE_CASES,
    COMPOSITE_PATTERN,
    OSCILLATOR,
    OSCILLATOR_PATTERN,
    NoiseSpec,
    SolverError,
    relative_l2_error,
    sample_observations,
)
from .field import AssemblyError, FactorizationError, ObservationError
from .inference import BAND_Z, FitError, UnsupportedOrderError, fit
from .io import (
    ConfigError,
    ModelFileError,
    ParseError,
    RunConfig,
    load_config,
    load_model,
    parse_grid,
    parse_orders,
    prediction_rows,
    read_observations,
    read_predictions,
    read_truth,
    save_model,
    write_observations,
    write_predictions,
    write_rle,
    write_truth,
)

EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NUMERICAL = 4


class GridMismatchError(ValueError):
    pass


def _report_fit(model, out):
    hp = model.hyper
    rep = model.report
    print(f"log_likelihood = {model.log_likelihood:.10g}", file=out)
    print(f"amplitude = {hp.amplitude:.10g}", file=out)
    print(f"length_scale = {hp.length_scale:.10g}", file=out)
    if model.noisy:
        for i, d in enumerate(hp.noise):
            if model.obs.counts[i]:
                print(f"delta_{i} = {d:.10g}", file=out)
    if model.jitter:
        print(f"jitter = {model.jitter:.3g}", file=out)
    if rep:
        print(f"restarts: {len(rep['restarts'])} run, {rep['finite_restarts']} finite, "
              f"{rep['converged_restarts']} converged, best #{rep['best_restart']}, "
              f"{rep['evaluations']} evaluations", file=out)


def cmd_fit(args):
    config = load_config(args.config) if args.config else RunConfig()
    obs = read_observations(args.data)
    obs.validate(config.mode != "noiseless")
    model = fit(obs, config.mean_function, config.fit_config(args.seed))
    save_model(args.out, model)
    _report_fit(model, sys.stdout)
    return 0


def cmd_predict(args):
    model = load_model(args.model)
    grid = parse_grid(args.grid)
    orders = parse_orders(args.orders)
    for q in orders:
        model.check_order(q)
        if q > model.data_order:
            print(f"note: order {q} is above the highest data order {model.data_order} "
                  "(extrapolated order)", file=sys.stderr)
    write_predictions(args.out, prediction_rows(model, grid, orders))
    return 0


def _evaluate(pred_path, truth_path):
    pred = read_predictions(pred_path)
    truth = read_truth(truth_path)
    if set(pred) != set(truth):
        raise GridMismatchError(f"orders differ: predictions {sorted(pred)}, truth {sorted(truth)}")
    rle = {}
    for q in sorted(truth):
        (xp, mp), (xt, vt) = pred[q], truth[q]
        if xp.shape != xt.shape or not np.allclose(xp, xt, rtol=0, atol=1e-12):
            raise GridMismatchError(f"order {q}: prediction and truth grids differ")
        rle[q] = relative_l2_error(vt, mp)
    return rle


def cmd_eval(args):
    rle = _evaluate(args.pred, args.truth)
    print("order,rle")
    for q, v in rle.items():
        print(f"{q},{v:.17g}")
    if args.out:
        write_rle(args.out, rle)
    return 0


def _manifest(example, variant, seed, config, result):
    effective = config.to_dict()
    effective["mode"] = result.settings["mode"]
    effective["optimizer"]["seed"] = seed
    for key in ("grid", "orders"):
        effective.pop(key)
    return {
        "example": example,
        "variant": variant,
        "seed": seed,
        "data_seed": seed if example in ("kdv", "burgers") else None,
        "optimizer_seed": seed,
        "settings": result.settings,
        "fit_config": effective,
        "grid_points": int(result.grid.size),
        "rle": {str(q): v for q, v in sorted(result.rle.items())},
        "hyperparameters": {
            label: {"amplitude": m.hyper.amplitude, "length_scale": m.hyper.length_scale,
                    "noise": list(m.hyper.noise), "log_likelihood": m.log_likelihood}
            for label, m in sorted(result.models.items())
        },
        "versions": {"agrf": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "python": platform.python_version()},
    }


def write_result(result, outdir: Path, config: RunConfig):
    outdir.mkdir(parents=True, exist_ok=True)
    write_observations(outdir / "observations.csv", result.data)
    write_truth(outdir / "truth.csv", result.grid, result.truth)
    rows = []
    for q in sorted(result.mean):
        mu, var = result.mean[q], result.variance[q]
        sd = np.sqrt(var)
        rows += [(q, x, m, v, m - BAND_Z * s, m + BAND_Z * s)
                 for x, m, v, s in zip(result.grid, mu, var, sd)]
    write_predictions(outdir / "predictions.csv", rows)
    write_rle(outdir / "rle.csv", result.rle)
    manifest = _manifest(result.example, result.variant, result.seed, config, result)
    (outdir / "manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def cmd_reproduce(args):
    config = load_config(args.config) if args.config else RunConfig()
    variants = [args.variant] if args.variant else list(experiments.EXAMPLES[args.example])
    for v in variants:
        if v not in experiments.EXAMPLES[args.example]:
            raise ConfigError(f"unknown {args.example} variant {v!r}; "
                              f"choose from {experiments.EXAMPLES[args.example]}")
    out = Path(args.out)
    summary = []
    for v in variants:
        result = experiments.run(args.example, v, args.seed, config.fit_config(args.seed),
                                 args.grid_points)
        write_result(result, out / v, config)
        summary += [(v, q, result.rle[q]) for q in sorted(result.rle)]
        print(f"{args.example}/{v}: " + ", ".join(
            f"RLE[{q}]={result.rle[q]:.4g}" for q in sorted(result.rle)))
    out.mkdir(parents=True, exist_ok=True)
    lines = ["variant,order,rle"] + [f"{v},{q},{r:.17g}" for v, q, r in summary]
    (out / "rle_summary.csv").write_text("\n".join(lines) + "\n")
    return 0


def cmd_datagen(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    name = args.example
    if name == "composite":
        case = args.variant or "case4"
        if case not in COMPOSITE_CASES:
            raise ConfigError(f"unknown composite case {case!r}")
        problem = COMPOSITE
        pattern = {i: COMPOSITE_PATTERN[i] for i in COMPOSITE_CASES[case]}
        noise = args.noise or 0.0
    elif name == "oscillator":
        problem, pattern, noise = OSCILLATOR, OSCILLATOR_PATTERN, args.noise or 0.0
    else:
        problem = experiments.reference_solution(name)
        pattern = experiments.PDE_PATTERN
        if args.noise is not None:
            noise = args.noise
        elif name == "kdv":
            level = args.variant or "noise10"
            if level not in experiments.KDV_NOISE:
                raise ConfigError(f"unknown kdv noise level {level!r}")
            noise = experiments.KDV_NOISE[level]
        else:
            noise = experiments.BURGERS_NOISE
    obs = sample_observations(problem, pattern, NoiseSpec(noise), args.seed)
    write_observations(out / "observations.csv", obs)
    grid = np.linspace(*problem.domain, args.grid_points)
    truth = {q: np.asarray(problem.truth(grid, q)) for q in range(3)}
    write_truth(out / "truth.csv", grid, truth)
    print(f"wrote {obs.size} observations (counts {obs.counts}) and truth on "
          f"{grid.size} points to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agrf", description="Gaussian random field regression with derivative data.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit hyperparameters and save a model")
    p.add_argument("data", help="observation CSV with header order,x,value")
    p.add_argument("--config", help="run configuration (JSON)")
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--seed", type=int, help="override the optimizer seed")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("predict", help="posterior mean/variance on a grid")
    p.add_argument("model")
    p.add_argument("--grid", default="0:1:201", help="lo:hi:count")
    p.add_argument("--orders", default="0", help="comma-separated derivative orders")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("eval", help="relative L2 error of predictions against truth")
    p.add_argument("pred")
    p.add_argument("truth")
    p.add_argument("--out", help="also write order,rle CSV here")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("reproduce", help="run one of the four benchmark experiments")
    p.add_argument("example", choices=sorted(experiments.EXAMPLES))
    p.add_argument("--variant", help="case/method/noise/calibration; default: all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="run configuration (JSON)")
    p.add_argument("--grid-points", type=int, default=experiments.GRID_POINTS)
    p.add_argument("--out", required=True, help="report directory")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("datagen", help="write benchmark observations and truth")
    p.add_argument("example", choices=sorted(experiments.EXAMPLES))
    p.add_argument("--variant", help="composite case or kdv noise level")
    p.add_argument("--noise", type=float, help="noise fraction, overrides the variant")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-points", type=int, default=experiments.GRID_POINTS)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_datagen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    # LinAlgError derives from ValueError, so numerical failures go first
    except (FitError, FactorizationError, AssemblyError, SolverError,
            np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ObservationError, ConfigError, ModelFileError, UnsupportedOrderError,
            GridMismatchError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION

if __name__ == "__main__":
    sys.exit(main())
