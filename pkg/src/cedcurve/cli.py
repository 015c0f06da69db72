"""Command-line entry point: ``cedcurve estimate | simulate | oracle``.

Exit status is 0 on success, 1 for invalid input or configuration and 2 for
numerical failures.  Diagnostics go to standard error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._parallel import child_rng
from .domain import WtpGrid, validate_dataset
from .errors import CedError, ValidationError
from .inference import asymptotic_null_test, bootstrap_curves, cea_curve
from .io import (canonical_json, config_hash, load_config, read_dataset_csv, write_curve_csv,
                 write_dataset_csv)
from .simlab import (ScenarioConfig, generate_scenario_dataset, oracle_true_theta, replication_model_spec,
                     run_replication_study)
from .standardize import DEFAULT_K, ModelSpec, estimate_curves

log = logging.getLogger("cedcurve")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


def _grid(args, config: dict | None = None, default=None) -> WtpGrid:
    if getattr(args, "lambdas", None):
        return WtpGrid(tuple(args.lambdas))
    spec = (config or {}).get("lambdas")
    flags = (args.lambda_min, args.lambda_max, args.lambda_step)
    has_flags = any(f is not None for f in flags)
    if isinstance(spec, list) and not has_flags:
        return WtpGrid(tuple(spec))
    if has_flags or isinstance(spec, dict):
        spec = spec if isinstance(spec, dict) else {}
        lo = args.lambda_min if args.lambda_min is not None else spec.get("min", 0.0)
        hi = args.lambda_max if args.lambda_max is not None else spec.get("max")
        step = args.lambda_step if args.lambda_step is not None else spec.get("step", 1.0)
        if hi is None:
            raise ValueError("lambda grid needs a maximum (--lambda-max)")
        return WtpGrid.from_range(float(lo), float(hi), float(step))
    if default is not None:
        return WtpGrid(tuple(default))
    raise ValueError("no lambda grid given")


def _effective_config(args) -> dict:
    config = load_config(args.config) if args.config else {}
    if args.config and "input" in config:
        # relative paths in a config file are relative to that file
        config["input"] = str(Path(args.config).parent / config["input"])
    overrides = {"input": args.input, "out": args.out, "seed": args.seed, "k_boot": args.k_boot,
                 "k_draws": args.k_draws, "alpha": args.alpha}
    for key, val in overrides.items():
        if val is not None:
            config[key] = val
    grid = _grid(args, config)
    config["lambdas"] = list(grid.lambdas)
    config.setdefault("seed", 0)
    config.setdefault("k_draws", DEFAULT_K)
    config.setdefault("k_boot", 0)
    config.setdefault("alpha", 0.05)
    config.setdefault("out", "out")
    config.setdefault("columns", {})
    config.setdefault("model", {})
    if "input" not in config:
        raise ValueError("no input CSV given (--input or config 'input')")
    return config


def cmd_estimate(args) -> int:
    config = _effective_config(args)
    grid = WtpGrid(tuple(config["lambdas"]))
    spec = ModelSpec(**config["model"])
    tau = config.get("tau")
    dataset = read_dataset_csv(config["input"], config["columns"], None if tau is None else float(tau))
    missing = sorted(spec.referenced_columns() - set(dataset.covariate_names))
    if missing:
        raise ValidationError([(None, f"UNKNOWN_MODEL_COLUMN:{m}") for m in missing], stage="config")
    dataset = validate_dataset(dataset)

    out = Path(config["out"])
    out.mkdir(parents=True, exist_ok=True)
    seed = int(config["seed"])
    k_boot, k_draws = int(config["k_boot"]), int(config["k_draws"])
    summary = {
        "version": __version__,
        "config_hash": config_hash({k: v for k, v in config.items() if k != "out"}),
        "seed": seed,
        "n": dataset.n,
        "arm_sizes": list(dataset.arm_sizes()),
        "k_draws": k_draws,
        "k_boot": k_boot,
        "alpha": config["alpha"],
        "model": {k: list(v) if isinstance(v, tuple) else v for k, v in vars(spec).items()},
    }
    if k_boot > 0:
        boot = bootstrap_curves(dataset, spec, grid, k_boot, k_draws, float(config["alpha"]), seed=seed,
                                threads=args.threads)
        ced, nmb = boot.nbs.points(), boot.nmb.points()
        cea = cea_curve(boot.nmb).points()
        summary["diagnostics"] = boot.diagnostics
        summary["bootstrap"] = {"n_ok": int(boot.nbs.replicates.shape[0]), "n_failed": boot.n_failed,
                                "failures": [list(f) for f in boot.nbs.failures]}
    else:
        est = estimate_curves(dataset, spec, grid, k_draws, child_rng(seed, 0))
        ced, nmb = est.ced_points(), est.nmb_points()
        cea = [type(p)(p.lam, None) for p in ced]
        summary["diagnostics"] = est.diagnostics
        summary["bootstrap"] = {"n_ok": 0, "n_failed": 0, "failures": []}
    if spec.method == "unadjusted":
        n0, n1 = dataset.arm_sizes()
        summary["null_test"] = [
            {"lambda": p.lam, "z": t.z, "p_value": t.p_value}
            for p in ced for t in [asymptotic_null_test(p.estimate, n0, n1)]
        ]
    write_curve_csv(ced, out / "ced.csv")
    write_curve_csv(nmb, out / "nmb.csv")
    write_curve_csv(cea, out / "cea.csv")
    (out / "summary.json").write_text(canonical_json(summary), encoding="utf-8")
    log.info("wrote %s", out)
    return EXIT_OK


def _scenario(args) -> ScenarioConfig:
    return ScenarioConfig.scenario(args.scenario, args.censoring, args.n, seed=args.seed)


def cmd_simulate(args) -> int:
    config = _scenario(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.emit_dataset:
        data = generate_scenario_dataset(config, child_rng(args.seed, 0))
        write_dataset_csv(data, out / "dataset.csv")
        spec = replication_model_spec()
        est_config = {
            "input": "dataset.csv",
            "columns": {"covariates": list(data.covariate_names)},
            "lambdas": list(_grid(args, default=(2.0, 12.0)).lambdas),
            "model": {k: list(v) if isinstance(v, tuple) else v for k, v in vars(spec).items()},
            "k_draws": args.k_draws,
            "k_boot": args.k_boot,
            "seed": args.seed,
        }
        (out / "config.json").write_text(canonical_json(est_config), encoding="utf-8")
        return EXIT_OK
    grid = _grid(args, default=(2.0, 12.0))
    report = run_replication_study([config], grid.lambdas, args.replicates, args.k_boot, args.k_draws,
                                   seed=args.seed, threads=args.threads, m_oracle=args.m_oracle)
    (out / "report.csv").write_text(report.to_csv(), encoding="utf-8")
    return EXIT_OK


def cmd_oracle(args) -> int:
    config = _scenario(args)
    grid = _grid(args, default=(2.0, 12.0))
    theta = oracle_true_theta(config, grid.asarray(), args.m_oracle, np.random.default_rng(args.seed))
    for lam, t in zip(grid, theta):
        print(f"{lam:g}\t{t:.6f}")
    return EXIT_OK


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=int, default=1, help="worker processes (results do not depend on it)")
    p.add_argument("--lambda-min", type=float, default=None)
    p.add_argument("--lambda-max", type=float, default=None)
    p.add_argument("--lambda-step", type=float, default=None)
    p.add_argument("--lambda", dest="lambdas", type=float, action="append", default=None,
                   help="explicit WTP value (repeatable); overrides the range flags")
    p.add_argument("--k-boot", type=int, default=None)
    p.add_argument("--k-draws", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cedcurve", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    est = sub.add_parser("estimate", help="CED, NMB and CEA curves for a dataset CSV")
    est.add_argument("--config", default=None, help="JSON analysis config; flags override its fields")
    est.add_argument("--input", default=None)
    est.add_argument("--alpha", type=float, default=None)
    _common(est)
    est.set_defaults(func=cmd_estimate)

    for name, func, hlp in (("simulate", cmd_simulate, "replication study for one scenario cell"),
                            ("oracle", cmd_oracle, "true NBS for a scenario")):
        p = sub.add_parser(name, help=hlp)
        p.add_argument("--scenario", type=int, choices=(1, 2), default=2)
        p.add_argument("--censoring", choices=("low", "high"), default="low")
        p.add_argument("--n", type=int, default=500)
        p.add_argument("--m-oracle", type=int, default=1_000_000)
        _common(p)
        if name == "simulate":
            p.add_argument("--replicates", type=int, default=200)
            p.add_argument("--emit-dataset", action="store_true",
                           help="write one generated dataset.csv and a matching config.json instead")
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command in ("simulate", "oracle"):
        args.seed = 0 if args.seed is None else args.seed
        args.out = args.out or "out"
        args.k_boot = 300 if args.k_boot is None else args.k_boot
        args.k_draws = 5000 if args.k_draws is None else args.k_draws
    try:
        return args.func(args)
    except ValidationError as err:
        print(f"error: {err}", file=sys.stderr)
        for row, rule in err.report:
            print(f"  row {row if row is not None else '-'}: {rule}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, KeyError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    except CedError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
