"""Command-line interface.

Subcommands:
    estimate        run the full two-step pipeline on a measurement file
    check-geometry  localizability report for a sensor layout
    crlb            RCRLB curve over a rounds or sigma sweep
    experiment      Monte Carlo bias/RMSE benchmark from a config file
    time-scaling    mean two-step wall time vs measurement count

Every subcommand is a thin shell over the library; numeric output always
equals the corresponding library call. Exit codes: 0 success, 1 runtime or
numeric failure, 2 invalid input. Errors are emitted as JSON on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from . import bench
from .errors import ConfigError, InvalidInputError, RssLocError
from .estimators import two_step
from .geometry import localizability
from .inference import rcrlb_curve
from .model import MeasurementSet, NoiseModel, Scenario, equivalent_measurement


def _load_json(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path} is not valid JSON: {exc}") from exc


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _measurements_from_file(payload: dict):
    """Parse {sensors, raw_db|y, alpha?, p0?, sigma_db?} into a MeasurementSet.

    raw_db takes precedence over y and is converted through the equivalent
    measurement map; presence of sigma_db selects the known-variance path.
    """
    if not isinstance(payload, dict) or "sensors" not in payload:
        raise ConfigError("measurement file must be an object with a 'sensors' key")
    alpha = float(payload.get("alpha", 2.0))
    p0_const = float(payload.get("p0", 1.0))
    try:
        if "raw_db" in payload:
            raw_db = np.asarray(payload["raw_db"], dtype=float)
            y = equivalent_measurement(raw_db, p0_const, alpha)
            ms = MeasurementSet(sensor_coords=payload["sensors"], y=y, raw_db=raw_db)
        elif "y" in payload:
            ms = MeasurementSet(sensor_coords=payload["sensors"], y=payload["y"])
        else:
            raise ConfigError("measurement file needs 'raw_db' or 'y'")
    except (TypeError, ValueError, InvalidInputError) as exc:
        raise ConfigError(f"malformed measurement file: {exc}") from exc
    noise = None
    if "sigma_db" in payload and payload["sigma_db"] is not None:
        noise = NoiseModel(sigma_db=float(payload["sigma_db"]), alpha=alpha)
    return ms, noise


def _cmd_estimate(args) -> int:
    ms, noise = _measurements_from_file(_load_json(args.input))
    estimate = two_step(ms, noise)
    _emit(json.dumps(estimate.to_dict(), indent=2), args.out)
    return 0


def _cmd_check_geometry(args) -> int:
    payload = _load_json(args.input)
    if not isinstance(payload, dict) or "sensors" not in payload:
        raise ConfigError("geometry file must be an object with a 'sensors' key")
    try:
        report = localizability(payload["sensors"])
    except (TypeError, ValueError, InvalidInputError) as exc:
        raise ConfigError(f"malformed sensors: {exc}") from exc
    _emit(report.to_json(), args.out)
    return 0


def _cmd_crlb(args) -> int:
    if args.config:
        scenario = Scenario.from_dict(_load_json(args.config))
    else:
        scenario = bench.get_scenario(args.scenario, sigma_db=args.sigma)
        if isinstance(scenario, bench.RandomScenarioFamily):
            raise ConfigError("crlb needs a fixed scenario, not the random family")
    values = [float(v) for v in args.sweep_values.split(",")]
    curve = rcrlb_curve(scenario, values, param=args.sweep_param)
    if args.format == "json":
        text = json.dumps(
            [{args.sweep_param: x, "rcrlb_m": r} for x, r in curve], indent=2
        )
    else:
        lines = [f"{args.sweep_param},rcrlb_m"]
        lines += [f"{x:.17g},{r:.17g}" for x, r in curve]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def _cmd_experiment(args) -> int:
    cfg_dict = _load_json(args.config)
    if args.estimators:
        cfg_dict["estimators"] = args.estimators.split(",")
    if args.fixed_geometry:
        cfg_dict["fixed_geometry"] = True
    cfg = bench.ExperimentConfig.from_dict(cfg_dict, seed=args.seed)
    report = bench.run_experiment(cfg, workers=args.workers)
    text = report.to_csv() if args.format == "csv" else report.to_json()
    _emit(text, args.out)
    return 0


def _cmd_time_scaling(args) -> int:
    results = bench.time_scaling(args.n, runs=args.runs, master_seed=args.seed)
    if args.format == "json":
        text = json.dumps(
            [{"n": n, "mean_time_s": t} for n, t in results], indent=2
        )
    else:
        lines = ["n,mean_time_s"]
        lines += [f"{n},{t:.17g}" for n, t in results]
        text = "\n".join(lines) + "\n"
    _emit(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rssloc",
        description="RSS source localization: two-step estimation and benchmarks",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_est = sub.add_parser("estimate", help="localize a source from a measurement file")
    p_est.add_argument("--input", required=True, help="measurement JSON file")
    p_est.add_argument("--out", help="output path (default: stdout)")
    p_est.set_defaults(func=_cmd_estimate)

    p_geo = sub.add_parser("check-geometry", help="localizability report for sensors")
    p_geo.add_argument("--input", required=True, help="JSON file with a 'sensors' array")
    p_geo.add_argument("--out", help="output path (default: stdout)")
    p_geo.set_defaults(func=_cmd_check_geometry)

    p_crlb = sub.add_parser("crlb", help="RCRLB curve for a scenario")
    p_crlb.add_argument("--scenario", default="2d-fixed", help="registry scenario id")
    p_crlb.add_argument("--config", help="inline scenario JSON file (overrides --scenario)")
    p_crlb.add_argument("--sigma", type=float, default=2.0, help="noise std in dB")
    p_crlb.add_argument("--sweep-param", choices=("rounds", "sigma"), default="rounds")
    p_crlb.add_argument("--sweep-values", required=True, help="comma-separated values")
    p_crlb.add_argument("--format", choices=("csv", "json"), default="csv")
    p_crlb.add_argument("--out", help="output path (default: stdout)")
    p_crlb.set_defaults(func=_cmd_crlb)

    p_exp = sub.add_parser("experiment", help="run a Monte Carlo benchmark")
    p_exp.add_argument("--config", required=True, help="experiment config JSON")
    p_exp.add_argument("--seed", type=int, required=True, help="master seed")
    p_exp.add_argument("--out", help="output path (default: stdout)")
    p_exp.add_argument("--format", choices=("csv", "json"), default="csv")
    p_exp.add_argument("--estimators", help="comma-separated estimator ids")
    p_exp.add_argument("--fixed-geometry", action="store_true",
                       help="pin random-deployment geometry across trials")
    p_exp.add_argument("--workers", type=int, default=1, help="parallel trial workers")
    p_exp.set_defaults(func=_cmd_experiment)

    p_time = sub.add_parser("time-scaling", help="two-step wall time vs n")
    p_time.add_argument("--n", type=int, nargs="+", required=True)
    p_time.add_argument("--runs", type=int, default=100)
    p_time.add_argument("--seed", type=int, default=0)
    p_time.add_argument("--format", choices=("csv", "json"), default="csv")
    p_time.add_argument("--out", help="output path (default: stdout)")
    p_time.set_defaults(func=_cmd_time_scaling)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidInputError) as exc:
        json.dump({"error": exc.kind, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 2
    except RssLocError as exc:
        json.dump({"error": exc.kind, "message": str(exc)}, sys.stderr)
        sys.stderr.write("\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
