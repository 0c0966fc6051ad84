"""Monte Carlo benchmark harness.

Reproduces the bias/RMSE/timing experiment protocol: a registry of the three
scenario families (2-D fixed ring, 2-D random square, 3-D fixed), sweeps over
rounds T, noise sigma, or random-deployment size n, and deterministic
parallel trial execution.

Per-trial randomness is a counter-based substream keyed by
(master_seed, sweep_index, trial_index), so results are bit-identical
regardless of worker count or scheduling order. Wall-clock timing is the one
nondeterministic output; configs can disable it (``measure_time=False``) when
byte-identical reports are required.
"""

from __future__ import annotations

import io
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ConfigError, InvalidInputError, RssLocError
from .estimators import (
    ls_known_variance,
    ls_unknown_variance,
    ml_reference,
    two_step,
)
from .inference import fisher_information
from .model import MeasurementSet, NoiseModel, Scenario, generate_measurements, trial_rng

SWEEP_PARAMS = ("rounds", "sigma", "n_random")

# Estimator ids accepted in configs and on the CLI.
ESTIMATOR_IDS = ("ls", "ls+gn", "ls-u", "ls-u+gn", "ml")


def _run_estimator(est_id: str, ms: MeasurementSet, noise: NoiseModel):
    if est_id == "ls":
        return ls_known_variance(ms, noise.bias_b)
    if est_id == "ls+gn":
        return two_step(ms, noise)
    if est_id == "ls-u":
        return ls_unknown_variance(ms)
    if est_id == "ls-u+gn":
        return two_step(ms, None)
    if est_id == "ml":
        init = ls_known_variance(ms, noise.bias_b)
        return ml_reference(ms, init.p_hat)
    raise InvalidInputError(f"unknown estimator id {est_id!r}")


@dataclass(frozen=True)
class RandomScenarioFamily:
    """Uniformly deployed sensors in a box; geometry is sampled per use."""

    source: Tuple[float, ...] = (120.0, 20.0)
    low: float = 0.0
    high: float = 100.0
    sigma_db: float = 2.0
    alpha: float = 2.0

    @property
    def dimension(self) -> int:
        return len(self.source)

    def sample(self, n: int, rng: np.random.Generator) -> Scenario:
        sensors = rng.uniform(self.low, self.high, size=(n, self.dimension))
        return Scenario(
            sensors=sensors,
            source=np.asarray(self.source, dtype=float),
            sigma_db=self.sigma_db,
            alpha=self.alpha,
            rounds=1,
        )


def scenario_registry(sigma_db: float = 2.0, alpha: float = 2.0) -> dict:
    """The three benchmark scenario families, keyed by id.

    Fixed families are returned as Scenario objects with rounds=1; the
    random family is a RandomScenarioFamily sampled per (n, rng).
    """
    sensors_2d = [
        [0, 20], [0, 50], [50, 50], [50, 0], [50, -50],
        [0, -50], [0, -20], [-50, -50], [-50, 0], [-50, 50],
    ]
    sensors_3d = [
        [0, 20, 50], [0, 50, 0], [50, 50, -50], [50, 0, 0], [50, -50, 50],
        [0, -50, 0], [0, -20, -50], [-50, -50, 0], [-50, 0, 50], [-50, 50, -50],
    ]
    return {
        "2d-fixed": Scenario(
            sensors=sensors_2d, source=[70.0, 30.0],
            sigma_db=sigma_db, alpha=alpha,
        ),
        "3d-fixed": Scenario(
            sensors=sensors_3d, source=[70.0, 30.0, 10.0],
            sigma_db=sigma_db, alpha=alpha,
        ),
        "2d-random": RandomScenarioFamily(sigma_db=sigma_db, alpha=alpha),
    }


def get_scenario(scenario_id: str, sigma_db: float = 2.0, alpha: float = 2.0):
    registry = scenario_registry(sigma_db=sigma_db, alpha=alpha)
    if scenario_id not in registry:
        raise ConfigError(
            f"unknown scenario id {scenario_id!r}; known: {sorted(registry)}"
        )
    return registry[scenario_id]


@dataclass(frozen=True)
class ExperimentConfig:
    """One benchmark run: scenario, estimators, sweep, trial count, seed."""

    scenario: Union[Scenario, RandomScenarioFamily]
    estimators: Tuple[str, ...]
    sweep_param: str
    sweep_values: Tuple[float, ...]
    trials: int
    master_seed: int
    fixed_geometry: bool = False
    measure_time: bool = True

    def __post_init__(self):
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        if not self.estimators:
            raise ConfigError("estimator selection is empty")
        for est in self.estimators:
            if est not in ESTIMATOR_IDS:
                raise ConfigError(
                    f"unknown estimator {est!r}; known: {list(ESTIMATOR_IDS)}"
                )
        if self.sweep_param not in SWEEP_PARAMS:
            raise ConfigError(f"sweep_param must be one of {SWEEP_PARAMS}")
        if not self.sweep_values:
            raise ConfigError("sweep is empty")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        random_family = isinstance(self.scenario, RandomScenarioFamily)
        if (self.sweep_param == "n_random") != random_family:
            raise ConfigError(
                "n_random sweeps require the random scenario family and vice versa"
            )

    @classmethod
    def from_dict(cls, d: dict, seed: Optional[int] = None) -> "ExperimentConfig":
        try:
            sweep = d["sweep"]
            if len(sweep) != 1:
                raise ConfigError("sweep must contain exactly one parameter")
            (param, values), = sweep.items()
            sigma = float(d.get("sigma_db", 2.0))
            alpha = float(d.get("alpha", 2.0))
            scenario_spec = d["scenario"]
            if isinstance(scenario_spec, str):
                scenario = get_scenario(scenario_spec, sigma_db=sigma, alpha=alpha)
            else:
                scenario = Scenario.from_dict(scenario_spec)
            master_seed = seed if seed is not None else d.get("master_seed")
            if master_seed is None:
                raise ConfigError("a master seed is required")
            return cls(
                scenario=scenario,
                estimators=tuple(d.get("estimators", ("ls", "ls+gn"))),
                sweep_param=param,
                sweep_values=tuple(values),
                trials=int(d.get("trials", 1000)),
                master_seed=int(master_seed),
                fixed_geometry=bool(d.get("fixed_geometry", False)),
                measure_time=bool(d.get("measure_time", True)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad experiment config: {exc}") from exc


@dataclass(frozen=True)
class ReportRow:
    estimator: str
    sweep_param: str
    sweep_value: float
    n: int
    trials_ok: int
    trials_failed: int
    bias_m: float
    rmse_m: float
    rcrlb_m: float
    mean_time_s: Optional[float]
    master_seed: int


CSV_COLUMNS = (
    "estimator", "sweep_param", "sweep_value", "n", "trials_ok",
    "trials_failed", "bias_m", "rmse_m", "rcrlb_m", "mean_time_s",
    "master_seed",
)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


@dataclass(frozen=True)
class TrialReport:
    """Aggregated per-(estimator, sweep point) Monte Carlo statistics."""

    rows: Tuple[ReportRow, ...]

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write(",".join(CSV_COLUMNS) + "\n")
        for row in self.rows:
            out.write(
                ",".join(_fmt(getattr(row, col)) for col in CSV_COLUMNS) + "\n"
            )
        return out.getvalue()

    def to_json(self, indent: int = 2) -> str:
        payload = [
            {col: getattr(row, col) for col in CSV_COLUMNS} for row in self.rows
        ]
        return json.dumps(payload, indent=indent)

    def write(self, path: str, fmt: str = "csv") -> None:
        text = self.to_csv() if fmt == "csv" else self.to_json()
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _trial_scenario(cfg: ExperimentConfig, sweep_index: int, value, trial: int) -> Scenario:
    if cfg.sweep_param == "rounds":
        return cfg.scenario.with_rounds(int(value))
    if cfg.sweep_param == "sigma":
        return cfg.scenario.with_sigma(float(value))
    # Random deployment: fresh geometry each trial unless pinned.
    geom_trial = 0 if cfg.fixed_geometry else trial
    rng = trial_rng(cfg.master_seed, sweep_index, geom_trial, 0)
    return cfg.scenario.sample(int(value), rng)


def _run_trial(cfg: ExperimentConfig, sweep_index: int, value, trial: int) -> dict:
    scenario = _trial_scenario(cfg, sweep_index, value, trial)
    noise_rng = trial_rng(cfg.master_seed, sweep_index, trial, 1)
    ms = generate_measurements(scenario, noise_rng)
    noise = NoiseModel(sigma_db=scenario.sigma_db, alpha=scenario.alpha)
    result = {"source": scenario.source, "estimates": {}, "rcrlb": None}
    if scenario.sigma_db > 0:
        result["rcrlb"] = fisher_information(scenario).rcrlb
    for est_id in cfg.estimators:
        t0 = time.perf_counter()
        try:
            estimate = _run_estimator(est_id, ms, noise)
        except RssLocError:
            result["estimates"][est_id] = None
            continue
        elapsed = time.perf_counter() - t0
        result["estimates"][est_id] = (estimate.p_hat, elapsed)
    return result


def _median_of_means(times: List[float], batches: int = 10) -> float:
    # Median over batch means resists scheduler noise outliers.
    chunks = np.array_split(np.asarray(times), min(batches, len(times)))
    value = float(np.median([chunk.mean() for chunk in chunks]))
    if value <= 0.0:
        value = time.get_clock_info("perf_counter").resolution
    return value


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> TrialReport:
    """Run all trials at every sweep point and aggregate bias/RMSE/RCRLB.

    Bias is the sum of componentwise absolute mean errors; RMSE the root mean
    squared Euclidean error. Trials where an estimator raises are excluded
    from that estimator's statistics and counted as failed.
    """
    rows: List[ReportRow] = []
    for sweep_index, value in enumerate(cfg.sweep_values):
        jobs = [
            (cfg, sweep_index, value, trial) for trial in range(cfg.trials)
        ]
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(lambda args: _run_trial(*args), jobs))
        else:
            results = [_run_trial(*args) for args in jobs]

        source = results[0]["source"]
        m = source.shape[0]
        rcrlbs = [r["rcrlb"] for r in results if r["rcrlb"] is not None]
        rcrlb = float(np.mean(rcrlbs)) if rcrlbs else 0.0
        if cfg.sweep_param == "rounds":
            n_total = cfg.scenario.n_sensors * int(value)
        elif cfg.sweep_param == "sigma":
            n_total = cfg.scenario.n_measurements
        else:
            n_total = int(value)

        for est_id in cfg.estimators:
            hits = [r["estimates"][est_id] for r in results]
            ok = [h for h in hits if h is not None]
            failed = len(hits) - len(ok)
            if ok:
                p_hats = np.array([h[0] for h in ok])
                errors = p_hats - source
                bias = float(np.sum(np.abs(errors.mean(axis=0))))
                rmse = float(np.sqrt(np.mean(np.sum(errors**2, axis=1))))
                mean_time = (
                    _median_of_means([h[1] for h in ok])
                    if cfg.measure_time
                    else None
                )
            else:
                bias = math.nan
                rmse = math.nan
                mean_time = None
            rows.append(
                ReportRow(
                    estimator=est_id,
                    sweep_param=cfg.sweep_param,
                    sweep_value=float(value),
                    n=n_total,
                    trials_ok=len(ok),
                    trials_failed=failed,
                    bias_m=bias,
                    rmse_m=rmse,
                    rcrlb_m=rcrlb,
                    mean_time_s=mean_time,
                    master_seed=cfg.master_seed,
                )
            )
    return TrialReport(rows=tuple(rows))


def time_scaling(
    n_values: Sequence[int],
    runs: int = 100,
    master_seed: int = 0,
    sigma_db: float = 2.0,
    alpha: float = 2.0,
) -> List[Tuple[int, float]]:
    """Mean two-step wall time at each measurement count n.

    Each run times a single two-step (known-variance) estimate on a fresh
    random-deployment measurement set; measurement generation is excluded
    from the timed section. Returns (n, mean_seconds) pairs; a clock
    resolution floor guarantees nonzero entries.
    """
    if runs < 1:
        raise InvalidInputError("runs must be >= 1")
    family = RandomScenarioFamily(sigma_db=sigma_db, alpha=alpha)
    noise = NoiseModel(sigma_db=sigma_db, alpha=alpha)
    results = []
    for idx, n in enumerate(n_values):
        sets = []
        for run in range(runs):
            scenario = family.sample(int(n), trial_rng(master_seed, idx, run, 0))
            sets.append(generate_measurements(scenario, trial_rng(master_seed, idx, run, 1)))
        times = []
        for ms in sets:
            t0 = time.perf_counter()
            two_step(ms, noise)
            times.append(time.perf_counter() - t0)
        results.append((int(n), _median_of_means(times)))
    return results
