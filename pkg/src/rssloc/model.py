"""Measurement model for RSS source localization.

A source emitting with constant P0 is observed by n sensors; the received
power in dB follows a log-distance law with additive Gaussian noise. Working
in the "equivalent measurement" domain,

    y_i = log10(d_i) + omega_i,      omega_i ~ N(0, (sigma/(10*alpha))^2),

turns every downstream estimator into a function of (sensor coords, y) only.
This module owns the dB <-> equivalent conversion, synthetic measurement
generation, and the lognormal moments of 10**(2*omega) that drive the
closed-form least-squares estimators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np

from .errors import DegenerateGeometryError, InvalidInputError

LN10 = math.log(10.0)

# Scenarios whose source sits closer than this to a sensor are rejected:
# log10(d) blows up and the model is meaningless.
MIN_SOURCE_DISTANCE = 1e-9


def _as_points(points, name: str) -> np.ndarray:
    arr = np.asarray(points, dtype=float)
    if arr.ndim != 2:
        raise InvalidInputError(f"{name} must be a 2-D array of coordinates")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{name} contains non-finite coordinates")
    return arr


@dataclass(frozen=True)
class Scenario:
    """One localization problem: geometry plus signal parameters.

    Attributes:
        sensors: (n_sensors, m) sensor coordinates in meters, m in {2, 3}.
        source: (m,) true source coordinates in meters.
        sigma_db: noise standard deviation in dB, >= 0.
        alpha: path-loss exponent, > 0 (2 corresponds to free space).
        p0_const: positive transmit-power constant; the equivalent
            measurements are invariant to its value.
        rounds: number of i.i.d. observation rounds per sensor.
    """

    sensors: np.ndarray
    source: np.ndarray
    sigma_db: float
    alpha: float = 2.0
    p0_const: float = 1.0
    rounds: int = 1

    def __post_init__(self):
        sensors = _as_points(self.sensors, "sensors")
        source = np.asarray(self.source, dtype=float)
        if sensors.shape[0] == 0:
            raise InvalidInputError("sensors list is empty")
        m = sensors.shape[1]
        if m not in (2, 3):
            raise InvalidInputError(f"dimension must be 2 or 3, got {m}")
        if source.shape != (m,) or not np.all(np.isfinite(source)):
            raise InvalidInputError("source must be a finite m-vector")
        if not (self.alpha > 0):
            raise InvalidInputError("alpha must be positive")
        if not (self.p0_const > 0):
            raise InvalidInputError("p0_const must be positive")
        if not (self.sigma_db >= 0):
            raise InvalidInputError("sigma_db must be nonnegative")
        if self.rounds < 1:
            raise InvalidInputError("rounds must be a positive integer")
        d = np.linalg.norm(sensors - source, axis=1)
        if np.any(d < MIN_SOURCE_DISTANCE):
            raise DegenerateGeometryError(
                "a sensor coincides with the source (distance < "
                f"{MIN_SOURCE_DISTANCE})"
            )
        object.__setattr__(self, "sensors", sensors)
        object.__setattr__(self, "source", source)

    @property
    def dimension(self) -> int:
        return self.sensors.shape[1]

    @property
    def n_sensors(self) -> int:
        return self.sensors.shape[0]

    @property
    def n_measurements(self) -> int:
        """Total number of measurements, sensors x rounds."""
        return self.n_sensors * self.rounds

    def distances(self) -> np.ndarray:
        """Sensor-to-source distances, shape (n_sensors,)."""
        return np.linalg.norm(self.sensors - self.source, axis=1)

    def with_rounds(self, rounds: int) -> "Scenario":
        return replace(self, rounds=rounds)

    def with_sigma(self, sigma_db: float) -> "Scenario":
        return replace(self, sigma_db=sigma_db)

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "sensors": self.sensors.tolist(),
            "source": self.source.tolist(),
            "alpha": self.alpha,
            "p0": self.p0_const,
            "sigma_db": self.sigma_db,
            "rounds": self.rounds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scenario":
        try:
            scenario = cls(
                sensors=d["sensors"],
                source=d["source"],
                sigma_db=float(d["sigma_db"]),
                alpha=float(d.get("alpha", 2.0)),
                p0_const=float(d.get("p0", 1.0)),
                rounds=int(d.get("rounds", 1)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidInputError(f"bad scenario dict: {exc}") from exc
        if "dimension" in d and int(d["dimension"]) != scenario.dimension:
            raise InvalidInputError("declared dimension does not match sensors")
        return scenario


@dataclass(frozen=True)
class MeasurementSet:
    """Equivalent measurements paired with the sensors that produced them.

    ``y`` holds the equivalent measurements (log10 meters); ``raw_db`` holds
    the underlying dB readings when the set originated from raw RSS data.
    """

    sensor_coords: np.ndarray
    y: np.ndarray
    raw_db: Optional[np.ndarray] = None

    def __post_init__(self):
        coords = _as_points(self.sensor_coords, "sensor_coords")
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 1 or y.shape[0] != coords.shape[0]:
            raise InvalidInputError("sensor_coords and y must have equal length")
        if not np.all(np.isfinite(y)):
            raise InvalidInputError("y contains non-finite values")
        if y.shape[0] < coords.shape[1] + 1:
            raise InvalidInputError(
                f"need at least m+1 = {coords.shape[1] + 1} measurements"
            )
        raw = self.raw_db
        if raw is not None:
            raw = np.asarray(raw, dtype=float)
            if raw.shape != y.shape:
                raise InvalidInputError("raw_db must match y in length")
            if not np.all(np.isfinite(raw)):
                raise InvalidInputError("raw_db contains non-finite values")
        object.__setattr__(self, "sensor_coords", coords)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "raw_db", raw)

    @property
    def n(self) -> int:
        return self.y.shape[0]

    @property
    def dimension(self) -> int:
        return self.sensor_coords.shape[1]


def equivalent_measurement(raw_db, p0_const: float, alpha: float):
    """Convert a raw dB reading 10*log10(P) into its equivalent measurement.

    Returns y = -(raw_db/10 - log10(p0_const)) / alpha, which equals
    log10(distance) plus noise under the measurement model. Accepts scalars
    or arrays.
    """
    if not (p0_const > 0):
        raise InvalidInputError("p0_const must be positive")
    if not (alpha > 0):
        raise InvalidInputError("alpha must be positive")
    raw = np.asarray(raw_db, dtype=float)
    if not np.all(np.isfinite(raw)):
        raise InvalidInputError("raw_db contains non-finite values")
    y = -(raw / 10.0 - math.log10(p0_const)) / alpha
    return float(y) if np.isscalar(raw_db) else y


def lognormal_bias(sigma_db: float, alpha: float) -> float:
    """Mean b of 10**(2*omega) for omega ~ N(0, (sigma/(10*alpha))^2).

    b = exp((ln 10)^2 * sigma^2 / (50 * alpha^2)) >= 1, with equality iff
    sigma == 0. The matching variance is b^2 * (b^2 - 1); see
    :func:`lognormal_variance`.
    """
    if not (sigma_db >= 0):
        raise InvalidInputError("sigma_db must be nonnegative")
    if not (alpha > 0):
        raise InvalidInputError("alpha must be positive")
    return math.exp(LN10**2 * sigma_db**2 / (50.0 * alpha**2))


def lognormal_variance(sigma_db: float, alpha: float) -> float:
    """Variance of 10**(2*omega), equal to b^2 * (b^2 - 1)."""
    b = lognormal_bias(sigma_db, alpha)
    return b * b * (b * b - 1.0)


@dataclass(frozen=True)
class NoiseModel:
    """Noise parameters and the derived lognormal moments.

    Passing a NoiseModel to an estimator selects the known-variance path.
    """

    sigma_db: float
    alpha: float = 2.0
    omega_std: float = field(init=False)
    bias_b: float = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "omega_std", self.sigma_db / (10.0 * self.alpha)
        )
        object.__setattr__(
            self, "bias_b", lognormal_bias(self.sigma_db, self.alpha)
        )

    @property
    def eta_variance(self) -> float:
        """Variance b^2*(b^2-1) of the centered lognormal factor."""
        b = self.bias_b
        return b * b * (b * b - 1.0)


def trial_rng(master_seed: int, *path: int) -> np.random.Generator:
    """Counter-based substream generator.

    (master_seed, path) fully determines the stream, so parallel trials can
    draw independently in any order and still reproduce bit-identically.
    """
    return np.random.default_rng(
        np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(path))
    )


def generate_measurements(scenario: Scenario, seed) -> MeasurementSet:
    """Draw one synthetic MeasurementSet from a scenario.

    Noise is sampled in dB space (eps ~ N(0, sigma^2)) and converted through
    the raw-dB pathway, exercising the same conversion applied to field data.
    Rounds are laid out round-major: all sensors for round 0, then round 1,
    and so on. ``seed`` may be an int or a Generator.

    Identical (scenario, seed) always yields a bit-identical result.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    d = scenario.distances()
    if np.any(d <= 0):
        raise DegenerateGeometryError("zero sensor-source distance")
    coords = np.tile(scenario.sensors, (scenario.rounds, 1))
    d_all = np.tile(d, scenario.rounds)
    clean_db = 10.0 * math.log10(scenario.p0_const) - 10.0 * scenario.alpha * np.log10(d_all)
    eps = rng.normal(0.0, scenario.sigma_db, size=d_all.shape[0])
    raw_db = clean_db + eps
    y = equivalent_measurement(raw_db, scenario.p0_const, scenario.alpha)
    return MeasurementSet(sensor_coords=coords, y=y, raw_db=raw_db)
