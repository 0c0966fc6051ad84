"""Fisher information and Cramer-Rao bounds for the RSS model.

For n measurements (each of the T rounds contributes its sensor's term),

    F = (100 alpha^2 / sigma^2) * sum_i (p - p_i)(p - p_i)^T / (d_i^4 ln^2 10),

and CRLB = tr(F^{-1}), RCRLB = sqrt(CRLB). The normalized matrix
M_n = (1/n) sum grad f_i grad f_i^T satisfies F = (100 alpha^2/sigma^2) n M_n
and serves as the finite-sample surrogate of the asymptotic covariance.

The bound is always evaluated at the true source as a benchmarking oracle,
never at estimates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import List, Sequence, Tuple

import numpy as np

from .errors import (
    DegenerateGeometryError,
    InfiniteInformationError,
    InvalidInputError,
    SingularPointError,
)
from .model import LN10, Scenario

_SWEEP_PARAMS = ("rounds", "sigma")


@dataclass(frozen=True)
class FisherSummary:
    F: np.ndarray
    crlb: float
    rcrlb: float
    M_n: np.ndarray
    eval_point: np.ndarray

    def to_dict(self) -> dict:
        return {
            "F": self.F.tolist(),
            "crlb": self.crlb,
            "rcrlb": self.rcrlb,
            "M_n": self.M_n.tolist(),
            "eval_point": self.eval_point.tolist(),
        }


def _inv_small(mat: np.ndarray) -> np.ndarray:
    """Closed-form inverse for the 2x2 / 3x3 information matrix."""
    m = mat.shape[0]
    det = np.linalg.det(mat)
    if not np.isfinite(det) or abs(det) < np.finfo(float).tiny:
        raise DegenerateGeometryError("Fisher information matrix is singular")
    if m == 2:
        a, b = mat[0, 0], mat[0, 1]
        c, d = mat[1, 0], mat[1, 1]
        return np.array([[d, -b], [-c, a]]) / det
    cof = np.empty((3, 3))
    for i in range(3):
        for j in range(3):
            minor = np.delete(np.delete(mat, i, axis=0), j, axis=1)
            cof[i, j] = (-1) ** (i + j) * (
                minor[0, 0] * minor[1, 1] - minor[0, 1] * minor[1, 0]
            )
    return cof.T / det


def fisher_information(scenario: Scenario, eval_point=None) -> FisherSummary:
    """Fisher information, CRLB/RCRLB, and M_n at ``eval_point``.

    Defaults to evaluating at the true source. Each of the
    scenario.rounds observation rounds contributes its sensor term, so F
    scales linearly with the total measurement count n.
    """
    if scenario.sigma_db <= 0:
        raise InfiniteInformationError(
            "Fisher information is unbounded for noise-free measurements"
        )
    p = scenario.source if eval_point is None else np.asarray(eval_point, dtype=float)
    if p.shape != (scenario.dimension,):
        raise InvalidInputError("eval_point must be an m-vector")
    diff = p - scenario.sensors
    d2 = np.sum(diff**2, axis=1)
    if np.any(np.sqrt(d2) < 1e-12):
        raise SingularPointError("eval_point coincides with a sensor")
    terms = diff[:, :, None] * diff[:, None, :] / (d2**2 * LN10**2)[:, None, None]
    n = scenario.n_measurements
    m_n = terms.mean(axis=0)  # rounds repeat identical terms
    scale = 100.0 * scenario.alpha**2 / scenario.sigma_db**2
    fisher = scale * n * m_n
    crlb = float(np.trace(_inv_small(fisher)))
    if crlb <= 0:
        raise DegenerateGeometryError("CRLB is not positive; degenerate geometry")
    return FisherSummary(
        F=fisher,
        crlb=crlb,
        rcrlb=float(np.sqrt(crlb)),
        M_n=m_n,
        eval_point=p,
    )


def rcrlb_curve(
    scenario: Scenario, sweep: Sequence[float], param: str = "rounds"
) -> List[Tuple[float, float]]:
    """RCRLB as a function of rounds T or noise sigma.

    Exact scalings: rcrlb ~ 1/sqrt(T) for round sweeps and ~ sigma for noise
    sweeps.
    """
    if param not in _SWEEP_PARAMS:
        raise InvalidInputError(f"param must be one of {_SWEEP_PARAMS}")
    curve = []
    for value in sweep:
        if param == "rounds":
            variant = replace(scenario, rounds=int(value))
        else:
            variant = replace(scenario, sigma_db=float(value))
        curve.append((float(value), fisher_information(variant).rcrlb))
    return curve
