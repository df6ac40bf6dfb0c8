r"""Sum-rate curves and empirical DoF slopes.

Rates of neutralization schemes use the scalar Gaussian capacity
(1/2) log2(1 + g**2 p) per user after exact cancellation; the DoF of a curve
is the least-squares slope of sum rate against (1/2) log2(P).  Alignment
schemes report DoF from verified stream counts instead of SNR sweeps.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Sequence, Tuple

import numpy as np

from .alignment import AlignmentReport
from .neutralization import NeutralizationSolution

DEFAULT_WINDOW_DB = (40.0, 80.0)
DEFAULT_STEP_DB = 5.0


class DegenerateUserError(ValueError):
    """A degenerate active user has no usable direct link; drop it (silence
    that user) before computing rates."""


@dataclass(frozen=True)
class RatePoint:
    """Per-user rates and the transmit powers realizing them at one P."""

    per_user_rates: Dict[int, float]
    user_powers: Dict[int, float]
    relay_power: float

    @property
    def sum_rate(self) -> float:
        return sum(self.per_user_rates.values())


@dataclass(frozen=True)
class RateCurve:
    p_grid_db: Tuple[float, ...]
    sum_rate_bits: Tuple[float, ...]
    per_user_rates: np.ndarray  # (len(grid), K)
    scheme_id: str


@dataclass(frozen=True)
class DofEstimate:
    """Fitted slope of sum rate against (1/2) log2(P) over a dB window."""

    slope: float
    intercept: float
    max_residual: float
    grid_window: Tuple[float, float]

    def to_json_dict(self) -> dict:
        return {
            "slope": self.slope,
            "intercept": self.intercept,
            "max_residual": self.max_residual,
            "window_db": list(self.grid_window),
        }


@dataclass(frozen=True)
class AlignmentRateSummary:
    """Rate metadata of a verified alignment run.

    The relay radiates the sum of the per-user relay components, so capping
    every vector link at power P/K keeps each physical node within P; this
    scaling costs a constant, not slope, hence the DoF comes straight from
    the verified stream counts.
    """

    achieved_dof: Fraction
    power_per_node: float
    num_users: int
    extension_length: int
    verified_users: Tuple[int, ...]


def neutralized_sum_rate(sol: NeutralizationSolution, P: float) -> RatePoint:
    """Per-user rates of a neutralization solution at total power budget P.

    Every active user transmits with power p = P / max(1, sum_k c_k**2), so
    the relay power sum_k c_k**2 * p and each user power stay within P.
    Interference is exactly zero by construction, leaving the scalar rates
    (1/2) log2(1 + g_k**2 p).  Silent users get rate 0 at power 0.
    """
    if P < 0:
        raise ValueError(f"P must be nonnegative, got {P}")
    for user, deg in zip(sol.active_users, sol.degenerate):
        if deg:
            raise DegenerateUserError(
                f"user {user} is degenerate (zero effective gain); drop it "
                "from the active set before computing rates")
    c = [float(x) for x in sol.coefficients]
    g = [float(x) for x in sol.effective_gains]
    scale = max(1.0, sum(x * x for x in c))
    p = P / scale
    rates = {u: 0.0 for u in range(1, sol.total_users + 1)}
    powers = {u: 0.0 for u in range(1, sol.total_users + 1)}
    for user, gain in zip(sol.active_users, g):
        rates[user] = 0.5 * math.log2(1.0 + gain * gain * p)
        powers[user] = p
    relay_power = sum(x * x for x in c) * p
    return RatePoint(per_user_rates=rates, user_powers=powers,
                     relay_power=relay_power)


def neutralization_rate_curve(sol: NeutralizationSolution,
                              p_grid_db: Sequence[float]) -> RateCurve:
    p_grid_db = tuple(float(p) for p in p_grid_db)
    K = sol.total_users
    per_user = np.zeros((len(p_grid_db), K))
    sums = []
    for i, p_db in enumerate(p_grid_db):
        point = neutralized_sum_rate(sol, 10.0 ** (p_db / 10.0))
        for u in range(1, K + 1):
            per_user[i, u - 1] = point.per_user_rates[u]
        sums.append(point.sum_rate)
    scheme = f"neutralization-{len(sol.active_users)}of{K}"
    return RateCurve(p_grid_db=p_grid_db, sum_rate_bits=tuple(sums),
                     per_user_rates=per_user, scheme_id=scheme)


def default_power_grid_db(window: Tuple[float, float] = DEFAULT_WINDOW_DB,
                          step: float = DEFAULT_STEP_DB) -> Tuple[float, ...]:
    lo, hi = window
    n = int(round((hi - lo) / step)) + 1
    return tuple(lo + i * step for i in range(n))


def estimate_dof(curve: RateCurve,
                 window: Tuple[float, float] = DEFAULT_WINDOW_DB) -> DofEstimate:
    """Least-squares DoF slope of a rate curve over a dB window (>= 4 points)."""
    lo, hi = window
    mask = [(lo - 1e-9) <= p <= (hi + 1e-9) for p in curve.p_grid_db]
    if sum(mask) < 4:
        raise ValueError(
            f"window {window} selects {sum(mask)} grid points; need >= 4")
    x = np.array([0.5 * math.log2(10.0 ** (p / 10.0))
                  for p, m in zip(curve.p_grid_db, mask) if m])
    y = np.array([r for r, m in zip(curve.sum_rate_bits, mask) if m])
    slope, intercept = np.polyfit(x, y, 1)
    residual = float(np.abs(y - (slope * x + intercept)).max())
    return DofEstimate(slope=float(slope), intercept=float(intercept),
                       max_residual=residual, grid_window=(float(lo), float(hi)))


def miso_power_scaled_rate(report: AlignmentReport, P: float,
                           num_users: int = None) -> AlignmentRateSummary:
    """Rate metadata for a verified alignment report at power budget P.

    Users failing verification are excluded from the DoF count (the report
    already excludes them); a report with no verified user is rejected.
    """
    verified = tuple(u.user for u in report.per_user if u.passed)
    if not verified:
        raise ValueError("alignment report has no verified users; nothing to rate")
    if num_users is None:
        num_users = len(report.per_user)
    return AlignmentRateSummary(
        achieved_dof=report.achieved_dof,
        power_per_node=P / num_users,
        num_users=num_users,
        extension_length=report.mu,
        verified_users=verified)
