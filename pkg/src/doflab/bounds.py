r"""Closed-form DoF upper bounds and the genie-aided 2-user sum-rate bound.

The DoF table is exact rational arithmetic.  The 2-user sum-rate bound
evaluates, for jointly Gaussian inputs (X1, X2, Xr) with the structured
covariance A (independent X1, X2; correlations rho1, rho2 with the relay),

    I(X1, X2, Xr; Y1) + I(X2, Xr; Y2 | Y1, X1)        [bits]

under unit-variance receiver noise, and maximizes it over the covariance
parameters by a coarse grid plus coordinate-wise refinement.  The optimizer
returns the best point it found, so its value lower-bounds the true maximum;
the grid resolution rides along in the diagnostics.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple

import numpy as np

from .channel import ARITH_RATIONAL, MODE_CONSTANT, ChannelRealization

# Eigenvalues of a covariance may dip this far below zero before rejection.
PSD_TOL = 1e-12

# Relative tolerance for the float-mode collapse-determinant test.
DETERMINANT_TOL = 1e-12


@dataclass(frozen=True)
class GaussianInputCovariance:
    """Parameters of the structured 3x3 input covariance.

    Powers are linear scale; rho1 (rho2) correlates X1 (X2) with the relay
    input, X1 and X2 stay uncorrelated.  Positive semidefiniteness reduces to
    rho1**2 + rho2**2 <= 1.
    """

    p1: float
    p2: float
    pr: float
    rho1: float = 0.0
    rho2: float = 0.0

    def __post_init__(self):
        if min(self.p1, self.p2, self.pr) < 0:
            raise ValueError("powers must be nonnegative")
        if self.rho1 ** 2 + self.rho2 ** 2 > 1 + PSD_TOL:
            raise ValueError(
                f"rho1^2 + rho2^2 = {self.rho1 ** 2 + self.rho2 ** 2:.6g} > 1; "
                "covariance is not positive semidefinite")

    def matrix(self) -> np.ndarray:
        a13 = self.rho1 * math.sqrt(self.p1 * self.pr)
        a23 = self.rho2 * math.sqrt(self.p2 * self.pr)
        return np.array([[self.p1, 0.0, a13],
                         [0.0, self.p2, a23],
                         [a13, a23, self.pr]])

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix())[0])


@dataclass(frozen=True)
class BoundOptimum:
    """Result of one covariance search: the best point, its value in bits,
    and the search resolution actually used."""

    cov: GaussianInputCovariance
    value_bits: float
    diagnostics: dict


@dataclass(frozen=True)
class BoundCurve:
    """Optimized bound values over a power grid."""

    p_grid_db: Tuple[float, ...]
    values_bits: Tuple[float, ...]
    optima: Tuple[BoundOptimum, ...]


def dof_upper(K: int, time_varying: bool = True) -> Fraction:
    """Sum-DoF upper bound: 2 for K = 2, 2K/3 for K > 2 (exact rational).

    The same value applies to constant channels; the flag is informational.
    """
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")
    del time_varying
    if K == 2:
        return Fraction(2)
    return Fraction(2 * K, 3)


def counting_identity_check(K: int) -> bool:
    """Check the triple-counting identity 2*C(K,3)/C(K-1,2) = 2K/3 exactly.

    Summing the per-triple bound d_j + d_k + d_l <= 2 over all triples counts
    every user C(K-1,2) times, giving C(K-1,2) * d_total <= 2*C(K,3); this
    verifies that the quotient matches the closed form.
    """
    if K < 3:
        raise ValueError(f"identity needs K >= 3, got {K}")
    lhs = Fraction(2 * math.comb(K, 3), math.comb(K - 1, 2))
    return lhs == dof_upper(K)


def _receiver_rows(chan: ChannelRealization) -> np.ndarray:
    """2x3 float matrix G with Y = G (X1, X2, Xr)^T + Z for a constant
    2-user channel; row k is (h_1k, h_2k, hr_k)."""
    if chan.num_users != 2:
        raise ValueError(f"expected a 2-user channel, got K={chan.num_users}")
    if chan.mode != MODE_CONSTANT:
        raise ValueError("sum-rate bound expects a constant channel")
    h = chan.h[:, :, 0].astype(float) if chan.arithmetic != ARITH_RATIONAL else \
        np.array([[float(x) for x in row] for row in chan.h[:, :, 0]])
    hr = np.array([float(x) for x in chan.hr[:, 0]])
    return np.array([[h[0, 0], h[1, 0], hr[0]],
                     [h[0, 1], h[1, 1], hr[1]]])


def two_user_bound_value(chan: ChannelRealization,
                         cov: GaussianInputCovariance) -> float:
    """Genie-aided sum-rate bound value in bits at one input covariance.

    Both mutual-information terms reduce to log-ratios of determinants of
    covariance blocks assembled from A and the channel rows; with unit noise
    the conditioned terms have denominator 1.  Conditioning uses the
    pseudo-inverse, so zero-power coordinates degrade gracefully.
    """
    if cov.min_eigenvalue() < -PSD_TOL:
        raise ValueError("input covariance is not positive semidefinite")
    g = _receiver_rows(chan)
    a = cov.matrix()
    sy = g @ a @ g.T + np.eye(2)       # Cov(Y1, Y2)
    ga = g @ a                         # Cov(Y, X)
    # I(X1, X2, Xr; Y1) = (1/2) log2 Var(Y1) / Var(Y1 | X) with Var(Y1|X) = 1
    term1 = 0.5 * math.log2(sy[0, 0])
    # I(X2, Xr; Y2 | Y1, X1) = (1/2) log2 Var(Y2 | Y1, X1) / 1
    sw = np.array([[sy[0, 0], ga[0, 0]],
                   [ga[0, 0], a[0, 0]]])        # Cov((Y1, X1))
    cross = np.array([sy[1, 0], ga[1, 0]])      # Cov(Y2, (Y1, X1))
    condvar = sy[1, 1] - cross @ np.linalg.pinv(sw) @ cross
    term2 = 0.5 * math.log2(max(condvar, 1.0))  # >= noise floor up to rounding
    return term1 + term2


def _bound_values_batch(g: np.ndarray, p1, p2, pr, r1, r2) -> np.ndarray:
    """Vectorized bound evaluation over parameter arrays (all powers > 0)."""
    g1, g2 = g[0], g[1]
    a13 = r1 * np.sqrt(p1 * pr)
    a23 = r2 * np.sqrt(p2 * pr)

    def quad(row, other=None):
        o = row if other is None else other
        return (row[0] * o[0] * p1 + row[1] * o[1] * p2 + row[2] * o[2] * pr
                + (row[0] * o[2] + row[2] * o[0]) * a13
                + (row[1] * o[2] + row[2] * o[1]) * a23)

    var_y1 = quad(g1) + 1.0
    var_y2 = quad(g2) + 1.0
    cov_y1y2 = quad(g1, g2)
    cov_y1x1 = g1[0] * p1 + g1[2] * a13
    cov_y2x1 = g2[0] * p1 + g2[2] * a13
    det_w = var_y1 * p1 - cov_y1x1 ** 2
    condvar = var_y2 - (p1 * cov_y1y2 ** 2
                        - 2.0 * cov_y1x1 * cov_y1y2 * cov_y2x1
                        + var_y1 * cov_y2x1 ** 2) / det_w
    condvar = np.maximum(condvar, 1.0)
    return 0.5 * np.log2(var_y1) + 0.5 * np.log2(condvar)


POWER_GRID_POINTS = 9
POWER_GRID_DECADES = 4.0
RHO_GRID_POINTS = 17
REFINE_ROUNDS = 3
REFINE_SHRINK = 4.0


def optimize_two_user_bound(chan: ChannelRealization, P: float) -> BoundOptimum:
    """Maximize the bound over (P1, P2, Pr, rho1, rho2) with P_j <= P.

    Coarse search: POWER_GRID_POINTS log-spaced points per power axis over
    POWER_GRID_DECADES decades up to P, RHO_GRID_POINTS per correlation axis,
    masked to rho1**2 + rho2**2 <= 1.  Refinement: REFINE_ROUNDS rounds of
    coordinate-wise local scans whose span shrinks by REFINE_SHRINK each
    round.  Ties resolve to the lexicographically first grid point.
    """
    if P <= 0:
        raise ValueError(f"P must be positive, got {P}")
    g = _receiver_rows(chan)
    powers = P * np.logspace(-POWER_GRID_DECADES, 0.0, POWER_GRID_POINTS)
    rhos = np.linspace(-1.0, 1.0, RHO_GRID_POINTS)
    mesh = np.meshgrid(powers, powers, powers, rhos, rhos, indexing="ij")
    flat = [m.reshape(-1) for m in mesh]
    feasible = flat[3] ** 2 + flat[4] ** 2 <= 1.0
    flat = [f[feasible] for f in flat]
    values = _bound_values_batch(g, *flat)
    best_idx = int(np.argmax(values))
    best = [float(f[best_idx]) for f in flat]
    best_value = float(values[best_idx])
    n_evals = int(values.size)

    log_power_step = POWER_GRID_DECADES / (POWER_GRID_POINTS - 1)
    rho_step = 2.0 / (RHO_GRID_POINTS - 1)
    for rnd in range(REFINE_ROUNDS):
        p_span = log_power_step / REFINE_SHRINK ** (rnd + 1)
        r_span = rho_step / REFINE_SHRINK ** (rnd + 1)
        for coord in range(5):
            if coord < 3:
                center = math.log10(best[coord] / P)
                local = P * 10.0 ** np.clip(
                    center + np.linspace(-1.0, 1.0, POWER_GRID_POINTS) * p_span,
                    -POWER_GRID_DECADES, 0.0)
            else:
                other = best[7 - coord]  # the companion correlation
                limit = math.sqrt(max(0.0, 1.0 - other ** 2))
                local = np.clip(
                    best[coord] + np.linspace(-1.0, 1.0, RHO_GRID_POINTS) * r_span,
                    -limit, limit)
            cand = [np.full(local.shape, b) for b in best]
            cand[coord] = local
            vals = _bound_values_batch(g, *cand)
            n_evals += int(vals.size)
            idx = int(np.argmax(vals))
            if vals[idx] > best_value:
                best_value = float(vals[idx])
                best[coord] = float(local[idx])
    cov = GaussianInputCovariance(p1=best[0], p2=best[1], pr=best[2],
                                  rho1=best[3], rho2=best[4])
    diagnostics = {
        "power_grid_points": POWER_GRID_POINTS,
        "power_grid_decades": POWER_GRID_DECADES,
        "rho_grid_points": RHO_GRID_POINTS,
        "refine_rounds": REFINE_ROUNDS,
        "refine_shrink": REFINE_SHRINK,
        "evaluations": n_evals,
    }
    return BoundOptimum(cov=cov, value_bits=best_value, diagnostics=diagnostics)


def bound_curve(chan: ChannelRealization, p_grid_db,
                max_workers: int = 1) -> BoundCurve:
    """Optimized bound at each power of a dB grid.  Grid points are
    independent; with max_workers > 1 they run on a thread pool and are
    reassembled in grid order."""
    p_grid_db = tuple(float(p) for p in p_grid_db)
    p_lin = [10.0 ** (p / 10.0) for p in p_grid_db]
    if max_workers > 1:
        from concurrent.futures import ThreadPoolExecutor
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            optima = tuple(pool.map(lambda p: optimize_two_user_bound(chan, p), p_lin))
    else:
        optima = tuple(optimize_two_user_bound(chan, p) for p in p_lin)
    return BoundCurve(p_grid_db=p_grid_db,
                      values_bits=tuple(o.value_bits for o in optima),
                      optima=optima)


def two_user_dof_from_channel(chan: ChannelRealization,
                              tol: float = DETERMINANT_TOL) -> int:
    """DoF of a constant 2-user channel: 1 on the collapse set where
    h11*hr2 - h12*hr1 = 0 or h22*hr1 - h21*hr2 = 0, else 2.

    Exact test in rational mode; relative tolerance ``tol`` in float mode.
    """
    if chan.num_users != 2:
        raise ValueError(f"expected a 2-user channel, got K={chan.num_users}")
    if chan.mode != MODE_CONSTANT:
        raise ValueError("DoF collapse test expects a constant channel")
    h = chan.h[:, :, 0]
    hr = chan.hr[:, 0]
    det1 = h[0, 0] * hr[1] - h[0, 1] * hr[0]
    det2 = h[1, 1] * hr[0] - h[1, 0] * hr[1]
    if chan.arithmetic == ARITH_RATIONAL:
        collapsed = det1 == 0 or det2 == 0
    else:
        scale = max(1.0, chan.max_abs_gain() ** 2)
        collapsed = abs(float(det1)) <= tol * scale or abs(float(det2)) <= tol * scale
    return 1 if collapsed else 2
