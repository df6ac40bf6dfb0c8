r"""Interference neutralization through a message-cognizant relay.

The relay knows every message, so it can transmit X_r = sum_k c_k X_k with
coefficients chosen to cancel all cross interference over the air.  This
module derives those coefficients for the 2-user network, for a 3-user
network with one silent user, and for the special 3-user channels on which
all six cross links can be cancelled simultaneously.  It also provides the
3-user DoF region polytope and time sharing over its vertices.
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Tuple

import numpy as np

from .channel import (
    ARITH_FLOAT,
    ARITH_RATIONAL,
    MODE_CONSTANT,
    ChannelRealization,
    constant_channel_from_gains,
    encode_gain,
)

# A float effective gain below this times the largest input gain is declared
# degenerate.  Overridable per call; exact mode compares against zero.
DEGENERACY_TOL = 1e-9

# Relative tolerance for the cross-multiplied equality checks in float mode.
RATIO_EQ_TOL = 1e-12


class RelayGainZeroError(ValueError):
    """Relay gain vanishes at a receiver: its interference cannot be steered."""


class FullCancellationConditionError(ValueError):
    """A precondition of the simultaneous 3-user cancellation scheme fails."""


@dataclass(frozen=True)
class NeutralizationSolution:
    """Relay combining coefficients and the channel left after cancellation.

    ``coefficients[t]`` is c_k for active user k = active_users[t];
    ``effective_gains[t]`` is the post-cancellation direct gain g_k and
    ``residual_interference[s, t]`` the post-cancellation gain from active
    transmitter s to active receiver t (diagonal entries are unused zeros).
    """

    total_users: int
    active_users: Tuple[int, ...]
    coefficients: tuple
    effective_gains: tuple
    degenerate: Tuple[bool, ...]
    residual_interference: np.ndarray
    arithmetic: str

    def dof_point(self) -> "DofPoint":
        """One DoF per active nondegenerate user, zero elsewhere."""
        d = [0] * self.total_users
        for user, deg in zip(self.active_users, self.degenerate):
            d[user - 1] = 0 if deg else 1
        return DofPoint(tuple(d))

    def to_json_dict(self) -> dict:
        enc = encode_gain
        return {
            "active": list(self.active_users),
            "c": [enc(c, self.arithmetic) for c in self.coefficients],
            "g": [enc(g, self.arithmetic) for g in self.effective_gains],
            "degenerate": list(self.degenerate),
        }


@dataclass(frozen=True)
class CorollaryReport:
    """Outcome of the six ratio/direct-gain checks for simultaneous 3-user
    cancellation: three cross-gain ratio equalities and three direct-gain
    strict inequalities, all evaluated in cross-multiplied form."""

    ratio_conditions: Tuple[bool, bool, bool]
    nondegeneracy_conditions: Tuple[bool, bool, bool]
    all_pass: bool

    def first_failure(self) -> str:
        for i, ok in enumerate(self.ratio_conditions):
            if not ok:
                return f"ratio condition {i + 1} violated"
        for i, ok in enumerate(self.nondegeneracy_conditions):
            if not ok:
                return f"direct-gain condition {i + 1} violated"
        return ""

    def to_json_dict(self) -> dict:
        return {
            "ratio_conditions": list(self.ratio_conditions),
            "nondegeneracy_conditions": list(self.nondegeneracy_conditions),
            "all_pass": self.all_pass,
        }


def _slot_gains(chan: ChannelRealization, slot: int = 1):
    h = chan.h[:, :, slot - 1]
    hr = chan.hr[:, slot - 1]
    return h, hr


def _require_constant(chan: ChannelRealization, op: str):
    if chan.mode != MODE_CONSTANT:
        raise ValueError(
            f"{op} expects a constant-mode channel; re-solve per slot for "
            "time-varying channels (see solve_two_user_per_slot)")


def _is_degenerate(g, chan: ChannelRealization, tol: float) -> bool:
    if chan.arithmetic == ARITH_RATIONAL:
        return g == 0
    return abs(float(g)) < tol * chan.max_abs_gain()


def solve_two_user(chan: ChannelRealization,
                   degeneracy_tol: float = DEGENERACY_TOL) -> NeutralizationSolution:
    """Cancel the cross interference of a constant 2-user network.

    The relay sends X_r = c1 X1 + c2 X2 with c1 = -h12/hr2 and c2 = -h21/hr1,
    which zeroes the interference at both receivers and leaves the effective
    direct gains g_k = h_kk + hr_k c_k.  g_k vanishes exactly when
    h_kk hr_other - h_k,other hr_k = 0, the collapse set of the 2-user DoF.
    """
    if chan.num_users != 2:
        raise ValueError(f"expected a 2-user channel, got K={chan.num_users}")
    _require_constant(chan, "solve_two_user")
    h, hr = _slot_gains(chan)
    for k in (0, 1):
        if hr[k] == 0:
            raise RelayGainZeroError(
                f"relay gain at receiver {k + 1} is zero; interference there "
                "cannot be neutralized")
    c1 = -h[0, 1] / hr[1]
    c2 = -h[1, 0] / hr[0]
    g1 = h[0, 0] + hr[0] * c1
    g2 = h[1, 1] + hr[1] * c2
    residual = np.zeros((2, 2), dtype=object if chan.arithmetic == ARITH_RATIONAL else float)
    residual[0, 1] = h[0, 1] + hr[1] * c1
    residual[1, 0] = h[1, 0] + hr[0] * c2
    deg = tuple(_is_degenerate(g, chan, degeneracy_tol) for g in (g1, g2))
    return NeutralizationSolution(
        total_users=2, active_users=(1, 2), coefficients=(c1, c2),
        effective_gains=(g1, g2), degenerate=deg,
        residual_interference=residual, arithmetic=chan.arithmetic)


def solve_two_user_per_slot(chan: ChannelRealization,
                            degeneracy_tol: float = DEGENERACY_TOL):
    """Per-slot re-solve for a time-varying 2-user channel: one solution per
    slot, each treating that slot as a constant channel."""
    sols = []
    for i in range(chan.n_slots):
        slot = ChannelRealization(h=chan.h[:, :, i:i + 1].copy(),
                                  hr=chan.hr[:, i:i + 1].copy(),
                                  n_slots=1, mode=MODE_CONSTANT,
                                  arithmetic=chan.arithmetic)
        sols.append(solve_two_user(slot, degeneracy_tol))
    return sols


def solve_three_user_pair(chan: ChannelRealization, silent_user: int,
                          degeneracy_tol: float = DEGENERACY_TOL) -> NeutralizationSolution:
    """Silence one user of a 3-user network and neutralize the other two.

    Delegates to the 2-user solver on the active pair; the silent user keeps
    coefficient 0 and transmits nothing.  On generic channels this achieves
    one full DoF for each active user.
    """
    if chan.num_users != 3:
        raise ValueError(f"expected a 3-user channel, got K={chan.num_users}")
    if silent_user not in (1, 2, 3):
        raise ValueError(f"silent_user must be in {{1,2,3}}, got {silent_user}")
    active = tuple(u for u in (1, 2, 3) if u != silent_user)
    sub = chan.restrict(active)
    sol = solve_two_user(sub, degeneracy_tol)
    return NeutralizationSolution(
        total_users=3, active_users=active, coefficients=sol.coefficients,
        effective_gains=sol.effective_gains, degenerate=sol.degenerate,
        residual_interference=sol.residual_interference, arithmetic=chan.arithmetic)


def _cross_eq(lhs, rhs, chan: ChannelRealization) -> bool:
    if chan.arithmetic == ARITH_RATIONAL:
        return lhs == rhs
    scale = chan.max_abs_gain() ** 2
    return abs(float(lhs) - float(rhs)) <= RATIO_EQ_TOL * max(1.0, scale)


def check_corollary_conditions(chan: ChannelRealization) -> CorollaryReport:
    """Evaluate the six conditions for simultaneous 3-user cancellation.

    All checks use cross-multiplied products, so zero denominators need no
    special casing.  The three ratio conditions must hold with equality and
    the three direct-gain conditions as strict inequalities.
    """
    if chan.num_users != 3:
        raise ValueError(f"expected a 3-user channel, got K={chan.num_users}")
    _require_constant(chan, "check_corollary_conditions")
    h, hr = _slot_gains(chan)

    def H(j, k):  # 1-based
        return h[j - 1, k - 1]

    def R(k):
        return hr[k - 1]

    ratio = (
        _cross_eq(H(3, 2) * R(1), R(2) * H(3, 1), chan),
        _cross_eq(H(2, 3) * R(1), R(3) * H(2, 1), chan),
        _cross_eq(H(1, 3) * R(2), R(3) * H(1, 2), chan),
    )
    nondeg = (
        not _cross_eq(H(1, 1) * R(2), R(1) * H(1, 2), chan),
        not _cross_eq(H(2, 2) * R(1), R(2) * H(2, 1), chan),
        not _cross_eq(H(3, 3) * R(1), R(3) * H(3, 1), chan),
    )
    return CorollaryReport(ratio_conditions=ratio,
                           nondegeneracy_conditions=nondeg,
                           all_pass=all(ratio) and all(nondeg))


def _pair_coefficient(chan: ChannelRealization, k: int, j: int):
    """Relay coefficient for user k derived from the cancellation equation at
    receiver j != k: c_k = -h_kj / hr_j (1-based)."""
    h, hr = _slot_gains(chan)
    if hr[j - 1] == 0:
        raise RelayGainZeroError(
            f"relay gain at receiver {j} is zero; cannot derive a coefficient there")
    return -h[k - 1, j - 1] / hr[j - 1]


def solve_three_user_full(chan: ChannelRealization,
                          degeneracy_tol: float = DEGENERACY_TOL) -> NeutralizationSolution:
    """Cancel all six cross links of a 3-user network simultaneously.

    Requires check_corollary_conditions to pass: the ratio conditions make the
    per-receiver coefficient formulas agree, the direct-gain conditions keep
    every effective gain nonzero.  The relay sends X_r = sum_k c_k X_k with
    c_k = -h_kj/hr_j for either receiver j != k.
    """
    report = check_corollary_conditions(chan)
    if not report.all_pass:
        raise FullCancellationConditionError(report.first_failure())
    h, hr = _slot_gains(chan)
    # receiver choice per user is arbitrary under the ratio conditions
    c = (_pair_coefficient(chan, 1, 2),
         _pair_coefficient(chan, 2, 1),
         _pair_coefficient(chan, 3, 1))
    g = tuple(h[k, k] + hr[k] * c[k] for k in range(3))
    residual = np.zeros((3, 3), dtype=object if chan.arithmetic == ARITH_RATIONAL else float)
    for src in range(3):
        for dst in range(3):
            if src != dst:
                residual[src, dst] = h[src, dst] + hr[dst] * c[src]
    deg = tuple(_is_degenerate(gk, chan, degeneracy_tol) for gk in g)
    return NeutralizationSolution(
        total_users=3, active_users=(1, 2, 3), coefficients=c,
        effective_gains=g, degenerate=deg,
        residual_interference=residual, arithmetic=chan.arithmetic)


def _as_fraction(x) -> Fraction:
    if isinstance(x, float):
        raise TypeError(
            "DoF points and weights are exact; pass Fraction, int or 'p/q' "
            "strings instead of floats")
    return Fraction(x)


@dataclass(frozen=True)
class DofPoint:
    """A tuple of per-user degrees of freedom, held exactly as rationals."""

    d: Tuple[Fraction, ...]

    def __init__(self, d: Sequence):
        vals = tuple(_as_fraction(x) for x in d)
        if any(x < 0 for x in vals):
            raise ValueError(f"DoF entries must be nonnegative, got {vals}")
        object.__setattr__(self, "d", vals)

    def __iter__(self):
        return iter(self.d)

    def __len__(self):
        return len(self.d)


#: Vertices of the 3-user DoF polytope: the origin, the three single-user
#: points and the three neutralized-pair points.
REGION_VERTICES_3USER = tuple(
    DofPoint(v) for v in (
        (0, 0, 0),
        (1, 0, 0), (0, 1, 0), (0, 0, 1),
        (1, 1, 0), (1, 0, 1), (0, 1, 1),
    )
)


def dof_region_contains(point: DofPoint) -> bool:
    """Exact membership in the 3-user region {0 <= d_k <= 1, d1+d2+d3 <= 2}."""
    if len(point) != 3:
        raise ValueError(f"expected a 3-user point, got {len(point)} entries")
    return all(x <= 1 for x in point.d) and sum(point.d) <= 2


def time_share(targets: Sequence[Tuple[DofPoint, object]]) -> DofPoint:
    """Convex combination of region vertices under exact rational weights.

    Weights must be nonnegative and sum to one; every target must be one of
    the seven vertices of the 3-user region.  The result always lies inside
    the region.
    """
    if not targets:
        raise ValueError("need at least one (vertex, weight) target")
    weights = [_as_fraction(w) for _, w in targets]
    if any(w < 0 for w in weights):
        raise ValueError(f"weights must be nonnegative, got {weights}")
    if sum(weights) != 1:
        raise ValueError(f"weights must sum to 1 exactly, got sum {sum(weights)}")
    for point, _ in targets:
        if point not in REGION_VERTICES_3USER:
            raise ValueError(f"{tuple(point.d)} is not a vertex of the 3-user region")
    mix = [Fraction(0)] * 3
    for (point, _), w in zip(targets, weights):
        for i, x in enumerate(point.d):
            mix[i] += w * x
    return DofPoint(tuple(mix))
