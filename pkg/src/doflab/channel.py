r"""Channel sampling and symbol-extension transforms for the K-user Gaussian
interference network assisted by a message-cognizant relay.

A realization stores the direct/cross gains h[j][k] (transmitter j to
receiver k) and the relay gains hr[k] over n time slots.  Two arithmetic
backends are supported:

* ``float``    -- float64 gains drawn i.i.d. standard normal,
* ``rational`` -- exact `fractions.Fraction` gains with bounded denominator,
  which makes rank and cancellation statements decidable without tolerances.

Public user and slot indices are 1-based; array storage is 0-based.
"""

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

MODE_VARYING = "varying"
MODE_CONSTANT = "constant"
MODES = (MODE_VARYING, MODE_CONSTANT)

ARITH_FLOAT = "float"
ARITH_RATIONAL = "rational"
ARITHMETICS = (ARITH_FLOAT, ARITH_RATIONAL)

# Gains with magnitude below this threshold are resampled.  Gains are drawn
# from continuous distributions, so exact degeneracies have probability zero;
# the cutoff only keeps float conditioning bounded.  It is a convention of
# this tool, not a property of the channel model.
MIN_GAIN_MAGNITUDE = 1e-6


@dataclass(frozen=True)
class NetworkConfig:
    """Sampling configuration for a K-user relay-assisted interference network."""

    num_users: int
    mode: str = MODE_VARYING
    seed: int = 0
    arithmetic: str = ARITH_FLOAT
    rational_denominator_bound: int = 16

    def __post_init__(self):
        if self.num_users < 2:
            raise ValueError(f"num_users must be >= 2, got {self.num_users}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.arithmetic not in ARITHMETICS:
            raise ValueError(
                f"arithmetic must be one of {ARITHMETICS}, got {self.arithmetic!r}")
        if self.arithmetic == ARITH_RATIONAL and self.rational_denominator_bound < 2:
            raise ValueError("rational_denominator_bound must be >= 2")


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """Gains of one network draw.

    h[j-1, k-1, i-1] is the gain from transmitter j to receiver k in slot i;
    hr[k-1, i-1] is the gain from the relay to receiver k.  Arrays are not to
    be mutated after construction.
    """

    h: np.ndarray
    hr: np.ndarray
    n_slots: int
    mode: str
    arithmetic: str

    def __post_init__(self):
        K = self.h.shape[0]
        if self.h.shape != (K, K, self.n_slots):
            raise ValueError(f"h has shape {self.h.shape}, expected ({K},{K},{self.n_slots})")
        if self.hr.shape != (K, self.n_slots):
            raise ValueError(f"hr has shape {self.hr.shape}, expected ({K},{self.n_slots})")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.arithmetic not in ARITHMETICS:
            raise ValueError(f"unknown arithmetic {self.arithmetic!r}")
        if self.arithmetic == ARITH_FLOAT and not (
                np.all(np.isfinite(self.h)) and np.all(np.isfinite(self.hr))):
            raise ValueError("gains must be finite")
        if self.mode == MODE_CONSTANT and self.n_slots > 1:
            first_h = self.h[:, :, :1]
            first_hr = self.hr[:, :1]
            if not (np.all(self.h == first_h) and np.all(self.hr == first_hr)):
                raise ValueError("constant mode requires identical gains in every slot")
        self.h.setflags(write=False)
        self.hr.setflags(write=False)

    @property
    def num_users(self) -> int:
        return self.h.shape[0]

    def gain(self, j: int, k: int, i: int = 1):
        """Gain from transmitter j to receiver k in slot i (1-based)."""
        return self.h[j - 1, k - 1, i - 1]

    def relay_gain(self, k: int, i: int = 1):
        """Gain from the relay to receiver k in slot i (1-based)."""
        return self.hr[k - 1, i - 1]

    def max_abs_gain(self) -> float:
        vals = [abs(float(x)) for x in self.h.flat] + [abs(float(x)) for x in self.hr.flat]
        return max(vals)

    def restrict(self, users: Sequence[int]) -> "ChannelRealization":
        """Sub-network of the given users (1-based), relabeled 1..len(users)
        in the given order.  Relay gains follow the kept receivers."""
        idx = [u - 1 for u in users]
        if len(set(idx)) != len(idx) or not all(0 <= i < self.num_users for i in idx):
            raise ValueError(f"invalid user subset {users}")
        h = self.h[np.ix_(idx, idx)].copy()
        hr = self.hr[idx].copy()
        return ChannelRealization(h=h, hr=hr, n_slots=self.n_slots,
                                  mode=self.mode, arithmetic=self.arithmetic)

    def to_json_dict(self) -> dict:
        enc = encode_gain
        return {
            "K": self.num_users,
            "mode": self.mode,
            "slots": self.n_slots,
            "arithmetic": self.arithmetic,
            "h": [[[enc(self.h[j, k, i], self.arithmetic) for i in range(self.n_slots)]
                   for k in range(self.num_users)]
                  for j in range(self.num_users)],
            "hr": [[enc(self.hr[k, i], self.arithmetic) for i in range(self.n_slots)]
                   for k in range(self.num_users)],
        }

    @staticmethod
    def from_json_dict(doc: dict) -> "ChannelRealization":
        K = int(doc["K"])
        n = int(doc["slots"])
        arithmetic = doc["arithmetic"]
        dec = decode_gain
        h = _new_gain_array((K, K, n), arithmetic)
        hr = _new_gain_array((K, n), arithmetic)
        for j in range(K):
            for k in range(K):
                for i in range(n):
                    h[j, k, i] = dec(doc["h"][j][k][i], arithmetic)
        for k in range(K):
            for i in range(n):
                hr[k, i] = dec(doc["hr"][k][i], arithmetic)
        return ChannelRealization(h=h, hr=hr, n_slots=n,
                                  mode=doc["mode"], arithmetic=arithmetic)


@dataclass(frozen=True, eq=False)
class MisoVectorChannel:
    """Length-2 vector channels pairing each transmitter with the relay.

    vectors[k-1, j-1, i-1] = [h_kj(i), hr_j(i)] is the vector channel from
    vector-transmitter k to receiver j in slot i: the first component is
    radiated by transmitter k itself, the second by the relay.  For a fixed
    receiver j and slot, all K vectors share the second component hr_j(i).
    """

    vectors: np.ndarray  # (K, K, n, 2)
    n_slots: int
    arithmetic: str

    def __post_init__(self):
        self.vectors.setflags(write=False)

    @property
    def num_users(self) -> int:
        return self.vectors.shape[0]

    def vector(self, k: int, j: int, i: int = 1) -> np.ndarray:
        """Vector channel from vector-transmitter k to receiver j, slot i (1-based)."""
        return self.vectors[k - 1, j - 1, i - 1]


@dataclass(frozen=True, eq=False)
class ExtendedChannelMatrix:
    """Block-diagonal 2*mu x mu matrix of a mu-slot symbol extension.

    ``receiver``/``transmitter`` are the roles in the reversed (single-input,
    two-output) reading of the network: column m carries the slot-m vector
    channel in rows 2m-1 and 2m, every other entry is exactly zero.
    """

    receiver: int
    transmitter: int
    mu: int
    entries: np.ndarray  # (2*mu, mu)
    arithmetic: str

    def __post_init__(self):
        if self.entries.shape != (2 * self.mu, self.mu):
            raise ValueError(f"entries have shape {self.entries.shape}, "
                             f"expected ({2 * self.mu},{self.mu})")
        self.entries.setflags(write=False)

    @property
    def is_direct_link(self) -> bool:
        return self.receiver == self.transmitter


def _new_gain_array(shape, arithmetic: str) -> np.ndarray:
    if arithmetic == ARITH_RATIONAL:
        arr = np.empty(shape, dtype=object)
        arr[...] = Fraction(0)
        return arr
    return np.zeros(shape, dtype=float)


def _zero(arithmetic: str):
    return Fraction(0) if arithmetic == ARITH_RATIONAL else 0.0


def _sample_normal(rng: np.random.Generator, shape) -> np.ndarray:
    vals = rng.standard_normal(shape)
    bad = np.abs(vals) < MIN_GAIN_MAGNITUDE
    while bad.any():
        vals[bad] = rng.standard_normal(int(bad.sum()))
        bad = np.abs(vals) < MIN_GAIN_MAGNITUDE
    return vals


def _sample_rational(rng: np.random.Generator, shape, q: int) -> np.ndarray:
    size = int(np.prod(shape))
    nums = rng.integers(-2 * q, 2 * q + 1, size=size)
    bad = np.abs(nums) < q * MIN_GAIN_MAGNITUDE
    while bad.any():
        nums[bad] = rng.integers(-2 * q, 2 * q + 1, size=int(bad.sum()))
        bad = np.abs(nums) < q * MIN_GAIN_MAGNITUDE
    arr = np.empty(size, dtype=object)
    for i, p in enumerate(nums):
        arr[i] = Fraction(int(p), q)
    return arr.reshape(shape)


def sample_channel(config: NetworkConfig, n_slots: int) -> ChannelRealization:
    """Draw one channel realization, deterministically from (config, n_slots).

    Float mode draws i.i.d. standard normal gains; rational mode draws p/q
    with p uniform over [-2q, 2q] and q = config.rational_denominator_bound.
    Gains of magnitude below MIN_GAIN_MAGNITUDE are redrawn.  Constant mode
    draws slot 1 and replicates it.
    """
    if n_slots < 1:
        raise ValueError(f"n_slots must be >= 1, got {n_slots}")
    rng = np.random.default_rng(config.seed)
    K = config.num_users
    draw_slots = 1 if config.mode == MODE_CONSTANT else n_slots
    if config.arithmetic == ARITH_FLOAT:
        h = _sample_normal(rng, (K, K, draw_slots))
        hr = _sample_normal(rng, (K, draw_slots))
    else:
        q = config.rational_denominator_bound
        h = _sample_rational(rng, (K, K, draw_slots), q)
        hr = _sample_rational(rng, (K, draw_slots), q)
    if config.mode == MODE_CONSTANT and n_slots > 1:
        h = np.repeat(h, n_slots, axis=2)
        hr = np.repeat(hr, n_slots, axis=1)
    return ChannelRealization(h=h, hr=hr, n_slots=n_slots,
                              mode=config.mode, arithmetic=config.arithmetic)


def constant_channel_from_gains(h, hr, arithmetic: str, n_slots: int = 1) -> ChannelRealization:
    """Build a constant-mode realization from K x K direct/cross gains ``h``
    and length-K relay gains ``hr`` (nested sequences; Fraction entries for
    rational mode)."""
    K = len(hr)
    harr = _new_gain_array((K, K, n_slots), arithmetic)
    hrarr = _new_gain_array((K, n_slots), arithmetic)
    for j in range(K):
        for k in range(K):
            harr[j, k, :] = h[j][k]
    for k in range(K):
        hrarr[k, :] = hr[k]
    return ChannelRealization(h=harr, hr=hrarr, n_slots=n_slots,
                              mode=MODE_CONSTANT, arithmetic=arithmetic)


def degenerate_two_user_channel(seed: int = 0, arithmetic: str = ARITH_FLOAT,
                                which: str = "both", n_slots: int = 1) -> ChannelRealization:
    """Constant 2-user instance sitting exactly on a cancellation-collapse set.

    ``which`` selects which of the two collapse determinants vanish:
    ``"first"`` forces h11*hr2 - h12*hr1 = 0, ``"second"`` forces
    h22*hr1 - h21*hr2 = 0, ``"both"`` forces both.  Gains are dyadic
    rationals so the products are exact in float arithmetic as well.
    Random draws never land on these sets, so they are built by construction.
    """
    if which not in ("first", "second", "both"):
        raise ValueError(f"which must be 'first', 'second' or 'both', got {which!r}")
    rng = np.random.default_rng(seed)

    def draw():
        p = 0
        while p == 0:
            p = int(rng.integers(-16, 17))
        return Fraction(p, 8)

    lam = Fraction(int(rng.integers(1, 4)) + 1)  # scale in {2,3,4}
    h11, h21, hr1 = draw(), draw(), draw()
    if which == "both":
        h12, h22, hr2 = lam * h11, lam * h21, lam * hr1
    elif which == "first":
        h12, hr2 = lam * h11, lam * hr1
        h22 = draw()
    else:
        h22, hr2 = lam * h21, lam * hr1
        h12 = draw()
    gains = [[h11, h12], [h21, h22]]
    relay = [hr1, hr2]
    if arithmetic == ARITH_FLOAT:
        gains = [[float(x) for x in row] for row in gains]
        relay = [float(x) for x in relay]
    return constant_channel_from_gains(gains, relay, arithmetic, n_slots)


def full_cancellation_three_user_channel(arithmetic: str = ARITH_FLOAT,
                                         n_slots: int = 1) -> ChannelRealization:
    """Constant 3-user instance whose cross-gain ratios let a relay cancel
    all interference simultaneously while keeping every direct link alive."""
    one = Fraction(1) if arithmetic == ARITH_RATIONAL else 1.0

    def v(x):
        return one * x

    h = [[v(5), v(2), v(3)],
         [v(1), v(5), v(3)],
         [v(1), v(2), v(5)]]
    hr = [v(1), v(2), v(3)]
    return constant_channel_from_gains(h, hr, arithmetic, n_slots)


def lift_to_miso(chan: ChannelRealization) -> MisoVectorChannel:
    """Pair every transmitter with the relay into length-2 vector channels.

    vectors[k-1, j-1, i-1] = [h[k][j][i], hr[j][i]]; for a fixed receiver j
    the second component is shared across all transmitters by construction.
    """
    K, n = chan.num_users, chan.n_slots
    if chan.arithmetic == ARITH_RATIONAL:
        vec = np.empty((K, K, n, 2), dtype=object)
    else:
        vec = np.zeros((K, K, n, 2), dtype=float)
    vec[..., 0] = chan.h
    for j in range(K):
        vec[:, j, :, 1] = chan.hr[j]
    return MisoVectorChannel(vectors=vec, n_slots=n, arithmetic=chan.arithmetic)


def extend(miso: MisoVectorChannel, mu: int, k: int, j: int) -> ExtendedChannelMatrix:
    """Symbol-extended 2*mu x mu block-diagonal matrix H_kj for receiver k and
    transmitter j of the reversed single-input two-output network (1-based).

    Column m holds the slot-m vector channel [h_kj(m), hr_j(m)] in rows
    2m-1, 2m; all other entries are exactly zero in both arithmetics.
    """
    if mu < 1:
        raise ValueError(f"mu must be >= 1, got {mu}")
    if mu > miso.n_slots:
        raise ValueError(f"mu={mu} exceeds available slots ({miso.n_slots})")
    entries = _new_gain_array((2 * mu, mu), miso.arithmetic)
    for m in range(mu):
        entries[2 * m, m] = miso.vectors[k - 1, j - 1, m, 0]
        entries[2 * m + 1, m] = miso.vectors[k - 1, j - 1, m, 1]
    return ExtendedChannelMatrix(receiver=k, transmitter=j, mu=mu,
                                 entries=entries, arithmetic=miso.arithmetic)


def extend_all(miso: MisoVectorChannel, mu: int) -> dict:
    """All K*K extended matrices, keyed by (receiver, transmitter)."""
    K = miso.num_users
    return {(k, j): extend(miso, mu, k, j)
            for k in range(1, K + 1) for j in range(1, K + 1)}


def split_direct(ext: ExtendedChannelMatrix):
    """Split a direct-link extended matrix into its transmitter-only part and
    its relay-only part.

    The first output keeps the odd-row entries h_kk(m) (one per column, so it
    has full column rank whenever the direct gains are nonzero), the second
    keeps the even-row relay entries; the two parts sum to the input exactly.
    """
    if not ext.is_direct_link:
        raise ValueError(
            f"split_direct expects a direct-link matrix, got receiver {ext.receiver} "
            f"and transmitter {ext.transmitter}")
    hat = _new_gain_array(ext.entries.shape, ext.arithmetic)
    tilde = _new_gain_array(ext.entries.shape, ext.arithmetic)
    for m in range(ext.mu):
        hat[2 * m, m] = ext.entries[2 * m, m]
        tilde[2 * m + 1, m] = ext.entries[2 * m + 1, m]
    return hat, tilde


def encode_gain(value, arithmetic: str):
    """JSON encoding of one gain: float stays a number, rationals become 'p/q'."""
    if arithmetic == ARITH_RATIONAL:
        f = Fraction(value)
        return f"{f.numerator}/{f.denominator}"
    return float(value)


def decode_gain(value, arithmetic: str):
    if arithmetic == ARITH_RATIONAL:
        return Fraction(value)
    return float(value)
