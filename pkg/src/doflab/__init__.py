"""Numerical laboratory for degrees-of-freedom schemes in relay-assisted
Gaussian interference networks: channel sampling and symbol extensions,
interference neutralization, interference alignment with exact verification,
sum-rate upper bounds, and empirical DoF slope measurement."""

__version__ = "0.1.0"

from .channel import (  # noqa: F401
    ARITH_FLOAT,
    ARITH_RATIONAL,
    MODE_CONSTANT,
    MODE_VARYING,
    ChannelRealization,
    ExtendedChannelMatrix,
    MisoVectorChannel,
    NetworkConfig,
    constant_channel_from_gains,
    degenerate_two_user_channel,
    extend,
    extend_all,
    full_cancellation_three_user_channel,
    lift_to_miso,
    sample_channel,
    split_direct,
)
from .neutralization import (  # noqa: F401
    DofPoint,
    FullCancellationConditionError,
    NeutralizationSolution,
    RelayGainZeroError,
    check_corollary_conditions,
    dof_region_contains,
    solve_three_user_full,
    solve_three_user_pair,
    solve_two_user,
    solve_two_user_per_slot,
    time_share,
)
from .alignment import (  # noqa: F401
    AlignmentConfig,
    AlignmentReport,
    InterferenceSpanError,
    achieved_dof_formula,
    build_postcoders,
    build_precoders,
    derive_alignment_matrices,
    rank_exact,
    reciprocal_channels,
    run_alignment,
    run_alignment_seeded,
    verify_alignment,
)
from .bounds import (  # noqa: F401
    BoundCurve,
    GaussianInputCovariance,
    bound_curve,
    counting_identity_check,
    dof_upper,
    optimize_two_user_bound,
    two_user_bound_value,
    two_user_dof_from_channel,
)
from .rates import (  # noqa: F401
    DofEstimate,
    RateCurve,
    estimate_dof,
    miso_power_scaled_rate,
    neutralization_rate_curve,
    neutralized_sum_rate,
)
