"""Independent oracles used by the test suite.

These deliberately avoid the implementation's code paths: the mutual
information oracle assembles the full joint covariance of inputs and outputs
and works through generic Gaussian entropy identities; the float rank oracle
is a plain SVD threshold without any balancing.
"""

import math

import numpy as np

LOG2 = math.log(2.0)


def receiver_matrix(chan) -> np.ndarray:
    """2x3 matrix G with (Y1, Y2) = G (X1, X2, Xr) + (Z1, Z2)."""
    h = np.array([[float(x) for x in row] for row in chan.h[:, :, 0]])
    hr = np.array([float(x) for x in chan.hr[:, 0]])
    return np.array([[h[0, 0], h[1, 0], hr[0]],
                     [h[0, 1], h[1, 1], hr[1]]])


def joint_covariance(chan, cov) -> np.ndarray:
    """Covariance of (X1, X2, Xr, Y1, Y2) under unit-variance noises."""
    g = receiver_matrix(chan)
    a = cov.matrix()
    s = np.zeros((5, 5))
    s[:3, :3] = a
    ga = g @ a
    s[3:, :3] = ga
    s[:3, 3:] = ga.T
    s[3:, 3:] = g @ a @ g.T + np.eye(2)
    return s


def _logdet(s: np.ndarray, idx) -> float:
    sub = s[np.ix_(idx, idx)]
    sign, val = np.linalg.slogdet(sub)
    assert sign > 0, f"non-PD block {idx}"
    return val


def mi_bits(s: np.ndarray, iu, iv) -> float:
    """I(U; V) for jointly Gaussian blocks of covariance s, in bits."""
    return 0.5 * (_logdet(s, iu) + _logdet(s, iv) - _logdet(s, iu + iv)) / LOG2


def cond_mi_bits(s: np.ndarray, iu, iv, iw) -> float:
    """I(U; V | W) in bits via h(U,W) + h(V,W) - h(W) - h(U,V,W)."""
    return 0.5 * (_logdet(s, iu + iw) + _logdet(s, iv + iw)
                  - _logdet(s, iw) - _logdet(s, iu + iv + iw)) / LOG2


def bound_value_oracle(chan, cov) -> float:
    """I(X1,X2,Xr; Y1) + I(X2,Xr; Y2 | Y1, X1) from the 5x5 joint covariance."""
    s = joint_covariance(chan, cov)
    term1 = mi_bits(s, [0, 1, 2], [3])
    term2 = cond_mi_bits(s, [1, 2], [4], [3, 0])
    return term1 + term2


def svd_rank_oracle(matrix, tol_factor: float = 1e-9) -> int:
    """Plain float SVD rank with threshold tol_factor * sigma_max * max(shape)."""
    a = np.array([[float(x) for x in row] for row in np.asarray(matrix, dtype=object)])
    s = np.linalg.svd(a, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol_factor * s[0] * max(a.shape)))
