"""Price discovery decompositions on a fitted error-correction system.

Two complementary views of which market leads: information shares split the
variance of the common efficient-price innovation between markets under a
Cholesky orthogonalization (computed under both orderings plus their
midpoint), and the permanent-transitory decomposition extracts the common
trend with loadings built from the orthogonal complements of the adjustment
and cointegrating vectors. A likelihood-ratio test checks whether the
adjustment vector is proportional to a given direction, which is how a
market is certified as pure leader.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy import stats

from .errors import (
    DegenerateGeometry,
    NotPositiveDefinite,
    RankMismatch,
    ZeroVector,
)
from .vecm import VecmFit, _design, _validate_input, estimate_vecm

_PERMUTE = np.array([[0.0, 1.0], [1.0, 0.0]])


def alpha_perp(alpha) -> np.ndarray:
    """Unit-length orthogonal complement of a 2-vector.

    Sign is fixed so the first nonzero component is positive, making the
    output a deterministic function of the input direction.
    """
    a = np.asarray(alpha, dtype=np.float64).reshape(-1)
    if a.shape != (2,):
        raise ValueError("alpha must be a 2-vector")
    norm = math.hypot(a[0], a[1])
    if norm < 1e-300:
        raise ZeroVector("cannot take the orthogonal complement of the zero vector")
    v = np.array([-a[1], a[0]]) / norm
    for component in v:
        if component != 0.0:
            if component < 0.0:
                v = -v
            break
    return v


@dataclass(frozen=True)
class InfoShares:
    """Information shares under both Cholesky orderings, in original labels."""

    ordering_12: Tuple[float, float]
    ordering_21: Tuple[float, float]
    midpoint: Tuple[float, float]

    def __post_init__(self):
        for pair in (self.ordering_12, self.ordering_21, self.midpoint):
            if abs(pair[0] + pair[1] - 1.0) > 1e-10:
                raise ValueError("information shares must sum to 1")
            if not (-1e-12 <= pair[0] <= 1 + 1e-12):
                raise ValueError("information shares must lie in [0, 1]")


def _chol_with_ridge(omega: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Lower Cholesky factor, with a single tiny-ridge retry.

    Returns the factor together with the covariance it actually factors so
    that share denominators stay consistent with the numerators.
    """
    sym = (omega + omega.T) / 2.0
    try:
        return np.linalg.cholesky(sym), sym
    except np.linalg.LinAlgError:
        ridged = sym + 1e-12 * float(np.trace(sym)) * np.eye(2)
        try:
            return np.linalg.cholesky(ridged), ridged
        except np.linalg.LinAlgError:
            raise NotPositiveDefinite(
                "residual covariance is not positive definite (ridge retry failed)"
            )


def _check_rank_one(fit: VecmFit):
    if fit.alpha.shape != (2, 1) or fit.beta.shape != (2, 1):
        raise RankMismatch("information shares require a rank-1 fit")


def _is_for_ordering(
    alpha: np.ndarray,
    beta: np.ndarray,
    gamma_sum: np.ndarray,
    omega: np.ndarray,
) -> Tuple[float, float]:
    """Shares for one variable ordering via the common-trend weights.

    The permanent-innovation weight vector is the orthogonal complement of
    alpha scaled by the long-run normalization; the scale cancels in the
    share ratio but is computed faithfully.
    """
    a_perp = alpha_perp(alpha[:, 0])
    b_perp = alpha_perp(beta[:, 0])
    scale = float(a_perp @ (np.eye(2) - gamma_sum) @ b_perp)
    if abs(scale) < 1e-12:
        raise DegenerateGeometry(
            "long-run normalization is singular; no permanent component"
        )
    psi = a_perp / scale
    f, omega_used = _chol_with_ridge(omega)
    loadings = psi @ f
    denom = float(psi @ omega_used @ psi)
    share_1 = float(loadings[0] ** 2 / denom)
    share_2 = float(loadings[1] ** 2 / denom)
    return share_1, share_2


def hasbrouck_is(fit: VecmFit) -> InfoShares:
    """Information shares of the two markets from a rank-1 fit.

    The Cholesky factor credits contemporaneous common variance to whichever
    market comes first, so both orderings are reported: ordering_12 puts
    market 1 first, ordering_21 permutes the system (no refitting) and maps
    the shares back to original labels. midpoint averages the two.
    """
    _check_rank_one(fit)
    gamma_sum = sum(fit.gamma, np.zeros((2, 2)))
    direct = _is_for_ordering(fit.alpha, fit.beta, gamma_sum, fit.omega)
    permuted = _is_for_ordering(
        _PERMUTE @ fit.alpha,
        _PERMUTE @ fit.beta,
        _PERMUTE @ gamma_sum @ _PERMUTE,
        _PERMUTE @ fit.omega @ _PERMUTE,
    )
    ordering_21 = (permuted[1], permuted[0])
    midpoint = (
        (direct[0] + ordering_21[0]) / 2.0,
        (direct[1] + ordering_21[1]) / 2.0,
    )
    return InfoShares(ordering_12=direct, ordering_21=ordering_21, midpoint=midpoint)


@dataclass(frozen=True)
class PTDecomposition:
    """Permanent-transitory split of the observed price paths."""

    permanent: np.ndarray
    transitory: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    alpha_perp: np.ndarray
    beta_perp: np.ndarray


def gg_decompose(fit: VecmFit, Y) -> PTDecomposition:
    """Common-trend decomposition X_t = A1 W_t + A2 (beta' X_t).

    W_t = alpha_perp' X_t is the permanent (common factor) series; the
    loadings normalize the oblique projection so the identity reconstructs
    X_t exactly.
    """
    _check_rank_one(fit)
    arr = np.asarray(Y, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("Y must be a T x 2 matrix")
    alpha = fit.alpha[:, 0]
    beta = fit.beta[:, 0]
    a_perp = alpha_perp(alpha)
    b_perp = alpha_perp(beta)
    s1 = float(a_perp @ b_perp)
    s2 = float(beta @ alpha)
    if abs(s1) < 1e-12 or abs(s2) < 1e-12:
        raise DegenerateGeometry(
            "adjustment and cointegrating spaces are orthogonal; "
            "loadings are not identified"
        )
    A1 = (b_perp / s1).reshape(2, 1)
    A2 = (alpha / s2).reshape(2, 1)
    permanent = arr @ a_perp
    spread = arr @ beta
    transitory = spread[:, None] @ A2.T
    return PTDecomposition(
        permanent=permanent,
        transitory=transitory,
        A1=A1,
        A2=A2,
        alpha_perp=a_perp,
        beta_perp=b_perp,
    )


@dataclass(frozen=True)
class LrAlphaTest:
    """Likelihood-ratio test of alpha proportional to a given direction."""

    direction: Tuple[float, float]
    chi2: float
    p_value: float
    restricted_loglik: float
    unrestricted_loglik: float


def lr_test_alpha_direction(
    Y, p: int = 1, det_spec: str = "unrestricted-constant", direction=(0.0, 1.0)
) -> LrAlphaTest:
    """Test H0: alpha is proportional to `direction` (one degree of freedom).

    The cointegrating vector is frozen at its unrestricted estimate. The
    system is rotated so the restriction becomes an exclusion: in the
    rotated coordinates the equation orthogonal to the hypothesized
    direction must not load on the error-correction term, so the restricted
    model simply drops that regressor. The rotation has unit determinant,
    leaving log-determinant comparisons unchanged.
    """
    arr = _validate_input(Y, p, det_spec)
    h = np.asarray(direction, dtype=np.float64).reshape(-1)
    if h.shape != (2,):
        raise ValueError("direction must be a 2-vector")
    norm = math.hypot(h[0], h[1])
    if norm < 1e-300:
        raise ZeroVector("direction must be nonzero")
    h = h / norm
    fit = estimate_vecm(arr, p=p, r=1, det_spec=det_spec)
    Z0, Z1, D = _design(arr, p, det_spec)
    t_star = Z0.shape[0]
    ect = Z1 @ fit.beta
    rotation = np.array([[h[0], h[1]], [-h[1], h[0]]])
    rotated = Z0 @ rotation.T
    with_ect = np.column_stack([ect, D])
    resid = np.empty_like(rotated)
    for col, design in ((0, with_ect), (1, D)):
        y = rotated[:, col]
        if design.shape[1] == 0:
            resid[:, col] = y
            continue
        coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
        resid[:, col] = y - design @ coef
    omega_r = resid.T @ resid / t_star
    sign, logdet_r = np.linalg.slogdet(omega_r)
    if sign <= 0:
        raise NotPositiveDefinite("restricted residual covariance is singular")
    restricted_loglik = -0.5 * t_star * (
        2.0 * math.log(2.0 * math.pi) + logdet_r + 2.0
    )
    lr = max(2.0 * (fit.loglik - restricted_loglik), 0.0)
    return LrAlphaTest(
        direction=(float(h[0]), float(h[1])),
        chi2=float(lr),
        p_value=float(stats.chi2.sf(lr, 1)),
        restricted_loglik=float(restricted_loglik),
        unrestricted_loglik=float(fit.loglik),
    )
