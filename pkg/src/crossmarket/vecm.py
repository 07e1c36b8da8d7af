"""Bivariate vector error correction estimation and cointegration testing.

Reduced-rank regression in the Johansen style: short-run dynamics and
deterministic terms are partialled out of both the differences and the
lagged levels, the cointegrating direction comes from the eigenproblem on
the residual product-moment matrices, and the adjustment/short-run
coefficients from a second-stage least squares. Includes the trace test
with embedded critical values, Ljung-Box residual diagnostics, and Granger
causality on differenced data.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import stats
from scipy.linalg import solve_triangular

from .errors import (
    ConfigError,
    LagTooLarge,
    RankMismatch,
    SampleTooShort,
    SingularMoments,
)

DET_SPECS = ("none", "unrestricted-constant")

# Trace-test critical values for the two deterministic cases, keyed by
# n - r (remaining dimension under the null) then confidence level.
TRACE_CRITICAL_VALUES = {
    "none": {
        1: {90: 2.9762, 95: 4.1296, 99: 6.9406},
        2: {90: 10.4741, 95: 12.3212, 99: 16.3640},
    },
    "unrestricted-constant": {
        1: {90: 2.7055, 95: 3.8415, 99: 6.6349},
        2: {90: 13.4294, 95: 15.4943, 99: 19.9349},
    },
}

_EIGEN_CLIP = 1e-12


@dataclass(frozen=True)
class VecmFit:
    """Estimated error-correction system for two markets, rank 1."""

    alpha: np.ndarray
    beta: np.ndarray
    gamma: Tuple[np.ndarray, ...]
    omega: np.ndarray
    residuals: np.ndarray
    loglik: float
    lags_p: int
    det_spec: str
    eigenvalues: Tuple[float, ...]

    @property
    def pi(self) -> np.ndarray:
        """Long-run impact matrix alpha @ beta'."""
        return self.alpha @ self.beta.T


@dataclass(frozen=True)
class JohansenResult:
    """Trace-test summary: eigenvalues, statistics, and selected rank."""

    eigenvalues: Tuple[float, ...]
    trace_stats: Tuple[float, ...]
    critical_values: Tuple[float, ...]
    selected_rank: int
    det_spec: str
    level: int


@dataclass(frozen=True)
class ResidualDiagnostics:
    """Ljung-Box portmanteau result for one residual series."""

    acf: Tuple[float, ...]
    q_stat: float
    p_value: float
    max_lag: int


@dataclass(frozen=True)
class GrangerRow:
    """One Granger F test: does `cause` help predict `effect` at this lag?"""

    direction: str
    lag: int
    f_stat: float
    p_value: float


def _validate_input(Y, p: int, det_spec: str) -> np.ndarray:
    if det_spec not in DET_SPECS:
        raise ValueError(f"det_spec must be one of {DET_SPECS}")
    if p < 1:
        raise ValueError("lag order p must be at least 1")
    arr = np.asarray(Y, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("Y must be a T x 2 matrix")
    if not np.all(np.isfinite(arr)):
        raise ValueError("Y contains non-finite values")
    if arr.shape[0] < 20 + 4 * p:
        raise SampleTooShort(
            f"need at least {20 + 4 * p} observations for p={p}, got {arr.shape[0]}"
        )
    return arr


def _design(Y: np.ndarray, p: int, det_spec: str):
    """Target differences, lagged levels, and nuisance regressors."""
    dY = np.diff(Y, axis=0)
    Z0 = dY[p - 1 :]
    Z1 = Y[p - 1 : -1]
    blocks = [dY[p - 1 - i : dY.shape[0] - i] for i in range(1, p)]
    if det_spec == "unrestricted-constant":
        blocks.append(np.ones((Z0.shape[0], 1)))
    if blocks:
        D = np.column_stack(blocks)
    else:
        D = np.empty((Z0.shape[0], 0))
    return Z0, Z1, D


def _partial_out(A: np.ndarray, D: np.ndarray) -> np.ndarray:
    if D.shape[1] == 0:
        return A
    coef, _, _, _ = np.linalg.lstsq(D, A, rcond=None)
    return A - D @ coef


def _rrr_eigen(Y: np.ndarray, p: int, det_spec: str):
    """Eigenvalues and candidate beta directions of the reduced-rank problem."""
    Z0, Z1, D = _design(Y, p, det_spec)
    t_star = Z0.shape[0]
    R0 = _partial_out(Z0, D)
    R1 = _partial_out(Z1, D)
    S00 = R0.T @ R0 / t_star
    S11 = R1.T @ R1 / t_star
    S01 = R0.T @ R1 / t_star
    try:
        chol11 = np.linalg.cholesky(S11)
        np.linalg.cholesky(S00)
    except np.linalg.LinAlgError:
        raise SingularMoments("product-moment matrices are rank deficient")
    C = solve_triangular(chol11, S01.T, lower=True)
    M = C @ np.linalg.solve(S00, C.T)
    lam, vecs = np.linalg.eigh((M + M.T) / 2.0)
    order = np.argsort(lam)[::-1]
    lam = np.clip(lam[order], 0.0, 1.0 - _EIGEN_CLIP)
    beta_all = solve_triangular(chol11.T, vecs[:, order], lower=False)
    return lam, beta_all, Z0, Z1, D, t_star


def _stationarity_screen(Y: np.ndarray):
    for j in range(Y.shape[1]):
        col = Y[:, j] - Y[:, j].mean()
        denom = float(col @ col)
        if denom <= 0:
            continue
        phi = float(col[:-1] @ col[1:]) / denom
        if phi < 0.9:
            warnings.warn(
                f"column {j} has lag-1 autocorrelation {phi:.3f}; "
                "it may already be stationary rather than integrated",
                stacklevel=3,
            )


def estimate_vecm(
    Y, p: int = 1, r: int = 1, det_spec: str = "unrestricted-constant"
) -> VecmFit:
    """Fit the rank-1 error-correction system on a T x 2 level matrix.

    The cointegrating vector is normalized so its first element is 1. The
    returned residual covariance divides by the usable sample length.
    """
    arr = _validate_input(Y, p, det_spec)
    if r != 1:
        raise RankMismatch("only cointegration rank 1 is supported")
    _stationarity_screen(arr)
    lam, beta_all, Z0, Z1, D, t_star = _rrr_eigen(arr, p, det_spec)
    beta = beta_all[:, :1]
    if abs(beta[0, 0]) < 1e-300:
        raise SingularMoments("cointegrating vector cannot be normalized")
    beta = beta / beta[0, 0]
    ect = Z1 @ beta
    X = np.column_stack([ect, D])
    coef, _, rank, _ = np.linalg.lstsq(X, Z0, rcond=None)
    if rank < X.shape[1]:
        raise SingularMoments("second-stage regressors are collinear")
    U = Z0 - X @ coef
    alpha = coef[:1, :].T
    gammas = tuple(
        coef[1 + 2 * (i - 1) : 1 + 2 * i, :].T.copy() for i in range(1, p)
    )
    omega = U.T @ U / t_star
    sign, logdet = np.linalg.slogdet(omega)
    if sign <= 0:
        raise SingularMoments("residual covariance is singular")
    loglik = -0.5 * t_star * (2.0 * math.log(2.0 * math.pi) + logdet + 2.0)
    return VecmFit(
        alpha=alpha,
        beta=beta,
        gamma=gammas,
        omega=omega,
        residuals=U,
        loglik=float(loglik),
        lags_p=p,
        det_spec=det_spec,
        eigenvalues=tuple(float(v) for v in lam),
    )


def johansen_trace(
    Y, p: int = 1, det_spec: str = "unrestricted-constant", level: int = 90
) -> JohansenResult:
    """Johansen trace test for the number of cointegrating relations.

    The statistic for rank r sums the remaining log eigenvalue terms; the
    selected rank is the smallest r whose null is not rejected (2 when both
    are).
    """
    arr = _validate_input(Y, p, det_spec)
    if level not in (90, 95, 99):
        raise ValueError("level must be 90, 95, or 99")
    _stationarity_screen(arr)
    lam, _, _, _, _, t_star = _rrr_eigen(arr, p, det_spec)
    stats_list = []
    crit_list = []
    for r in range(2):
        stat = -t_star * float(np.sum(np.log1p(-lam[r:])))
        stats_list.append(stat)
        crit_list.append(TRACE_CRITICAL_VALUES[det_spec][2 - r][level])
    selected = 2
    for r in range(2):
        if stats_list[r] <= crit_list[r]:
            selected = r
            break
    return JohansenResult(
        eigenvalues=tuple(float(v) for v in lam),
        trace_stats=tuple(stats_list),
        critical_values=tuple(crit_list),
        selected_rank=selected,
        det_spec=det_spec,
        level=level,
    )


def _sample_acf(x: np.ndarray, max_lag: int) -> np.ndarray:
    centered = x - x.mean()
    denom = float(centered @ centered)
    if denom <= 0:
        raise SingularMoments("series is constant; autocorrelation undefined")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for k in range(1, max_lag + 1):
        out[k] = float(centered[:-k] @ centered[k:]) / denom
    return out


def residual_diagnostics(
    fit_or_residuals: Union[VecmFit, np.ndarray], max_lag: int = 10
) -> List[ResidualDiagnostics]:
    """Per-series ACF and Ljung-Box portmanteau test of the residuals."""
    if isinstance(fit_or_residuals, VecmFit):
        resid = fit_or_residuals.residuals
    else:
        resid = np.asarray(fit_or_residuals, dtype=np.float64)
    if resid.ndim == 1:
        resid = resid[:, None]
    T = resid.shape[0]
    if max_lag < 1:
        raise ValueError("max_lag must be at least 1")
    if max_lag >= T / 4:
        raise LagTooLarge(f"max_lag {max_lag} too large for T={T} (need < T/4)")
    results = []
    for j in range(resid.shape[1]):
        acf = _sample_acf(resid[:, j], max_lag)
        terms = acf[1:] ** 2 / (T - np.arange(1, max_lag + 1))
        q = float(T * (T + 2) * terms.sum())
        p_value = float(stats.chi2.sf(q, max_lag))
        results.append(
            ResidualDiagnostics(
                acf=tuple(float(v) for v in acf),
                q_stat=q,
                p_value=p_value,
                max_lag=max_lag,
            )
        )
    return results


def _lag_matrix(x: np.ndarray, k: int) -> np.ndarray:
    return np.column_stack([x[k - i : x.shape[0] - i] for i in range(1, k + 1)])


def granger_f_test(returns, max_lag: int = 1) -> List[GrangerRow]:
    """Granger causality F tests on differenced data, both directions.

    For each lag k the unrestricted model adds k lags of the other market to
    k own lags (plus intercept); the F statistic compares residual sums with
    (k, T_eff - 2k - 1) degrees of freedom. Levels input is refused: the
    pair is cointegrated, and regressing levels on levels invites spurious
    fits.
    """
    arr = np.asarray(returns, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("returns must be a T x 2 matrix")
    T = arr.shape[0]
    if max_lag < 1:
        raise ValueError("max_lag must be at least 1")
    if T <= 10 * max_lag:
        raise SampleTooShort(f"need more than {10 * max_lag} rows, got {T}")
    for j in range(2):
        col = arr[:, j] - arr[:, j].mean()
        denom = float(col @ col)
        if denom > 0 and float(col[:-1] @ col[1:]) / denom > 0.97:
            raise ConfigError(
                "input looks like price levels (lag-1 autocorrelation > 0.97); "
                "pass differenced data"
            )
    rows = []
    for k in range(1, max_lag + 1):
        for cause, effect in ((0, 1), (1, 0)):
            y = arr[k:, effect]
            own = _lag_matrix(arr[:, effect], k)
            other = _lag_matrix(arr[:, cause], k)
            ones = np.ones((y.shape[0], 1))
            Xu = np.column_stack([ones, own, other])
            Xr = np.column_stack([ones, own])
            coef_u, _, rank_u, _ = np.linalg.lstsq(Xu, y, rcond=None)
            coef_r, _, rank_r, _ = np.linalg.lstsq(Xr, y, rcond=None)
            if rank_u < Xu.shape[1] or rank_r < Xr.shape[1]:
                raise SingularMoments(f"collinear Granger design at lag {k}")
            rss_u = float(np.sum((y - Xu @ coef_u) ** 2))
            rss_r = float(np.sum((y - Xr @ coef_r) ** 2))
            dof = y.shape[0] - 2 * k - 1
            if dof <= 0 or rss_u <= 0:
                raise SingularMoments(f"degenerate Granger regression at lag {k}")
            f_stat = max(((rss_r - rss_u) / k) / (rss_u / dof), 0.0)
            p_value = float(stats.f.sf(f_stat, k, dof))
            rows.append(
                GrangerRow(
                    direction=f"{cause + 1}->{effect + 1}",
                    lag=k,
                    f_stat=float(f_stat),
                    p_value=p_value,
                )
            )
    return rows
