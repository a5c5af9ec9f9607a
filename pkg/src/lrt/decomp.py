"""Low-rank plus sparse decomposition and orthogonal matching pursuit."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NumericalError, ParameterError
from .linalg import as_matrix, spectral_norm


@dataclass
class RpcaResult:
    L: np.ndarray
    S: np.ndarray
    iterations_used: int
    primal_residual: float
    converged: bool


def default_beta(shape) -> float:
    return 1.0 / np.sqrt(max(shape))


def _soft(X, tau):
    return np.sign(X) * np.maximum(np.abs(X) - tau, 0.0)


def _svt(X, tau):
    try:
        U, s, Vt = np.linalg.svd(X, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("SVD failed inside singular value thresholding") from exc
    s = np.maximum(s - tau, 0.0)
    r = int(np.count_nonzero(s))
    return (U[:, :r] * s[:r]) @ Vt[:r]


def rpca(M, beta: float | None = None, tol: float = 1e-7, max_iter: int = 500,
         mu_growth: float = 1.6) -> RpcaResult:
    """Principal component pursuit by the inexact augmented Lagrange multiplier method.

    Solves ``min ||L||_* + beta ||S||_1  s.t.  M = L + S`` and stops once
    ``||M - L - S||_F / ||M||_F <= tol``. Hitting ``max_iter`` is reported via
    ``converged=False`` rather than raised.
    """
    M = as_matrix(M, "M")
    if beta is None:
        beta = default_beta(M.shape)
    if not beta > 0:
        raise ParameterError(f"beta must be positive, got {beta}")

    norm_fro = np.linalg.norm(M)
    if norm_fro == 0:
        return RpcaResult(np.zeros_like(M), np.zeros_like(M), 0, 0.0, True)

    norm_two = spectral_norm(M)
    dual = M / max(norm_two, np.max(np.abs(M)) / beta)
    mu = 1.25 / norm_two
    mu_max = mu * 1e7
    L = np.zeros_like(M)
    S = np.zeros_like(M)
    residual = 1.0
    for it in range(1, max_iter + 1):
        S = _soft(M - L + dual / mu, beta / mu)
        L = _svt(M - S + dual / mu, 1.0 / mu)
        Z = M - L - S
        dual = dual + mu * Z
        mu = min(mu * mu_growth, mu_max)
        residual = np.linalg.norm(Z) / norm_fro
        if residual <= tol:
            return RpcaResult(L, S, it, float(residual), True)
    return RpcaResult(L, S, max_iter, float(residual), False)


def omp(y, D, sparsity: int) -> np.ndarray:
    """Greedy sparse code of ``y`` over the atoms (columns) of ``D``.

    Atoms are compared after l2 normalization; returned coefficients refer to
    the original atom scales. Ties pick the lowest atom index.
    """
    y = np.asarray(y, dtype=np.float64).ravel()
    D = np.asarray(D, dtype=np.float64)
    if D.ndim != 2 or D.shape[0] != y.size:
        raise DimensionError(f"dictionary shape {D.shape} incompatible with signal of length {y.size}")
    if sparsity < 1 or sparsity > D.shape[1]:
        raise ParameterError(f"sparsity {sparsity} not in [1, {D.shape[1]}]")
    norms = np.linalg.norm(D, axis=0)
    usable = norms > 0
    if not usable.any():
        raise ParameterError("dictionary has no nonzero atoms")
    Dn = np.zeros_like(D)
    Dn[:, usable] = D[:, usable] / norms[usable]

    coef = np.zeros(D.shape[1])
    support: list[int] = []
    x = np.zeros(0)
    residual = y.copy()
    scale = max(np.linalg.norm(y), 1.0)
    for _ in range(sparsity):
        corr = np.abs(Dn.T @ residual)
        corr[~usable] = -1.0
        corr[support] = -1.0
        j = int(np.argmax(corr))
        if corr[j] <= 1e-14 * scale:
            break
        support.append(j)
        x, *_ = np.linalg.lstsq(Dn[:, support], y, rcond=None)
        residual = y - Dn[:, support] @ x
    if support:
        coef[support] = x / norms[support]
    return coef
