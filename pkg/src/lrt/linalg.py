"""Dense linear-algebra primitives: SVD-backed norms, the nuclear-norm
subdifferential, principal angles and closed-form baseline transforms.

Data matrices hold points as columns throughout.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import DimensionError, NumericalError, ParameterError, SingularityError


def as_matrix(A, name: str = "matrix") -> np.ndarray:
    """Validate ``A`` as a finite 2-D float array with at least one row and column."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise DimensionError(f"{name} must be 2-D, got shape {A.shape}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise DimensionError(f"{name} must have at least one row and column, got {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ParameterError(f"{name} has non-finite entries")
    return A


@dataclass(frozen=True)
class SvdFactors:
    U: np.ndarray
    singular_values: np.ndarray
    V: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.singular_values) @ self.V.T


@dataclass(frozen=True)
class SubspaceBasis:
    basis: np.ndarray

    def __post_init__(self):
        B = as_matrix(self.basis, "basis")
        if B.shape[1] > B.shape[0]:
            raise DimensionError(f"subspace dim {B.shape[1]} exceeds ambient dim {B.shape[0]}")
        object.__setattr__(self, "basis", B)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def subspace_dim(self) -> int:
        return self.basis.shape[1]

    @classmethod
    def from_vectors(cls, vectors) -> "SubspaceBasis":
        """Orthonormalize the columns of ``vectors`` (must be independent)."""
        Q, _ = np.linalg.qr(as_matrix(vectors, "vectors"))
        return cls(Q)


def _basis(S) -> np.ndarray:
    return S.basis if isinstance(S, SubspaceBasis) else as_matrix(S, "basis")


def _canonicalize_signs(U, Vt):
    # largest-magnitude entry of every U column made positive
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    U = U * signs
    k = Vt.shape[0]
    Vt = Vt * signs[:k, None]
    return U, Vt


def _svd(A, full_matrices=False):
    try:
        U, s, Vt = np.linalg.svd(A, full_matrices=full_matrices)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge for a {A.shape} matrix") from exc
    if full_matrices and U.shape[1] > Vt.shape[0]:
        # extra left null-space columns have no partner; canonicalize them alone
        k = Vt.shape[0]
        U_head, Vt = _canonicalize_signs(U[:, :k], Vt)
        U_tail, _ = _canonicalize_signs(U[:, k:], np.zeros((0, 0)))
        return np.hstack([U_head, U_tail]), s, Vt
    U, Vt = _canonicalize_signs(U, Vt)
    return U, s, Vt


def svd(A) -> SvdFactors:
    """Thin SVD with canonical signs."""
    A = as_matrix(A)
    U, s, Vt = _svd(A)
    return SvdFactors(U, s, Vt.T)


def singular_values(A) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.size == 0:
        return np.zeros(0)
    try:
        return np.linalg.svd(A, compute_uv=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge for a {A.shape} matrix") from exc


def nuclear_norm(A) -> float:
    return float(np.sum(singular_values(A)))


def spectral_norm(A) -> float:
    s = singular_values(A)
    return float(s[0]) if s.size else 0.0


def frobenius_norm(A) -> float:
    return float(np.sqrt(np.sum(np.square(np.asarray(A, dtype=np.float64)))))


def numerical_rank(A, delta_rel: float = 1e-6) -> int:
    """Count of singular values above ``delta_rel * sigma_max``."""
    s = singular_values(A)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > delta_rel * s[0]))


def nuclear_subdifferential(A, delta: float | None = None, rng_seed: int = 0,
                            delta_rel: float = 1e-6) -> np.ndarray:
    """One element G of the subdifferential of the nuclear norm at ``A``.

    Singular values below ``delta`` are treated as zero. The corresponding
    singular subspaces get a random block ``B`` scaled to unit spectral norm,
    so ``||G||_2 <= 1`` and ``<G, A>`` equals the nuclear norm of the retained
    part. When ``delta`` is None it defaults to ``delta_rel * sigma_max``.
    """
    A = as_matrix(A)
    if delta is not None and not delta > 0:
        raise ParameterError(f"delta must be positive, got {delta}")
    if A.shape[0] < A.shape[1]:
        return nuclear_subdifferential(A.T, delta, rng_seed, delta_rel).T

    m, n = A.shape
    U, sigma, Vt = _svd(A, full_matrices=True)
    if delta is None:
        delta = delta_rel * sigma[0] if sigma[0] > 0 else delta_rel
    n_small = int(np.sum(sigma < delta))
    keep = n - n_small

    G = U[:, :keep] @ Vt[:keep, :]
    if n_small:
        rng = np.random.default_rng(rng_seed)
        B = rng.standard_normal((m - keep, n_small))
        B /= spectral_norm(B)
        G = G + U[:, keep:] @ B @ Vt[keep:, :]
    return G


def principal_cosines(S1, S2) -> np.ndarray:
    """Cosines of all principal angles, descending."""
    B1, B2 = _basis(S1), _basis(S2)
    if B1.shape[0] != B2.shape[0]:
        raise DimensionError(f"ambient dims differ: {B1.shape[0]} vs {B2.shape[0]}")
    return np.clip(singular_values(B1.T @ B2), -1.0, 1.0)


def principal_angles(S1, S2) -> np.ndarray:
    """All min(k1, k2) principal angles in radians, ascending.

    Angles below pi/4 come from the sines (singular values of the part of the
    smaller basis outside the larger span); arccos loses accuracy there.
    """
    B1, B2 = _basis(S1), _basis(S2)
    if B1.shape[1] < B2.shape[1]:
        B1, B2 = B2, B1
    cos_angles = np.arccos(principal_cosines(B1, B2))
    sines = np.clip(singular_values(B2 - B1 @ (B1.T @ B2))[::-1], 0.0, 1.0)
    sin_angles = np.arcsin(sines)
    return np.where(sin_angles < np.pi / 4, sin_angles, cos_angles)


def smallest_principal_angle(S1, S2) -> float:
    """Smallest principal angle in radians, in [0, pi/2]."""
    return float(principal_angles(S1, S2)[0])


def mean_cosine_principal_angles(S1, S2) -> float:
    return float(np.mean(principal_cosines(S1, S2)))


def fit_subspace_basis(Y, k: int) -> SubspaceBasis:
    """Top-``k`` left singular vectors of the point cloud ``Y``."""
    Y = as_matrix(Y, "Y")
    if not 1 <= k <= min(Y.shape):
        raise ParameterError(f"k={k} out of range for a {Y.shape} matrix")
    U, _, _ = _svd(Y)
    return SubspaceBasis(U[:, :k])


def orthogonalizing_transform(bases: Sequence) -> np.ndarray:
    """Closed-form ``(U'U)^-1 U'`` for the stacked bases ``U = [U_1, ..., U_C]``.

    Renders independent subspaces pairwise orthogonal. Raises
    SingularityError when the stacked basis is rank deficient.
    """
    U = np.hstack([_basis(b) for b in bases])
    if U.shape[1] > U.shape[0]:
        raise SingularityError(
            f"stacked basis has {U.shape[1]} columns in R^{U.shape[0]}; subspaces are dependent")
    cond = np.linalg.cond(U)
    if not np.isfinite(cond) or cond >= 1e12:
        raise SingularityError(f"stacked basis is rank deficient (condition number {cond:.3g})")
    return np.linalg.solve(U.T @ U, U.T)


def lda_transform(data, out_dim: int) -> np.ndarray:
    """LDA projection (rows orthonormal) for a labeled dataset with points as columns."""
    Y = np.asarray(data.Y, dtype=np.float64)
    labels = np.asarray(data.labels)
    d = Y.shape[0]
    classes = np.unique(labels)
    if classes.size < 2:
        raise ParameterError("LDA needs at least two classes")
    if not 1 <= out_dim <= d:
        raise ParameterError(f"out_dim={out_dim} out of range for d={d}")

    mean = Y.mean(axis=1, keepdims=True)
    Sw = np.zeros((d, d))
    Sb = np.zeros((d, d))
    for c in classes:
        Yc = Y[:, labels == c]
        mc = Yc.mean(axis=1, keepdims=True)
        Z = Yc - mc
        Sw += Z @ Z.T
        Sb += Yc.shape[1] * (mc - mean) @ (mc - mean).T
    eps = 1e-6 * np.trace(Sw) / d
    if eps <= 0:
        eps = 1e-12
    try:
        _, vecs = scipy.linalg.eigh(Sb, Sw + eps * np.eye(d))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("generalized eigensolver failed in LDA") from exc
    W = vecs[:, ::-1][:, :out_dim]
    Q, _ = np.linalg.qr(W)
    return Q.T
