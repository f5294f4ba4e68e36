"""Dense Hermitian kernel: eigendecomposition, PSD square root, support-restricted powers."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IterationFailure, NonHermitianError, NonSquareError, NotPSDError, ParameterError

EPS_HERM = 1e-9
EPS_PSD = 1e-10
EPS_NULL = 1e-12
EPS_RECON = 1e-9
EPS_ORTH = 1e-8


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigenvalues sorted descending, with eigenvectors as matching columns if requested."""

    values: np.ndarray
    vectors: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.values)

    def tolist(self) -> list[float]:
        return [float(v) for v in self.values]


def as_matrix(H) -> np.ndarray:
    """Coerce to a finite square complex array."""
    H = np.asarray(H, dtype=complex)
    if H.ndim != 2 or H.shape[0] != H.shape[1] or H.shape[0] == 0:
        raise NonSquareError(f"expected a nonempty square matrix, got shape {H.shape}")
    if not np.all(np.isfinite(H)):
        raise ParameterError("matrix has non-finite entries")
    return H


def hermitian_part(H: np.ndarray, tol: float = EPS_HERM) -> np.ndarray:
    """Return (H + H^dagger)/2 after checking H is Hermitian to within ``tol`` (max-norm)."""
    H = as_matrix(H)
    dev = np.max(np.abs(H - H.conj().T))
    if dev > tol:
        raise NonHermitianError(f"matrix deviates from Hermitian by {dev:.3e} (tolerance {tol:.1e})")
    return (H + H.conj().T) / 2


def eig_hermitian(H, want_vectors: bool = False) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.

    The input is symmetrized before decomposition. Within a degenerate
    cluster the order of the returned eigenvectors is arbitrary.
    """
    Hs = hermitian_part(H)
    try:
        if want_vectors:
            w, v = np.linalg.eigh(Hs)
        else:
            w, v = np.linalg.eigvalsh(Hs), None
    except np.linalg.LinAlgError as exc:
        raise IterationFailure(str(exc)) from exc
    order = np.argsort(w)[::-1]
    w = w[order]
    if v is not None:
        v = v[:, order]
    return Spectrum(values=w, vectors=v)


def _psd_decomposition(H):
    spec = eig_hermitian(H, want_vectors=True)
    w, v = spec.values, spec.vectors
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[-1] < -EPS_PSD * scale:
        raise NotPSDError(f"smallest eigenvalue {w[-1]:.3e} is negative beyond tolerance")
    return np.clip(w, 0.0, None), v


def psd_sqrt(H) -> np.ndarray:
    """Positive square root of a Hermitian PSD matrix; tiny negative eigenvalues are clamped."""
    w, v = _psd_decomposition(H)
    return (v * np.sqrt(w)) @ v.conj().T


def pseudo_power(H, y: float) -> np.ndarray:
    """Matrix power restricted to the support of ``H``.

    Eigenvalues below ``EPS_NULL * max(1, largest)`` count as exact zeros and
    map to zero for every exponent, negative ones included.
    """
    w, v = _psd_decomposition(H)
    cutoff = EPS_NULL * max(1.0, float(w[0]))
    keep = w > cutoff
    if not np.any(keep):
        return np.zeros_like(v)
    vk = v[:, keep]
    return (vk * w[keep] ** y) @ vk.conj().T


def kron(A, B) -> np.ndarray:
    return np.kron(np.asarray(A, dtype=complex), np.asarray(B, dtype=complex))


def left_modulus(K) -> np.ndarray:
    """sqrt(K K^dagger) from the SVD of ``K``.

    Equal to ``psd_sqrt(K @ K^dagger)`` but keeps singular values at machine
    precision; squaring first would push rank-deficient zeros up to ~1e-8.
    """
    K = as_matrix(K)
    try:
        u, s, _ = np.linalg.svd(K)
    except np.linalg.LinAlgError as exc:
        raise IterationFailure(str(exc)) from exc
    S = (u * s) @ u.conj().T
    return (S + S.conj().T) / 2
