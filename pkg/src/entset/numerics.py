"""Dense complex linear algebra kernel.

Everything else in the package is written against these few functions:
Hermitian eigendecomposition, SVD, PSD square roots and the intersection of
projector ranges. Spectra are always returned in descending order so that
"the top-k" of anything is deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import NotHermitian, NotProjector, NotPSD, NotSquare

HERMITIAN_TOL = 1e-10
RANK_TOL = 1e-10
CLAMP_TOL = 1e-12
NEGATIVE_TOL = 1e-8
CLUSTER_TOL = 1e-8
PROJECTOR_TOL = 1e-9
INTERSECTION_TOL = 1e-8


@dataclass(frozen=True)
class HermitianEig:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.eigenvalues) @ v.conj().T


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def _require_square(a: np.ndarray) -> None:
    if a.shape[0] != a.shape[1]:
        raise NotSquare(f"matrix of shape {a.shape} is not square")


def _require_hermitian(a: np.ndarray, tol: float) -> np.ndarray:
    _require_square(a)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    asym = float(np.max(np.abs(a - dagger(a)), initial=0.0))
    if asym > tol * scale:
        raise NotHermitian(f"asymmetry {asym:.3g} exceeds tolerance")
    return (a + dagger(a)) / 2


def hermitian_eig(m, tol: float = HERMITIAN_TOL) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending."""
    a = _require_hermitian(as_matrix(m), tol)
    w, v = np.linalg.eigh(a)
    return HermitianEig(w[::-1].copy(), v[:, ::-1].copy())


def svd(m) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Full SVD ``m = U diag(s) W^dagger``.

    ``U`` and ``W`` are square unitaries; ``s`` has ``min(m.shape)``
    non-negative entries in descending order.
    """
    a = as_matrix(m)
    u, s, vh = np.linalg.svd(a, full_matrices=True)
    return u, s, dagger(vh)


def rect_diag(values, shape: tuple[int, int]) -> np.ndarray:
    """Rectangular matrix of ``shape`` carrying ``values`` on its diagonal."""
    out = np.zeros(shape, dtype=complex)
    n = min(shape[0], shape[1], len(values))
    out[np.arange(n), np.arange(n)] = np.asarray(values)[:n]
    return out


def _psd_spectrum(m) -> HermitianEig:
    eig = hermitian_eig(m)
    w = eig.eigenvalues
    if w.size and w[-1] < -NEGATIVE_TOL:
        raise NotPSD(f"smallest eigenvalue {w[-1]:.3g} is negative")
    # roundoff in [-NEGATIVE_TOL, 0) is treated as an exact zero
    return HermitianEig(np.where(w < 0, 0.0, w), eig.eigenvectors)


def psd_sqrt(m) -> np.ndarray:
    eig = _psd_spectrum(m)
    v = eig.eigenvectors
    return (v * np.sqrt(eig.eigenvalues)) @ dagger(v)


def psd_pinv_sqrt(m, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Inverse square root on the support of ``m``, zero on its kernel.

    Eigenvalues at or below ``rank_tol`` times the largest one count as zero.
    """
    eig = _psd_spectrum(m)
    w, v = eig.eigenvalues, eig.eigenvectors
    cutoff = rank_tol * (w[0] if w.size else 0.0)
    keep = w > cutoff
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (v * inv) @ dagger(v)


def support_projector(m, rank_tol: float = RANK_TOL) -> np.ndarray:
    eig = _psd_spectrum(m)
    w, v = eig.eigenvalues, eig.eigenvectors
    keep = w > rank_tol * (w[0] if w.size else 0.0)
    return v[:, keep] @ dagger(v[:, keep])


def numerical_rank(values, rank_tol: float = RANK_TOL) -> int:
    """Count of entries above ``rank_tol`` times the largest absolute entry."""
    values = np.abs(np.asarray(values, dtype=float))
    if values.size == 0 or values.max() == 0.0:
        return 0
    return int(np.count_nonzero(values > rank_tol * values.max()))


def cluster_eigenvalues(values, atol: float = CLUSTER_TOL) -> list[tuple[float, np.ndarray]]:
    """Group a descending spectrum into runs of (near) equal values.

    Single linkage: neighbours closer than ``atol`` share a cluster. Returns
    ``(mean value, indices)`` pairs in descending order of value.
    """
    values = np.asarray(values, dtype=float)
    clusters: list[list[int]] = []
    for i, w in enumerate(values):
        if clusters and abs(values[clusters[-1][-1]] - w) <= atol:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return [(float(values[c].mean()), np.array(c)) for c in clusters]


def is_unitary(m, tol: float = 1e-9) -> bool:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        return False
    return bool(np.linalg.norm(dagger(a) @ a - np.eye(a.shape[0])) <= tol)


def fix_phases(columns: np.ndarray) -> np.ndarray:
    """Rotate each column so its largest-magnitude entry is real positive."""
    out = np.array(columns, dtype=complex)
    for j in range(out.shape[1]):
        col = out[:, j]
        i = int(np.argmax(np.abs(col)))
        if abs(col[i]) > 0:
            out[:, j] = col * (abs(col[i]) / col[i])
    return out


def canonical_basis(projector: np.ndarray, dim: int) -> np.ndarray:
    """Deterministic orthonormal basis for the range of a projector.

    Pivoted QR on the projector's columns prefers coordinate directions, so a
    coordinate-aligned subspace comes back as (phase-fixed) unit vectors.
    """
    if dim == 0:
        return np.zeros((projector.shape[0], 0), dtype=complex)
    q, _, _ = scipy.linalg.qr(projector, pivoting=True)
    basis = q[:, :dim]
    # re-orthonormalise against the exact range to shed QR roundoff
    basis = projector @ basis
    basis, _ = np.linalg.qr(basis)
    return fix_phases(basis)


def unitary_completion(basis: np.ndarray) -> np.ndarray:
    """Orthonormal columns spanning the complement of ``basis``'s span."""
    n, d = basis.shape
    complement = np.eye(n) - basis @ dagger(basis)
    return canonical_basis(complement, n - d)


def _require_projector(p: np.ndarray, tol: float) -> np.ndarray:
    p = _require_hermitian(as_matrix(p), tol)
    if np.linalg.norm(p @ p - p) > tol * max(1.0, p.shape[0]):
        raise NotProjector("matrix is not idempotent")
    return p


def subspace_intersection(
    projectors: Sequence[np.ndarray], tol: float = INTERSECTION_TOL
) -> tuple[int, np.ndarray]:
    """Intersection of the ranges of several orthogonal projectors.

    A vector lies in every range exactly when the averaged projector has
    eigenvalue 1 on it; eigenvalues within ``tol`` of 1 are counted.
    Returns ``(dimension, basis)`` with the basis as orthonormal columns.
    """
    if not projectors:
        raise ValueError("need at least one projector")
    mats = [_require_projector(p, PROJECTOR_TOL) for p in projectors]
    n = mats[0].shape[0]
    if any(p.shape != (n, n) for p in mats):
        raise NotSquare("projectors must share one dimension")
    avg = sum(mats) / len(mats)
    eig = hermitian_eig(avg)
    dim = int(np.count_nonzero(eig.eigenvalues >= 1.0 - tol))
    raw = eig.eigenvectors[:, :dim]
    return dim, canonical_basis(raw @ dagger(raw), dim)
