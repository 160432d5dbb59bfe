"""Relative marginals and the shared scalar-block test.

A family of Hermitian operators ``F_l`` is *similar about I_k* when one unitary
``V`` brings every member to ``diag(s_l I_k, D_l)`` with ``s_l > 0``.  That is
the same as the operators sharing a k-dimensional common eigenspace with a
positive eigenvalue per operator, which is what :func:`check_similar_about_ik`
searches for.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import numerics
from .errors import DimensionMismatch, RankTooSmall, SimilarityRefused
from .numerics import dagger
from .states import BipartitePureState, marginal, schmidt

CERTIFICATE_TOL = 1e-7


@dataclass(frozen=True, eq=False)
class RelativeMarginal:
    matrix: np.ndarray
    source_rank: int


@dataclass(frozen=True, eq=False)
class SimilarityCertificate:
    """``v^dagger F_l v = diag(scales[l] I_k, blocks[l])`` for every member."""

    k: int
    v: np.ndarray
    scales: np.ndarray
    blocks: list

    @property
    def n(self) -> int:
        return self.v.shape[0]

    def block_form(self, index: int) -> np.ndarray:
        n, k = self.n, self.k
        out = np.zeros((n, n), dtype=complex)
        out[:k, :k] = self.scales[index] * np.eye(k)
        out[k:, k:] = self.blocks[index]
        return out

    def residuals(self, operators: Sequence) -> np.ndarray:
        """Frobenius defect of the block form for each operator."""
        mats = [_as_operator(f) for f in operators]
        if len(mats) != len(self.scales):
            raise DimensionMismatch(f"{len(mats)} operators for {len(self.scales)} scales")
        v = self.v
        return np.array(
            [np.linalg.norm(dagger(v) @ f @ v - self.block_form(i)) for i, f in enumerate(mats)]
        )

    def validate(self, operators: Sequence, tol: float = CERTIFICATE_TOL) -> bool:
        return (
            numerics.is_unitary(self.v)
            and bool(np.all(self.scales > 0))
            and float(self.residuals(operators).max(initial=0.0)) < tol
        )


def _as_operator(f) -> np.ndarray:
    return f.matrix if isinstance(f, RelativeMarginal) else numerics.as_matrix(f)


def relative_marginal(
    ref: BipartitePureState, other: BipartitePureState, side: str = "A"
) -> RelativeMarginal:
    """``rho(ref)^{-1/2} rho(other) rho(ref)^{-1/2}`` on one side.

    The inverse square root is taken on the support of ``rho(ref)`` only, so
    any part of ``other`` outside that support is projected away.
    """
    if ref.shape != other.shape:
        raise DimensionMismatch(f"{ref.shape} vs {other.shape}")
    rho_ref = marginal(ref, side).matrix
    root = numerics.psd_pinv_sqrt(rho_ref)
    f = root @ marginal(other, side).matrix @ root
    return RelativeMarginal((f + dagger(f)) / 2, numerics.numerical_rank(
        numerics.hermitian_eig(rho_ref).eigenvalues))


def relative_marginals(sources: Sequence[BipartitePureState], side: str = "A") -> list[RelativeMarginal]:
    """Relative marginals of every source against ``sources[0]`` (itself included)."""
    return [relative_marginal(sources[0], s, side) for s in sources]


def _positive_eigenspaces(f: np.ndarray) -> list[tuple[float, np.ndarray]]:
    eig = numerics.hermitian_eig(f)
    out = []
    for value, idx in numerics.cluster_eigenvalues(eig.eigenvalues):
        if value <= numerics.CLUSTER_TOL:
            continue
        vecs = eig.eigenvectors[:, idx]
        out.append((value, vecs @ dagger(vecs)))
    return out


def _common_blocks(mats: list[np.ndarray], min_dim: int) -> Iterator[tuple[tuple[int, ...], int, np.ndarray]]:
    """Depth-first walk over one positive eigenvalue cluster per operator.

    Yields ``(cluster path, dimension, basis)`` for every full path whose
    eigenspace intersection has dimension >= ``min_dim``, in lexicographic
    order of the path (clusters ordered by descending eigenvalue).
    """
    spaces = [_positive_eigenspaces(f) for f in mats]
    n = mats[0].shape[0]

    def walk(depth, current, path):
        if depth == len(mats):
            dim = int(round(np.trace(current).real))
            yield path, dim, numerics.canonical_basis(current, dim)
            return
        for c, (_, proj) in enumerate(spaces[depth]):
            dim, basis = numerics.subspace_intersection([current, proj])
            if dim >= min_dim:
                yield from walk(depth + 1, basis @ dagger(basis), path + (c,))

    yield from walk(0, np.eye(n, dtype=complex), ())


def _check_family(operators: Sequence) -> list[np.ndarray]:
    mats = [_as_operator(f) for f in operators]
    if not mats:
        raise ValueError("need at least one operator")
    n = mats[0].shape[0]
    for f in mats:
        if f.shape != (n, n):
            raise DimensionMismatch("operators must share one square dimension")
    return mats


def largest_common_block(operators: Sequence) -> int:
    """Largest k for which the operators are similar about I_k (0 if none)."""
    mats = _check_family(operators)
    return max((dim for _, dim, _ in _common_blocks(mats, 1)), default=0)


def check_similar_about_ik(operators: Sequence, k: int) -> SimilarityCertificate:
    """Certificate that ``operators`` are similar about ``I_k``.

    Raises :class:`SimilarityRefused` (carrying the best achievable k) when no
    common positive eigenspace of dimension ``k`` exists.
    """
    mats = _check_family(operators)
    n = mats[0].shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    found = next(iter(_common_blocks(mats, k)), None)
    if found is None:
        raise SimilarityRefused(k, largest_common_block(mats))
    _, _, basis = found
    shared = basis[:, :k]
    v = np.hstack([shared, numerics.unitary_completion(shared)])
    rest = v[:, k:]
    scales = np.array([float(np.real(np.trace(dagger(shared) @ f @ shared))) / k for f in mats])
    blocks = [dagger(rest) @ f @ rest for f in mats]
    blocks = [(d + dagger(d)) / 2 for d in blocks]
    cert = SimilarityCertificate(k, v, scales, blocks)
    if not cert.validate(mats):
        raise SimilarityRefused(k, largest_common_block(mats), "common block failed the conjugation check")
    return cert


def _top_coefficients(state: BipartitePureState, k: int) -> np.ndarray:
    form = schmidt(state)
    if form.rank < k:
        raise RankTooSmall(f"Schmidt rank {form.rank} is below k={k}")
    return form.coefficients[:k]


def k_subspace_equivalent(
    a: BipartitePureState, b: BipartitePureState, k: int, tol: float = 1e-9
) -> tuple[bool, float | None]:
    """Are the k largest Schmidt coefficients of ``a`` proportional to ``b``'s?

    Returns ``(True, c)`` with ``mu_t(a) = c * mu_t(b)`` for t <= k, else
    ``(False, None)``.  ``c`` is the median ratio and each ratio must sit within
    ``tol * c`` of it.
    """
    ratios = _top_coefficients(a, k) / _top_coefficients(b, k)
    c = float(np.median(ratios))
    if np.all(np.abs(ratios - c) <= tol * c):
        return True, c
    return False, None
