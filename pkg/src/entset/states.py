"""Bipartite pure states and their Schmidt data.

A state is held as its amplitude matrix ``M`` with
``|psi> = sum_ij M[i, j] |i>_A |j>_B``.  With this convention a product of
local operators acts as ``(A (x) B)|psi>  ->  A @ M @ B.T`` and the marginals
are ``rho_A = M M^dagger`` and ``rho_B = M^T conj(M)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from . import numerics
from .errors import DimensionMismatch, NotNormalized, NotPSD, NotUnitary, NotUnitSum
from .numerics import dagger

Side = Literal["A", "B"]

NORM_TOL = 1e-10


def check_side(side: str) -> Side:
    s = str(side).upper()
    if s not in ("A", "B"):
        raise ValueError(f"side must be 'A' or 'B', got {side!r}")
    return s  # type: ignore[return-value]


@dataclass(frozen=True, eq=False)
class BipartitePureState:
    """Normalized pure state of a ``dim_a x dim_b`` system."""

    amplitudes: np.ndarray
    label: str | None = None

    def __post_init__(self):
        m = numerics.as_matrix(self.amplitudes).copy()
        norm = np.linalg.norm(m)
        if abs(norm - 1.0) > NORM_TOL:
            raise NotNormalized(f"amplitude norm is {norm!r}, expected 1")
        m.setflags(write=False)
        object.__setattr__(self, "amplitudes", m)

    @classmethod
    def from_raw(cls, raw, label: str | None = None) -> "BipartitePureState":
        """Normalize an arbitrary non-zero amplitude matrix."""
        m = numerics.as_matrix(raw)
        norm = np.linalg.norm(m)
        if norm == 0:
            raise NotNormalized("cannot normalize the zero vector")
        return cls(m / norm, label)

    @classmethod
    def from_vector(cls, vec, dim_a: int, dim_b: int, label: str | None = None):
        """Build from a joint vector in row-major ``|i>|j>`` order."""
        v = np.asarray(vec, dtype=complex).reshape(-1)
        if v.size != dim_a * dim_b:
            raise DimensionMismatch(f"vector of length {v.size} does not fit {dim_a}x{dim_b}")
        return cls(v.reshape(dim_a, dim_b), label)

    @property
    def dim_a(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def dim_b(self) -> int:
        return self.amplitudes.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.amplitudes.shape

    @property
    def n(self) -> int:
        """Largest local dimension."""
        return max(self.shape)

    def vector(self) -> np.ndarray:
        return self.amplitudes.reshape(-1).copy()

    def projector(self) -> np.ndarray:
        v = self.vector()
        return np.outer(v, v.conj())

    def swapped(self) -> "BipartitePureState":
        """Same state with the roles of A and B exchanged."""
        return BipartitePureState(self.amplitudes.T, self.label)

    def apply_local(self, op_a=None, op_b=None) -> np.ndarray:
        """Unnormalized amplitudes of ``(op_a (x) op_b)|psi>``."""
        m = self.amplitudes
        if op_a is not None:
            m = np.asarray(op_a) @ m
        if op_b is not None:
            m = m @ np.asarray(op_b).T
        return m

    def fidelity(self, other: "BipartitePureState") -> float:
        if self.shape != other.shape:
            raise DimensionMismatch(f"{self.shape} vs {other.shape}")
        return float(abs(np.vdot(self.amplitudes, other.amplitudes)) ** 2)

    def __repr__(self) -> str:
        tag = f" {self.label!r}" if self.label else ""
        return f"BipartitePureState{tag}({self.dim_a}x{self.dim_b})"


@dataclass(frozen=True, eq=False)
class SchmidtForm:
    """Schmidt data: ``amplitudes = u_a @ diag(sqrt(c)) @ u_b.T``.

    ``coefficients`` has length ``max(dim_a, dim_b)``, zero padded, descending.
    """

    coefficients: np.ndarray
    u_a: np.ndarray
    u_b: np.ndarray
    rank: int

    def amplitudes(self) -> np.ndarray:
        shape = (self.u_a.shape[0], self.u_b.shape[0])
        return self.u_a @ numerics.rect_diag(np.sqrt(self.coefficients), shape) @ self.u_b.T


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray

    def __post_init__(self):
        m = numerics.as_matrix(self.matrix)
        tr = np.trace(m)
        if abs(tr - 1.0) > 1e-10:
            raise NotNormalized(f"trace is {tr!r}")
        w = numerics.hermitian_eig(m).eigenvalues
        if w[-1] < -1e-10:
            raise NotPSD(f"smallest eigenvalue {w[-1]:.3g}")
        object.__setattr__(self, "matrix", (m + dagger(m)) / 2)

    @property
    def spectrum(self) -> np.ndarray:
        return numerics.hermitian_eig(self.matrix).eigenvalues


def side_amplitudes(state: BipartitePureState, side: str) -> np.ndarray:
    """Amplitude matrix oriented so that ``side`` is the row index."""
    return state.amplitudes if check_side(side) == "A" else state.amplitudes.T


def schmidt(state: BipartitePureState, rank_tol: float = numerics.RANK_TOL) -> SchmidtForm:
    if not isinstance(state, BipartitePureState):
        raise TypeError("schmidt expects a BipartitePureState")
    u, s, w = numerics.svd(state.amplitudes)
    coeffs = np.zeros(state.n)
    coeffs[: s.size] = s**2
    return SchmidtForm(coeffs, u, w.conj(), numerics.numerical_rank(coeffs, rank_tol))


def schmidt_coefficients(state: BipartitePureState) -> np.ndarray:
    return schmidt(state).coefficients


def schmidt_rank(state: BipartitePureState, rank_tol: float = numerics.RANK_TOL) -> int:
    return schmidt(state, rank_tol).rank


def marginal(state: BipartitePureState, side: str = "A") -> DensityOperator:
    m = side_amplitudes(state, side)
    return DensityOperator(m @ dagger(m))


def local_unitary_equivalent(
    a: BipartitePureState, b: BipartitePureState, tol: float = 1e-9
) -> bool:
    """True iff ``a`` and ``b`` differ only by local unitaries."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    return bool(np.all(np.abs(schmidt_coefficients(a) - schmidt_coefficients(b)) <= tol))


def from_schmidt(coefficients, u_a=None, u_b=None, label: str | None = None) -> BipartitePureState:
    """Inverse of :func:`schmidt`; identities stand in for missing unitaries."""
    c = np.asarray(coefficients, dtype=float).reshape(-1)
    if np.any(c < 0) or abs(c.sum() - 1.0) > 1e-10:
        raise NotUnitSum("Schmidt coefficients must be non-negative and sum to 1")
    u_a = np.eye(c.size) if u_a is None else np.asarray(u_a, dtype=complex)
    u_b = np.eye(c.size) if u_b is None else np.asarray(u_b, dtype=complex)
    for name, u in (("u_a", u_a), ("u_b", u_b)):
        if not numerics.is_unitary(u):
            raise NotUnitary(f"{name} is not unitary")
    shape = (u_a.shape[0], u_b.shape[0])
    if c.size > max(shape) or np.any(c[min(shape):] > 0):
        raise DimensionMismatch("more non-zero coefficients than the smaller local dimension")
    amps = u_a @ numerics.rect_diag(np.sqrt(c), shape) @ u_b.T
    return BipartitePureState.from_raw(amps, label)


def maximally_entangled(m: int, n: int | None = None, label: str | None = None) -> BipartitePureState:
    """``sum_{i<m} |ii> / sqrt(m)`` embedded in an ``n x n`` system."""
    n = m if n is None else n
    coeffs = np.zeros(n)
    coeffs[:m] = 1.0 / m
    return from_schmidt(coeffs, label=label)


def product_state(dim_a: int, dim_b: int, i: int = 0, j: int = 0) -> BipartitePureState:
    amps = np.zeros((dim_a, dim_b), dtype=complex)
    amps[i, j] = 1.0
    return BipartitePureState(amps)
