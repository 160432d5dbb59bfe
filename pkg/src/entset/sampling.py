"""Random states, operators and planted families for property checks."""

from __future__ import annotations

import numpy as np
from scipy.stats import unitary_group

from . import numerics
from .states import BipartitePureState, from_schmidt


def _rng(rng) -> np.random.Generator:
    return rng if isinstance(rng, np.random.Generator) else np.random.default_rng(rng)


def random_unitary(n: int, rng=None) -> np.ndarray:
    if n == 1:
        return np.exp(2j * np.pi * _rng(rng).random()) * np.ones((1, 1))
    return unitary_group.rvs(n, random_state=_rng(rng))


def ginibre(rows: int, cols: int, rng=None) -> np.ndarray:
    rng = _rng(rng)
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2)


def random_state(dim_a: int, dim_b: int | None = None, rng=None) -> BipartitePureState:
    return BipartitePureState.from_raw(ginibre(dim_a, dim_a if dim_b is None else dim_b, rng))


def random_coefficients(n: int, rng=None, floor: float = 0.02) -> np.ndarray:
    """Strictly positive distribution on ``n`` points, no entry below ``floor / n``."""
    c = _rng(rng).dirichlet(np.ones(n))
    c = (1 - floor) * c + floor / n
    return c / c.sum()


def random_psd(n: int, rng=None, rank: int | None = None) -> np.ndarray:
    g = ginibre(n, n if rank is None else rank, rng)
    return g @ g.conj().T


def random_hermitian(n: int, rng=None) -> np.ndarray:
    g = ginibre(n, n, rng)
    return (g + g.conj().T) / 2


def random_contraction(n: int, rng=None) -> np.ndarray:
    """Ginibre matrix rescaled to operator norm 1 (a valid filter)."""
    g = ginibre(n, n, rng)
    return g / np.linalg.svd(g, compute_uv=False)[0]


def plant_similar_family(n: int, size: int, k: int, rng=None, *, scale_range=(0.2, 2.0), block_range=(0.05, 3.0)):
    """Sources whose relative marginals are similar about ``I_k`` by construction.

    The reference has random full-rank Schmidt data; member ``nu`` gets
    ``M_nu ~ rho_ref^{1/2} V diag(sqrt(s_nu) I_k, sqrt(D_nu)) G_nu U_nu^T``
    for a random unitary ``V`` shared by the family.  Returns the sources and
    the planted ``(V, scales, blocks)`` (scales and blocks before the
    normalization of each member).
    """
    rng = _rng(rng)
    lam = random_coefficients(n, rng)
    ref = from_schmidt(lam, random_unitary(n, rng), random_unitary(n, rng), label="ref")
    rho = ref.amplitudes @ ref.amplitudes.conj().T
    root = numerics.psd_sqrt(rho)
    v = random_unitary(n, rng)
    sources, scales, blocks = [ref], [1.0], [np.eye(n - k)]
    for i in range(1, size):
        s = rng.uniform(*scale_range)
        w = rng.uniform(*block_range, size=n - k)
        u = random_unitary(n - k, rng) if n > k else np.zeros((0, 0))
        d = (u * w) @ u.conj().T
        middle = np.zeros((n, n), dtype=complex)
        middle[:k, :k] = np.sqrt(s) * np.eye(k)
        middle[k:, k:] = (u * np.sqrt(w)) @ u.conj().T
        m = root @ v @ middle @ random_unitary(n, rng) @ random_unitary(n, rng).T
        sources.append(BipartitePureState.from_raw(m, label=f"member{i}"))
        scales.append(s)
        blocks.append(d)
    return sources, (v, np.array(scales), blocks)


def degenerate_spectrum(n: int, rng=None) -> tuple[np.ndarray, list[int]]:
    """Full-support distribution with a random multiplicity pattern."""
    rng = _rng(rng)
    sizes, left = [], n
    while left:
        s = int(rng.integers(1, left + 1))
        sizes.append(s)
        left -= s
    vals = rng.uniform(0.2, 1.0, size=len(sizes))
    c = np.repeat(vals, sizes)
    return c / c.sum(), sizes


def plant_equal_marginal_family(n: int, size: int, rng=None, side: str = "A"):
    """Full-rank states sharing one marginal on ``side``.

    Members differ by unitaries that act inside the degenerate eigenspaces of
    the shared marginal (Alice's side) and arbitrarily on the other side.
    """
    rng = _rng(rng)
    lam, sizes = degenerate_spectrum(n, rng)
    basis = random_unitary(n, rng)
    out = []
    for i in range(size):
        blk = np.zeros((n, n), dtype=complex)
        start = 0
        for s in sizes:
            blk[start:start + s, start:start + s] = random_unitary(s, rng)
            start += s
        m = basis @ blk @ np.diag(np.sqrt(lam)) @ random_unitary(n, rng).T
        if side == "B":
            m = m.T
        out.append(BipartitePureState.from_raw(m, label=f"member{i}"))
    return out
