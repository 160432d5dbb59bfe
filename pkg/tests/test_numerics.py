import mpmath
import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from entset import numerics
from entset.errors import NotHermitian, NotProjector, NotPSD, NotSquare
from entset.numerics import (
    cluster_eigenvalues,
    hermitian_eig,
    psd_pinv_sqrt,
    psd_sqrt,
    subspace_intersection,
    svd,
)
from entset.sampling import ginibre, random_hermitian, random_psd, random_unitary


def charpoly_eigenvalues(m):
    """Eigenvalues from Faddeev-LeVerrier coefficients and mpmath root finding."""
    n = m.shape[0]
    coeffs = [mpmath.mpc(1)]
    a = mpmath.matrix(m.tolist())
    mk = mpmath.zeros(n)
    eye = mpmath.eye(n)
    for k in range(1, n + 1):
        mk = a * (mk + coeffs[-1] * eye)
        c = -sum(mk[i, i] for i in range(n)) / k
        coeffs.append(c)
    with mpmath.workdps(40):
        roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=80)
    return np.sort(np.array([float(mpmath.re(r)) for r in roots]))[::-1]


def test_identity_spectrum():
    np.testing.assert_allclose(hermitian_eig(np.eye(3)).eigenvalues, [1, 1, 1])


def test_spectrum_sorted_descending():
    eig = hermitian_eig(np.diag([1 / 4, 1 / 4, 1 / 16, 7 / 16]))
    np.testing.assert_allclose(eig.eigenvalues, [7 / 16, 1 / 4, 1 / 4, 1 / 16], atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_spectrum_matches_characteristic_polynomial(seed):
    m = random_hermitian(5, seed)
    np.testing.assert_allclose(hermitian_eig(m).eigenvalues, charpoly_eigenvalues(m), atol=1e-8)


def test_eig_errors():
    with pytest.raises(NotHermitian):
        hermitian_eig(np.array([[1, 2], [0, 1]]))
    with pytest.raises(NotSquare):
        hermitian_eig(np.ones((2, 3)))


def test_svd_zero_matrix():
    _, s, _ = svd(np.zeros((3, 3)))
    np.testing.assert_array_equal(s, 0)


def test_svd_diagonal():
    u, s, w = svd(np.diag([0.5, 0.5]))
    np.testing.assert_allclose(s, [0.5, 0.5])
    np.testing.assert_allclose(np.abs(u), np.eye(2), atol=1e-15)
    np.testing.assert_allclose(np.abs(w), np.eye(2), atol=1e-15)


@pytest.mark.parametrize("seed", range(5))
def test_singular_values_from_gram_spectrum(seed):
    m = ginibre(4, 4, seed)
    _, s, _ = svd(m)
    gram = hermitian_eig(m.conj().T @ m).eigenvalues
    np.testing.assert_allclose(s, np.sqrt(np.clip(gram, 0, None)), atol=1e-9)


def test_svd_rectangular_reconstruction():
    m = ginibre(3, 5, 7)
    u, s, w = svd(m)
    np.testing.assert_allclose(u @ numerics.rect_diag(s, m.shape) @ w.conj().T, m, atol=1e-12)


def test_psd_sqrt_examples():
    np.testing.assert_allclose(psd_sqrt(np.eye(3)), np.eye(3), atol=1e-15)
    np.testing.assert_allclose(psd_sqrt(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]), atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_psd_sqrt_squares_back(seed):
    m = random_psd(4, seed)
    r = psd_sqrt(m)
    np.testing.assert_allclose(r, r.conj().T, atol=1e-12)
    assert hermitian_eig(r).eigenvalues[-1] >= -1e-12
    np.testing.assert_allclose(r @ r, m, atol=1e-9)


def test_psd_clamps_roundoff_and_rejects_negative():
    r = psd_sqrt(np.diag([1.0, -1e-13]))
    np.testing.assert_allclose(r, np.diag([1.0, 0.0]))
    with pytest.raises(NotPSD):
        psd_sqrt(np.diag([1.0, -1e-6]))


def test_pinv_sqrt_examples():
    got = psd_pinv_sqrt(np.diag([1 / 4, 1 / 4, 1 / 16, 7 / 16]))
    np.testing.assert_allclose(got, np.diag([2, 2, 4, 4 / np.sqrt(7)]), atol=1e-12)
    np.testing.assert_allclose(psd_pinv_sqrt(np.diag([1.0, 0.0])), np.diag([1.0, 0.0]))


@pytest.mark.parametrize("seed", range(5))
def test_pinv_sqrt_support_projector(seed):
    rng = np.random.default_rng(seed)
    basis = random_unitary(5, rng)[:, :3]
    m = (basis * rng.uniform(0.1, 1.0, 3)) @ basis.conj().T
    proj = basis @ basis.conj().T
    r = psd_pinv_sqrt(m)
    np.testing.assert_allclose(m @ r @ r, proj, atol=1e-9)
    np.testing.assert_allclose(r @ m @ r, proj, atol=1e-9)
    np.testing.assert_allclose(r @ psd_sqrt(m), proj, atol=1e-9)


def test_intersection_identical_projectors():
    p = np.diag([1.0, 1.0, 0.0])
    dim, basis = subspace_intersection([p, p])
    assert dim == 2
    np.testing.assert_allclose(basis @ basis.conj().T, p, atol=1e-12)


def test_intersection_coordinate_case():
    dim, basis = subspace_intersection([np.diag([1.0, 1, 0, 0]), np.diag([0.0, 1, 1, 0])])
    assert dim == 1
    np.testing.assert_allclose(basis[:, 0], [0, 1, 0, 0], atol=1e-12)


@pytest.mark.parametrize("seed", range(5))
def test_intersection_recovers_planted_subspace(seed):
    rng = np.random.default_rng(seed)
    u = random_unitary(7, rng)
    common = u[:, :2]
    p1 = u[:, :4] @ u[:, :4].conj().T
    q = np.hstack([common, random_unitary(7, rng)[:, :3]])
    q, _ = np.linalg.qr(q)
    p2 = q @ q.conj().T
    dim, basis = subspace_intersection([p1, p2])
    assert dim == 2
    assert np.max(scipy.linalg.subspace_angles(basis, common)) < 1e-6


def test_intersection_rejects_non_projector():
    with pytest.raises(NotProjector):
        subspace_intersection([np.diag([1.0, 0.5])])


def test_clustering():
    groups = cluster_eigenvalues([3.0, 1.0 + 5e-9, 1.0, 0.2])
    assert [len(idx) for _, idx in groups] == [1, 2, 1]


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 16), seed=st.integers(0, 2**32 - 1))
def test_reconstruction_properties(n, seed):
    rng = np.random.default_rng(seed)
    h = random_hermitian(n, rng)
    eig = hermitian_eig(h)
    assert np.linalg.norm(eig.reconstruct() - h) < 1e-10
    v = eig.eigenvectors
    assert np.linalg.norm(v.conj().T @ v - np.eye(n)) < 1e-10
    m = ginibre(n, n, rng)
    u, s, w = svd(m)
    assert np.linalg.norm(u @ np.diag(s) @ w.conj().T - m) < 1e-10
    np.testing.assert_allclose(s, np.sqrt(np.clip(hermitian_eig(m.conj().T @ m).eigenvalues, 0, None)), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(2, 8), data=st.data())
def test_intersection_dimension_bounded_by_ranks(n, data):
    seed = data.draw(st.integers(0, 2**32 - 1))
    r1 = data.draw(st.integers(0, n))
    r2 = data.draw(st.integers(0, n))
    rng = np.random.default_rng(seed)
    u1, u2 = random_unitary(n, rng)[:, :r1], random_unitary(n, rng)[:, :r2]
    dim, _ = subspace_intersection([u1 @ u1.conj().T, u2 @ u2.conj().T])
    assert dim <= min(r1, r2)
    assert dim == max(0, r1 + r2 - n)
