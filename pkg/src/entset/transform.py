"""Local filters and protocols acting on sets of pure states.

The central construction is the common filter

    P = sqrt(eps) * sqrt(gamma) @ V^dagger @ rho_ref^{-1/2}

built from a similarity certificate ``V`` of the set's relative marginals.
Applied on one side it sends the reference state to Schmidt spectrum
``gamma`` and every other member to a state whose top-k coefficients are
proportional to ``gamma``.  ``eps`` is chosen as large as ``P^dagger P <= I``
allows.

The same module holds the checks that run the other way: given a filter and
the outcomes it produced, rebuild the unitaries ``T_nu`` relating outcome
Schmidt bases, and from them the block structure of the relative marginals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np

from . import numerics
from .errors import (
    BadTargetSupport,
    DimensionMismatch,
    IncompleteProtocol,
    InvalidCertificate,
    NotFullRank,
    NotKEquivalent,
    NotSquare,
    RankDeficientOutcome,
    RankDeficientReference,
    RankTooSmall,
    SimilarityRefused,
    UnsupportedOperator,
    VerificationError,
    ZeroProbability,
)
from .numerics import dagger
from .similarity import (
    CERTIFICATE_TOL,
    SimilarityCertificate,
    check_similar_about_ik,
    k_subspace_equivalent,
    relative_marginals,
)
from .states import (
    BipartitePureState,
    check_side,
    marginal,
    schmidt,
    side_amplitudes,
)

CONTRACTION_TOL = 1e-10
COMPLETENESS_TOL = 1e-9
ZERO_PROBABILITY = 1e-14


@dataclass(frozen=True, eq=False)
class LocalFilter:
    """One measurement operator applied by a single party."""

    operator: np.ndarray
    side: str = "A"
    epsilon: float = 1.0

    def __post_init__(self):
        op = numerics.as_matrix(self.operator)
        numerics._require_square(op)
        object.__setattr__(self, "operator", op)
        object.__setattr__(self, "side", check_side(self.side))
        if not 0.0 < self.epsilon <= 1.0 + 1e-12:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.largest_weight() > 1.0 + CONTRACTION_TOL:
            raise IncompleteProtocol("filter is not a contraction: P^dagger P exceeds the identity")

    def largest_weight(self) -> float:
        """Largest eigenvalue of ``P^dagger P``."""
        return float(numerics.svd(self.operator)[1][0] ** 2)

    def complement(self) -> np.ndarray:
        """Operator completing the filter to a trace-preserving measurement."""
        p = self.operator
        return numerics.psd_sqrt(np.eye(p.shape[0]) - dagger(p) @ p)

    def as_protocol(self) -> "LocalProtocol":
        ops = [self.operator, self.complement()]
        ident = [np.eye(self.operator.shape[0])]
        if self.side == "A":
            return LocalProtocol(ops, ident)
        return LocalProtocol(ident, ops)


@dataclass(frozen=True, eq=False)
class LocalProtocol:
    """Product measurement ``{A_k (x) B_l}`` with both sides sub-normalized."""

    alice_ops: list
    bob_ops: list

    def __post_init__(self):
        for name in ("alice_ops", "bob_ops"):
            ops = [numerics.as_matrix(a) for a in getattr(self, name)]
            if not ops:
                raise ValueError(f"{name} is empty")
            total = sum(dagger(a) @ a for a in ops)
            top = numerics.hermitian_eig(total, tol=1e-9).eigenvalues[0]
            if top > 1.0 + COMPLETENESS_TOL:
                raise IncompleteProtocol(f"{name}: sum of A^dagger A has eigenvalue {top:.12g} > 1")
            object.__setattr__(self, name, ops)


@dataclass(frozen=True, eq=False)
class ProtocolOutcome:
    raw: np.ndarray
    state: BipartitePureState | None
    probability: float
    index: tuple = ()

    @property
    def defined(self) -> bool:
        return self.state is not None


def _outcome(raw: np.ndarray, index: tuple = ()) -> ProtocolOutcome:
    p = float(np.linalg.norm(raw) ** 2)
    state = BipartitePureState.from_raw(raw) if p >= ZERO_PROBABILITY else None
    return ProtocolOutcome(raw, state, p, index)


def apply_filter(state: BipartitePureState, filt: LocalFilter) -> ProtocolOutcome:
    p = filt.operator
    local_dim = state.dim_a if filt.side == "A" else state.dim_b
    if p.shape[1] != local_dim:
        raise DimensionMismatch(f"filter of size {p.shape} on a side of dimension {local_dim}")
    raw = state.apply_local(op_a=p) if filt.side == "A" else state.apply_local(op_b=p)
    out = _outcome(raw)
    if not out.defined:
        raise ZeroProbability(f"filter succeeds with probability {out.probability:.3g}")
    return out


def apply_protocol(state: BipartitePureState, protocol: LocalProtocol) -> list[ProtocolOutcome]:
    """All branches ``A_k (x) B_l |phi>``; zero-probability ones keep ``state=None``."""
    outs = []
    for (i, a), (j, b) in product(enumerate(protocol.alice_ops), enumerate(protocol.bob_ops)):
        if a.shape[1] != state.dim_a or b.shape[1] != state.dim_b:
            raise DimensionMismatch("protocol operators do not match the state's dimensions")
        outs.append(_outcome(state.apply_local(a, b), (i, j)))
    return outs


def protocol_density(state: BipartitePureState, protocol: LocalProtocol) -> np.ndarray:
    """Normalized post-protocol density matrix, all branches mixed."""
    rho = sum(np.outer(o.raw.reshape(-1), o.raw.reshape(-1).conj()) for o in apply_protocol(state, protocol))
    return rho / np.trace(rho).real


def _target(gamma, n: int, k: int) -> np.ndarray:
    if gamma is None:
        g = np.zeros(n)
        g[:k] = 1.0 / k
        return g
    g = np.asarray(gamma, dtype=float).reshape(-1)
    if g.size < n:
        g = np.concatenate([g, np.zeros(n - g.size)])
    if (
        g.size != n
        or np.any(g[:k] <= 0)
        or np.any(g[k:] != 0)
        or abs(g.sum() - 1.0) > 1e-10
    ):
        raise BadTargetSupport(f"target must be a distribution supported exactly on the first {k} coordinates")
    return g


def _filter_operator(rho_ref: np.ndarray, v: np.ndarray, gamma: np.ndarray) -> tuple[np.ndarray, float]:
    q = np.diag(np.sqrt(gamma)) @ dagger(v) @ numerics.psd_pinv_sqrt(rho_ref)
    top = numerics.svd(q)[1][0] ** 2
    eps = min(1.0, 1.0 / top)
    return np.sqrt(eps) * q, eps


def build_common_filter(
    sources: Sequence[BipartitePureState],
    target_coefficients,
    certificate: SimilarityCertificate,
    side: str = "A",
) -> LocalFilter:
    """Maximal-``eps`` filter that concentrates every source onto ``target``.

    ``certificate`` must certify the relative marginals of ``sources``
    against ``sources[0]`` (the first operator is the reference with itself).
    ``target_coefficients=None`` means uniform on the certificate's ``k``
    shared coordinates.
    """
    side = check_side(side)
    ops = relative_marginals(sources, side)
    if len(ops) != len(certificate.scales) or not certificate.validate(ops):
        raise InvalidCertificate("certificate does not match the sources' relative marginals")
    k, v = certificate.k, certificate.v
    gamma = _target(target_coefficients, certificate.n, k)
    rho = marginal(sources[0], side).matrix
    shared = v[:, :k]
    support = numerics.support_projector(rho)
    if np.linalg.norm(support @ shared - shared) > 1e-8:
        raise RankDeficientReference("shared block leaves the reference state's support")
    op, eps = _filter_operator(rho, v, gamma)
    return LocalFilter(op, side, eps)


@dataclass(frozen=True, eq=False)
class CommonTransformation:
    certificate: SimilarityCertificate
    filter: LocalFilter
    outcomes: list
    ratios: np.ndarray
    target: np.ndarray

    @property
    def k(self) -> int:
        return self.certificate.k

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([o.probability for o in self.outcomes])


def decide_theorem1(
    sources: Sequence[BipartitePureState],
    k: int,
    side: str = "A",
    target=None,
    tol: float = 1e-7,
) -> CommonTransformation:
    """Certify, build and run one filter that takes every source to a
    k-subspace-equivalent state.

    Raises :class:`SimilarityRefused` when the relative marginals share no
    positive scalar block of size ``k``.
    """
    side = check_side(side)
    if not sources:
        raise ValueError("no source states given")
    shape = sources[0].shape
    if any(s.shape != shape for s in sources):
        raise DimensionMismatch("all sources must share their dimensions")
    cert = check_similar_about_ik(relative_marginals(sources, side), k)
    filt = build_common_filter(sources, target, cert, side)
    outcomes = [apply_filter(s, filt) for s in sources]
    ratios = np.ones(len(sources))
    for i, o in enumerate(outcomes):
        for j in range(i):
            try:
                ok, c = k_subspace_equivalent(o.state, outcomes[j].state, k, tol)
            except RankTooSmall:
                ok, c = False, None
            if not ok:
                raise VerificationError(f"outcomes {j} and {i} are not {k}-subspace equivalent")
            if j == 0:
                ratios[i] = c
    return CommonTransformation(cert, filt, outcomes, ratios, _target(target, cert.n, k))


def decide_theorem2(
    sources: Sequence[BipartitePureState], tol: float = 1e-9
) -> tuple[bool, str | None]:
    """Do full-rank sources share one marginal (Alice's first, then Bob's)?"""
    if not sources:
        raise ValueError("no source states given")
    for s in sources:
        if s.dim_a != s.dim_b or schmidt(s).rank != s.n:
            raise NotFullRank(f"{s!r} does not have full Schmidt rank")
    for side in ("A", "B"):
        ref = marginal(sources[0], side).matrix
        if all(np.max(np.abs(marginal(s, side).matrix - ref)) <= tol for s in sources[1:]):
            return True, side
    return False, None


@dataclass(frozen=True, eq=False)
class NecessityReport:
    marginals_equal_a: bool
    marginals_equal_b: bool
    t_matrices: list
    unitarity_defects: np.ndarray
    equivalent: bool
    probabilities: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def all_unitary(self) -> bool:
        return bool(np.all(self.unitarity_defects < 1e-7))


def _oriented(outcome: ProtocolOutcome, side: str) -> np.ndarray:
    return outcome.raw if side == "A" else outcome.raw.T


def _t_matrices(m_ref: np.ndarray, sources_oriented, outcomes_oriented, probs):
    """``T_nu = sqrt(p_ref/p_nu) W_ref^dagger M_ref^{-1} M_nu W_nu``.

    ``W`` is the right singular basis of each (oriented) outcome, so that
    ``outcome = E sqrt(kappa) W^dagger``.  The bases are returned too, since
    on rank-deficient outcomes they are only fixed up to a null-space rotation.
    """
    inv_ref = np.linalg.pinv(m_ref, rcond=numerics.RANK_TOL)
    ws = [numerics.svd(x / np.linalg.norm(x))[2] for x in outcomes_oriented]
    ts = [
        np.sqrt(probs[0] / p) * dagger(ws[0]) @ inv_ref @ m @ w
        for m, w, p in zip(sources_oriented, ws, probs)
    ]
    return ts, ws


def verify_necessity(
    sources: Sequence[BipartitePureState],
    filt: LocalFilter,
    outcomes: Sequence[ProtocolOutcome],
    tol: float = 1e-7,
) -> NecessityReport:
    """Rebuild ``T_nu`` from a one-side filter's full-rank outcomes.

    If every ``T_nu`` is unitary the sources share the filtered side's
    marginal.  The report states what is actually observed; it does not assume
    that equivalent outcomes imply unitary ``T_nu``.
    """
    if len(sources) != len(outcomes):
        raise DimensionMismatch("one outcome per source is required")
    side = filt.side
    n = sources[0].n
    for o in outcomes:
        if o.state is None or schmidt(o.state).rank < n:
            raise RankDeficientOutcome("verify_necessity needs full-rank outcomes")
    ms = [side_amplitudes(s, side) for s in sources]
    probs = np.array([o.probability for o in outcomes])
    ts, _ = _t_matrices(ms[0], ms, [_oriented(o, side) for o in outcomes], probs)
    defects = np.array([np.linalg.norm(dagger(t) @ t - np.eye(t.shape[0])) for t in ts])
    equal = {}
    for s in ("A", "B"):
        ref = marginal(sources[0], s).matrix
        equal[s] = all(np.max(np.abs(marginal(x, s).matrix - ref)) <= 1e-9 for x in sources[1:])
    equivalent = all(
        k_subspace_equivalent(o.state, outcomes[0].state, n, tol)[0] for o in outcomes[1:]
    )
    return NecessityReport(equal["A"], equal["B"], ts, defects, equivalent, probs)


def ricochet(op, n: int | None = None) -> np.ndarray:
    """Operator that, on Bob's side, mimics ``op`` on Alice's side of ``|Phi_n>``."""
    a = numerics.as_matrix(op)
    numerics._require_square(a)
    if n is not None and a.shape[0] != n:
        raise NotSquare(f"operator is {a.shape}, expected {n}x{n}")
    return a.T.copy()


def transfer_bob_to_alice(state: BipartitePureState, bob_op) -> tuple[np.ndarray, float]:
    """Alice operator reproducing Bob's ``bob_op`` on ``state`` up to a scale.

    Returns ``(alice_op, rescale)`` with
    ``(alice_op (x) I)|psi> = rescale * (I (x) bob_op)|psi>`` and
    ``alice_op`` a contraction.
    """
    m = state.amplitudes
    b = numerics.as_matrix(bob_op)
    if b.shape != (state.dim_b, state.dim_b):
        raise DimensionMismatch(f"Bob operator {b.shape} on a {state.dim_b}-dim side")
    target = m @ b.T
    x = target @ np.linalg.pinv(m, rcond=numerics.RANK_TOL)
    if np.linalg.norm(x @ m - target) > 1e-10 * max(1.0, np.linalg.norm(target)):
        raise UnsupportedOperator("Bob's operator leaks outside the support of rho_B")
    top = numerics.svd(x)[1][0]
    rescale = 1.0 if top <= 1.0 else 1.0 / top
    return rescale * x, rescale


@dataclass(frozen=True, eq=False)
class OneSideReduction:
    """Two-side action rewritten as an Alice-only action.

    ``states[i]`` is ``(I (x) B)|psi_i>`` normalized, equal to
    ``(transferred[i] (x) I)|psi_i> / rescales[i]`` up to that norm, and
    ``(A (x) I)`` on it reproduces the original ``(A (x) B)|psi_i>``.
    """

    states: list
    weights: np.ndarray
    transferred: list
    rescales: np.ndarray
    residuals: np.ndarray


def two_side_reduction(states: Sequence[BipartitePureState], alice_op, bob_op) -> OneSideReduction:
    a = numerics.as_matrix(alice_op)
    out_states, weights, xs, scales, res = [], [], [], [], []
    for psi in states:
        x, r = transfer_bob_to_alice(psi, bob_op)
        moved = x @ psi.amplitudes / r
        direct = psi.apply_local(a, bob_op)
        res.append(np.linalg.norm(a @ moved - direct))
        weight = float(np.linalg.norm(moved) ** 2)
        out_states.append(BipartitePureState.from_raw(moved, psi.label) if weight >= ZERO_PROBABILITY else None)
        weights.append(weight)
        xs.append(x)
        scales.append(r)
    return OneSideReduction(out_states, np.array(weights), xs, np.array(scales), np.array(res))


def _leading_scalar_block(blocks: list[np.ndarray], k_min: int, tol: float) -> int:
    """Largest j >= k_min with every block equal to ``diag(s I_j, *)``; 0 if none."""
    n = blocks[0].shape[0]
    for j in range(n, k_min - 1, -1):
        ok = True
        for b in blocks:
            s = np.trace(b[:j, :j]).real / j
            top = np.linalg.norm(b[:j, :j] - s * np.eye(j))
            off = np.linalg.norm(b[:j, j:])
            if s <= 0 or top > tol or off > tol:
                ok = False
                break
        if ok:
            return j
    return 0


def extract_one_side_necessity(
    sources: Sequence[BipartitePureState],
    filt: LocalFilter,
    outcomes: Sequence[ProtocolOutcome],
    k: int,
    tol: float = 1e-7,
) -> SimilarityCertificate:
    """Read a similarity certificate back off a successful one-side filter.

    With ``M_ref = rho_ref^{1/2} Omega`` (polar form) and ``W_ref`` the right
    singular basis of the reference outcome, every relative marginal becomes
    ``(p_nu/p_ref) T_nu T_nu^dagger`` in the basis ``V = Omega W_ref``.  When
    the leading ``k`` coordinates of all those matrices form a scalar block,
    ``V`` is the certificate directly.  Otherwise a common block is searched for
    in that basis, and :class:`SimilarityRefused` is raised if there is none,
    i.e. the filter worked although the relative marginals are not similar
    about ``I_k``.
    """
    if len(sources) != len(outcomes):
        raise DimensionMismatch("one outcome per source is required")
    side = filt.side
    for o in outcomes:
        if o.state is None:
            raise NotKEquivalent("an outcome has zero probability")
        try:
            ok, _ = k_subspace_equivalent(o.state, outcomes[0].state, k, tol)
        except RankTooSmall as exc:
            raise NotKEquivalent(str(exc)) from exc
        if not ok:
            raise NotKEquivalent(f"outcomes are not {k}-subspace equivalent")
    ms = [side_amplitudes(s, side) for s in sources]
    m_ref = ms[0]
    if m_ref.shape[0] != m_ref.shape[1] or numerics.numerical_rank(numerics.svd(m_ref)[1]) < m_ref.shape[0]:
        raise RankDeficientReference("reference state must have full rank on the filtered side")
    probs = np.array([o.probability for o in outcomes])
    ts, ws = _t_matrices(m_ref, ms, [_oriented(o, side) for o in outcomes], probs)
    rho_ref = m_ref @ dagger(m_ref)
    omega = numerics.psd_pinv_sqrt(rho_ref) @ m_ref
    v0 = omega @ ws[0]
    blocks = [(p / probs[0]) * t @ dagger(t) for t, p in zip(ts, probs)]
    blocks = [(b + dagger(b)) / 2 for b in blocks]
    ops = relative_marginals(sources, side)

    j = _leading_scalar_block(blocks, k, tol)
    if j:
        scales = np.array([np.trace(b[:j, :j]).real / j for b in blocks])
        cert = SimilarityCertificate(j, v0, scales, [b[j:, j:] for b in blocks])
    else:
        try:
            inner = check_similar_about_ik(blocks, k)
        except SimilarityRefused as exc:
            raise SimilarityRefused(
                k, exc.best_k,
                f"filter produced {k}-subspace-equivalent outcomes but the relative marginals "
                f"share a scalar block of size {exc.best_k} only",
            ) from exc
        cert = SimilarityCertificate(inner.k, v0 @ inner.v, inner.scales, inner.blocks)
    if not cert.validate(ops, CERTIFICATE_TOL):
        raise VerificationError("reconstructed certificate fails the conjugation check")
    return cert


def factor_readings(
    sources: Sequence[BipartitePureState],
    certificate: SimilarityCertificate,
    gamma,
    side: str = "A",
) -> dict[str, np.ndarray]:
    """Residuals of two candidate factorizations of a filtered source.

    For each non-reference source, compare the filtered amplitudes
    ``P M_nu`` with ``sqrt(eps s_nu) sqrt(gamma) diag(I_k, f(s_nu) sqrt(D_nu)) G_nu``
    where ``f(s) = s^{-1/2}`` ("sqrt") or ``f(s) = s^{-1}`` ("linear").
    ``gamma`` may have full support here, which is what separates the two.
    Requires every ``D_nu`` to be invertible.
    """
    side = check_side(side)
    k, v = certificate.k, certificate.v
    g = np.asarray(gamma, dtype=float)
    rho = marginal(sources[0], side).matrix
    p, eps = _filter_operator(rho, v, g)
    root = numerics.psd_pinv_sqrt(rho)
    out = {"sqrt": [], "linear": []}
    for i, src in enumerate(sources[1:], start=1):
        m = side_amplitudes(src, side)
        s, d = certificate.scales[i], certificate.blocks[i]
        sqrt_d = numerics.psd_sqrt(d)
        middle = np.zeros_like(v)
        middle[:k, :k] = np.sqrt(s) * np.eye(k)
        middle[k:, k:] = sqrt_d
        g_nu = np.linalg.solve(middle, dagger(v) @ root @ m)
        actual = p @ m
        for name, f in (("sqrt", s**-0.5), ("linear", 1.0 / s)):
            h = np.eye(v.shape[0], dtype=complex)
            h[k:, k:] = f * sqrt_d
            predicted = np.sqrt(eps * s) * np.diag(np.sqrt(g)) @ h @ g_nu
            out[name].append(np.linalg.norm(actual - predicted))
    return {name: np.array(vals) for name, vals in out.items()}
