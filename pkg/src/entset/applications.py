"""Concentration of state sets, mixed-state purification and superdense coding."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import numerics
from .errors import DimensionMismatch, EmptySet, NotEntangled, NotNormalized, SimilarityRefused
from .similarity import largest_common_block, relative_marginals
from .states import BipartitePureState, DensityOperator, check_side, schmidt
from .transform import CommonTransformation, LocalFilter, apply_filter, decide_theorem1

SPECTRAL_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class MixedStateEnsemble:
    """``rho = sum_i w_i |psi_i><psi_i|`` over a ``dim_a x dim_b`` system."""

    terms: list

    def __post_init__(self):
        terms = [(float(w), s) for w, s in self.terms]
        if not terms:
            raise EmptySet("an ensemble needs at least one term")
        shape = terms[0][1].shape
        if any(s.shape != shape for _, s in terms):
            raise DimensionMismatch("ensemble members must share their dimensions")
        weights = np.array([w for w, _ in terms])
        if np.any(weights <= 0) or np.any(weights > 1) or abs(weights.sum() - 1) > 1e-10:
            raise NotNormalized("weights must lie in (0, 1] and sum to 1")
        object.__setattr__(self, "terms", terms)

    @property
    def shape(self) -> tuple[int, int]:
        return self.terms[0][1].shape

    @property
    def density(self) -> DensityOperator:
        return DensityOperator(sum(w * s.projector() for w, s in self.terms))

    @classmethod
    def from_density(cls, rho, dim_a: int, dim_b: int) -> "MixedStateEnsemble":
        return cls(spectral_terms(rho, dim_a, dim_b))


def spectral_terms(rho, dim_a: int, dim_b: int) -> list[tuple[float, BipartitePureState]]:
    """Eigen-decomposition of a joint density matrix as weighted pure states."""
    eig = numerics.hermitian_eig(np.asarray(rho, dtype=complex))
    keep = eig.eigenvalues > SPECTRAL_TOL
    w = eig.eigenvalues[keep]
    vecs = eig.eigenvectors[:, keep]
    w = w / w.sum()
    return [
        (float(p), BipartitePureState.from_vector(numerics.fix_phases(vecs[:, [i]])[:, 0], dim_a, dim_b))
        for i, p in enumerate(w)
    ]


@dataclass(frozen=True, eq=False)
class ConcentrationResult:
    k: int
    filter: LocalFilter | None
    per_term_probability: np.ndarray
    verdict_n_dim: bool
    transformation: CommonTransformation | None = None
    output_state: BipartitePureState | None = None
    purity: float | None = None
    weights: np.ndarray | None = None


def concentrate_set(
    sources: Sequence[BipartitePureState],
    side: str = "A",
    max_k: int | None = None,
) -> ConcentrationResult:
    """Largest k-dimensional maximally entangled state all sources reach with
    one common filter."""
    side = check_side(side)
    if not sources:
        raise EmptySet("no source states given")
    shape = sources[0].shape
    if any(s.shape != shape for s in sources):
        raise DimensionMismatch("all sources must share their dimensions")
    n = shape[0] if side == "A" else shape[1]
    k = largest_common_block(relative_marginals(sources, side))
    if max_k is not None:
        k = min(k, max_k)
    while k > 0:
        try:
            plan = decide_theorem1(sources, k, side)
        except SimilarityRefused:
            k -= 1
            continue
        return ConcentrationResult(k, plan.filter, plan.probabilities, k == n, plan)
    return ConcentrationResult(0, None, np.zeros(len(sources)), False)


def purify_mixed(ensemble: MixedStateEnsemble, side: str = "A") -> ConcentrationResult:
    """Best maximally entangled pure state reachable from ``ensemble`` pair by pair.

    The search runs over the spectral decomposition of the density operator.
    With two or more spectral terms a full-dimensional target is never
    possible, so the search is capped below the local dimension.
    """
    dim_a, dim_b = ensemble.shape
    rho = ensemble.density.matrix
    terms = spectral_terms(rho, dim_a, dim_b)
    weights = np.array([w for w, _ in terms])
    states = [s for _, s in terms]
    n = dim_a if check_side(side) == "A" else dim_b
    multi = len(terms) >= 2
    res = concentrate_set(states, side, max_k=n - 1 if multi else None)
    if res.filter is None:
        return ConcentrationResult(0, None, res.per_term_probability, False, weights=weights)
    p = res.filter.operator
    eye = np.eye(dim_b if side == "A" else dim_a)
    op = np.kron(p, eye) if side == "A" else np.kron(eye, p)
    out = op @ rho @ op.conj().T
    out = out / np.trace(out).real
    eig = numerics.hermitian_eig(out)
    output = BipartitePureState.from_vector(
        numerics.fix_phases(eig.eigenvectors[:, [0]])[:, 0], dim_a, dim_b
    )
    return ConcentrationResult(
        res.k,
        res.filter,
        res.per_term_probability,
        (not multi) and res.k == n,
        res.transformation,
        output,
        float(eig.eigenvalues[0]),
        weights,
    )


SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
I_SIGMA_Y = np.array([[0, 1], [-1, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)

ENCODINGS = {
    (0, 0): np.eye(2, dtype=complex),
    (0, 1): SIGMA_X,
    (1, 0): I_SIGMA_Y,
    (1, 1): SIGMA_Z,
}
MESSAGES = list(ENCODINGS)


def parse_message(message) -> tuple[int, int]:
    if isinstance(message, str):
        bits = tuple(int(c) for c in message.strip())
    else:
        bits = tuple(int(b) for b in message)
    if bits not in ENCODINGS:
        raise ValueError(f"message must be two bits, got {message!r}")
    return bits


@dataclass(frozen=True, eq=False)
class SuperdenseTrial:
    shared_state: BipartitePureState
    message: tuple
    encoding_op: np.ndarray
    filter_succeeded: bool
    decoded: tuple | None
    success_probability: float


@dataclass(frozen=True)
class SuperdenseStats:
    message: tuple
    trials: int
    successes: int
    decode_errors: int
    success_rate: float
    analytic_probability: float

    @property
    def sigma(self) -> float:
        """Binomial standard deviation of the success rate."""
        p = self.analytic_probability
        return float(np.sqrt(p * (1 - p) / self.trials))


class SuperdenseCoder:
    """Probabilistic dense coding over a partially entangled qubit pair.

    Alice's concentration filter depends on the shared state only. It acts on
    her qubit and so commutes with Bob's Pauli encoding on his; on success the
    pair holds one of four orthogonal maximally entangled states, which Alice
    reads out with a Bell measurement in her (known) rotated frame.
    """

    def __init__(self, shared_state: BipartitePureState):
        if shared_state.shape != (2, 2):
            raise DimensionMismatch("superdense coding needs a two-qubit state")
        if schmidt(shared_state).rank < 2:
            raise NotEntangled("shared state has Schmidt rank 1")
        self.shared_state = shared_state
        plan = decide_theorem1([shared_state], 2, "A")
        self.filter = plan.filter
        self.success_probability = plan.outcomes[0].probability
        concentrated = plan.outcomes[0].state.amplitudes
        # Bell basis as seen after Alice's filter: (G (x) I)(I (x) U_m)|Phi+>
        self.decoding_basis = np.array(
            [(concentrated @ ENCODINGS[m].T).reshape(-1) for m in MESSAGES]
        )

    def encode(self, message) -> np.ndarray:
        return self.shared_state.apply_local(op_b=ENCODINGS[parse_message(message)])

    def outcome_distribution(self, message) -> np.ndarray:
        """Bell-measurement probabilities conditional on filter success."""
        raw = self.filter.operator @ self.encode(message)
        post = raw.reshape(-1) / np.linalg.norm(raw)
        probs = np.abs(self.decoding_basis.conj() @ post) ** 2
        return probs / probs.sum()

    def trial(self, message, rng) -> SuperdenseTrial:
        bits = parse_message(message)
        rng = np.random.default_rng(rng)
        ok = bool(rng.random() < self.success_probability)
        decoded = MESSAGES[int(rng.choice(4, p=self.outcome_distribution(bits)))] if ok else None
        return SuperdenseTrial(self.shared_state, bits, ENCODINGS[bits], ok, decoded, self.success_probability)

    def run(self, message, trials: int, seed: int = 0) -> SuperdenseStats:
        bits = parse_message(message)
        if trials <= 0:
            raise ValueError("trials must be positive")
        rng = np.random.default_rng([seed, 2 * bits[0] + bits[1]])
        raw = self.filter.operator @ self.encode(bits)
        p = float(np.linalg.norm(raw) ** 2)
        succeeded = rng.random(trials) < p
        n_ok = int(succeeded.sum())
        decoded = rng.choice(4, size=n_ok, p=self.outcome_distribution(bits))
        errors = int(np.count_nonzero(decoded != MESSAGES.index(bits)))
        return SuperdenseStats(bits, trials, n_ok, errors, n_ok / trials, self.success_probability)


def superdense_run(shared_state: BipartitePureState, message, trials: int, seed: int = 0) -> SuperdenseStats:
    return SuperdenseCoder(shared_state).run(message, trials, seed)
