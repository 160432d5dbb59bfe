"""Command-line front end.

State documents are JSON, one state per file::

    {"label": "alpha", "amplitudes": [[{"re": 0.5, "im": 0}, ...], ...]}
    {"label": "beta",  "schmidt": [0.25, 0.25, 0.5, 0], "u_a": [[...]], "u_b": [[...]]}

A mixture document for ``purify`` holds ``{"mixture": [{"weight": w,
"state": <state document>}, ...]}``.  Exit codes: 0 success, 1 principled
refusal, 2 parse error, 3 invariant violation.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import numerics
from .applications import (
    MESSAGES,
    MixedStateEnsemble,
    SuperdenseCoder,
    concentrate_set,
    parse_message,
    purify_mixed,
)
from .errors import EntsetError, NotEntangled, SimilarityRefused
from .similarity import largest_common_block, relative_marginal, relative_marginals
from .states import BipartitePureState, check_side, from_schmidt, schmidt
from .transform import (
    LocalFilter,
    LocalProtocol,
    apply_protocol,
    decide_theorem1,
)

EXIT_OK, EXIT_REFUSED, EXIT_PARSE, EXIT_INVARIANT = 0, 1, 2, 3


class ParseError(Exception):
    pass


class Refusal(Exception):
    def __init__(self, report: dict):
        self.report = report
        super().__init__(report.get("reason", "refused"))


def _number(x) -> complex:
    if isinstance(x, dict):
        if set(x) - {"re", "im"}:
            raise ParseError(f"unexpected keys in number {x}")
        return complex(float(x.get("re", 0.0)), float(x.get("im", 0.0)))
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    raise ParseError(f"not a number: {x!r}")


def parse_matrix(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not all(isinstance(r, list) for r in rows):
        raise ParseError("matrix must be a non-empty list of rows")
    width = len(rows[0])
    if width == 0 or any(len(r) != width for r in rows):
        raise ParseError("matrix rows must have equal, non-zero length")
    return np.array([[_number(x) for x in r] for r in rows], dtype=complex)


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[{"re": float(z.real), "im": float(z.imag)} for z in row] for row in m]


def parse_state(doc: dict) -> BipartitePureState:
    if not isinstance(doc, dict):
        raise ParseError("state document must be an object")
    label = doc.get("label")
    has_amp, has_schmidt = "amplitudes" in doc, "schmidt" in doc
    if has_amp == has_schmidt:
        raise ParseError("state document needs exactly one of 'amplitudes' or 'schmidt'")
    if has_amp:
        return BipartitePureState(parse_matrix(doc["amplitudes"]), label)
    coeffs = doc["schmidt"]
    if not isinstance(coeffs, list) or not all(isinstance(c, (int, float)) for c in coeffs):
        raise ParseError("'schmidt' must be a list of real numbers")
    u_a = parse_matrix(doc["u_a"]) if "u_a" in doc else None
    u_b = parse_matrix(doc["u_b"]) if "u_b" in doc else None
    return from_schmidt(coeffs, u_a, u_b, label)


def encode_state(state: BipartitePureState) -> dict:
    doc = {"amplitudes": encode_matrix(state.amplitudes)}
    if state.label:
        doc["label"] = state.label
    return doc


def _load(path: str):
    try:
        text = Path(path).read_bytes()
        return json.loads(text), text
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ParseError(f"{path}: {exc}") from exc


def _load_states(paths) -> tuple[list[BipartitePureState], str]:
    digest = hashlib.sha256()
    states = []
    for p in paths:
        doc, raw = _load(p)
        digest.update(raw)
        try:
            states.append(parse_state(doc))
        except (KeyError, TypeError) as exc:
            raise ParseError(f"{p}: {exc}") from exc
    return states, digest.hexdigest()


def _coeffs(state) -> list[float]:
    return [float(c) for c in schmidt(state).coefficients]


def _parse_target(text: str | None):
    if text is None:
        return None
    try:
        return [float(x) for x in text.replace(",", " ").split()]
    except ValueError as exc:
        raise ParseError(f"--target: {exc}") from exc


def cmd_schmidt(args) -> dict:
    (state,), digest = _load_states([args.file])
    form = schmidt(state)
    return {
        "verdict": "success",
        "inputs_digest": digest,
        "coefficients": [float(c) for c in form.coefficients],
        "rank": form.rank,
        "residuals": {"reconstruction": float(np.linalg.norm(form.amplitudes() - state.amplitudes))},
    }


def cmd_relmarg(args) -> dict:
    (ref, other), digest = _load_states([args.ref, args.other])
    f = relative_marginal(ref, other, args.side)
    return {
        "verdict": "success",
        "inputs_digest": digest,
        "side": args.side,
        "matrix": encode_matrix(f.matrix),
        "spectrum": [float(w) for w in numerics.hermitian_eig(f.matrix).eigenvalues],
        "source_rank": f.source_rank,
        "residuals": {"hermiticity": float(np.linalg.norm(f.matrix - f.matrix.conj().T))},
    }


def _transformation_report(states, plan, side) -> dict:
    cert, filt = plan.certificate, plan.filter
    ops = relative_marginals(states, side)
    ratios = []
    for o in plan.outcomes:
        top = schmidt(o.state).coefficients[: cert.k]
        ratios.append(float(np.max(np.abs(top / plan.target[: cert.k] - 1.0))))
    return {
        "k": cert.k,
        "side": side,
        "certificate": {
            "k": cert.k,
            "scales": [float(s) for s in cert.scales],
            "v": encode_matrix(cert.v),
        },
        "filter": {"operator": encode_matrix(filt.operator), "side": filt.side, "epsilon": float(filt.epsilon)},
        "outcomes": [
            {
                "label": s.label,
                "probability": float(o.probability),
                "schmidt": _coeffs(o.state),
            }
            for s, o in zip(states, plan.outcomes)
        ],
        "residuals": {
            "certificate": float(cert.residuals(ops).max()),
            "contraction": float(max(0.0, filt.largest_weight() - 1.0)),
            "target_mismatch": float(max(ratios)),
        },
    }


def _refuse(k, best_k, digest, reason) -> None:
    raise Refusal({"verdict": "refused", "inputs_digest": digest, "requested_k": k, "best_k": best_k, "reason": reason})


def _plan(args):
    states, digest = _load_states(args.files)
    side = check_side(args.side)
    k = args.k
    if k is None:
        k = largest_common_block(relative_marginals(states, side))
        if k == 0:
            _refuse(None, 0, digest, "relative marginals share no positive eigenvector")
    try:
        plan = decide_theorem1(states, k, side, _parse_target(args.target), args.tol)
    except SimilarityRefused as exc:
        _refuse(k, exc.best_k, digest, str(exc))
    return states, digest, side, plan


def cmd_check(args) -> dict:
    states, digest, side, plan = _plan(args)
    return {"verdict": "success", "inputs_digest": digest, **_transformation_report(states, plan, side)}


def cmd_filter(args) -> dict:
    _, digest, side, plan = _plan(args)
    filt = plan.filter
    return {
        "verdict": "success",
        "inputs_digest": digest,
        "k": plan.k,
        "filter": {"operator": encode_matrix(filt.operator), "side": filt.side, "epsilon": float(filt.epsilon)},
        "residuals": {"contraction": float(max(0.0, filt.largest_weight() - 1.0))},
    }


def _parse_protocol(doc) -> LocalProtocol:
    try:
        if "operator" in doc:
            filt = LocalFilter(parse_matrix(doc["operator"]), doc.get("side", "A"), float(doc.get("epsilon", 1.0)))
            if doc.get("complete", False):
                return filt.as_protocol()
            eye = [np.eye(filt.operator.shape[0])]
            return LocalProtocol([filt.operator], eye) if filt.side == "A" else LocalProtocol(eye, [filt.operator])
        return LocalProtocol(
            [parse_matrix(m) for m in doc["alice_ops"]],
            [parse_matrix(m) for m in doc["bob_ops"]],
        )
    except (KeyError, TypeError, AttributeError) as exc:
        raise ParseError(f"protocol document: {exc}") from exc


def cmd_simulate(args) -> dict:
    states, digest = _load_states(args.files)
    doc, _ = _load(args.protocol)
    protocol = _parse_protocol(doc)
    table, worst = [], 0.0
    for s in states:
        outs = apply_protocol(s, protocol)
        total = float(sum(o.probability for o in outs))
        eye_a = sum(a.conj().T @ a for a in protocol.alice_ops)
        eye_b = sum(b.conj().T @ b for b in protocol.bob_ops)
        v = s.vector()
        expected = float(np.real(np.vdot(v, np.kron(eye_a, eye_b) @ v)))
        worst = max(worst, abs(total - expected))
        table.append({
            "label": s.label,
            "outcomes": [
                {
                    "index": list(o.index),
                    "probability": float(o.probability),
                    "schmidt": _coeffs(o.state) if o.state is not None else None,
                }
                for o in outs
            ],
            "total_probability": total,
        })
    return {"verdict": "success", "inputs_digest": digest, "states": table, "residuals": {"probability_bookkeeping": worst}}


def cmd_concentrate(args) -> dict:
    states, digest = _load_states(args.files)
    res = concentrate_set(states, args.side)
    if res.k == 0:
        _refuse(None, 0, digest, "no common maximally entangled target of any dimension")
    report = _transformation_report(states, res.transformation, check_side(args.side))
    return {"verdict": "success", "inputs_digest": digest, "verdict_n_dim": res.verdict_n_dim, **report}


def _load_ensemble(args) -> tuple[MixedStateEnsemble, str]:
    if len(args.files) == 1 and args.weights is None:
        doc, raw = _load(args.files[0])
        if not isinstance(doc, dict) or "mixture" not in doc:
            raise ParseError("single-file purify expects a mixture document")
        try:
            terms = [(float(t["weight"]), parse_state(t["state"])) for t in doc["mixture"]]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"mixture document: {exc}") from exc
        return MixedStateEnsemble(terms), hashlib.sha256(raw).hexdigest()
    states, digest = _load_states(args.files)
    weights = [1.0 / len(states)] * len(states) if args.weights is None else _parse_target(args.weights)
    if len(weights) != len(states):
        raise ParseError("--weights needs one weight per state file")
    return MixedStateEnsemble(list(zip(weights, states))), digest


def cmd_purify(args) -> dict:
    ens, digest = _load_ensemble(args)
    res = purify_mixed(ens, args.side)
    if res.k == 0:
        _refuse(None, 0, digest, "no maximally entangled pure output reachable")
    out = res.output_state
    return {
        "verdict": "success",
        "inputs_digest": digest,
        "k": res.k,
        "verdict_n_dim": res.verdict_n_dim,
        "spectral_weights": [float(w) for w in res.weights],
        "per_term_probability": [float(p) for p in res.per_term_probability],
        "filter": {"operator": encode_matrix(res.filter.operator), "side": res.filter.side, "epsilon": float(res.filter.epsilon)},
        "output_state": encode_state(out),
        "output_schmidt": _coeffs(out),
        "residuals": {"purity": float(1.0 - res.purity)},
    }


def cmd_superdense(args) -> dict:
    (state,), digest = _load_states([args.file])
    try:
        coder = SuperdenseCoder(state)
    except NotEntangled as exc:
        raise Refusal({"verdict": "refused", "inputs_digest": digest, "reason": str(exc)}) from exc
    messages = [args.message] if args.message else ["".join(map(str, m)) for m in MESSAGES]
    if args.trials <= 0:
        raise ParseError("--trials must be positive")
    try:
        for msg in messages:
            parse_message(msg)
    except ValueError as exc:
        raise ParseError(f"--message: {exc}") from exc
    rows = []
    for msg in messages:
        st = coder.run(msg, args.trials, args.seed)
        rows.append({
            "message": "".join(map(str, st.message)),
            "trials": st.trials,
            "successes": st.successes,
            "empirical_success": st.success_rate,
            "analytic_success": st.analytic_probability,
            "sigma": st.sigma,
            "decode_errors": st.decode_errors,
        })
    return {
        "verdict": "success",
        "inputs_digest": digest,
        "seed": args.seed,
        "runs": rows,
        "residuals": {"decode_errors": int(sum(r["decode_errors"] for r in rows))},
    }


def _human(report: dict, indent: str = "") -> str:
    lines = []
    for key, val in report.items():
        if isinstance(val, dict):
            lines.append(f"{indent}{key}:")
            lines.append(_human(val, indent + "  "))
        elif isinstance(val, list) and val and isinstance(val[0], list):
            lines.append(f"{indent}{key}:")
            for row in val:
                cells = [_fmt(x) for x in row]
                lines.append(f"{indent}  [" + ", ".join(cells) + "]")
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            lines.append(f"{indent}{key}:")
            for item in val:
                block = _human(item, indent + "    ")
                lines.append(indent + "  - " + block[len(indent) + 4:])
        else:
            lines.append(f"{indent}{key}: {_fmt(val)}")
    return "\n".join(lines)


def _fmt(x) -> str:
    if isinstance(x, dict) and set(x) == {"re", "im"}:
        z = complex(x["re"], x["im"])
        return f"{z.real:.6g}" if abs(z.imag) < 1e-12 else f"{z:.6g}"
    if isinstance(x, float):
        return f"{x:.10g}"
    if isinstance(x, list):
        return "[" + ", ".join(_fmt(v) for v in x) + "]"
    return str(x)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entset", description=__doc__.splitlines()[0])
    parser.add_argument("--format", choices=("human", "json"), default="human")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, side=True):
        if side:
            p.add_argument("--side", choices=("A", "B"), default="A")
        p.add_argument("--format", choices=("human", "json"), default=argparse.SUPPRESS)

    p = sub.add_parser("schmidt", help="Schmidt coefficients of one state")
    p.add_argument("file")
    common(p, side=False)
    p.set_defaults(func=cmd_schmidt)

    p = sub.add_parser("relmarg", help="relative marginal of two states")
    p.add_argument("ref")
    p.add_argument("other")
    common(p)
    p.set_defaults(func=cmd_relmarg)

    for name, func, help_ in (
        ("check", cmd_check, "decide and run a common filter for a set of states"),
        ("filter", cmd_filter, "print the common filter only"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("files", nargs="+")
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--target", default=None, help="target Schmidt coefficients, e.g. '0.5 0.5 0 0'")
        p.add_argument("--tol", type=float, default=1e-7)
        common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("simulate", help="apply a filter or protocol document to states")
    p.add_argument("files", nargs="+")
    p.add_argument("--protocol", required=True)
    common(p, side=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("concentrate", help="largest common maximally entangled target")
    p.add_argument("files", nargs="+")
    common(p)
    p.set_defaults(func=cmd_concentrate)

    p = sub.add_parser("purify", help="concentrate a mixed state pair by pair")
    p.add_argument("files", nargs="+")
    p.add_argument("--weights", default=None)
    common(p)
    p.set_defaults(func=cmd_purify)

    p = sub.add_parser("superdense", help="probabilistic dense coding simulation")
    p.add_argument("file")
    p.add_argument("--message", default=None)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    common(p, side=False)
    p.set_defaults(func=cmd_superdense)
    return parser


def _emit(report: dict, fmt: str, stream) -> None:
    if fmt == "json":
        stream.write(json.dumps(report, indent=2) + "\n")
    else:
        stream.write(_human(report) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        report = args.func(args)
        code = EXIT_OK
    except Refusal as exc:
        report, code = exc.report, EXIT_REFUSED
    except ParseError as exc:
        report, code = {"verdict": "parse_error", "reason": str(exc)}, EXIT_PARSE
    except EntsetError as exc:
        report = {"verdict": "invariant_violation", "error": type(exc).__name__, "reason": str(exc)}
        code = EXIT_INVARIANT
    _emit({"command": command, **report}, args.format, sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
