"""Command line front end.

Process specifications are JSON documents with a ``kind`` field:

* ``env_model``: system-environment dilation (initial environment state
  and one joint unitary per tooth, system wire slowest),
* ``markovian``: independent tooth channels,
* ``pauli_correlated``: joint probability table over per-tooth Pauli
  labels, keys joined with ":",
* ``choi_explicit``: the comb operator itself.

Complex entries are written as [re, im] pairs; plain numbers are read
as real.  All commands print one JSON document (sorted keys) so that
identical invocations produce identical bytes.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .channels import (
    Channel,
    apply,
    compose,
    depolarizing_channel,
    from_kraus,
    identity_channel,
    pauli_channel,
    unitary_channel,
)
from .combs import (
    Comb,
    EnvModel,
    apply_comb,
    choi_channel,
    comb_chi,
    comb_from_env_model,
    markovian_comb,
    simulate_env_model,
    slot_channel,
    validate_comb,
)
from .pauli import pauli_labels
from .pec import SingularNoiseError, decompose_inverse, pec_correct_exact, pec_sample
from .twirl import (
    PauliDiagTable,
    comb_from_pauli_table,
    env_model_from_pauli_table,
    extract_pauli_diag,
    marginals,
    mutual_information,
    product_of_marginals,
    sampled_twirl,
    tv_distance,
    twirl_comb,
)
from .vcp import reference_purified, vcp_comb

_SQ2 = 1.0 / np.sqrt(2.0)

_STATES = {
    "zero": np.array([[1, 0], [0, 0]], dtype=complex),
    "one": np.array([[0, 0], [0, 1]], dtype=complex),
    "plus": np.full((2, 2), 0.5, dtype=complex),
    "minus": np.array([[0.5, -0.5], [-0.5, 0.5]], dtype=complex),
    "plus_i": np.array([[0.5, -0.5j], [0.5j, 0.5]], dtype=complex),
    "minus_i": np.array([[0.5, 0.5j], [-0.5j, 0.5]], dtype=complex),
    "mixed": np.eye(2, dtype=complex) / 2,
}

_UNITARIES = {
    "i": np.eye(2, dtype=complex),
    "id": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "s": np.array([[1, 0], [0, 1j]], dtype=complex),
    "t": np.array([[1, 0], [0, np.exp(1j * np.pi / 4)]], dtype=complex),
}

_OBSERVABLES = {
    "i": np.eye(2, dtype=complex),
    "x": _UNITARIES["x"],
    "y": _UNITARIES["y"],
    "z": _UNITARIES["z"],
}


class CliError(Exception):
    """Bad input that the user can fix; maps to exit code 2."""


def _decode_entry(x) -> complex:
    if isinstance(x, (int, float)):
        return complex(x, 0.0)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise CliError(f"cannot read matrix entry {x!r}; use a number or [re, im]")


def decode_matrix(rows) -> np.ndarray:
    if not isinstance(rows, list) or not rows or not isinstance(rows[0], list):
        raise CliError("matrix must be a list of rows")
    return np.array([[_decode_entry(x) for x in row] for row in rows])


def encode_matrix(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m, dtype=complex)]


def _load_json(arg: str):
    text = arg
    if not arg.lstrip().startswith(("{", "[")):
        try:
            with open(arg) as fh:
                text = fh.read()
        except OSError as exc:
            raise CliError(f"cannot read {arg}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(f"invalid JSON in {arg!r}: {exc}") from exc


def _channel_from_json(doc) -> Channel:
    if isinstance(doc, list):
        return unitary_channel(decode_matrix(doc))
    if not isinstance(doc, dict):
        raise CliError("channel spec must be a matrix or an object")
    if "unitary" in doc:
        return unitary_channel(decode_matrix(doc["unitary"]))
    if "kraus" in doc:
        return from_kraus([decode_matrix(k) for k in doc["kraus"]])
    if "choi" in doc:
        m = decode_matrix(doc["choi"])
        d = int(round(np.sqrt(m.shape[0])))
        return Channel(choi=m, d_in=d, d_out=d)
    if "name" in doc:
        name = doc["name"].lower()
        if name == "depolarizing":
            return depolarizing_channel(float(doc.get("p", 0.0)))
        if name == "identity":
            return identity_channel(int(doc.get("d", 2)))
        if name == "pauli":
            return pauli_channel({k: float(v) for k, v in doc["probs"].items()})
        if name in _UNITARIES:
            return unitary_channel(_UNITARIES[name])
        raise CliError(f"unknown channel name {doc['name']!r}")
    raise CliError("channel spec needs unitary, kraus, choi or name")


def _table_from_payload(payload, teeth: int, n_qubits: int) -> PauliDiagTable:
    probs = {}
    for key, p in payload["probs"].items():
        parts = tuple(key.split(":"))
        probs[parts] = float(p)
    return PauliDiagTable(probs=probs, teeth=teeth, n_qubits=n_qubits)


def load_spec(arg: str):
    """Read a process spec; returns (comb, env_model or None, table or None, doc)."""
    doc = _load_json(arg)
    if not isinstance(doc, dict) or "kind" not in doc:
        raise CliError("process spec must be an object with a 'kind' field")
    kind = doc["kind"]
    teeth = int(doc.get("teeth", 0))
    d_sys = int(doc.get("d_sys", 2))
    payload = doc.get("payload", {})
    if kind == "env_model":
        model = EnvModel(
            d_sys=d_sys,
            d_env=int(payload["d_env"]),
            env_init=decode_matrix(payload["env_init"]),
            interactions=tuple(decode_matrix(u) for u in payload["interactions"]),
        )
        if teeth and teeth != model.teeth:
            raise CliError(f"spec says {teeth} teeth but lists {model.teeth} interactions")
        return comb_from_env_model(model, validate=False), model, None, doc
    if kind == "markovian":
        chans = [_channel_from_json(c) for c in payload["channels"]]
        comb = markovian_comb(chans)
        if teeth and teeth != comb.teeth:
            raise CliError(f"spec says {teeth} teeth but lists {comb.teeth} channels")
        return comb, None, None, doc
    if kind == "pauli_correlated":
        if not teeth:
            first = next(iter(payload["probs"]))
            teeth = len(first.split(":"))
        n_qubits = max(d_sys.bit_length() - 1, 1)
        table = _table_from_payload(payload, teeth, n_qubits)
        return comb_from_pauli_table(table), None, table, doc
    if kind == "choi_explicit":
        m = decode_matrix(payload["choi_op"])
        if not teeth:
            raise CliError("choi_explicit specs must state the number of teeth")
        return Comb(choi_op=m, teeth=teeth, d_sys=d_sys), None, None, doc
    raise CliError(f"unknown spec kind {kind!r}")


def _parse_state(arg: str) -> np.ndarray:
    if arg.lower() in _STATES:
        return _STATES[arg.lower()]
    return decode_matrix(_load_json(arg))


def _parse_observable(arg: str) -> np.ndarray:
    if arg.lower() in _OBSERVABLES:
        return _OBSERVABLES[arg.lower()]
    return decode_matrix(_load_json(arg))


def _parse_layer(arg: str) -> Channel:
    if arg.lower() in _UNITARIES:
        return unitary_channel(_UNITARIES[arg.lower()])
    return _channel_from_json(_load_json(arg))


def _resolve_layers(args, comb: Comb) -> list[Channel]:
    slots = comb.teeth - 1
    given = [_parse_layer(a) for a in (args.layer or [])]
    if not given:
        return [identity_channel(comb.d_sys) for _ in range(slots)]
    if len(given) == 1 and slots > 1:
        return given * slots
    if len(given) != slots:
        raise CliError(f"need {slots} slot channels, got {len(given)}")
    return given


def _emit(doc) -> None:
    print(json.dumps(doc, sort_keys=True, indent=2))


def cmd_validate(args) -> int:
    comb, _, _, doc = load_spec(args.spec)
    report = validate_comb(comb, tol=args.tol)
    trace = float(np.trace(comb.choi_op).real)
    _emit(
        {
            "kind": doc["kind"],
            "teeth": comb.teeth,
            "d_sys": comb.d_sys,
            "passes": report.passes,
            "psd_ok": report.psd_ok,
            "min_eigenvalue": report.min_eigenvalue,
            "per_level_residuals": list(report.per_level_residuals),
            "trace": trace,
            "expected_trace": float(comb.d_sys**comb.teeth),
        }
    )
    return 0 if report.passes else 1


def cmd_choi(args) -> int:
    comb, _, _, _ = load_spec(args.spec)
    ch = slot_channel(comb) if args.form == "slot" else choi_channel(comb)
    _emit(
        {
            "form": args.form,
            "teeth": comb.teeth,
            "d_sys": comb.d_sys,
            "trace": float(np.trace(ch.choi).real),
            "is_trace_preserving": bool(ch.is_trace_preserving(args.tol)),
            "choi": encode_matrix(ch.choi),
        }
    )
    return 0


def cmd_chi(args) -> int:
    comb, _, _, _ = load_spec(args.spec)
    chi = comb_chi(comb)
    n_total = int(np.log2(comb.d_sys)) * comb.teeth
    diag = np.real(np.diag(chi))
    off = float(np.abs(chi).sum() - np.abs(np.diag(chi)).sum())
    _emit(
        {
            "teeth": comb.teeth,
            "d_sys": comb.d_sys,
            "labels": pauli_labels(n_total),
            "chi": encode_matrix(chi),
            "diag_sum": float(diag.sum()),
            "offdiag_mass": off,
        }
    )
    return 0


def cmd_twirl(args) -> int:
    comb, _, _, _ = load_spec(args.spec)
    if args.samples:
        rng = np.random.default_rng(args.seed)
        twirled = sampled_twirl(comb, args.samples, rng)
        table = extract_pauli_diag(twirled, max_offdiag_mass=None)
    else:
        twirled = twirl_comb(comb)
        table = extract_pauli_diag(twirled)
    probs = {":".join(k): v for k, v in sorted(table.probs.items()) if v > args.prune}
    margs = [dict(sorted(m.items())) for m in marginals(table)]
    mi = mutual_information(table) if table.teeth == 2 else None
    _emit(
        {
            "teeth": comb.teeth,
            "d_sys": comb.d_sys,
            "samples": args.samples or None,
            "table": probs,
            "marginals": margs,
            "tv_to_product_of_marginals": tv_distance(table, product_of_marginals(table)),
            "mutual_information_bits": mi,
        }
    )
    return 0


def cmd_pec(args) -> int:
    comb, _, _, _ = load_spec(args.spec)
    decomp = decompose_inverse(comb)
    layers = _resolve_layers(args, comb)
    rho = _parse_state(args.input)
    obs = _parse_observable(args.observable)
    ideal_state = rho
    for lay in layers:
        ideal_state = apply(lay, ideal_state)
    ideal = float(np.trace(obs @ ideal_state).real)
    noisy = float(np.trace(obs @ apply_comb(comb, layers, rho)).real)
    corrected = pec_correct_exact(comb, decomp, layers, rho, obs)
    out = {
        "gamma": decomp.gamma,
        "ptm_condition_number": decomp.ptm_condition_number,
        "residual": decomp.residual,
        "nonzero_terms": int(np.count_nonzero(decomp.alpha)),
        "ideal": ideal,
        "noisy": noisy,
        "corrected": corrected,
        "sampled": None,
    }
    if args.shots:
        rng = np.random.default_rng(args.seed)
        est, se = pec_sample(comb, decomp, layers, rho, obs, args.shots, rng)
        out["sampled"] = {"estimate": est, "std_error": se, "shots": args.shots}
    if args.csv:
        _write_alpha_csv(args.csv, decomp)
    _emit(out)
    return 0


def _write_alpha_csv(path: str, decomp) -> None:
    names = decomp.basis.names
    lines = [",".join(f"op_{m + 1}" for m in range(decomp.teeth)) + ",alpha"]
    flat = decomp.alpha.reshape(-1)
    shape = decomp.alpha.shape
    for idx in np.flatnonzero(flat):
        combo = np.unravel_index(idx, shape)
        lines.append(",".join(names[c] for c in combo) + f",{float(flat[idx])!r}")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_vcp(args) -> int:
    comb, model, table, doc = load_spec(args.spec)
    if table is None and model is None:
        twirled_table = extract_pauli_diag(twirl_comb(comb))
        table = twirled_table
        model = env_model_from_pauli_table(table)
        derived = True
    else:
        derived = False
        if model is None:
            model = env_model_from_pauli_table(table)
    model2 = model
    if args.spec2:
        _, model2, table2, _ = load_spec(args.spec2)
        if model2 is None:
            if table2 is None:
                raise CliError("--spec2 must be an env_model or pauli_correlated spec")
            model2 = env_model_from_pauli_table(table2)
    layers = _resolve_layers(args, comb)
    rho = _parse_state(args.input)
    res = vcp_comb(model, model2, layers, rho)
    out = {
        "teeth": comb.teeth,
        "d_sys": comb.d_sys,
        "twirled_first": derived,
        "p_plus": res.p_plus,
        "p_minus": res.p_minus,
        "p_gap": res.p_gap,
        "virtual_state": encode_matrix(res.virtual_state),
        "physical_state": encode_matrix(res.physical_state),
        "reference_errors": None,
    }
    if table is not None and args.spec2 is None:
        ref_v = reference_purified(table, layers, rho, "virtual")
        ref_p = reference_purified(table, layers, rho, "physical")
        out["reference_errors"] = {
            "virtual": float(np.abs(res.virtual_state - ref_v).max()),
            "physical": float(np.abs(res.physical_state - ref_p).max()),
        }
    if args.csv and table is not None:
        _write_table_csv(args.csv, table)
    _emit(out)
    return 0


def _write_table_csv(path: str, table: PauliDiagTable) -> None:
    p2 = sum(p * p for p in table.probs.values())
    lines = [
        ",".join(f"tooth_{m + 1}" for m in range(table.teeth))
        + ",prob,virtual_weight,physical_weight"
    ]
    for key in sorted(table.probs):
        p = table.probs[key]
        lines.append(
            ",".join(key)
            + f",{p!r},{p * p / p2!r},{(p + p * p) / (1 + p2)!r}"
        )
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def cmd_oracle(args) -> int:
    comb, model, _, _ = load_spec(args.spec)
    if model is None:
        raise CliError("the oracle command needs an env_model spec")
    layers = _resolve_layers(args, comb)
    rho = _parse_state(args.input)
    direct = simulate_env_model(model, layers, rho)
    via_comb = apply_comb(comb, layers, rho)
    _emit(
        {
            "output_state": encode_matrix(direct),
            "comb_output_state": encode_matrix(via_comb),
            "max_difference": float(np.abs(direct - via_comb).max()),
        }
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qcombs",
        description="Inspect and mitigate temporally correlated quantum noise.",
    )
    parser.add_argument("--version", action="version", version=f"qcombs {__version__}")
    parser.add_argument("--tol", type=float, default=1e-9, help="numerical tolerance")
    parser.add_argument("--seed", type=int, default=0, help="seed for sampling commands")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check positivity and causality of a process")
    p.add_argument("spec")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("choi", help="print the channel form of a process")
    p.add_argument("spec")
    p.add_argument("--form", choices=["choi", "slot"], default="choi")
    p.set_defaults(func=cmd_choi)

    p = sub.add_parser("chi", help="print the Pauli process matrix of a process")
    p.add_argument("spec")
    p.set_defaults(func=cmd_chi)

    p = sub.add_parser("twirl", help="twirl a process and print its Pauli table")
    p.add_argument("spec")
    p.add_argument("--samples", type=int, default=0, help="Monte Carlo frames (0 = exact)")
    p.add_argument("--prune", type=float, default=1e-12, help="drop table entries below this")
    p.set_defaults(func=cmd_twirl)

    p = sub.add_parser("pec", help="quasi-probability cancellation of a process")
    p.add_argument("spec")
    p.add_argument("--layer", action="append", help="slot channel (name, JSON or file)")
    p.add_argument("--input", default="zero", help="input state (name, JSON or file)")
    p.add_argument("--observable", default="z", help="measured observable")
    p.add_argument("--shots", type=int, default=0, help="also sample this many shots")
    p.add_argument("--csv", help="write the quasi-probability weights to a CSV file")
    p.set_defaults(func=cmd_pec)

    p = sub.add_parser("vcp", help="virtually purify a correlated Pauli process")
    p.add_argument("spec")
    p.add_argument("--spec2", help="dilation of the second copy (defaults to the first)")
    p.add_argument("--layer", action="append", help="slot channel (name, JSON or file)")
    p.add_argument("--input", default="zero", help="input state")
    p.add_argument("--csv", help="write the error table with purified weights to CSV")
    p.set_defaults(func=cmd_vcp)

    p = sub.add_parser("oracle", help="simulate an env_model directly and cross-check")
    p.add_argument("spec")
    p.add_argument("--layer", action="append", help="slot channel (name, JSON or file)")
    p.add_argument("--input", default="zero", help="input state")
    p.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except SingularNoiseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
