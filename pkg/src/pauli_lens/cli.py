"""Command-line front end.

Each subcommand runs one analysis pipeline and prints a JSON report to
stdout; numeric results are also written as CSV when --csv (or --out, which
places a .csv next to the report) is given.  Exit codes: 0 on success or a
passing verification, 1 when a verification fails, 2 on input errors.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from .boolfn import (BooleanFunction, DegreeOracleError, approx_degree,
                     average_case_report, make_named, postprocessing_degree_bound,
                     worst_case_requirement)
from .circuit_ir import QacCircuit, parse, unitary
from .lowdeg_approx import (ApproxCertificate, WeightPolynomial, approx_circuit,
                            approx_cz, approx_product_state, approx_unitary_dense,
                            verify_certificate)
from .pauli_core import (ErrorLedger, PauliOperator, dense_limit,
                         expand_from_dense)
from .parity_boost import (AuditError, CircuitSpec, Margin, ascii_tree,
                           compose_specs, full_plan, step1_plan, step2_plan,
                           threshold_report)
from .states_channels import (QuantumState, channel_degree_bound, make_cat,
                              synthesis_requirement)


# -- input loading ----------------------------------------------------------------------

def _read_json(path: str):
    return json.loads(Path(path).read_text())


def _load_circuit(path: str) -> QacCircuit:
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return QacCircuit.from_json_obj(json.loads(text))
    return parse(text)


def _complex_entries(rows):
    def conv(e):
        if isinstance(e, (list, tuple)):
            return complex(e[0], e[1])
        return complex(e)
    return np.array([[conv(e) for e in row] for row in rows])


def _load_operator(path: str):
    """Dense matrix (nested lists, entries number or [re, im]) or a Pauli
    expansion object; returns ndarray or PauliOperator."""
    obj = _read_json(path)
    if isinstance(obj, dict) and "terms" in obj:
        return PauliOperator.from_json_obj(obj)
    if isinstance(obj, list) and obj and isinstance(obj[0], list):
        return _complex_entries(obj)
    raise ValueError(f"{path}: expected a dense matrix or a Pauli expansion")


def _load_state(path: str) -> QuantumState:
    obj = _read_json(path)
    if isinstance(obj, dict):
        return QuantumState.from_json_obj(obj)
    if isinstance(obj, list):
        if obj and isinstance(obj[0], list) and obj[0] and isinstance(obj[0][0], list):
            return QuantumState(_complex_entries(obj))  # density rows
        amps = [complex(e[0], e[1]) if isinstance(e, list) else complex(e)
                for e in obj]
        return QuantumState(np.array(amps))
    raise ValueError(f"{path}: expected amplitudes or a state object")


def _load_ancilla(path: str | None):
    if path is None:
        return None
    state = _load_state(path)
    if not state.is_pure:
        raise ValueError(f"{path}: ancilla override must be a pure state")
    return state.vector


def _load_function(args) -> BooleanFunction:
    if getattr(args, "named", None):
        return make_named(args.named, args.n, k=getattr(args, "k", None))
    if getattr(args, "fn", None):
        obj = _read_json(args.fn)
        if isinstance(obj, list):
            n = (len(obj) - 1).bit_length()
            return BooleanFunction(n, obj)
        return BooleanFunction.from_json_obj(obj)
    raise ValueError("need --named NAME --n N or --fn FILE")


# -- output -----------------------------------------------------------------------------

def _config(args, **params) -> dict:
    return {"command": args.command,
            "subcommand": getattr(args, "kind", None),
            "seed": args.seed, "workers": args.workers, **params}


def _emit(args, report: dict, header: list[str] | None = None,
          rows: list[list] | None = None) -> None:
    text = json.dumps(report, indent=2)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    csv_path = args.csv
    if csv_path is None and args.out:
        csv_path = str(Path(args.out).with_suffix(".csv"))
    if csv_path and header is not None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows or [])


# -- subcommands ------------------------------------------------------------------------

def cmd_expand(args) -> int:
    if args.circuit:
        circ = _load_circuit(args.circuit)
        op = expand_from_dense(unitary(circ))
        source = {"kind": "circuit", "n": circ.n_total, "depth": circ.depth}
    elif args.matrix:
        target = _load_operator(args.matrix)
        op = target if isinstance(target, PauliOperator) \
            else expand_from_dense(target)
        source = {"kind": "matrix", "n": op.n}
    else:
        raise ValueError("need --circuit FILE or --matrix FILE")
    obj = op.to_json_obj()
    report = {"config": _config(args), "source": source, "n": op.n,
              "degree": op.degree, "term_count": len(obj["terms"]),
              "expansion": obj}
    rows = [[t["pauli"], t["re"], t["im"]] for t in obj["terms"]]
    _emit(args, report, ["pauli", "re", "im"], rows)
    return 0


_CZ_COLUMNS = ["n", "r", "rho", "degree", "epsilon",
               "promised_degree", "promised_error", "in_guarantee_range"]


def _cz_row(spec) -> list:
    n, r, rho = spec
    cert = approx_cz(n, r=r, rho=rho)
    return [n, cert.detail["r"], cert.detail["rho"], cert.degree, cert.epsilon,
            cert.promised_degree, cert.promised_error, cert.in_guarantee_range]


def _cert_report(args, cert: ApproxCertificate, **params) -> dict:
    return {"config": _config(args, **params), "degree": cert.degree,
            "epsilon": cert.epsilon, "certificate": cert.to_json_obj()}


def cmd_approx(args) -> int:
    if args.kind == "cz":
        ns = [int(v) for v in args.n.split(",")]
        if len(ns) == 1:
            cert = approx_cz(ns[0], r=args.r, rho=args.rho)
            _emit(args, _cert_report(args, cert, n=ns[0], r=args.r),
                  _CZ_COLUMNS, [_cz_row((ns[0], args.r, args.rho))])
            return 0
        specs = [(n, args.r, args.rho) for n in ns]
        if args.workers > 1:
            with ProcessPoolExecutor(max_workers=args.workers) as pool:
                rows = list(pool.map(_cz_row, specs))
        else:
            rows = [_cz_row(s) for s in specs]
        report = {"config": _config(args, n=ns, r=args.r),
                  "sweep": [dict(zip(_CZ_COLUMNS, row)) for row in rows]}
        _emit(args, report, _CZ_COLUMNS, rows)
        return 0

    if args.kind == "circuit":
        circ = _load_circuit(args.circuit)
        cert = approx_circuit(circ, args.ell, r=args.r)
        report = _cert_report(args, cert, ell=args.ell, r=args.r)
        code = 0
        if args.verify:
            if circ.n_total > dense_limit():
                raise ValueError(f"--verify needs <= {dense_limit()} qubits")
            gap = float(np.linalg.norm(
                unitary(circ) - approx_unitary_dense(circ, cert), 2))
            bound = cert.detail["unitary_error"]
            ver = {"measured_unitary_distance": gap, "bound": bound,
                   "passed": gap <= bound + 1e-9}
            report["verification"] = ver
            code = 0 if ver["passed"] else 1
        _emit(args, report,
              ["n", "depth", "ell", "degree", "epsilon"],
              [[circ.n_total, circ.depth, args.ell, cert.degree, cert.epsilon]])
        return code

    if args.kind == "state":
        cert = approx_product_state(args.block_size, args.count, args.r)
        _emit(args, _cert_report(args, cert, block_size=args.block_size,
                                 count=args.count, r=args.r),
              ["block_size", "count", "r", "rho", "degree", "epsilon"],
              [[args.block_size, args.count, args.r, cert.detail["rho"],
                cert.degree, cert.epsilon]])
        return 0

    # choi
    circ = _load_circuit(args.circuit)
    cert = channel_degree_bound(circ, args.k, psi=_load_ancilla(args.ancilla),
                                r=args.r)
    report = _cert_report(args, cert, k=args.k, r=args.r)
    ver = cert.detail.get("verification")
    norm = cert.detail.get("choi_spectral_norm")
    _emit(args, report,
          ["inputs", "outputs", "ancillae", "depth", "degree", "epsilon",
           "choi_spectral_norm", "verified"],
          [[circ.n_inputs, args.k, circ.n_ancillae, circ.depth, cert.degree,
            cert.epsilon, norm, None if ver is None else ver["passed"]]])
    return 0 if ver is None or ver["passed"] else 1


def cmd_degree(args) -> int:
    f = _load_function(args)
    query = approx_degree(f, args.eps, route=args.route)
    report = {"config": _config(args, eps=args.eps, route=args.route),
              "function": {"n": f.n, "named": args.named,
                           "symmetric": f.is_symmetric()},
              "degree": query.degree, "query": query.to_json_obj()}
    _emit(args, report,
          ["n", "epsilon", "degree", "optimum_at_degree", "witness_error"],
          [[f.n, args.eps, query.degree, query.optimum_at_degree,
            query.witness_error]])
    return 0


def cmd_hardness(args) -> int:
    if args.kind == "worst":
        f = _load_function(args)
        rep = worst_case_requirement(f, f.n, args.ancillae, args.depth,
                                     args.delta, r=args.r)
        obj = rep.to_json_obj()
        report = {"config": _config(args), "verdict": rep.verdict, "report": obj}
        _emit(args, report,
              ["n", "ancillae", "depth", "delta", "eps_total",
               "ledger_degree", "exact_degree", "verdict"],
              [[f.n, args.ancillae, args.depth, args.delta, rep.eps_total,
                rep.ledger.degree, rep.exact.degree, rep.verdict]])
        return 0

    if args.kind == "average":
        f = _load_function(args)
        rep = average_case_report(f, args.k, args.eps)
        report = {"config": _config(args), "report": rep}
        _emit(args, report,
              ["n", "k", "epsilon", "weight_above_zero_one",
               "weight_above_pm_one", "bound"],
              [[f.n, args.k, args.eps, rep["weight_above_zero_one"],
                rep["weight_above_pm_one"], rep["bound"]]])
        return 0

    if args.kind == "postproc":
        rep = postprocessing_degree_bound(args.n, args.ancillae, args.depth,
                                          args.ell, args.delta, r=args.r,
                                          mod_k=args.mod_k)
        report = {"config": _config(args), "verdict": rep.verdict,
                  "report": rep.to_json_obj()}
        _emit(args, report,
              ["n", "ancillae", "depth", "ell", "delta", "eps_total",
               "ledger_degree", "verdict"],
              [[args.n, args.ancillae, args.depth, args.ell, args.delta,
                rep.eps_total, rep.ledger.degree, rep.verdict]])
        return 0

    if args.kind == "synthesis":
        state = make_cat(args.cat) if args.cat else _load_state(args.state)
        rep = synthesis_requirement(state, state.n, args.ancillae, args.depth,
                                    args.delta, r=args.r)
        report = {"config": _config(args), "verdict": rep["verdict"],
                  "report": rep}
        _emit(args, report,
              ["n", "ancillae", "depth", "delta", "r", "epsilon",
               "ledger_degree", "lower_bound", "verdict"],
              [[rep["n"], rep["a"], rep["d"], rep["delta"], rep["r"],
                rep["epsilon"], rep["ledger_degree"], rep["lower_bound"],
                rep["verdict"]]])
        return 0

    # channel
    circ = _load_circuit(args.circuit)
    cert = channel_degree_bound(circ, args.k, psi=_load_ancilla(args.ancilla),
                                r=args.r)
    ver = cert.detail.get("verification")
    report = {"config": _config(args), "degree": cert.degree,
              "epsilon": cert.epsilon,
              "choi_norm_cap": 2.0 ** args.k,
              "cb_error_bound": (2.0 ** args.k) * cert.epsilon,
              "certificate": cert.to_json_obj()}
    _emit(args, report,
          ["inputs", "outputs", "degree", "epsilon", "cb_error_bound",
           "verified"],
          [[circ.n_inputs, args.k, cert.degree, cert.epsilon,
            report["cb_error_bound"], None if ver is None else ver["passed"]]])
    return 0 if ver is None or ver["passed"] else 1


def _parse_spec(text: str) -> CircuitSpec:
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ValueError(f"spec {text!r}: expected depth:inputs:ancillae[:delta]")
    margin = Margin.of(float(parts[3])) if len(parts) == 4 else None
    return CircuitSpec(int(parts[0]), int(parts[1]), int(parts[2]), margin)


def _plan_rows(plan) -> list[list]:
    rows = []
    for s in plan.steps:
        rows.append([s.index, s.rule, s.stated.depth, s.stated.inputs,
                     s.stated.ancillae,
                     None if s.stated.margin is None else s.stated.margin.log2])
    rows.append(["final", plan.kind, plan.final.depth, plan.final.inputs,
                 plan.final.ancillae,
                 None if plan.final.margin is None else plan.final.margin.log2])
    return rows


def cmd_boost(args) -> int:
    if args.kind == "compose":
        spec = compose_specs(_parse_spec(args.top), _parse_spec(args.bottom))
        report = {"config": _config(args, top=args.top, bottom=args.bottom),
                  "composed": spec.to_json_obj()}
        _emit(args, report, ["depth", "inputs", "ancillae", "margin_log2"],
              [[spec.depth, spec.inputs, spec.ancillae,
                None if spec.margin is None else spec.margin.log2]])
        return 0

    if args.kind == "threshold":
        if args.margin_const is not None:
            fn = lambda _x: args.margin_const
        else:
            fn = lambda x: float(x) ** args.margin_power
        rep = threshold_report(fn, args.depth_unit)
        report = {"config": _config(args), "report": rep}
        header = list(rep.keys())
        _emit(args, report, header, [[rep[k] for k in header]])
        return 0

    if args.kind == "step1":
        plan = step1_plan(args.d, args.n, args.c, args.delta)
    elif args.kind == "step2":
        plan = step2_plan(args.d, args.n, args.k)
    else:
        plan = full_plan(args.d, args.c, args.K, args.n0, ceiling=args.ceiling)
    tree = ascii_tree(plan)
    print(tree, file=sys.stderr)
    report = {"config": _config(args),
              "final": plan.final.to_json_obj(),
              "tree": tree, "plan": plan.to_json_obj()}
    _emit(args, report, ["step", "rule", "depth", "inputs", "ancillae",
                         "margin_log2"], _plan_rows(plan))
    return 0


def _verify_cz(obj: dict) -> dict:
    poly = obj["detail"]["polynomial"]
    q = WeightPolynomial(int(poly["n"]), int(poly["rho"]), kind=poly["kind"])
    grid = q.grid_values()
    measured = 2.0 * float(np.max(np.abs(grid[:-1])))
    top_gap = abs(grid[-1] - 1.0)
    return {"route": "cz_grid", "grid_points": q.n + 1,
            "measured_error": measured, "claimed_epsilon": obj["epsilon"],
            "top_value_gap": top_gap,
            "degree_claimed": obj["degree"], "degree_rebuilt": q.rho,
            "passed": (measured <= obj["epsilon"] + 1e-9
                       and top_gap <= 1e-9
                       and q.rho <= obj["degree"])}


def cmd_verify(args) -> int:
    obj = _read_json(args.certificate)
    if args.exact is not None:
        if "form" not in obj:
            raise ValueError("certificate carries no explicit form; "
                             "only self-contained targets verify without one")
        cert = ApproxCertificate(
            target=obj["target"], degree=int(obj["degree"]),
            ledger=ErrorLedger(float(obj["epsilon"]), ("loaded certificate",)),
            form=PauliOperator.from_json_obj(obj["form"]))
        rep = verify_certificate(cert, _load_operator(args.exact)).to_json_obj()
        rep["route"] = "explicit_form"
    elif str(obj.get("target", "")).startswith("cz("):
        rep = _verify_cz(obj)
    else:
        raise ValueError("need --exact FILE for this certificate target")
    report = {"config": _config(args), "target": obj.get("target"),
              "passed": rep["passed"], "verification": rep}
    header = sorted(k for k, v in rep.items() if isinstance(v, (int, float, bool)))
    _emit(args, report, header, [[rep[k] for k in header]])
    return 0 if rep["passed"] else 1


# -- parser -----------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="pauli-lens",
        description="Low-degree Pauli approximation certificates for shallow "
                    "circuits: expansions, approximants, degree oracles, "
                    "hardness reports, boost plans, verification.")
    sub = top.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", help="write the JSON report here")
        p.add_argument("--csv", help="write numeric output here as CSV "
                                     "(default: next to --out)")
        p.add_argument("--seed", type=int, default=7,
                       help="sampling seed, recorded in the report")
        p.add_argument("--workers", type=int, default=1,
                       help="worker processes for sweeps")

    p = sub.add_parser("expand", help="Pauli expansion of a circuit or matrix")
    p.add_argument("--circuit")
    p.add_argument("--matrix")
    common(p)

    p = sub.add_parser("approx", help="build an approximation certificate")
    ks = p.add_subparsers(dest="kind", required=True)
    q = ks.add_parser("cz")
    q.add_argument("--n", required=True, help="arity, or comma list to sweep")
    q.add_argument("--r", type=float)
    q.add_argument("--rho", type=int)
    common(q)
    q = ks.add_parser("circuit")
    q.add_argument("--circuit", required=True)
    q.add_argument("--ell", type=int, default=1)
    q.add_argument("--r", type=float)
    q.add_argument("--verify", action="store_true",
                   help="dense unitary check at small sizes")
    common(q)
    q = ks.add_parser("state")
    q.add_argument("--block-size", type=int, default=1)
    q.add_argument("--count", type=int, required=True)
    q.add_argument("--r", type=float, required=True)
    common(q)
    q = ks.add_parser("choi")
    q.add_argument("--circuit", required=True)
    q.add_argument("--k", type=int, required=True, help="kept output wires")
    q.add_argument("--r", type=float)
    q.add_argument("--ancilla", help="override ancilla state file")
    common(q)

    p = sub.add_parser("degree", help="approximate-degree oracle")
    p.add_argument("--named", help="parity | maj | mod")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int, help="modulus for mod")
    p.add_argument("--fn", help="truth-table file")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--route", default="auto",
                   choices=["auto", "general", "symmetric"])
    common(p)

    p = sub.add_parser("hardness", help="hardness / feasibility reports")
    ks = p.add_subparsers(dest="kind", required=True)
    q = ks.add_parser("worst")
    q.add_argument("--named")
    q.add_argument("--n", type=int)
    q.add_argument("--k", type=int)
    q.add_argument("--fn")
    q.add_argument("--ancillae", type=int, default=0)
    q.add_argument("--depth", type=int, required=True)
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--r", type=float)
    common(q)
    q = ks.add_parser("average")
    q.add_argument("--named")
    q.add_argument("--n", type=int)
    q.add_argument("--fn")
    q.add_argument("--k", type=int, required=True, help="predictor degree cap")
    q.add_argument("--eps", type=float, default=0.0)
    common(q)
    q = ks.add_parser("postproc")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--ancillae", type=int, default=0)
    q.add_argument("--depth", type=int, required=True)
    q.add_argument("--ell", type=int, default=1)
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--mod-k", type=int, default=3)
    q.add_argument("--r", type=float)
    common(q)
    q = ks.add_parser("synthesis")
    q.add_argument("--state", help="target state file")
    q.add_argument("--cat", type=int, help="cat-state size instead of a file")
    q.add_argument("--ancillae", type=int, default=0)
    q.add_argument("--depth", type=int, required=True)
    q.add_argument("--delta", type=float, required=True)
    q.add_argument("--r", type=float)
    common(q)
    q = ks.add_parser("channel")
    q.add_argument("--circuit", required=True)
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--r", type=float)
    q.add_argument("--ancilla")
    common(q)

    p = sub.add_parser("boost", help="parity boost plans")
    ks = p.add_subparsers(dest="kind", required=True)
    q = ks.add_parser("compose")
    q.add_argument("--top", required=True, help="depth:inputs:ancillae[:delta]")
    q.add_argument("--bottom", required=True)
    common(q)
    q = ks.add_parser("step1")
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--c", type=int, required=True)
    q.add_argument("--delta", type=float, default=0.5)
    common(q)
    q = ks.add_parser("step2")
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--k", type=int, required=True)
    common(q)
    q = ks.add_parser("full")
    q.add_argument("--d", type=int, required=True)
    q.add_argument("--c", type=int, required=True)
    q.add_argument("--K", type=int, required=True)
    q.add_argument("--n0", type=int, required=True)
    q.add_argument("--ceiling", type=int)
    common(q)
    q = ks.add_parser("threshold")
    q.add_argument("--depth-unit", type=int, required=True)
    q.add_argument("--margin-power", type=float, default=2.0,
                   help="margin grows as depth^power")
    q.add_argument("--margin-const", type=float,
                   help="constant margin instead of a power law")
    common(q)

    p = sub.add_parser("verify", help="re-check a certificate file")
    p.add_argument("--certificate", required=True)
    p.add_argument("--exact", help="exact object file (matrix or expansion)")
    common(p)
    return top


_HANDLERS = {"expand": cmd_expand, "approx": cmd_approx, "degree": cmd_degree,
             "hardness": cmd_hardness, "boost": cmd_boost, "verify": cmd_verify}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses exit status 2 for usage errors
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except AuditError as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError, OSError, DegreeOracleError,
            json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
