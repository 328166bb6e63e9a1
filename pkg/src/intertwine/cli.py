"""Command line entry point.

Exit codes: 0 success, 1 usage or input error, 2 a numerical check failed.
Complex numbers are written as ``[re, im]``; matrices as row-major nested lists.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import warnings
from typing import Any

import numpy as np

from . import circuit, experiments, machines, measures, nogo
from .states import BlochDirection, PureState, block_generator, qubit_from_bloch

AGREE_TOL = 1e-10
MACHINE_TOL = 1e-9


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # argparse would exit with status 2
        raise UsageError(f"{self.prog}: {message}")


def _jsonable(x: Any) -> Any:
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return None if math.isnan(x) else x
    return x


def _angles(text: str) -> BlochDirection:
    try:
        theta, phi = (float(p) for p in text.split(","))
        return BlochDirection(theta, phi)
    except ValueError as exc:
        raise UsageError(f"bad angle pair {text!r} (expected theta,phi in radians): {exc}") from None


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise UsageError(f"bad complex number {text!r}") from None


# Each command returns (payload, csv rows or None, exit code).


def cmd_concurrence(args) -> tuple[dict, list[dict] | None, int]:
    n, m = args.psi, args.phi
    out = machines.entangle(qubit_from_bloch(n), qubit_from_bloch(m))
    c_bloch = measures.concurrence_bloch(n, m)
    c_pure = measures.concurrence_pure(out)
    c_mixed = measures.concurrence_mixed(out).concurrence
    gap = max(abs(c_bloch - c_pure), abs(c_bloch - c_mixed), abs(c_pure - c_mixed))
    payload = {
        "command": "concurrence",
        "psi": [n.theta, n.phi],
        "phi": [m.theta, m.phi],
        "concurrence_bloch": c_bloch,
        "concurrence_pure": c_pure,
        "concurrence_wootters": c_mixed,
        "max_discrepancy": gap,
        "agree": gap <= AGREE_TOL,
    }
    return payload, None, 0 if gap <= AGREE_TOL else 2


def cmd_machine(args):
    try:
        p = machines.MachineParams(args.xi, args.eta)
    except machines.MachineBoundError as exc:
        raise UsageError(f"eta <= sqrt(1 - xi^2)/2 violated: {exc}") from None
    try:
        psi = PureState([args.a, args.b])
    except ValueError as exc:
        raise UsageError(f"input qubit (a, b): {exc}") from None
    a, b = psi.amplitudes
    rho = machines.machine_rho(psi, p)
    report = measures.concurrence_mixed(rho)
    lam = machines.machine_lambdas(p, b)
    c_closed = machines.machine_concurrence(p, b)
    gap = max(abs(report.concurrence - c_closed), float(np.max(np.abs(np.array(report.lambdas) - lam))))
    payload = {
        "command": "machine",
        "xi": p.xi,
        "eta": p.eta,
        "a": complex(a),
        "b": complex(b),
        "rho": rho.matrix,
        "lambdas_closed_form": list(lam),
        "lambdas_numeric": list(report.lambdas),
        "concurrence_closed_form": c_closed,
        "concurrence_wootters": report.concurrence,
        "max_discrepancy": gap,
        "agree": gap <= MACHINE_TOL,
    }
    return payload, None, 0 if gap <= MACHINE_TOL else 2


def cmd_circuit(args):
    psi, phi = qubit_from_bloch(args.psi), qubit_from_bloch(args.phi)
    state = circuit.symmetrizer_circuit_state(psi, phi, args.theta)
    outcomes = circuit.measure_control(state)
    formula = circuit.branch_concurrences(psi, phi, args.theta)
    branches = []
    for o, c_formula in zip(outcomes, formula):
        branches.append(
            {
                "control_bit": o.control_bit,
                "probability": o.probability,
                "concurrence": o.concurrence,
                "concurrence_formula": c_formula,
                "post_state": None if o.post_state is None else o.post_state.amplitudes,
            }
        )
    avg = circuit.average_concurrence(psi, phi, args.theta)
    payload = {
        "command": "circuit",
        "theta": args.theta,
        "psi": [args.psi.theta, args.psi.phi],
        "phi": [args.phi.theta, args.phi.phi],
        "branches": branches,
        "average_concurrence": avg,
        "premeasure_ppt_min_eigenvalue": measures.ppt_min_eigenvalue(circuit.premeasure_density(psi, phi)),
    }
    if args.shots:
        counts = circuit.sample_control(state, args.shots, block_generator(args.seed))
        payload["shots"] = {
            "shots": args.shots,
            "seed": args.seed,
            "counts": counts,
            "frequencies": counts / args.shots,
        }
    rows = [{k: b[k] for k in ("control_bit", "probability", "concurrence", "concurrence_formula")} for b in branches]
    return payload, rows, 0


def _search(theta: float, args) -> nogo.SearchResult | None:
    if args.budget <= 0:
        return None
    initial = None
    if args.warm_start:
        initial = nogo.entangler_parameters(args.machine_dim, 1 if math.sin(theta) >= 0 else -1)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return nogo.optimize_machine(theta, args.machine_dim, args.probes, args.budget, args.seed, initial)


def _search_payload(r: nogo.SearchResult | None) -> dict | None:
    if r is None:
        return None
    return {
        "theta": r.theta,
        "machine_dim": r.machine_dim,
        "best_worst_fidelity": r.best_worst_fidelity,
        "evaluations": r.evaluations,
        "seed": r.seed,
        "probe_count": r.probe_count,
        "skipped_probes": list(r.skipped_probes),
        "parameters": r.parameters,
    }


def cmd_nogo(args):
    check = nogo.consistency_residual(args.theta)
    payload = {
        "command": "nogo",
        "theta": check.theta,
        "residual": check.residual,
        "search": _search_payload(_search(args.theta, args)),
    }
    return payload, None, 0


def cmd_sweep(args):
    if args.steps < 1:
        raise UsageError("--steps must be >= 1")
    grid = np.linspace(args.theta_min, args.theta_max, args.steps) if args.steps > 1 else np.array([args.theta_min])
    rows = []
    for check in nogo.residual_sweep(grid):
        r = _search(check.theta, args)
        rows.append(
            {
                "theta": check.theta,
                "residual": check.residual,
                "best_fidelity": math.nan if r is None else r.best_worst_fidelity,
            }
        )
    return {"command": "sweep", "rows": rows}, rows, 0


def cmd_estimate(args):
    try:
        rep = experiments.estimate(args.what, args.samples, args.seed, args.theta, args.dim, args.workers)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    payload = {
        "command": "estimate",
        "quantity": rep.quantity,
        "samples": rep.samples,
        "mean": rep.mean,
        "stderr": rep.stderr,
        "seed": rep.seed,
        "expected": rep.expected,
        "z_score": rep.z_score,
        "within_5_sigma": rep.within_gate(),
    }
    return payload, None, 0 if rep.within_gate() else 2


def cmd_validate(args):
    checks, grid = experiments.run_validation(args.seed)
    failed_grid = [g for g in grid if not g.passed]
    rows = [c.__dict__ for c in checks]
    ok = all(c.passed for c in checks) and not failed_grid
    payload = {"command": "validate", "passed": ok, "grid_rows": len(grid), "grid_failures": len(failed_grid), "checks": rows}
    if not ok:
        for c in checks:
            if not c.passed:
                print(f"FAIL {c.check}: max error {c.max_error:.3e} > {c.tolerance:.1e}", file=sys.stderr)
        for g in failed_grid:
            print(f"FAIL grid xi={g.xi} eta={g.eta} trial={g.trial}: {g}", file=sys.stderr)
    return payload, rows, 0 if ok else 2


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("json", "csv"), default=None, dest="output_format")
    common.add_argument("--output", default=None, help="write to this file instead of stdout")

    search = _Parser(add_help=False)
    search.add_argument("--machine-dim", type=int, default=2)
    search.add_argument("--budget", type=int, default=0, help="objective evaluations; 0 skips the search")
    search.add_argument("--probes", type=int, default=6)
    search.add_argument("--warm-start", action="store_true", help="start from exp(+/- i pi/4 P) (x) I")

    parser = _Parser(prog="intertwine", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("concurrence", parents=[common], help="concurrence of an intertwined Bloch pair")
    p.add_argument("--psi", type=_angles, required=True, metavar="THETA,PHI")
    p.add_argument("--phi", type=_angles, required=True, metavar="THETA,PHI")
    p.set_defaults(func=cmd_concurrence)

    p = sub.add_parser("machine", parents=[common], help="closed-form machine output at (xi, eta)")
    p.add_argument("--xi", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--a", type=_complex, default=complex(1 / math.sqrt(2)))
    p.add_argument("--b", type=_complex, default=complex(1 / math.sqrt(2)))
    p.set_defaults(func=cmd_machine)

    p = sub.add_parser("circuit", parents=[common], help="Fredkin symmetrizer branches")
    p.add_argument("--theta", type=float, required=True)
    p.add_argument("--psi", type=_angles, required=True, metavar="THETA,PHI")
    p.add_argument("--phi", type=_angles, required=True, metavar="THETA,PHI")
    p.add_argument("--shots", type=int, default=0)
    p.set_defaults(func=cmd_circuit)

    p = sub.add_parser("nogo", parents=[common, search], help="consistency residual and optional search")
    p.add_argument("--theta", type=float, required=True)
    p.set_defaults(func=cmd_nogo)

    p = sub.add_parser("sweep", parents=[common, search], help="residual (and search) over a theta grid")
    p.add_argument("--theta-min", type=float, default=0.0)
    p.add_argument("--theta-max", type=float, default=math.pi)
    p.add_argument("--steps", type=int, default=181)
    p.set_defaults(func=cmd_sweep, default_format="csv")

    p = sub.add_parser("estimate", parents=[common], help="Monte Carlo average")
    p.add_argument("--what", required=True, choices=experiments.QUANTITIES)
    p.add_argument("--samples", type=int, default=100_000)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--dim", type=int, default=None)
    p.add_argument("--workers", type=int, default=None, help=f"threads (default ${experiments.THREADS_ENV} or 1)")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("validate", parents=[common], help="run every internal cross-check")
    p.set_defaults(func=cmd_validate)
    return parser


def _flatten(payload: dict) -> list[dict]:
    return [{k: v for k, v in payload.items() if not isinstance(v, (dict, list, np.ndarray))}]


def _render(payload: dict, rows: list[dict] | None, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(_jsonable(payload), indent=2) + "\n"
    rows = rows if rows is not None else _flatten(payload)
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: ("" if v is None else repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in row.items()})
    return buf.getvalue()


def _write_atomic(path: str, text: str) -> None:
    folder = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".intertwine-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        payload, rows, code = args.func(args)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return 1
    fmt = args.output_format or getattr(args, "default_format", "json")
    text = _render(payload, rows, fmt)
    if args.output:
        _write_atomic(args.output, text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
