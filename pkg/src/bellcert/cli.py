"""Command-line front end.

Exit codes: 0 feasible / pass / none-found, 1 witness or tomography check
failed, 2 usage or input error, 3 infeasible with certificate (or violation
found), 4 numerically marginal.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .certify import DEFAULT_TOL, FEASIBLE, INFEASIBLE, cone_membership, violation_search
from .errors import BellCertError
from .lhvcone import build_generators
from .measurements import complete_config, event_vector, reconstruct_state
from .registry import parse_config, parse_state
from .serialize import (
    certificate_from_json,
    certificate_to_json,
    config_to_json,
    density_to_json,
    dumps,
    event_vector_to_json,
    vector_to_json,
    witness_from_json,
    witness_to_json,
)
from .witness import verify_witness, witness_from_farkas, witness_to_farkas

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3
EXIT_MARGINAL = 4

TOMOGRAPHY_DIMS = {(2, 2), (2, 3), (3, 3)}


class UsageError(Exception):
    pass


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("BELLCERT_THREADS", "1")))
    except ValueError:
        return 1


def _emit(args, doc: dict, summary: str, inputs: dict, started: float) -> None:
    doc["manifest"] = {
        "command": args.command_name,
        "inputs": inputs,
        "seed": args.seed,
        "tol": args.tol,
        "version": __version__,
        "duration_s": round(time.perf_counter() - started, 6),
    }
    text = dumps(doc)
    if args.out:
        Path(args.out).write_text(text)
    if args.json:
        sys.stdout.write(text)
    else:
        print(summary)


def _load_json(path: str) -> dict:
    return json.loads(Path(path).read_text())


def cmd_event_vector(args, started) -> int:
    rho = parse_state(args.state, args.seed)
    cfg = parse_config(args.config)
    p = event_vector(rho, cfg)
    lay = p.layout
    summary = f"event vector: {len(p)} entries ({lay.size_joint} joint + {lay.size_a} A + {lay.size_b} B)"
    _emit(args, event_vector_to_json(p), summary, {"state": args.state, "config": args.config}, started)
    return EXIT_OK


def cmd_membership(args, started) -> int:
    rho = parse_state(args.state, args.seed)
    cfg = parse_config(args.config)
    res = cone_membership(event_vector(rho, cfg), build_generators(cfg), args.tol, cfg)
    doc = {
        "status": res.status,
        "residual": float(res.residual),
        "message": res.message,
        "certificate": certificate_to_json(res.certificate) if res.certificate is not None else None,
    }
    summary = f"status: {res.status} (slack {res.residual:.3e})"
    if res.certificate is not None:
        summary += f"\nBell violation F.P = {res.certificate.violation:.10f}"
    _emit(args, doc, summary, {"state": args.state, "config": args.config}, started)
    if res.status == FEASIBLE:
        return EXIT_OK
    if res.status == INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_MARGINAL


def cmd_witness_build(args, started) -> int:
    doc = _load_json(args.certificate)
    # accept membership/search output as well as a bare certificate
    if "F" not in doc:
        if not doc.get("certificate"):
            raise UsageError(f"{args.certificate} contains no certificate")
        doc = doc["certificate"]
    cert = certificate_from_json(doc)
    if cert.config is None:
        raise UsageError("certificate has no measurement configuration")
    w = witness_from_farkas(cert, cert.config)
    summary = f"witness on {w.dim_a}x{w.dim_b} built from Farkas vector of length {len(cert.F)}"
    _emit(args, witness_to_json(w), summary, {"certificate": args.certificate}, started)
    return EXIT_OK


def cmd_witness_verify(args, started) -> int:
    w = witness_from_json(_load_json(args.witness))
    rho = parse_state(args.state, args.seed)
    rep = verify_witness(w, rho, samples=args.samples, restarts=args.restarts, seed=args.seed)
    pm = rep.product_minimum
    doc = {
        "passed": rep.passed,
        "value": rep.value,
        "product_minimum": pm.value,
        "grid_minimum": pm.grid_value,
        "certification": pm.level,
        "reasons": rep.reasons,
    }
    summary = (f"{'PASS' if rep.passed else 'FAIL'}: Tr(H rho) = {rep.value:.10f}, "
               f"product minimum <= {pm.value:.3e} [{pm.level}]")
    _emit(args, doc, summary, {"witness": args.witness, "state": args.state}, started)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_witness_decompose(args, started) -> int:
    w = witness_from_json(_load_json(args.witness))
    cfg = complete_config(w.dim_a, w.dim_b)
    f, c = witness_to_farkas(w, cfg)
    rebuilt = witness_from_farkas(f, cfg).H + c * np.eye(w.dim_a * w.dim_b)
    dev = float(np.max(np.abs(rebuilt - w.H)))
    doc = {
        "F": vector_to_json(f),
        "c": float(c),
        "layout": cfg.layout.to_json(),
        "config_name": f"complete:{w.dim_a},{w.dim_b}",
        "config": config_to_json(cfg),
        "roundtrip_deviation": dev,
    }
    summary = f"decomposed over complete:{w.dim_a},{w.dim_b}; c = {c:.10f}; roundtrip deviation {dev:.3e}"
    _emit(args, doc, summary, {"witness": args.witness}, started)
    return EXIT_OK if dev <= 1e-10 else EXIT_FAIL


def cmd_search(args, started) -> int:
    rho = parse_state(args.state, args.seed)
    try:
        res = violation_search(rho, args.shape, restarts=args.restarts, max_evals=args.max_evals,
                               seed=args.seed, tol=args.tol, threads=_threads())
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    doc = {
        "found": res.found,
        "shape": str(args.shape),
        "best_visibility": res.best_visibility,
        "best_restart": res.best_restart,
        "best_residual": float(res.membership.residual),
        "status": res.membership.status,
        "certificate": certificate_to_json(res.certificate) if res.found else None,
        "config": config_to_json(res.config),
    }
    if res.found:
        summary = f"violation found: F.P = {res.certificate.violation:.10f} (visibility {res.best_visibility:.6f})"
    else:
        summary = f"none found: best critical visibility {res.best_visibility:.6f} (not a proof of locality)"
    inputs = {"state": args.state, "shape": args.shape, "restarts": args.restarts, "max_evals": args.max_evals}
    _emit(args, doc, summary, inputs, started)
    return EXIT_INFEASIBLE if res.found else EXIT_OK


def cmd_tomography(args, started) -> int:
    rho = parse_state(args.state, args.seed)
    dims = tuple(int(x) for x in args.dims.split(",")) if args.dims else rho.dims
    if dims not in TOMOGRAPHY_DIMS or dims != rho.dims:
        raise UsageError(f"unsupported dims {dims} for state of dims {rho.dims}")
    cfg = complete_config(*dims)
    rec = reconstruct_state(event_vector(rho, cfg), cfg)
    dev = float(np.max(np.abs(rec.matrix - rho.matrix)))
    doc = {"dims": list(dims), "measurements": [len(cfg.alice), len(cfg.bob)], "max_deviation": dev}
    summary = f"reconstructed {dims[0]}x{dims[1]} state; max deviation {dev:.3e}"
    _emit(args, doc, summary, {"state": args.state, "dims": list(dims)}, started)
    return EXIT_OK if dev <= 1e-10 else EXIT_FAIL


def cmd_state_show(args, started) -> int:
    rho = parse_state(args.name, args.seed)
    _emit(args, density_to_json(rho), f"{args.name}: {rho.dim_a}x{rho.dim_b} density matrix",
          {"state": args.name}, started)
    return EXIT_OK


def cmd_config_show(args, started) -> int:
    cfg = parse_config(args.name)
    lay = cfg.layout
    summary = f"{args.name}: Alice outcomes {list(lay.outcomes_a)}, Bob outcomes {list(lay.outcomes_b)}"
    _emit(args, config_to_json(cfg), summary, {"config": args.name}, started)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL, help="feasibility tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write the result document here")
    common.add_argument("--json", action="store_true", help="print the result document instead of a summary")

    parser = argparse.ArgumentParser(prog="bellcert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("event-vector", parents=[common], help="outcome probabilities of a config on a state")
    p.add_argument("--state", required=True)
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_event_vector, command_name="event-vector")

    p = sub.add_parser("membership", parents=[common], help="LHV cone membership with Farkas certificate")
    p.add_argument("--state", required=True)
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_membership, command_name="membership")

    wp = sub.add_parser("witness", help="build, verify or decompose entanglement witnesses")
    wsub = wp.add_subparsers(dest="action", required=True)
    p = wsub.add_parser("build", parents=[common])
    p.add_argument("--certificate", required=True)
    p.set_defaults(func=cmd_witness_build, command_name="witness build")
    p = wsub.add_parser("verify", parents=[common])
    p.add_argument("--witness", required=True)
    p.add_argument("--state", required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--restarts", type=int, default=16)
    p.set_defaults(func=cmd_witness_verify, command_name="witness verify")
    p = wsub.add_parser("decompose", parents=[common])
    p.add_argument("--witness", required=True)
    p.set_defaults(func=cmd_witness_decompose, command_name="witness decompose")

    p = sub.add_parser("search", parents=[common], help="numerical search for Bell violations")
    p.add_argument("--state", required=True)
    p.add_argument("--shape", default="2x2,2x2", help="measurements x outcomes per party, e.g. 2x2,2x2")
    p.add_argument("--restarts", type=int, default=32)
    p.add_argument("--max-evals", type=int, default=400)
    p.set_defaults(func=cmd_search, command_name="search")

    p = sub.add_parser("tomography", parents=[common], help="reconstruct a state from complete measurements")
    p.add_argument("--state", required=True)
    p.add_argument("--dims")
    p.set_defaults(func=cmd_tomography, command_name="tomography")

    sp = sub.add_parser("state", help="inspect registry states")
    ssub = sp.add_subparsers(dest="action", required=True)
    p = ssub.add_parser("show", parents=[common])
    p.add_argument("name")
    p.set_defaults(func=cmd_state_show, command_name="state show")

    cp = sub.add_parser("config", help="inspect registry configurations")
    csub = cp.add_subparsers(dest="action", required=True)
    p = csub.add_parser("show", parents=[common])
    p.add_argument("name")
    p.set_defaults(func=cmd_config_show, command_name="config show")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    started = time.perf_counter()
    try:
        return args.func(args, started)
    except (UsageError, BellCertError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"bellcert: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
