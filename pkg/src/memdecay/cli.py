"""Command line front end.

Usage:
    memdecay generate --spec spec.json --out A.mtx
    memdecay analyze --matrix A.mtx --topology circulant --out report.json --profile-csv profile.csv
    memdecay bound --matrix A.mtx --out certs.json
    memdecay verify --matrix A.mtx --out verify.json --csv verify.csv
    memdecay invert --matrix A.mtx --method neumann --N auto --out B.mtx --trace trace.json

Exit codes: 0 success, 1 failed verification, 2 usage error, 10 I/O error,
11 parse error, 12 shape mismatch, 13 singular input, 14 empty alpha domain,
15 no convergent scale, 16 Neumann non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import re
import sys
import time
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .class_norms import class_report, piece_norms
from .decay_bounds import (
    SOUNDNESS_SLACK,
    banded_inverse_certificate,
    verify_banded_certificate,
    verify_wiener_certificate,
    wiener_inverse_certificate,
)
from .errors import EmptyDomain, MemDecayError, NonConvergence
from .generators import GeneratorSpec, generate
from .inverse_engine import neumann_inverse
from .mmio import read_matrix, write_matrix
from .operator_core import NormMode, Topology, bandwidth, diagonal_profile, direct_inverse, operator_norm

log = logging.getLogger("memdecay")

EXIT_IO = 10
EXIT_FAILED = 1
_SEED_RE = re.compile(r"^%\s*seed\s*[:=]\s*(\d+)", re.MULTILINE)


def _load(path: str) -> tuple[np.ndarray, int | None]:
    arr = read_matrix(path)
    text = Path(path).read_text()
    m = _SEED_RE.search(text)
    return arr, int(m.group(1)) if m else None


def _topology(args, size: int) -> Topology:
    return Topology(args.topology, size)


def report_schema() -> dict:
    """JSON schema every analysis/bound/verify report validates against."""
    return json.loads(resources.files("memdecay").joinpath("report_schema.json").read_text())


def _write_json(path: str | None, doc: dict) -> None:
    text = json.dumps(doc, indent=2, allow_nan=False) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _finite(x: float | None) -> float | None:
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def _analysis(args, arr: np.ndarray, seed: int | None) -> tuple[dict, Topology, dict]:
    topo = _topology(args, arr.shape[0])
    mode = NormMode.parse(args.norm)
    scales = sorted(set(args.N or [1]) | {1})
    orders = list(range(args.sobolev_m + 1))
    rep = class_report(arr, topo, mode, scales=scales, sobolev_orders=orders, integral_step=args.integral_step)
    prof = diagonal_profile(arr, topo)
    profile = [
        {"k": k, "d_k": prof[k], "piece_norm": rep.piece_norms.get(k, 0.0)}
        for k in topo.offsets()
    ]
    doc = {
        "tool_version": __version__,
        "matrix_meta": {
            "path": str(args.matrix),
            "size": int(arr.shape[0]),
            "topology": topo.kind.value,
            "bandwidth": bandwidth(arr, topo),
            "seed": seed,
        },
        "norm_mode": mode.value,
        "norms": {
            "operator": rep.operator_norm,
            "wiener_1_1": rep.wiener_1_1,
            "wiener_1_N": {str(N): v for N, v in rep.wiener_1_N.items()},
            "integral_wiener": rep.integral_wiener,
            "beurling": rep.beurling,
            "sobolev": {str(m): v for m, v in rep.sobolev.items()},
        },
        "causal_mass": rep.causal_mass,
        "anticausal_mass": rep.anticausal_mass,
        "profile": profile,
        "fit": rep.fit.to_dict(),
        "classification": rep.classification.to_dict(),
        "certificates": None,
        "verification": None,
    }
    return doc, topo, rep.piece_norms


def _certificates(args, arr: np.ndarray, topo: Topology, verify: bool) -> tuple[dict, dict | None, dict, int]:
    mode = NormMode.parse(args.norm)
    N = (args.N or [1])[0]
    B = direct_inverse(arr)
    certs: dict[str, Any] = {"banded": None, "banded_omitted_reason": None, "wiener": None}
    exit_code = 0
    bounds: dict[int, float] = {}
    checks = []
    try:
        banded = banded_inverse_certificate(arr, topo, N, mode, B=B)
        certs["banded"] = banded.to_dict()
        bounds = {e.n: e.bound for e in banded.entries} if N == 1 else {}
        if verify:
            ver, measured = verify_banded_certificate(banded, B, topo)
            certs["banded"]["measured_piece_norms"] = [
                {"n": n, "measured": measured.get(n, 0.0)} for n in sorted(measured)
            ]
            checks.append(ver)
    except EmptyDomain as exc:
        certs["banded_omitted_reason"] = f"EmptyDomain: {exc}"
        exit_code = EmptyDomain.exit_code
    wiener = wiener_inverse_certificate(arr, topo, mode, B=B)
    certs["wiener"] = wiener.to_dict()
    if verify:
        meas = verify_wiener_certificate(wiener, B, topo)
        certs["wiener"]["measured_wiener_1_1"] = meas.wiener_1_1
        certs["wiener"]["measured_wiener_1_N"] = meas.wiener_1_N
        checks.append(meas.verification)
    verification = None
    if verify:
        worst = max((c.max_relative_violation for c in checks), default=0.0)
        verification = {
            "checked": sum(c.checked for c in checks),
            "max_relative_violation": worst if math.isfinite(worst) else 1e308,
            "passed": worst <= SOUNDNESS_SLACK,
        }
        if not verification["passed"] and exit_code == 0:
            exit_code = EXIT_FAILED
    inv_pieces = piece_norms(B, topo, 1, mode)
    return certs, verification, {"bounds": bounds, "inverse_pieces": inv_pieces}, exit_code


def _write_profile_csv(path: str, doc: dict, extra: dict | None) -> None:
    bounds = (extra or {}).get("bounds", {})
    inv = (extra or {}).get("inverse_pieces", {})
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["k", "d_k", "piece_norm_N1", "certified_bound", "measured_inverse_piece_norm"])
        for row in doc["profile"]:
            k = row["k"]
            w.writerow([
                k,
                repr(row["d_k"]),
                repr(row["piece_norm"]),
                repr(bounds[k]) if k in bounds else "",
                repr(inv[k]) if extra is not None and k in inv else "",
            ])


def run_analyze(args) -> tuple[dict, int]:
    start = time.perf_counter()
    arr, seed = _load(args.matrix)
    doc, topo, _ = _analysis(args, arr, seed)
    doc["wall_time_ms"] = (time.perf_counter() - start) * 1e3
    _write_json(args.out, doc)
    if args.profile_csv:
        _write_profile_csv(args.profile_csv, doc, None)
    return doc, 0


def run_bound_verify(args, verify: bool) -> tuple[dict, int]:
    start = time.perf_counter()
    arr, seed = _load(args.matrix)
    doc, topo, _ = _analysis(args, arr, seed)
    certs, verification, extra, code = _certificates(args, arr, topo, verify)
    doc["certificates"] = certs
    doc["verification"] = verification
    doc["wall_time_ms"] = (time.perf_counter() - start) * 1e3
    _write_json(args.out, doc)
    csv_path = getattr(args, "csv", None) or getattr(args, "profile_csv", None)
    if csv_path:
        _write_profile_csv(csv_path, doc, extra)
    return doc, code


def run_invert(args) -> tuple[dict, int]:
    arr, _ = _load(args.matrix)
    topo = _topology(args, arr.shape[0])
    mode = NormMode.parse(args.norm)
    if args.method == "direct":
        B = direct_inverse(arr)
        trace = {
            "method": "direct",
            "residual": operator_norm(arr @ B - np.eye(arr.shape[0]), NormMode.ROW_SUM),
            "converged": True,
        }
        code = 0
    else:
        N = args.N if args.N == "auto" else int(args.N)
        try:
            B, tr = neumann_inverse(arr, topo, N=N, tol=args.tol, max_iter=args.max_iter, mode=mode)
            code = 0
        except NonConvergence as exc:
            tr = exc.trace
            B = None
            code = NonConvergence.exit_code
        trace = {"method": "neumann", **tr.to_dict()}
        trace = {k: (_finite(v) if isinstance(v, float) else v) for k, v in trace.items()}
    if B is not None and args.out:
        write_matrix(args.out, B, comment=f"inverse computed by memdecay {__version__} ({args.method})")
    if args.trace:
        _write_json(args.trace, trace)
    return trace, code


def run_generate(args) -> tuple[dict, int]:
    spec = GeneratorSpec.load(args.spec)
    A, topo = generate(spec)
    comment = f"generated by memdecay {__version__}\nkind: {spec.kind}\ntopology: {topo.kind.value}"
    if spec.seed is not None:
        comment += f"\nseed: {int(spec.seed)}"
    write_matrix(args.out, A, comment=comment)
    return {"kind": spec.kind, "size": spec.size, "topology": topo.kind.value}, 0


def _matrix_options(p: argparse.ArgumentParser, multi_N: bool) -> None:
    p.add_argument("--matrix", required=True, help="Matrix Market input")
    p.add_argument("--topology", choices=["linear", "circulant"], default="linear")
    p.add_argument("--norm", choices=["spectral", "row-sum", "col-sum"], default="spectral")
    help_N = "window scale (repeatable)" if multi_N else "window scale of the banded certificate"
    p.add_argument("--N", type=int, action="append", help=help_N)
    p.add_argument("--sobolev-m", type=int, default=2, help="highest commutator order")
    p.add_argument("--integral-step", type=float, default=0.25, help="quadrature step for the integral Wiener norm")
    p.add_argument("--out", help="JSON report path (stdout if omitted)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="memdecay", description=__doc__.split("\n\n")[0])
    parser.add_argument("--version", action="version", version=f"memdecay {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="build a test matrix from a JSON spec")
    g.add_argument("--spec", required=True)
    g.add_argument("--out", required=True)

    a = sub.add_parser("analyze", help="profile, class norms and decay classification")
    _matrix_options(a, multi_N=True)
    a.add_argument("--profile-csv")

    b = sub.add_parser("bound", help="issue inverse-decay certificates")
    _matrix_options(b, multi_N=False)
    b.add_argument("--profile-csv")

    v = sub.add_parser("verify", help="issue certificates and check them against the true inverse")
    _matrix_options(v, multi_N=False)
    v.add_argument("--csv")

    i = sub.add_parser("invert", help="direct or Neumann-series inversion")
    i.add_argument("--matrix", required=True)
    i.add_argument("--topology", choices=["linear", "circulant"], default="linear")
    i.add_argument("--norm", choices=["spectral", "row-sum", "col-sum"], default="spectral")
    i.add_argument("--method", choices=["direct", "neumann"], default="direct")
    i.add_argument("--N", default="auto", help="window scale or 'auto'")
    i.add_argument("--tol", type=float, default=1e-10)
    i.add_argument("--max-iter", type=int, default=200)
    i.add_argument("--out", help="Matrix Market output for the inverse")
    i.add_argument("--trace", help="JSON trace output")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    if args.command == "invert" and args.N != "auto":
        try:
            if int(args.N) < 1:
                raise ValueError
        except ValueError:
            parser.error(f"--N must be a positive integer or 'auto', got {args.N!r}")
    handlers = {
        "generate": run_generate,
        "analyze": run_analyze,
        "bound": lambda a: run_bound_verify(a, verify=False),
        "verify": lambda a: run_bound_verify(a, verify=True),
        "invert": run_invert,
    }
    try:
        _, code = handlers[args.command](args)
    except MemDecayError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return exc.exit_code
    except OSError as exc:
        log.error("IoError: %s", exc)
        return EXIT_IO
    return code


if __name__ == "__main__":
    sys.exit(main())
