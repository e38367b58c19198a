"""``hilbext`` command line: build descriptors, classify them, run verification suites.

Exit codes: 0 success, 1 property failure, 2 invariant-computation error
(Unstable, NonStabilizing, LiftFailure), 3 input error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
import time

import numpy as np

from ._config import DEFAULT_TOL, get_tol
from .bundle import DEFAULT_CORONA_EPS
from .errors import HilbextError, LiftFailure, NonStabilizing, Unstable, ValidationError
from .extension import (
    build_split_extension,
    build_Wk_extension,
    busby_invariant,
    check_exactness,
    check_fullness,
    check_quotient_morphism,
)
from .hilbmod import morphism_defects
from .invariants import fredholm_index, level_invariants, stiefel_class
from .invariants.fredholm import KERNEL_THRESHOLD, StructuredOperator, kernel_dimensions
from .isometry import isometry_to_delta, roundtrip_check
from .mesh import annulus_tower, build_disk_mesh
from .sampling import random_function, random_isometry_field, random_section
from .serialize import (
    dumps,
    extension_from_json,
    extension_to_json,
    isometry_from_json,
    operator_from_json,
    operator_to_json,
)

EXIT_OK, EXIT_PROPERTY, EXIT_INVARIANT, EXIT_INPUT = 0, 1, 2, 3


class InputError(Exception):
    """Unreadable or malformed input."""


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hilbext", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="write an example descriptor")
    bsub = b.add_subparsers(dest="example", required=True)
    wk = bsub.add_parser("disk-wk", help="the winding extension W_k over the disk")
    wk.add_argument("--k", type=int, required=True)
    sp = bsub.add_parser("split", help="the split extension C(X) -> C(boundary)")
    for q in (wk, sp):
        q.add_argument("--angular", type=int, default=64, help="boundary vertices")
        q.add_argument("--radial", type=int, default=4, help="rings inside the disk")
    op = bsub.add_parser("operator", help="Toeplitz operator with symbol z^p")
    op.add_argument("--symbol-power", type=int, required=True)
    op.add_argument("--defect", choices=("finite", "infinite"), default="finite")
    op.add_argument("--samples", type=int, default=64, help="symbol samples on the circle")
    for q in (wk, sp, op):
        q.add_argument("--out", help="output file (default: stdout)")

    c = sub.add_parser("classify", help="compute the homotopy invariant of a descriptor")
    c.add_argument("descriptor")
    c.add_argument("--tower-depth", type=int, default=3)
    c.add_argument("--csv", help="write windings per tower level to this CSV file")

    v = sub.add_parser("verify", help="run randomized property suites on a descriptor")
    v.add_argument("descriptor")
    v.add_argument("--suite", choices=("morphism", "roundtrip", "exactness", "all"), default="all")
    v.add_argument("--trials", type=int, default=50)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--tower-depth", type=int, default=3)

    for q in (c, v):
        q.add_argument("--pretty", action="store_true", help="human-readable report")
        q.add_argument("--timing", action="store_true", help="include wall time (breaks byte-identity)")
    return p


def _load(path: str):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
        data = json.loads(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"{path} does not hold a JSON object")
    return data, hashlib.sha256(raw).hexdigest()


def _descriptor_type(d: dict) -> str:
    kind = d.get("type")
    if kind is None and "source" in d and "values" in d:
        kind = "isometry"
    if kind not in ("extension", "operator", "isometry"):
        raise InputError(f"unknown descriptor type {kind!r}")
    return kind


def _parse(kind: str, d: dict, check: bool = True):
    try:
        if kind == "extension":
            return extension_from_json(d)
        if kind == "operator":
            return operator_from_json(d)
        return isometry_from_json(d, check=check)
    except (KeyError, TypeError, ValueError) as exc:
        # ValidationError is a ValueError
        raise InputError(f"malformed {kind} descriptor: {exc}") from exc


def _tower_for(ext, depth: int):
    return annulus_tower(depth, len(ext.cycle))


def cmd_build(args) -> tuple:
    if args.example == "operator":
        theta = 2 * np.pi * np.arange(args.samples) / args.samples
        if 2 * abs(args.symbol_power) >= args.samples:
            raise InputError("--samples must exceed twice the symbol power")
        F = StructuredOperator(np.exp(1j * args.symbol_power * theta), infinite_defect=args.defect == "infinite")
        payload = operator_to_json(F)
    else:
        disk = build_disk_mesh(args.radial, args.angular)
        ext = build_Wk_extension(args.k, disk) if args.example == "disk-wk" else build_split_extension(disk)
        payload = extension_to_json(ext)
    text = dumps(payload)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text + "\n")
        except OSError as exc:
            raise InputError(f"cannot write {args.out}: {exc}") from exc
    else:
        sys.stdout.write(text + "\n")
    return EXIT_OK, None


def _windings_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["level", "cycle", "winding"])
    for t, rec in enumerate(records):
        for i, k in enumerate(rec.windings):
            w.writerow([t, i, k])
    return buf.getvalue()


def cmd_classify(args, report: dict) -> int:
    d, _ = _load(args.descriptor)
    kind = _descriptor_type(d)
    obj = _parse(kind, d)
    report["tolerances"] = {"algebraic": get_tol()}
    if kind == "operator":
        cls = fredholm_index(obj)
        report["records"] = [cls.to_record().to_dict()]
        report["index"] = None if cls.is_infinite else cls.index
        report["tolerances"]["kernel_singular_value"] = KERNEL_THRESHOLD
        if not cls.is_infinite:
            report["truncation"] = kernel_dimensions(obj)[2]
        return EXIT_OK
    if kind == "isometry":
        report["records"] = [stiefel_class(obj).to_dict()]
        return EXIT_OK
    tower = _tower_for(obj, args.tower_depth)
    report["tolerances"]["corona_eps"] = DEFAULT_CORONA_EPS
    records = level_invariants(obj, tower)
    report["levels"] = [r.to_dict() for r in records]
    if args.csv:
        try:
            with open(args.csv, "w") as fh:
                fh.write(_windings_csv(records))
        except OSError as exc:
            raise InputError(f"cannot write {args.csv}: {exc}") from exc
    if any(r != records[0] for r in records):
        listing = ", ".join(f"level {t}: {list(r.windings)}" for t, r in enumerate(records))
        raise Unstable(f"invariants disagree across the tower ({listing})")
    report["records"] = [records[0].to_dict()]
    return EXIT_OK


def _morphism_suite(D, rng, trials, tol) -> tuple:
    bad = D.defects(tol)
    if bad:
        z, kind, err = bad[0]
        return False, {"vertex": z, "kind": kind, "error": err, "stage": "isometry invariant"}
    phi = isometry_to_delta(D)
    pairs = [(random_section(D.source, rng), random_section(D.source, rng)) for _ in range(trials)]
    defects = morphism_defects(phi, pairs, tol)
    if defects:
        return False, dict(defects[0], stage="morphism axiom")
    return True, None


def _roundtrip_suite(D, rng, trials, tol) -> tuple:
    for t in range(trials):
        X = D if t == 0 else random_isometry_field(D.source, D.vertex_map, D.target, rng)
        if not roundtrip_check(X, tol=tol):
            return False, {"trial": t, "stage": "roundtrip"}
    return True, None


def _w_samples(ext, rng, n):
    cut = ext.cutoff()
    out = []
    for i in range(n):
        ideal = random_section(ext.V_bundle, rng).scale(cut)
        if i % 2:
            out.append(ideal)
        else:
            out.append(ext.lift(random_section(ext.Z_bundle, rng)) + ideal)
    return out


def _exactness_suite(ext, rng, trials, tol) -> tuple:
    samples = _w_samples(ext, rng, trials)
    if not check_exactness(ext, samples, tol):
        return False, {"stage": "exactness"}
    if not check_quotient_morphism(ext, list(zip(samples, samples[1:] + samples[:1])), tol):
        return False, {"stage": "quotient morphism"}
    # a generic Z-lift plus the constant-one function spans every fiber
    full = samples + [ext.lift(random_section(ext.Z_bundle, rng))]
    if ext.algebra == "closure":
        full.append(random_function(ext.space, rng))
    if not check_fullness(ext, [s for s in full if ext.membership(s, tol)[0]], tol):
        return False, {"stage": "fullness"}
    return True, None


def cmd_verify(args, report: dict) -> int:
    d, _ = _load(args.descriptor)
    kind = _descriptor_type(d)
    if kind == "operator":
        raise InputError("verification suites apply to extension and isometry descriptors")
    tol = get_tol()
    rng = np.random.default_rng(args.seed)
    obj = _parse(kind, d, check=False)
    if kind == "extension":
        ext = obj
        D = busby_invariant(ext, _tower_for(ext, args.tower_depth))
    else:
        ext, D = None, obj
    suites = ("morphism", "roundtrip", "exactness") if args.suite == "all" else (args.suite,)
    report["tolerances"] = {"algebraic": tol}
    report["seed"] = args.seed
    report["trials"] = args.trials
    verdicts, counterexamples = {}, {}
    for name in suites:
        if name == "exactness":
            if ext is None:
                continue
            ok, cx = _exactness_suite(ext, rng, args.trials, tol)
        elif name == "morphism":
            ok, cx = _morphism_suite(D, rng, args.trials, tol)
        else:
            ok, cx = _roundtrip_suite(D, rng, args.trials, tol) if not D.defects(tol) else (
                False, {"stage": "roundtrip", "reason": "input is not an isometry field"})
        verdicts[name] = ok
        if cx is not None:
            counterexamples[name] = cx
    report["verdicts"] = verdicts
    if counterexamples:
        report["counterexamples"] = counterexamples
    return EXIT_OK if all(verdicts.values()) else EXIT_PROPERTY


def _pretty(report: dict) -> str:
    lines = [f"command: {' '.join(report['command'])}"]
    if "inputs_sha256" in report:
        lines.append(f"input sha256: {report['inputs_sha256']}")
    for t, rec in enumerate(report.get("levels", [])):
        lines.append(f"level {t}: {rec}")
    for rec in report.get("records", []):
        lines.append(f"invariant: {rec}")
    if report.get("index", "absent") != "absent":
        lines.append(f"index: {'infinite' if report['index'] is None else report['index']}")
    for name, ok in report.get("verdicts", {}).items():
        lines.append(f"{name}: {'PASS' if ok else 'FAIL'}")
    for name, cx in report.get("counterexamples", {}).items():
        lines.append(f"counterexample [{name}]: {json.dumps(cx, sort_keys=True)}")
    for name, tol in report.get("tolerances", {}).items():
        lines.append(f"tolerance {name}: {tol:g}")
    if "error" in report:
        lines.append(f"error: {report['error']['type']}: {report['error']['message']}")
    if "wall_time" in report:
        lines.append(f"wall time: {report['wall_time']:.3f} s")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    start = time.perf_counter()
    if args.command == "build":
        try:
            return cmd_build(args)[0]
        except (InputError, ValidationError, LiftFailure) as exc:
            sys.stderr.write(f"{type(exc).__name__}: {exc}\n")
            return EXIT_INVARIANT if isinstance(exc, LiftFailure) else EXIT_INPUT
    report = {"command": ["hilbext"] + argv}
    try:
        _, digest = _load(args.descriptor)
        report["inputs_sha256"] = digest
        run = cmd_classify if args.command == "classify" else cmd_verify
        code = run(args, report)
    except InputError as exc:
        report["error"] = {"type": "InputError", "message": str(exc)}
        code = EXIT_INPUT
    except (Unstable, NonStabilizing, LiftFailure) as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = EXIT_INVARIANT
    except (HilbextError, ValueError) as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = EXIT_INPUT
    if args.timing:
        report["wall_time"] = time.perf_counter() - start
    report.setdefault("tolerances", {"algebraic": DEFAULT_TOL})
    sys.stdout.write(_pretty(report) if args.pretty else dumps(report) + "\n")
    if "error" in report:
        sys.stderr.write(f"{report['error']['type']}: {report['error']['message']}\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
