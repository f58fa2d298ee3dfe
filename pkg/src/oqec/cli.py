"""Command-line front end.

Exit codes: 0 pass, 1 semantic failure (invalid channel, not noiseless, not
correctable, ...), 2 input error (unreadable or malformed file, bad
arguments), 3 internal synthesis failure.  ``OQEC_ATOL`` overrides the
default absolute tolerance.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import examples as worked_examples
from .algebra import commutant, commutant_block_dims, decompose_structure
from .channel import QuantumChannel, validate
from .correction import (
    correctable_triple_deviation,
    oqec_check,
    synthesize_oqec_recovery,
)
from .errors import (
    DegenerateStructureError,
    DimensionError,
    NotCorrectableError,
    NotUnitalError,
    NotUnitaryError,
    OQECError,
    SynthesisError,
    TracePreservationError,
)
from .fileio import (
    SCHEMA,
    InputError,
    channel_doc,
    decomposition_doc,
    read_decomposition,
    read_kraus,
    read_unitary,
    unitary_doc,
    write_document,
)
from .matkit import DEFAULT_TOL, Tolerance
from .noiseless import (
    SubsystemDecomposition,
    discover_ns_unital,
    fixed_points,
    interaction_algebra,
    verify_ns,
)
from .uns import candidate_unitaries, uns_algebra

log = logging.getLogger("oqec")

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_SYNTH = 0, 1, 2, 3


class Failure(Exception):
    """Semantic failure carrying an exit code and a partial report."""

    def __init__(self, message: str, code: int = EXIT_FAIL, report: dict | None = None):
        super().__init__(message)
        self.code = code
        self.report = report or {}


def tolerance_from_env() -> Tolerance:
    raw = os.environ.get("OQEC_ATOL")
    if raw is None:
        return DEFAULT_TOL
    try:
        return Tolerance(atol=float(raw), rank_rtol=DEFAULT_TOL.rank_rtol)
    except ValueError as exc:
        raise InputError(f"OQEC_ATOL={raw!r}: {exc}") from exc


def load_channel(path, tol: Tolerance) -> QuantumChannel:
    kraus = read_kraus(path)
    try:
        return QuantumChannel(kraus, tol)
    except TracePreservationError as exc:
        raise Failure(f"{path}: {exc}", report={"tp_residual": exc.residual}) from exc


def load_decomposition(path, dim: int, tol: Tolerance) -> SubsystemDecomposition:
    try:
        dec = read_decomposition(path, tol)
    except DimensionError as exc:
        raise InputError(f"{path}: {exc}") from exc
    if dec.dim != dim:
        raise InputError(f"{path}: decomposition acts on dim {dec.dim}, channel on dim {dim}")
    return dec


# ---------------------------------------------------------------- commands

def cmd_validate(args, tol: Tolerance) -> tuple[dict, int]:
    rep = validate(read_kraus(args.channel), tol)
    out = {"channel": str(args.channel), **rep.as_dict()}
    if not rep.trace_preserving:
        return out, EXIT_FAIL
    return out, EXIT_OK


def _analyze_one(path: Path, out_dir: Path | None, seed: int, tol: Tolerance) -> tuple[dict, int]:
    ch = load_channel(path, tol)
    alg = interaction_algebra(ch, tol)
    comm = commutant(alg, tol)
    fix = fixed_points(ch, tol)
    bs = decompose_structure(alg, tol, seed)
    rep = ch.report(tol)
    report = {
        "channel": str(path),
        "dim": ch.dim,
        "kraus_count": len(ch),
        "unital": rep.unital,
        "interaction_algebra_dim": len(alg),
        "commutant_dim": len(comm),
        "fixed_point_dim": len(fix),
        "algebra_blocks": [list(b) for b in bs.dims],
        "commutant_blocks": [list(b) for b in commutant_block_dims(bs)],
    }
    if rep.unital:
        found = discover_ns_unital(ch, tol, seed)
        report["noiseless_subsystems"] = [[d.m, d.n] for d in found.subsystems]
        if out_dir is not None:
            files = []
            for j, dec in enumerate(found.subsystems, 1):
                files.append(str(write_document(out_dir / f"{path.stem}.ns{j}.json",
                                                decomposition_doc(dec))))
            report["decomposition_files"] = files
    else:
        report["note"] = ("channel is not unital: the fixed points need not match the commutant; "
                          "check candidate decompositions with check-ns / check-oqec")
    return report, EXIT_OK


def cmd_analyze(args, tol: Tolerance) -> tuple[dict, int]:
    out_dir = Path(args.out) if args.out else None
    if args.batch is None:
        if args.channel is None:
            raise InputError("analyze needs a channel file or --batch DIR")
        return _analyze_one(Path(args.channel), out_dir, args.seed, tol)
    batch = Path(args.batch)
    if not batch.is_dir():
        raise InputError(f"{batch}: not a directory")
    paths = sorted(batch.glob("*.json"))
    out_dir = out_dir or batch

    def run(p: Path) -> tuple[dict, int]:
        try:
            rep, code = _analyze_one(p, out_dir, args.seed, tol)
        except Failure as exc:
            rep, code = {"channel": str(p), "error": str(exc)}, exc.code
        except (InputError, OQECError) as exc:
            rep, code = {"channel": str(p), "error": str(exc)}, EXIT_INPUT
        write_document(out_dir / f"{p.stem}.report.json", {"schema": SCHEMA, **rep})
        return rep, code

    with ThreadPoolExecutor(max_workers=min(4, max(1, len(paths)))) as pool:
        results = list(pool.map(run, paths))
    code = max((c for _, c in results), default=EXIT_OK)
    return {"batch": str(batch), "files": [r for r, _ in results]}, code


def cmd_check_ns(args, tol: Tolerance) -> tuple[dict, int]:
    ch = load_channel(args.channel, tol)
    dec = load_decomposition(args.decomposition, ch.dim, tol)
    rep = verify_ns(ch, dec, tol)
    out = {"m": dec.m, "n": dec.n, **rep.as_dict()}
    return out, EXIT_OK if rep.noiseless else EXIT_FAIL


def cmd_check_oqec(args, tol: Tolerance) -> tuple[dict, int]:
    ch = load_channel(args.channel, tol)
    dec = load_decomposition(args.decomposition, ch.dim, tol)
    rep = oqec_check(ch, dec, tol)
    out = {"m": dec.m, "n": dec.n, **rep.as_dict()}
    return out, EXIT_OK if rep.correctable else EXIT_FAIL


def cmd_recover(args, tol: Tolerance) -> tuple[dict, int]:
    ch = load_channel(args.channel, tol)
    dec = load_decomposition(args.decomposition, ch.dim, tol)
    try:
        rec = synthesize_oqec_recovery(ch, dec, tol)
    except NotCorrectableError as exc:
        raise Failure(str(exc), report={"correctable": False, "residual": exc.residual}) from exc
    except SynthesisError as exc:
        raise Failure(f"recovery synthesis failed: {exc}", EXIT_SYNTH) from exc
    dev = correctable_triple_deviation(rec.channel, ch, dec, tol)
    report = {"correctable": True, "kraus_count": len(rec.kraus), "triple_deviation": dev,
              "provenance": rec.provenance}
    if dev > tol.atol:
        raise Failure(f"synthesized recovery failed self-verification (deviation {dev:.3e})",
                      EXIT_SYNTH, report)
    report["out"] = str(write_document(args.out, channel_doc(rec.kraus, rec.provenance)))
    return report, EXIT_OK


def cmd_uns(args, tol: Tolerance) -> tuple[dict, int]:
    ch = load_channel(args.channel, tol)
    if args.candidate:
        cands = candidate_unitaries(ch.dim)
        if args.candidate not in cands:
            raise InputError(f"unknown candidate {args.candidate!r}; choose from {', '.join(cands)}")
        u = cands[args.candidate]
    elif args.unitary:
        u = read_unitary(args.unitary)
    else:
        raise InputError("uns needs a unitary file or --candidate NAME")
    try:
        rep = uns_algebra(ch, u, tol, args.seed)
    except NotUnitalError as exc:
        raise Failure(str(exc)) from exc
    except NotUnitaryError as exc:
        raise Failure(str(exc)) from exc
    except DimensionError as exc:
        raise InputError(str(exc)) from exc
    out = {
        "algebra_dim": len(rep.algebra),
        "blocks": [list(b) for b in rep.structure.dims],
        "evolve_residual": rep.evolve_residual,
    }
    if args.out:
        files = []
        for j, dec in enumerate(rep.sectors(), 1):
            files.append(str(write_document(Path(args.out) / f"uns_sector{j}.json",
                                            decomposition_doc(dec))))
        out["decomposition_files"] = files
    return out, EXIT_OK


def _parse_params(items) -> dict[str, str]:
    params = {}
    for it in items or []:
        key, sep, val = it.partition("=")
        if not sep or not key:
            raise InputError(f"--param expects k=v, got {it!r}")
        params[key] = val
    return params


def cmd_example(args, tol: Tolerance) -> tuple[dict, int]:
    try:
        ex = worked_examples.build(args.name, **_parse_params(args.param))
    except KeyError as exc:
        raise InputError(exc.args[0]) from exc
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    out = Path(args.out)
    files = [write_document(out / f"{ex.name}.channel.json", channel_doc(ex.channel.kraus))]
    for key, dec in ex.decompositions.items():
        files.append(write_document(out / f"{ex.name}.{key}.dec.json", decomposition_doc(dec)))
    for key, rec in ex.recoveries.items():
        files.append(write_document(out / f"{ex.name}.{key}.recovery.json",
                                    channel_doc(rec.kraus, rec.provenance)))
    for key, u in ex.unitaries.items():
        files.append(write_document(out / f"{ex.name}.{key}.unitary.json", unitary_doc(u)))
    return {"example": ex.name, "parameters": ex.parameters, "files": [str(f) for f in files]}, EXIT_OK


# ---------------------------------------------------------------- plumbing

def _text(value, indent: str = "") -> list[str]:
    lines = []
    for key, val in value.items():
        if isinstance(val, dict):
            lines.append(f"{indent}{key}:")
            lines.extend(_text(val, indent + "  "))
        elif key == "lambda":
            arr = np.asarray(val)
            z = arr[..., 0] + 1j * arr[..., 1]
            body = np.array2string(z, precision=6, suppress_small=True)
            lines.append(f"{indent}lambda (shape {list(z.shape)}):")
            lines.extend(f"{indent}  {ln}" for ln in body.splitlines())
        elif isinstance(val, list) and val and isinstance(val[0], dict):
            for i, item in enumerate(val):
                lines.append(f"{indent}{key}[{i}]:")
                lines.extend(_text(item, indent + "  "))
        else:
            lines.append(f"{indent}{key}: {val}")
    return lines


def emit(report: dict, fmt: str, stream=None) -> None:
    stream = stream or sys.stdout
    if fmt == "json":
        json.dump(report, stream, indent=1)
        stream.write("\n")
    else:
        stream.write("\n".join(_text(report)) + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="oqec", description="Operator quantum error correction toolkit")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="check trace preservation and unitality")
    s.add_argument("channel")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("analyze", help="interaction algebra, commutant, blocks, fixed points")
    s.add_argument("channel", nargs="?")
    s.add_argument("--batch", metavar="DIR")
    s.add_argument("--out", metavar="DIR", help="directory for discovered decomposition files")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_analyze, randomized=True)

    for name, func, helptext in (
        ("check-ns", cmd_check_ns, "noiseless-subsystem conditions for a decomposition"),
        ("check-oqec", cmd_check_oqec, "operator correctability condition for a decomposition"),
    ):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("channel")
        s.add_argument("decomposition")
        s.set_defaults(func=func)

    s = sub.add_parser("recover", help="synthesize and self-verify a recovery channel")
    s.add_argument("channel")
    s.add_argument("decomposition")
    s.add_argument("--out", required=True, metavar="PATH")
    s.set_defaults(func=cmd_recover)

    s = sub.add_parser("uns", help="unitarily noiseless subsystems for a given unitary")
    s.add_argument("channel")
    s.add_argument("unitary", nargs="?")
    s.add_argument("--candidate", metavar="NAME",
                   help="built-in unitary: identity, flip<i> or shift")
    s.add_argument("--out", metavar="DIR", help="directory for sector decomposition files")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_uns, randomized=True)

    s = sub.add_parser("example", help="write files for a built-in worked example")
    s.add_argument("name", help=", ".join(worked_examples.NAMES))
    s.add_argument("--param", action="append", metavar="K=V")
    s.add_argument("--out", default=".", metavar="DIR")
    s.set_defaults(func=cmd_example)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    report = {"schema": SCHEMA, "command": args.command}
    if getattr(args, "randomized", False):
        report["seed"] = args.seed
    try:
        tol = tolerance_from_env()
        body, code = args.func(args, tol)
        report.update(body)
    except Failure as exc:
        report.update(exc.report)
        report["error"] = str(exc)
        code = exc.code
    except InputError as exc:
        report["error"] = str(exc)
        code = EXIT_INPUT
    except DegenerateStructureError as exc:
        report["error"] = str(exc)
        code = EXIT_SYNTH
    except OQECError as exc:
        report["error"] = str(exc)
        code = EXIT_FAIL
    report["exit_code"] = code
    emit(report, args.format)
    if "error" in report:
        print(f"oqec {args.command}: {report['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
