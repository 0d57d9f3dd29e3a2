"""Command-line entry point: ``msd analyze | search | yield | verify-paper | encode``.

Exit codes: 0 success (a "not a distiller" verdict included), 1 input error,
2 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import NotDistillableError, analyze_fixed_point, p_oct_for, threshold, yield_details
from .codefile import CodeFileError, load_code
from .cws import CwsCode, emit_encoding_circuit
from .distill import compile_map
from .pauli import PauliError
from .registry import BUILTIN_NAMES, CodeSpec, RegistryError, builtin
from .search import SearchConfig, canonical_code, default_threads, discover_fixed_points, run_search, sorted_records

EXIT_OK, EXIT_INPUT, EXIT_VERIFY = 0, 1, 2

SEARCH_COLUMNS = (
    "n", "canonical_graph_bits", "codeword", "correction", "fixed_x", "fixed_y", "fixed_z",
    "canon_x", "canon_y", "canon_z", "threshold", "p_oct", "tight", "order", "p_success_at_fixed_point",
)

log = logging.getLogger("msd")


class InputError(Exception):
    pass


def num(v: float) -> str:
    """Locale-independent fixed 6-decimal formatting used by every numeric output."""
    v = float(v)
    if v != v:
        return "nan"
    out = f"{v:.6f}"
    return "0.000000" if out == "-0.000000" else out


def _rounded(v) -> float:
    return float(num(v))


def resolve_code(arg: str) -> CodeSpec:
    if arg in BUILTIN_NAMES:
        return builtin(arg)
    path = Path(arg)
    if not path.exists():
        raise InputError(f"{arg!r} is neither a file nor a builtin ({', '.join(BUILTIN_NAMES)})")
    return load_code(path)


def _float_list(text: str, size: int | None = None) -> list[float]:
    try:
        vals = [float(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise InputError(f"expected numbers, got {text!r}") from None
    if size is not None and len(vals) != size:
        raise InputError(f"expected {size} numbers, got {text!r}")
    return vals


# ---------------------------------------------------------------- analyze

def _fixed_points(spec: CodeSpec, corrections: bool):
    m = compile_map(spec)
    if corrections:
        m = m.with_correction(None)
    return m, discover_fixed_points(m, SearchConfig(enable_corrections=corrections))


def cmd_analyze(args) -> int:
    spec = resolve_code(args.code)
    m, points = _fixed_points(spec, args.corrections)
    rows = []
    for k, fp in enumerate(points):
        mm = m.with_correction(fp.correction) if args.corrections else m
        rep = analyze_fixed_point(mm, fp.bloch, args.samples, np.random.default_rng([args.seed, k]))
        row = {key: (_rounded(v) if isinstance(v, float) else v) for key, v in rep.as_dict().items()}
        row["fixed_point"] = [_rounded(v) for v in rep.fixed_point]
        row["canonical_fixed_point"] = [_rounded(v) for v in rep.canonical_fixed_point]
        if args.p is not None:
            ev = mm.apply((1.0 - args.p) * rep.fixed_point)
            row["at_p"] = {"p": _rounded(args.p), "output": [_rounded(v) for v in ev.bloch],
                           "p_success": _rounded(ev.p_success)}
        rows.append(row)
    verdict = "distiller" if rows else "not a distiller"
    if args.json:
        print(json.dumps({"code": spec.name, "n": spec.n, "verdict": verdict, "fixed_points": rows}))
        return EXIT_OK
    print(f"code {spec.name}  n={spec.n}  verdict: {verdict}")
    for row in rows:
        print(f"fixed point {_vec(row['fixed_point'])}  canonical {_vec(row['canonical_fixed_point'])}")
        print(f"  threshold {num(row['threshold'])}  p_oct {num(row['p_oct'])}  tight: {str(row['tight']).lower()}"
              f"  order {num(row['convergence_order'])}  correction {row['correction'] or 'none'}")
        if "at_p" in row:
            at = row["at_p"]
            print(f"  at p={num(at['p'])}: output {_vec(at['output'])}  p_success {num(at['p_success'])}")
    return EXIT_OK


def _vec(v) -> str:
    return "(" + ", ".join(num(x) for x in v) + ")"


# ---------------------------------------------------------------- search

def search_rows(records, tight_only: bool = False) -> list[dict]:
    rows = []
    for rec in records:
        if rec.report is None:
            log.warning("skipping %s: %s", rec.code, rec.error)
            continue
        rep = rec.report
        if tight_only and not rep.tight:
            continue
        c = canonical_code(rec.code)
        rows.append({
            "n": c.n,
            "canonical_graph_bits": c.graph.bits(),
            "codeword": c.codeword_bits,
            "correction": rec.code.correction or "",
            **{f"fixed_{a}": num(v) for a, v in zip("xyz", rep.fixed_point)},
            **{f"canon_{a}": num(v) for a, v in zip("xyz", rep.canonical_fixed_point)},
            "threshold": num(rep.threshold),
            "p_oct": num(rep.p_oct),
            "tight": str(rep.tight).lower(),
            "order": num(rep.convergence_order),
            "p_success_at_fixed_point": num(rep.p_success),
        })
    return rows


def write_rows(rows: list[dict], fmt: str, stream) -> None:
    if fmt == "csv":
        w = csv.DictWriter(stream, fieldnames=SEARCH_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
        return
    for row in rows:
        out = {}
        for k in SEARCH_COLUMNS:
            v = row[k]
            if k == "tight":
                v = v == "true"
            elif k not in ("canonical_graph_bits", "codeword", "correction", "n"):
                v = float(v)
            out[k] = v
        stream.write(json.dumps(out) + "\n")


def cmd_search(args) -> int:
    try:
        n_values = tuple(int(v) for v in args.n.split(","))
        cfg = SearchConfig(n_values=n_values, graph_mode=args.graph_mode, tightness_samples=args.samples,
                           seed=args.seed, enable_corrections=args.corrections, threads=args.threads)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    fmt = args.format or ("jsonl" if args.out and args.out.endswith((".jsonl", ".json")) else "csv")
    if args.out:
        try:
            out = open(args.out, "w", encoding="utf-8", newline="")
        except OSError as exc:
            raise InputError(f"cannot write {args.out}: {exc.strerror}") from None
    else:
        out = sys.stdout
    try:
        rows = search_rows(sorted_records(run_search(cfg)), args.tight_only)
        write_rows(rows, fmt, out)
    finally:
        if out is not sys.stdout:
            out.close()
    if args.out:
        print(f"wrote {len(rows)} rows to {args.out}", file=sys.stderr)
    return EXIT_OK


# ---------------------------------------------------------------- yield

def parse_grid(text: str) -> list[float]:
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"--p-grid must be start:stop:step, got {text!r}")
    start, stop, step = _float_list(" ".join(parts), 3)
    if step <= 0 or stop < start:
        raise InputError("--p-grid needs step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9)) + 1
    return [round(start + k * step, 12) for k in range(count)]


def yield_target(spec: CodeSpec, m) -> np.ndarray:
    if "fixed_point" in spec.expected:
        fp = np.asarray(spec.expected["fixed_point"], dtype=float)
        return fp / np.linalg.norm(fp)
    points = discover_fixed_points(m)
    if not points:
        raise InputError(f"{spec.name} has no attracting fixed point to distill towards")
    # the fixed point with the widest basin along its depolarizing line
    return max((fp.bloch for fp in points), key=lambda b: (threshold(m, b), tuple(-b)))


def cmd_yield(args) -> int:
    spec = resolve_code(args.code)
    m = compile_map(spec)
    target = np.asarray(_float_list(args.target, 3)) if args.target else yield_target(spec, m)
    target = target / np.linalg.norm(target)
    grid = parse_grid(args.p_grid)
    if any(not 0.0 <= p <= 1.0 for p in grid):
        raise InputError("depolarizing rates must lie in [0, 1]")
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["p", "yield", "log_yield", "rounds", "flag"])
    for p in grid:
        try:
            res = yield_details(m, p, target, args.target_eps)
            w.writerow([num(p), f"{res.value:.6e}", num(res.log_value), res.rounds, ""])
        except NotDistillableError:
            w.writerow([num(p), f"{0.0:.6e}", "-inf", 0, "above_threshold"])
    return EXIT_OK


# ---------------------------------------------------------------- verify / encode

def cmd_verify(args) -> int:
    from .verify import run_claims

    progress = (lambda msg: print(f"# {msg}", file=sys.stderr)) if not args.quiet else None
    results = run_claims(extended=args.extended, tol_scale=args.tol_scale, threads=args.threads, progress=progress)
    for r in results:
        print(r.line())
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} claims passed")
    return EXIT_VERIFY if failed else EXIT_OK


def cmd_encode(args) -> int:
    spec = resolve_code(args.code)
    if not isinstance(spec.body, CwsCode):
        raise InputError(f"{spec.name}: stabilizer-format code, no graph form available")
    sys.stdout.write(emit_encoding_circuit(spec.body))
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="msd", description="Small-code magic state distillation toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    code_help = f"code file or builtin name ({', '.join(BUILTIN_NAMES)})"

    a = sub.add_parser("analyze", help="fixed points, threshold and tightness of one code")
    a.add_argument("code", help=code_help)
    a.add_argument("--p", type=float, help="also report one round at this depolarizing rate")
    a.add_argument("--json", action="store_true")
    a.add_argument("--samples", type=int, default=1000, help="tightness samples (default 1000)")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--corrections", action="store_true", help="try all 24 Clifford corrections between rounds")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("search", help="sweep all small CWS codes")
    s.add_argument("--n", default="2,3,4,5", help="comma-separated qubit counts (default 2,3,4,5)")
    s.add_argument("--graph-mode", default="auto", choices=("auto", "all", "non_isomorphic"))
    s.add_argument("--samples", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--corrections", action="store_true")
    s.add_argument("--out", help="output path (default stdout)")
    s.add_argument("--format", choices=("csv", "jsonl"), help="default: by extension, else csv")
    s.add_argument("--tight-only", action="store_true")
    s.add_argument("--threads", type=int, default=None, help="worker processes (default MSD_THREADS or CPU count)")
    s.set_defaults(func=cmd_search)

    y = sub.add_parser("yield", help="yield curve as CSV")
    y.add_argument("code", help=code_help)
    y.add_argument("--p-grid", default="0.0:0.25:0.05", help="start:stop:step")
    y.add_argument("--target-eps", type=float, default=1e-10)
    y.add_argument("--target", help="Bloch vector to distill towards, e.g. '0,-0.84,-0.54'")
    y.set_defaults(func=cmd_yield)

    v = sub.add_parser("verify-paper", help="check every reproduction claim; exit 2 on failure")
    v.add_argument("--extended", action="store_true", help="add the n = 6 sweep (slow)")
    v.add_argument("--tol-scale", type=float, default=1.0, help=argparse.SUPPRESS)
    v.add_argument("--threads", type=int, default=None)
    v.add_argument("--quiet", action="store_true")
    v.set_defaults(func=cmd_verify)

    e = sub.add_parser("encode", help="graph-state encoding circuit of a CWS code")
    e.add_argument("code", help=code_help)
    e.set_defaults(func=cmd_encode)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if getattr(args, "threads", "absent") is None:
        args.threads = default_threads()
    try:
        return args.func(args)
    except (InputError, CodeFileError, PauliError, RegistryError, ValueError) as exc:
        msg = exc.args[0] if isinstance(exc, RegistryError) and exc.args else exc
        print(f"msd: error: {msg}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
