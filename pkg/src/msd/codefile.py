"""Plain-text key-value code files.

Two formats are accepted::

    format: cws
    n: 3
    graph: 011;101;110
    codeword: 111
    correction: +x-y-z      # optional

    format: stabilizer
    n: 3
    generators: ZIZ, XZX
    logical_z: XXY
    logical_x: IXZ

Line order does not matter and ``#`` starts a comment.
"""
from __future__ import annotations

import math
from pathlib import Path

from .cws import CwsCode, Graph
from .distill import rotation
from .pauli import PauliError, generator_set, parse_pauli
from .registry import CodeSpec

_KEYS = {
    "cws": {"format", "n", "graph", "codeword", "correction", "twirl"},
    "stabilizer": {"format", "n", "generators", "logical_z", "logical_x", "correction", "twirl"},
}
_REQUIRED = {
    "cws": ("n", "graph", "codeword"),
    "stabilizer": ("n", "generators", "logical_z", "logical_x"),
}


class CodeFileError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _split(text: str) -> dict[str, tuple[str, int]]:
    fields: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise CodeFileError(f"expected 'key: value', got {line!r}", lineno)
        key, value = (part.strip() for part in line.split(":", 1))
        key = key.lower()
        if key in fields:
            raise CodeFileError(f"duplicate key {key!r} (first on line {fields[key][1]})", lineno)
        fields[key] = (value, lineno)
    return fields


def _pauli(value: str, lineno: int):
    try:
        return parse_pauli(value)
    except PauliError as exc:
        raise CodeFileError(str(exc), lineno) from None


def _twirl(value: str, lineno: int) -> tuple[float, float, float]:
    try:
        axis = tuple(float(v) for v in value.replace(",", " ").split())
    except ValueError:
        raise CodeFileError(f"twirl axis must be three numbers, got {value!r}", lineno) from None
    norm = math.sqrt(sum(v * v for v in axis))
    if len(axis) != 3 or norm == 0:
        raise CodeFileError(f"twirl axis must be a nonzero 3-vector, got {value!r}", lineno)
    if abs(norm - 1.0) < 1e-12:  # already unit: keep it so files round-trip exactly
        return axis
    return tuple(v / norm for v in axis)


def parse_code(text: str, name: str = "code") -> CodeSpec:
    """Parse a code file into a validated :class:`CodeSpec`."""
    fields = _split(text)
    if "format" not in fields:
        raise CodeFileError("missing 'format' key (cws or stabilizer)")
    fmt, fmt_line = fields["format"]
    fmt = fmt.lower()
    if fmt not in _KEYS:
        raise CodeFileError(f"unknown format {fmt!r}; expected cws or stabilizer", fmt_line)
    for key, (_, lineno) in fields.items():
        if key not in _KEYS[fmt]:
            raise CodeFileError(f"unknown key {key!r} for format {fmt}", lineno)
    for key in _REQUIRED[fmt]:
        if key not in fields:
            raise CodeFileError(f"missing required key {key!r}")

    n_text, n_line = fields["n"]
    try:
        n = int(n_text)
    except ValueError:
        raise CodeFileError(f"n must be an integer, got {n_text!r}", n_line) from None

    correction = None
    if "correction" in fields:
        value, lineno = fields["correction"]
        try:
            correction = rotation(value).label
        except ValueError as exc:
            raise CodeFileError(str(exc), lineno) from None
    twirl = _twirl(*fields["twirl"]) if "twirl" in fields else None

    if fmt == "cws":
        g_text, g_line = fields["graph"]
        try:
            graph = Graph.from_rows(g_text)
        except ValueError as exc:
            raise CodeFileError(f"bad graph: {exc}", g_line) from None
        if graph.n != n:
            raise CodeFileError(f"graph has {graph.n} vertices but n = {n}", g_line)
        w_text, w_line = fields["codeword"]
        if len(w_text) != n or set(w_text) - {"0", "1"}:
            raise CodeFileError(f"codeword must be {n} bits, got {w_text!r}", w_line)
        try:
            body = CwsCode(graph, tuple(int(c) for c in w_text), correction)
        except ValueError as exc:
            raise CodeFileError(str(exc), w_line) from None
        return CodeSpec(name, body, correction, twirl)

    gens_text, gens_line = fields["generators"]
    gens = [_pauli(s.strip(), gens_line) for s in gens_text.split(",") if s.strip()]
    lz = _pauli(*fields["logical_z"])
    lx = _pauli(*fields["logical_x"])
    for p, lineno in [(g, gens_line) for g in gens] + [(lz, fields["logical_z"][1]), (lx, fields["logical_x"][1])]:
        if p.n != n:
            raise CodeFileError(f"operator {p.letters} has {p.n} qubits but n = {n}", lineno)
    try:
        body = generator_set(gens, logical_z=lz, logical_x=lx)
    except PauliError as exc:
        raise CodeFileError(f"invalid generator set: {exc}", gens_line) from None
    return CodeSpec(name, body, correction, twirl)


def load_code(path: str | Path) -> CodeSpec:
    path = Path(path)
    return parse_code(path.read_text(encoding="utf-8"), name=path.stem)


def format_code(spec: CodeSpec) -> str:
    """Serialize a spec; ``parse_code(format_code(s))`` reproduces it."""
    from .pauli import format_pauli

    body = spec.body
    lines = []
    if isinstance(body, CwsCode):
        lines += ["format: cws", f"n: {body.n}", f"graph: {body.graph.rows()}", f"codeword: {body.codeword_bits}"]
    else:
        lines += [
            "format: stabilizer",
            f"n: {body.n}",
            "generators: " + ", ".join(format_pauli(g) for g in body.generators),
            f"logical_z: {format_pauli(body.logical_z)}",
            f"logical_x: {format_pauli(body.logical_x)}",
        ]
    correction = spec.correction or getattr(body, "correction", None)
    if correction:
        lines.append(f"correction: {correction}")
    if spec.twirl is not None:
        lines.append("twirl: " + " ".join(repr(float(v)) for v in spec.twirl))
    return "\n".join(lines) + "\n"
