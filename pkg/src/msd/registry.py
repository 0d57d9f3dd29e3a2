"""Built-in codes with known distillation behaviour."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

from .cws import CwsCode, Graph
from .pauli import GeneratorSet, generator_set


@dataclass(frozen=True)
class CodeSpec:
    name: str
    body: CwsCode | GeneratorSet
    correction: str | None = None
    twirl: tuple[float, float, float] | None = None
    expected: dict = field(default_factory=dict, compare=False)
    notes: str = ""

    @property
    def n(self) -> int:
        return self.body.n


def _eq8() -> CodeSpec:
    return CodeSpec(
        "eq8_3qubit",
        generator_set(["ZIZ", "XZX"], logical_z="XXY", logical_x="IXZ"),
        expected={"fixed_point": (0.0, -0.83929, -0.54369), "threshold": 0.276921},
        notes="3-qubit code distilling an equatorial y-z state up to the octahedron boundary",
    )


def _steane() -> CodeSpec:
    gens = ["IIIXXXX", "IXXIIXX", "XIXIXIX", "IIIZZZZ", "IZZIIZZ", "ZIZIZIZ"]
    return CodeSpec(
        "steane_7qubit",
        generator_set(gens, logical_z="ZZZZZZZ", logical_x="XXXXXXX"),
        twirl=(1 / math.sqrt(2), 0.0, 1 / math.sqrt(2)),
        expected={"fixed_point": (1 / math.sqrt(2), 0.0, 1 / math.sqrt(2)),
                  "canonical_fixed_point": (1 / math.sqrt(2), 1 / math.sqrt(2), 0.0),
                  "threshold": 1 - 1 / math.sqrt(2)},
        notes="[[7,1,3]] CSS code with transversal logical operators; H-type distiller. "
              "|H> is a saddle of the bare map, so rounds are twirled onto the H axis.",
    )


def _perfect5() -> CodeSpec:
    return CodeSpec(
        "perfect_5qubit_cws",
        CwsCode(Graph.from_edges(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]), (1, 1, 1, 1, 1)),
        correction="+x-y-z",
        expected={"fixed_point": (-1 / math.sqrt(3), -1 / math.sqrt(3), 1 / math.sqrt(3)),
                  "canonical_fixed_point": (1 / math.sqrt(3),) * 3},
        notes="[[5,1,3]] code as the 5-cycle graph with the all-ones codeword; T-type distiller "
              "with an X correction between rounds",
    )


_BUILDERS = {"eq8_3qubit": _eq8, "steane_7qubit": _steane, "perfect_5qubit_cws": _perfect5}

BUILTIN_NAMES = tuple(_BUILDERS)


class RegistryError(KeyError):
    pass


@lru_cache(maxsize=None)
def _validated_perfect5() -> CodeSpec:
    # The CWS presentation is a reconstruction; only accept it once it is seen to distill |T>.
    from .analysis import canonicalize_bloch
    from .distill import compile_map
    from .search import SearchConfig, discover_fixed_points

    spec = _perfect5()
    want = canonicalize_bloch(spec.expected["canonical_fixed_point"])
    points = discover_fixed_points(compile_map(spec, correction=None).with_correction(None),
                                   SearchConfig(enable_corrections=True))
    if not any(max(abs(canonicalize_bloch(fp.bloch) - want)) < 1e-6 for fp in points):
        raise RegistryError("5-cycle CWS code does not distill the T-type state")
    return spec


def builtin(name: str) -> CodeSpec:
    if name not in _BUILDERS:
        raise RegistryError(f"unknown builtin code {name!r}; choose from {', '.join(BUILTIN_NAMES)}")
    if name == "perfect_5qubit_cws":
        return _validated_perfect5()
    return _BUILDERS[name]()
