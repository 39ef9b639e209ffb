"""Self-contained demo scenarios for the constructions the toolkit covers."""
from __future__ import annotations

import json
import logging
import re
from pathlib import Path
from typing import Any, Callable, Dict, List

import numpy as np

from fellmorita.algebra.group import FiniteGroup, cyclic_group, direct_product, symmetric_group
from fellmorita.errors import UnknownDemo
from fellmorita.scenario.codec import encode_matrix
from fellmorita.scenario.schema import Scenario

logger = logging.getLogger(__name__)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=np.complex128)
I2 = np.eye(2, dtype=np.complex128)

Json = Dict[str, Any]


def matrix_units(n: int) -> List[np.ndarray]:
    out = []
    for i in range(n):
        for j in range(n):
            e = np.zeros((n, n), dtype=np.complex128)
            e[i, j] = 1.0
            out.append(e)
    return out


def regular_representation(g: FiniteGroup) -> List[np.ndarray]:
    """λ_t e_s = e_{ts}."""
    mats = []
    for t in g.elements:
        m = np.zeros((g.order, g.order), dtype=np.complex128)
        for s in g.elements:
            m[g.mul(t, s), s] = 1.0
        mats.append(m)
    return mats


def _group_spec(name: str) -> tuple[Json, FiniteGroup]:
    if name == "Z2xZ2":
        return {"product": ["Z2", "Z2"]}, direct_product(cyclic_group(2), cyclic_group(2))
    m = re.fullmatch(r"([ZS])(\d+)", name)
    if m is None:
        raise UnknownDemo(f"unknown group {name!r}; use Z<n>, S<n> or Z2xZ2")
    n = int(m.group(2))
    if m.group(1) == "Z":
        return {"cyclic": n}, cyclic_group(n)
    return {"symmetric": n}, symmetric_group(n)


def _group_algebra_bundle(group_name: str, g: FiniteGroup) -> Json:
    lam = regular_representation(g)
    return {"group": group_name, "fibers": {str(t): [encode_matrix(lam[t])] for t in g.elements}}


def _bundle_tasks(bundle: str) -> List[Json]:
    return [
        {"op": op, "bundle": bundle}
        for op in ("verify_bundle", "saturation", "expectation", "index", "identity_assembly", "basic_construction")
    ]


# ---------------------------------------------------------------------
# demos
# ---------------------------------------------------------------------
def group_algebra(group_name: str) -> Json:
    spec, g = _group_spec(group_name)
    groups: Json = {"Z2": {"cyclic": 2}} if group_name == "Z2xZ2" else {}
    groups[group_name] = spec
    bundle = f"C{group_name}"
    return {
        "name": f"group_algebra_{group_name}",
        "description": f"C[{group_name}] in its regular representation, graded by group elements",
        "groups": groups,
        "bundles": {bundle: _group_algebra_bundle(group_name, g)},
        "tasks": _bundle_tasks(bundle),
    }


def pauli_bundle() -> Json:
    # Z2xZ2 element (a, b) has index 2a + b
    paulis = {0: I2, 1: SIGMA_Z, 2: SIGMA_X, 3: SIGMA_Y}
    m2_cz2 = {
        "0": [encode_matrix(np.kron(e, I2)) for e in matrix_units(2)],
        "1": [encode_matrix(np.kron(e, SIGMA_X)) for e in matrix_units(2)],
    }
    return {
        "name": "pauli_bundle",
        "description": "M_2 graded by Z2xZ2 through the Pauli matrices, and M_2 ⊗ C[Z2]",
        "groups": {"Z2": {"cyclic": 2}, "V": {"product": ["Z2", "Z2"]}},
        "bundles": {
            "pauli": {"group": "V", "fibers": {str(t): [encode_matrix(p)] for t, p in paulis.items()}},
            "M2_CZ2": {"group": "Z2", "fibers": m2_cz2},
        },
        "tasks": _bundle_tasks("pauli") + _bundle_tasks("M2_CZ2") + [{"op": "reconstruction_roundtrip", "bundle": "pauli"}],
    }


def inner_crossed_product() -> Json:
    u = encode_matrix(np.diag([1.0, -1.0]))
    one = encode_matrix(I2)
    units = [encode_matrix(e) for e in matrix_units(2)]
    return {
        "name": "inner_crossed_product",
        "description": "M_2 ⋊ Z2 for α = Ad(diag(1, -1)), with M_2 as an equivariant equivalence bimodule",
        "groups": {"Z2": {"cyclic": 2}},
        "algebras": {"M2": {"basis": units}},
        "bimodules": {"X": {"left": "M2", "right": "M2", "basis": units}},
        "actions": {"alpha": {"algebra": "M2", "group": "Z2", "unitaries": {"0": one, "1": u}}},
        "bimodule_actions": {
            "lam": {
                "bimodule": "X",
                "left": "alpha",
                "right": "alpha",
                "left_unitaries": {"0": one, "1": u},
                "right_unitaries": {"0": one, "1": u},
            }
        },
        "tasks": [
            {"op": "verify_bimodule", "bimodule": "X"},
            {"op": "crossed_product", "alpha": "alpha", "beta": "alpha", "lambda": "lam"},
        ],
    }


def involutive_m2() -> Json:
    units = [encode_matrix(e) for e in matrix_units(2)]
    return {
        "name": "involutive_m2",
        "description": "X = M_2 over M_2 with ♮ = * and ♮ = i·*: linking algebra, transport, C_M",
        "algebras": {"M2": {"basis": units}},
        "bimodules": {"X": {"left": "M2", "right": "M2", "basis": units}},
        "involutions": {
            "star": {"bimodule": "X", "kind": "adjoint"},
            "phase": {"bimodule": "X", "kind": "phase_adjoint"},
        },
        "tasks": [
            {"op": "verify_involutive", "involution": "star"},
            {"op": "verify_involutive", "involution": "phase"},
            {"op": "linking", "involution": "star"},
            {"op": "linking", "involution": "phase"},
            {"op": "transport", "bimodule": "X", "involution": "star"},
            {"op": "build_C_M", "bimodule": "X", "involution": "star", "involution_y": "star"},
            {"op": "theorem52", "bimodule": "X", "involution": "star", "involution_y": "star"},
        ],
    }


def cm_roundtrip() -> Json:
    one = [[1.0]]
    lam = regular_representation(cyclic_group(2))
    return {
        "name": "cm_roundtrip",
        "description": "C_M over A = B = X = M = C, Z2-bundle roundtrips and extraction of M from C[Z2]",
        "groups": {"Z2": {"cyclic": 2}},
        "algebras": {"C": {"basis": [one]}},
        "bundles": {
            "CZ2": {"group": "Z2", "fibers": {"0": [encode_matrix(lam[0])], "1": [encode_matrix(lam[1])]}},
            "pauli_z2": {
                "group": "Z2",
                "fibers": {
                    "0": [encode_matrix(I2), encode_matrix(SIGMA_Z)],
                    "1": [encode_matrix(SIGMA_X), encode_matrix(SIGMA_Y)],
                },
            },
        },
        "bimodules": {"X": {"left": "C", "right": "C", "basis": [one]}},
        "involutions": {"conj": {"bimodule": "X", "kind": "adjoint"}},
        "tasks": [
            {"op": "linking", "involution": "conj"},
            {"op": "build_C_M", "bimodule": "X", "involution": "conj", "involution_y": "conj"},
            {"op": "theorem52", "bimodule": "X", "involution": "conj", "involution_y": "conj", "bundle": "CZ2"},
            {"op": "z2_roundtrip", "bundle": "CZ2"},
            {"op": "z2_roundtrip", "bundle": "pauli_z2"},
        ],
    }


def reconstruction_roundtrip() -> Json:
    groups: Json = {}
    bundles: Json = {}
    tasks: List[Json] = []
    for n in (2, 3, 4):
        name = f"Z{n}"
        groups[name] = {"cyclic": n}
        bundles[f"C{name}"] = _group_algebra_bundle(name, cyclic_group(n))
        tasks.append({"op": "reconstruction_roundtrip", "bundle": f"C{name}"})
    tasks.append({"op": "search_automorphism", "bundle": "CZ2", "bundle_b": "CZ2", "expect": [0, 1]})
    return {
        "name": "reconstruction_roundtrip",
        "description": "Z = C_1, λ = α: the reconstructed bundle is the basic-construction bundle itself",
        "groups": groups,
        "bundles": bundles,
        "tasks": tasks,
    }


def reconstruction_relabeled_z4() -> Json:
    inversion = [0, 3, 2, 1]
    return {
        "name": "reconstruction_relabeled_z4",
        "description": "C[Z4] against its relabeling by inversion, and a pair with no automorphism",
        "groups": {"Z2": {"cyclic": 2}, "Z4": {"cyclic": 4}},
        "bundles": {
            "CZ4": _group_algebra_bundle("Z4", cyclic_group(4)),
            "CZ4_inv": {"group": "Z4", "relabel": {"of": "CZ4", "f": inversion}},
            "CZ2": _group_algebra_bundle("Z2", cyclic_group(2)),
            "pauli_z2": {
                "group": "Z2",
                "fibers": {
                    "0": [encode_matrix(I2), encode_matrix(SIGMA_Z)],
                    "1": [encode_matrix(SIGMA_X), encode_matrix(SIGMA_Y)],
                },
            },
        },
        "tasks": [
            {"op": "search_automorphism", "bundle": "CZ4", "bundle_b": "CZ4_inv", "expect": inversion},
            {"op": "search_automorphism", "bundle": "CZ2", "bundle_b": "pauli_z2", "expect_none": True},
        ],
    }


DEMOS: Dict[str, Callable[[], Json]] = {
    "pauli_bundle": pauli_bundle,
    "inner_crossed_product": inner_crossed_product,
    "involutive_m2": involutive_m2,
    "cm_roundtrip": cm_roundtrip,
    "reconstruction_roundtrip": reconstruction_roundtrip,
    "reconstruction_relabeled_z4": reconstruction_relabeled_z4,
}

GROUP_ALGEBRA = re.compile(r"group_algebra(?:_|\()([A-Za-z0-9]+)\)?")


def demo_names() -> List[str]:
    return ["group_algebra_Z2", "group_algebra_Z3", *DEMOS]


def generate_demo(name: str) -> Json:
    """The scenario document for a demo name; validated before it is returned."""
    m = GROUP_ALGEBRA.fullmatch(name)
    if m is not None:
        doc = group_algebra(m.group(1))
    elif name in DEMOS:
        doc = DEMOS[name]()
    else:
        raise UnknownDemo(f"unknown demo {name!r}; known: {demo_names()}")
    Scenario.model_validate(doc)
    return doc


def write_demo(name: str, out_dir: str | Path) -> Path:
    doc = generate_demo(name)
    path = Path(out_dir) / f"{doc['name'].lower()}.scn"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    logger.info("wrote demo %s to %s", name, path)
    return path
