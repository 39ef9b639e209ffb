from __future__ import annotations

from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

Entry = Union[float, List[float]]
Matrix = List[List[Entry]]


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


class GroupSpec(_Strict):
    """Exactly one of: a Cayley table, Z_n, S_n, or a direct product of named groups."""

    table: Optional[List[List[int]]] = None
    cyclic: Optional[int] = Field(default=None, ge=1)
    symmetric: Optional[int] = Field(default=None, ge=1, le=5)
    product: Optional[List[str]] = None

    @model_validator(mode="after")
    def _one_kind(self) -> "GroupSpec":
        given = [k for k in ("table", "cyclic", "symmetric", "product") if getattr(self, k) is not None]
        if len(given) != 1:
            raise ValueError(f"group needs exactly one of table/cyclic/symmetric/product, got {given or 'none'}")
        if self.product is not None and len(self.product) != 2:
            raise ValueError("product takes exactly two group names")
        return self


class AlgebraSpec(_Strict):
    """Either generators (closed under products and adjoints) or a basis of an algebra."""

    generators: List[Matrix] = Field(default_factory=list)
    basis: List[Matrix] = Field(default_factory=list)

    @model_validator(mode="after")
    def _one_kind(self) -> "AlgebraSpec":
        if bool(self.generators) == bool(self.basis):
            raise ValueError("algebra needs exactly one of generators/basis")
        return self


class RelabelSpec(_Strict):
    of: str
    f: List[int]


class BundleSpec(_Strict):
    group: str
    fibers: Dict[str, List[Matrix]] = Field(default_factory=dict)
    relabel: Optional[RelabelSpec] = None
    size: Optional[int] = None

    @model_validator(mode="after")
    def _one_kind(self) -> "BundleSpec":
        if bool(self.fibers) == (self.relabel is not None):
            raise ValueError("bundle needs exactly one of fibers/relabel")
        return self


class BimoduleSpec(_Strict):
    left: str
    right: str
    basis: List[Matrix]


class ActionSpec(_Strict):
    """
    Ad(u_t) from `unitaries`, or per-element `maps` acting on coordinates over
    the algebra basis (k×k complex, or 2k×2k realified). Neither means the
    trivial action.
    """

    algebra: str
    group: str
    unitaries: Dict[str, Matrix] = Field(default_factory=dict)
    maps: Dict[str, Matrix] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _one_kind(self) -> "ActionSpec":
        if self.unitaries and self.maps:
            raise ValueError("action takes unitaries or maps, not both")
        return self


class BimoduleActionSpec(_Strict):
    """λ_t(x) = u_t·x·v_t*."""

    bimodule: str
    left: str
    right: str
    left_unitaries: Dict[str, Matrix]
    right_unitaries: Dict[str, Matrix]


class InvolutionSpec(_Strict):
    bimodule: str
    kind: Literal["adjoint", "phase_adjoint", "transpose", "matrix"] = "adjoint"
    matrix: Optional[List[List[float]]] = None

    @model_validator(mode="after")
    def _matrix_when_needed(self) -> "InvolutionSpec":
        if (self.kind == "matrix") != (self.matrix is not None):
            raise ValueError("`matrix` is required exactly when kind is 'matrix'")
        return self


Op = Literal[
    "verify_bundle",
    "saturation",
    "expectation",
    "index",
    "identity_assembly",
    "verify_bimodule",
    "verify_action",
    "crossed_product",
    "basic_construction",
    "reconstruction_roundtrip",
    "search_automorphism",
    "verify_involutive",
    "linking",
    "z2_roundtrip",
    "transport",
    "build_C_M",
    "theorem52",
]


class TaskSpec(_Strict):
    op: Op
    label: Optional[str] = None
    bundle: Optional[str] = None
    bundle_b: Optional[str] = None
    bimodule: Optional[str] = None
    involution: Optional[str] = None
    involution_y: Optional[str] = None
    alpha: Optional[str] = None
    beta: Optional[str] = None
    lam: Optional[str] = Field(default=None, alias="lambda")
    full: bool = True
    # search_automorphism: expected f, or null when no automorphism should work
    expect: Optional[List[int]] = None
    expect_none: bool = False


# task field -> scenario section it refers to
TASK_REFERENCES: Dict[str, str] = {
    "bundle": "bundles",
    "bundle_b": "bundles",
    "bimodule": "bimodules",
    "involution": "involutions",
    "involution_y": "involutions",
    "alpha": "actions",
    "beta": "actions",
    "lam": "bimodule_actions",
}

# fields each op needs
TASK_REQUIRED: Dict[str, tuple[str, ...]] = {
    "verify_bundle": ("bundle",),
    "saturation": ("bundle",),
    "expectation": ("bundle",),
    "index": ("bundle",),
    "identity_assembly": ("bundle",),
    "verify_bimodule": ("bimodule",),
    "verify_action": ("alpha",),
    "crossed_product": ("alpha", "beta", "lam"),
    "basic_construction": ("bundle",),
    "reconstruction_roundtrip": ("bundle",),
    "search_automorphism": ("bundle", "bundle_b"),
    "verify_involutive": ("involution",),
    "linking": ("involution",),
    "z2_roundtrip": ("bundle",),
    "transport": ("bimodule", "involution"),
    "build_C_M": ("bimodule", "involution", "involution_y"),
    "theorem52": ("involution", "involution_y"),
}


class Scenario(_Strict):
    name: str = "scenario"
    description: str = ""
    tol: Optional[float] = Field(default=None, gt=0)
    groups: Dict[str, GroupSpec] = Field(default_factory=dict)
    algebras: Dict[str, AlgebraSpec] = Field(default_factory=dict)
    bundles: Dict[str, BundleSpec] = Field(default_factory=dict)
    bimodules: Dict[str, BimoduleSpec] = Field(default_factory=dict)
    actions: Dict[str, ActionSpec] = Field(default_factory=dict)
    bimodule_actions: Dict[str, BimoduleActionSpec] = Field(default_factory=dict)
    involutions: Dict[str, InvolutionSpec] = Field(default_factory=dict)
    tasks: List[TaskSpec] = Field(default_factory=list)

    @model_validator(mode="after")
    def _tasks_complete(self) -> "Scenario":
        for i, task in enumerate(self.tasks, start=1):
            missing = [f for f in TASK_REQUIRED[task.op] if getattr(task, f) is None]
            if missing:
                raise ValueError(f"task {i} ({task.op}) is missing {missing}")
        return self
