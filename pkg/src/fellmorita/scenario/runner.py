"""
Scenario execution: build the named objects of a scenario file, run its
tasks in order and collect one report whose record ids are prefixed by the
task that produced them.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Callable, Dict, NamedTuple, Optional

import logfire
import numpy as np
from pydantic import ValidationError

from fellmorita.algebra.group import FiniteGroup, cyclic_group, direct_product, load_group, symmetric_group
from fellmorita.algebra.matspace import LinearMap, span
from fellmorita.algebra.star_algebra import ConcreteStarAlgebra, as_algebra, generate
from fellmorita.bundles.basic_construction import build_basic_construction, bundle_A1_and_iso
from fellmorita.bundles.bimodule import ConcreteBimodule, check_inclusion_morita, make_bimodule, verify_bimodule
from fellmorita.bundles.bundle import (
    GradedCStarBundle,
    index_report,
    make_bundle,
    relabel_bundle,
    saturation_report,
    verify_bundle,
    verify_expectation,
)
from fellmorita.bundles.equivalence import (
    ActionSystem,
    BimoduleAction,
    assemble_total,
    crossed_product_formulas,
    crossed_product_system,
    identity_equivalence_bundle,
    inner_action,
    inner_bimodule_action,
    matrix_action,
    trivial_action,
    verify_action,
    verify_equivalence_bundle,
)
from fellmorita.bundles.involutive import (
    InvolutiveBimodule,
    build_C_M,
    check_roundtrip,
    linking_and_bundle,
    make_involutive,
    theorem52_check,
    transport,
    verify_involutive,
)
from fellmorita.bundles.reconstruction import (
    ReconstructionInput,
    build_Z_bundle,
    roundtrip_factory,
    search_automorphism,
    verify_theorem_conclusion,
)
from fellmorita.config import settings
from fellmorita.errors import FellMoritaError, NoAutomorphismFound, ParseError, ReportedError, UnresolvedReference
from fellmorita.reports.models import Report
from fellmorita.scenario.codec import parse_coordinate_map, parse_matrix
from fellmorita.scenario.schema import TASK_REFERENCES, Scenario, TaskSpec

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_MALFORMED = 2

ANCHOR_TASK = "scenario-task"


@dataclass(frozen=True)
class RunConfig:
    scenario_path: Path
    report_path: Optional[Path]
    tol: Optional[float]
    check_prefix: Optional[str]
    max_workers: int


class ScenarioResult(NamedTuple):
    name: str
    tol: float
    report: Report
    exit_code: int


# ---------------------------------------------------------------------
# loading
# ---------------------------------------------------------------------
def load_scenario(path: str | Path) -> Scenario:
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except OSError as e:
        raise ParseError(f"cannot read scenario {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON in {path}:{e.lineno}: {e.msg}") from e
    try:
        return Scenario.model_validate(raw)
    except ValidationError as e:
        raise ParseError(f"invalid scenario {path}: {e.error_count()} error(s)\n{e}") from e


def _keyed(items: Dict[str, Any], what: str) -> Dict[int, Any]:
    try:
        return {int(k): v for k, v in items.items()}
    except ValueError as e:
        raise ParseError(f"{what} must be keyed by group element indices") from e


def _per_element(items: Dict[str, Any], group: FiniteGroup, what: str) -> Dict[int, Any]:
    keyed = _keyed(items, what)
    missing = [t for t in group.elements if t not in keyed]
    extra = sorted(t for t in keyed if t not in group.elements)
    if missing or extra:
        raise ParseError(f"{what} must give exactly one entry per group element (missing {missing}, unknown {extra})")
    return keyed


class Workspace:
    """The named objects of a scenario, built section by section; later entries may use earlier ones."""

    def __init__(self, scenario: Scenario, tol: float) -> None:
        self.tol = tol
        self.groups: Dict[str, FiniteGroup] = {}
        self.algebras: Dict[str, ConcreteStarAlgebra] = {}
        # coordinates for `maps` actions: the declared basis, else the computed one
        self.algebra_bases: Dict[str, list] = {}
        self.bundles: Dict[str, GradedCStarBundle] = {}
        self.bimodules: Dict[str, ConcreteBimodule] = {}
        self.actions: Dict[str, ActionSystem] = {}
        self.bimodule_actions: Dict[str, BimoduleAction] = {}
        self.involutions: Dict[str, InvolutiveBimodule] = {}

        for name, g in scenario.groups.items():
            if g.table is not None:
                self.groups[name] = load_group(g.table, name=name)
            elif g.cyclic is not None:
                self.groups[name] = cyclic_group(g.cyclic)
            elif g.symmetric is not None:
                self.groups[name] = symmetric_group(g.symmetric)
            else:
                assert g.product is not None
                left, right = (self.get("groups", n) for n in g.product)
                self.groups[name] = direct_product(left, right)

        for name, a in scenario.algebras.items():
            if a.generators:
                self.algebras[name] = generate([parse_matrix(m) for m in a.generators], tol)
                self.algebra_bases[name] = list(self.algebras[name].space.basis)
            else:
                basis = [parse_matrix(m) for m in a.basis]
                self.algebras[name] = as_algebra(span(basis, tol))
                self.algebra_bases[name] = basis

        for name, b in scenario.bundles.items():
            group = self.get("groups", b.group)
            if b.relabel is not None:
                source = self.get("bundles", b.relabel.of)
                if not group.is_automorphism(b.relabel.f):
                    raise ParseError(f"bundle {name}: relabeling {b.relabel.f} is not an automorphism")
                self.bundles[name] = relabel_bundle(source, b.relabel.f)
                continue
            fibers = _keyed(b.fibers, f"bundle {name} fibers")
            self.bundles[name] = make_bundle(
                group,
                {t: [parse_matrix(m) for m in fibers.get(t, [])] for t in group.elements},
                n=b.size,
                tol=tol,
                name=name,
            )

        for name, x in scenario.bimodules.items():
            self.bimodules[name] = make_bimodule(
                self.get("algebras", x.left),
                self.get("algebras", x.right),
                [parse_matrix(m) for m in x.basis],
            )

        for name, act in scenario.actions.items():
            algebra = self.get("algebras", act.algebra)
            group = self.get("groups", act.group)
            if act.unitaries:
                us = _per_element(act.unitaries, group, f"action {name} unitaries")
                self.actions[name] = inner_action(algebra, group, {t: parse_matrix(us[t]) for t in group.elements})
            elif act.maps:
                basis = self.algebra_bases[act.algebra]
                ms = _per_element(act.maps, group, f"action {name} maps")
                self.actions[name] = matrix_action(
                    algebra, group, basis, {t: parse_coordinate_map(ms[t], len(basis)) for t in group.elements}
                )
            else:
                self.actions[name] = trivial_action(algebra, group)

        for name, lam in scenario.bimodule_actions.items():
            left = self.get("actions", lam.left)
            us = _per_element(lam.left_unitaries, left.group, f"bimodule action {name} left_unitaries")
            vs = _per_element(lam.right_unitaries, left.group, f"bimodule action {name} right_unitaries")
            self.bimodule_actions[name] = inner_bimodule_action(
                self.get("bimodules", lam.bimodule),
                left,
                self.get("actions", lam.right),
                {t: parse_matrix(us[t]) for t in left.group.elements},
                {t: parse_matrix(vs[t]) for t in left.group.elements},
            )

        for name, inv in scenario.involutions.items():
            self.involutions[name] = make_involutive(self.get("bimodules", inv.bimodule), inv.kind, matrix=inv.matrix)

    def get(self, section: str, name: str) -> Any:
        table: Dict[str, Any] = getattr(self, section)
        if name not in table:
            raise UnresolvedReference(f"{section[:-1]} {name!r} is not defined (known: {sorted(table)})")
        return table[name]

    def check_references(self, tasks: list[TaskSpec]) -> None:
        for i, task in enumerate(tasks, start=1):
            for field, section in TASK_REFERENCES.items():
                ref = getattr(task, field)
                if ref is not None and ref not in getattr(self, section):
                    raise UnresolvedReference(f"task {i} ({task.op}): {section[:-1]} {ref!r} is not defined")


# ---------------------------------------------------------------------
# tasks
# ---------------------------------------------------------------------
TaskHandler = Callable[[Workspace, TaskSpec], Report]


def _bundle(ws: Workspace, task: TaskSpec, field: str = "bundle") -> GradedCStarBundle:
    return ws.get("bundles", getattr(task, field))


def _identity_assembly(ws: Workspace, task: TaskSpec) -> Report:
    e = identity_equivalence_bundle(_bundle(ws, task))
    report = Report().extend(verify_equivalence_bundle(e), prefix="bundle")
    datum = assemble_total(e)
    return report.extend(check_inclusion_morita(datum), prefix="datum")


def _crossed_product(ws: Workspace, task: TaskSpec) -> Report:
    alpha, beta = ws.get("actions", task.alpha), ws.get("actions", task.beta)
    lam = ws.get("bimodule_actions", task.lam)
    system = crossed_product_system(alpha, beta, lam, ws.tol)
    report = Report().extend(crossed_product_formulas(alpha, beta, lam))
    report.extend(verify_bundle(system.bundle_a), prefix="A")
    report.extend(verify_bundle(system.bundle_b), prefix="B")
    datum = assemble_total(system.equivalence)
    return report.extend(check_inclusion_morita(datum), prefix="datum")


def _basic_construction(ws: Workspace, task: TaskSpec) -> Report:
    b = _bundle(ws, task)
    bc = build_basic_construction(b)
    report = Report().extend(bc.report, prefix="C1")
    return report.extend(bundle_A1_and_iso(bc, b).report, prefix="A1")


def _reconstruction_roundtrip(ws: Workspace, task: TaskSpec) -> Report:
    b = _bundle(ws, task)
    bc = build_basic_construction(b)
    identity = tuple(b.group.elements)
    z, lam = roundtrip_factory(identity, bc, bc)
    built = build_Z_bundle(ReconstructionInput(b, b, bc, bc, identity, z, lam))
    report = Report().extend(built.report)
    return report.extend(verify_theorem_conclusion(built.equivalence, identity))


def _search(ws: Workspace, task: TaskSpec) -> Report:
    a, b = _bundle(ws, task), _bundle(ws, task, "bundle_b")
    report = Report()
    try:
        found = search_automorphism(a, b, roundtrip_factory)
    except NoAutomorphismFound as exc:
        report.add("result", ANCHOR_TASK, task.expect_none, message=f"no automorphism: {exc}")
        return report
    ok = not task.expect_none and (task.expect is None or list(found.f) == task.expect)
    report.add("result", ANCHOR_TASK, ok, message=f"f={list(found.f)}")
    return report.extend(found.report)


def _transport(ws: Workspace, task: TaskSpec) -> Report:
    y = transport(ws.get("bimodules", task.bimodule), ws.get("involutions", task.involution))
    return verify_involutive(y)


def _identity_phi(m: ConcreteBimodule, x: InvolutiveBimodule, y: InvolutiveBimodule) -> LinearMap:
    return LinearMap.from_function(transport(m, x).space, y.space, lambda s: s)


def _build_C_M(ws: Workspace, task: TaskSpec) -> Report:
    m = ws.get("bimodules", task.bimodule)
    x, y = ws.get("involutions", task.involution), ws.get("involutions", task.involution_y)
    return build_C_M(m, x, y, _identity_phi(m, x, y)).report


def _theorem52(ws: Workspace, task: TaskSpec) -> Report:
    x, y = ws.get("involutions", task.involution), ws.get("involutions", task.involution_y)
    m = ws.get("bimodules", task.bimodule) if task.bimodule else None
    phi = _identity_phi(m, x, y) if m is not None else None
    equivalence = identity_equivalence_bundle(_bundle(ws, task)) if task.bundle else None
    return theorem52_check(x.algebra, x, y.algebra, y, m=m, phi=phi, equivalence=equivalence)


HANDLERS: Dict[str, TaskHandler] = {
    "verify_bundle": lambda ws, t: verify_bundle(_bundle(ws, t)),
    "saturation": lambda ws, t: saturation_report(_bundle(ws, t)),
    "expectation": lambda ws, t: verify_expectation(_bundle(ws, t)),
    "index": lambda ws, t: index_report(_bundle(ws, t)),
    "identity_assembly": _identity_assembly,
    "verify_bimodule": lambda ws, t: verify_bimodule(ws.get("bimodules", t.bimodule), require_full=t.full),
    "verify_action": lambda ws, t: verify_action(ws.get("actions", t.alpha)),
    "crossed_product": _crossed_product,
    "basic_construction": _basic_construction,
    "reconstruction_roundtrip": _reconstruction_roundtrip,
    "search_automorphism": _search,
    "verify_involutive": lambda ws, t: verify_involutive(ws.get("involutions", t.involution)),
    "linking": lambda ws, t: linking_and_bundle(ws.get("involutions", t.involution)).report,
    "z2_roundtrip": lambda ws, t: check_roundtrip(_bundle(ws, t)),
    "transport": _transport,
    "build_C_M": _build_C_M,
    "theorem52": _theorem52,
}


def _task_prefix(i: int, task: TaskSpec) -> str:
    label = task.label or task.bundle or task.involution or task.bimodule or task.lam or task.alpha or ""
    return f"t{i:02d}.{task.op}" + (f".{label}" if label else "")


def run_task(ws: Workspace, i: int, task: TaskSpec) -> Report:
    prefix = _task_prefix(i, task)
    with logfire.span("scenario.task {op}", op=task.op, index=i):
        try:
            rep = HANDLERS[task.op](ws, task)
        except (ParseError, UnresolvedReference):
            raise
        except (FellMoritaError, np.linalg.LinAlgError) as exc:
            logger.warning("%s raised %s: %s", prefix, type(exc).__name__, exc)
            rep = Report()
            if isinstance(exc, ReportedError) and exc.report is not None:
                rep.extend(exc.report)
            rep.add("error", ANCHOR_TASK, False, message=f"{type(exc).__name__}: {exc}")
    return Report().extend(rep, prefix=prefix)


# ---------------------------------------------------------------------
# running
# ---------------------------------------------------------------------
def run_scenario(
    path: str | Path,
    tol: Optional[float] = None,
    *,
    max_workers: Optional[int] = None,
    check_prefix: Optional[str] = None,
) -> ScenarioResult:
    """Run every task of a scenario file; exit code 0 all pass, 1 some check failed, 2 malformed input."""
    try:
        scenario = load_scenario(path)
        effective_tol = tol if tol is not None else (scenario.tol if scenario.tol is not None else settings.tol)
        with logfire.span("scenario.run {name}", name=scenario.name, tol=effective_tol):
            try:
                ws = Workspace(scenario, effective_tol)
            except (ParseError, UnresolvedReference):
                raise
            except (FellMoritaError, ValueError) as e:
                raise ParseError(f"cannot build scenario objects: {type(e).__name__}: {e}") from e
            ws.check_references(scenario.tasks)
            report = Report()
            workers = max_workers if max_workers is not None else settings.max_workers
            previous = settings.max_workers
            settings.max_workers = workers
            try:
                for i, task in enumerate(scenario.tasks, start=1):
                    report.extend(run_task(ws, i, task))
            finally:
                settings.max_workers = previous
    except (ParseError, UnresolvedReference) as exc:
        logger.error("malformed scenario %s: %s", path, exc)
        report = Report()
        report.add("scenario.malformed", ANCHOR_TASK, False, message=f"{type(exc).__name__}: {exc}")
        return ScenarioResult(Path(path).stem, tol or settings.tol, report, EXIT_MALFORMED)

    report = report.filtered(check_prefix).sorted()
    code = EXIT_PASS if report.passed else EXIT_FAIL
    logger.info("scenario %s: %s %s", scenario.name, report.overall, report.counts())
    return ScenarioResult(scenario.name, effective_tol, report, code)


def report_document(result: ScenarioResult, *, generated_at: Optional[str] = None) -> Dict[str, Any]:
    """Machine report; `generated_at` is the only field that differs between identical runs."""
    return {
        "summary": {
            "scenario": result.name,
            "tol": result.tol,
            "overall": result.report.overall,
            "exit_code": result.exit_code,
            **result.report.counts(),
        },
        "records": [r.model_dump() for r in result.report.records],
        "generated_at": generated_at or datetime.now(timezone.utc).isoformat(timespec="seconds"),
    }


def save_report(path: Path, result: ScenarioResult) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(report_document(result), ensure_ascii=False, indent=2, sort_keys=True), encoding="utf-8")
    return path
