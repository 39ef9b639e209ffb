"""
Involutive Hilbert bimodules and their linking algebras.

An involutive A–A bimodule X carries a conjugate-linear ♮ with
(x^♮)^♮ = x, (a·x·b)^♮ = b*·x^♮·a* and x·(y^♮)* = (x^♮)*·y. Its linking
algebra C_X = {[[a, x], [(x^♮)*, a]]} is graded by Z₂ with A on the
diagonal, and every Z₂-bundle arises this way. Conjugate transport along an
equivalence bimodule M and the bimodule C_M relate the inclusions A ⊂ C_X
and B ⊂ C_Y.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional

import numpy as np

from fellmorita.algebra.group import cyclic_group
from fellmorita.algebra.matspace import (
    CMatrix,
    AntilinearMap,
    LinearMap,
    MatSubspace,
    adjoint_span,
    as_cmatrix,
    dagger,
    equality_residual,
    fro,
    full_space,
    product_span,
    rel_residual,
    span,
)
from fellmorita.algebra.star_algebra import ConcreteStarAlgebra, random_unitary, relative_commutant
from fellmorita.bundles.bimodule import (
    ConcreteBimodule,
    InclusionMoritaDatum,
    check_inclusion_morita,
    is_left_full,
    is_right_full,
    left_frame,
    make_bimodule,
    right_frame,
    tensor,
    verify_bimodule,
)
from fellmorita.bundles.bundle import GradedCStarBundle, is_saturated, make_bundle, verify_bundle
from fellmorita.bundles.equivalence import EquivalenceBundle, make_equivalence_bundle, verify_equivalence_bundle
from fellmorita.config import settings
from fellmorita.errors import (
    ClosureFailure,
    FellMoritaError,
    IllDefinedInvolution,
    LinkingError,
    NotAnInvolutiveIsomorphism,
    ShapeMismatch,
    WrongGroup,
)
from fellmorita.reports.models import Report

logger = logging.getLogger(__name__)

CHECK_TOL = 1e-8

ANCHOR_INVOLUTIVE = "involutive-bimodule"
ANCHOR_LINKING = "linking-algebra"
ANCHOR_TRANSPORT = "conjugate-transport"
ANCHOR_PSI = "tensor-identification"
ANCHOR_CM = "linking-equivalence"
ANCHOR_INCLUSIONS = "inclusion-equivalence"


@dataclass(frozen=True, eq=False)
class InvolutiveBimodule:
    base: ConcreteBimodule
    natural: AntilinearMap

    @property
    def algebra(self) -> ConcreteStarAlgebra:
        return self.base.left

    @property
    def space(self) -> MatSubspace:
        return self.base.space

    def __call__(self, x: CMatrix) -> CMatrix:
        return self.natural(x)

    def tilde(self, x: CMatrix) -> CMatrix:
        """(x^♮)*: the realization of x̃^♮ inside the linking algebra."""
        return dagger(self.natural(x))


# ---------------------------------------------------------------------
# involutions
# ---------------------------------------------------------------------
def adjoint_natural(space: MatSubspace) -> AntilinearMap:
    return AntilinearMap.from_function(space, space, dagger)


def phase_adjoint_natural(space: MatSubspace, phase: complex = 1j) -> AntilinearMap:
    return AntilinearMap.from_function(space, space, lambda x: phase * dagger(x))


def transpose_natural(space: MatSubspace) -> AntilinearMap:
    """x ↦ xᵀ; complex-linear, so never a valid ♮ unless X is real."""
    return AntilinearMap.from_function(space, space, lambda x: x.T)


def make_involutive(
    base: ConcreteBimodule,
    kind: str = "adjoint",
    *,
    matrix: Optional[object] = None,
) -> InvolutiveBimodule:
    space = base.space
    if base.left.n != base.right.n or space.rows != space.cols:
        raise ShapeMismatch("an involutive bimodule needs a square ambient")
    if kind == "adjoint":
        natural = adjoint_natural(space)
    elif kind == "phase_adjoint":
        natural = phase_adjoint_natural(space)
    elif kind == "transpose":
        natural = transpose_natural(space)
    elif kind == "matrix":
        mat = np.asarray(matrix, dtype=np.float64)
        if mat.shape != (2 * space.dim, 2 * space.dim):
            raise ShapeMismatch(f"realified involution must be {2 * space.dim}x{2 * space.dim}, got {mat.shape}")
        natural = AntilinearMap(space, space, mat)
    else:
        raise ValueError(f"unknown involution kind: {kind!r}")
    return InvolutiveBimodule(base=base, natural=natural)


def verify_involutive(x: InvolutiveBimodule) -> Report:
    report = Report()
    nat = x.natural
    report.check("natural.well_defined", ANCHOR_INVOLUTIVE, nat.residual, CHECK_TOL)
    report.check("natural.conjugate_linear", ANCHOR_INVOLUTIVE, nat.conjugate_linearity_defect(), CHECK_TOL)

    k = 2 * x.space.dim
    res = fro(nat.matrix @ nat.matrix - np.eye(k)) if k else 0.0
    report.check("natural.involutive", ANCHOR_INVOLUTIVE, res, CHECK_TOL)

    xs = list(x.space.basis)
    algebra = list(x.algebra.space.basis)
    cond2 = 0.0
    for a in algebra:
        for b in algebra + [1j * q for q in algebra]:
            for v in xs:
                lhs = nat(a @ v @ b)
                cond2 = max(cond2, rel_residual(lhs - dagger(b) @ nat(v) @ dagger(a), lhs))
    report.check("natural.reverses_actions", ANCHOR_INVOLUTIVE, cond2, CHECK_TOL)

    cond3 = 0.0
    for u in xs + [1j * q for q in xs]:
        for v in xs:
            lhs = u @ dagger(nat(v))
            cond3 = max(cond3, rel_residual(lhs - dagger(nat(u)) @ v, lhs))
    report.check("natural.inner_products", ANCHOR_INVOLUTIVE, cond3, CHECK_TOL)
    return report


def dual_involutive(x: InvolutiveBimodule) -> InvolutiveBimodule:
    """X̃ realized as X*, with x* ↦ (x^♮)*."""
    space = adjoint_span(x.space)
    base = ConcreteBimodule(left=x.base.right, right=x.base.left, space=space)
    natural = AntilinearMap.from_function(space, space, lambda y: dagger(x.natural(dagger(y))))
    return InvolutiveBimodule(base, natural)


# ---------------------------------------------------------------------
# linking algebras and Z₂-bundles
# ---------------------------------------------------------------------
def _diag(a: CMatrix) -> CMatrix:
    z = np.zeros_like(a)
    return np.block([[a, z], [z, a]])


def _offdiag(upper: CMatrix, lower: CMatrix) -> CMatrix:
    return np.block([[np.zeros((upper.shape[0], lower.shape[1]), dtype=np.complex128), upper],
                     [lower, np.zeros((lower.shape[0], upper.shape[1]), dtype=np.complex128)]])


@dataclass(frozen=True, eq=False)
class LinkingSystem:
    involutive: InvolutiveBimodule
    cx: ConcreteStarAlgebra
    z2bundle: GradedCStarBundle
    corner_a: ConcreteStarAlgebra
    report: Report

    def embed(self, a: CMatrix, x: Optional[CMatrix] = None) -> CMatrix:
        """[[a, x], [(x^♮)*, a]]."""
        out = _diag(as_cmatrix(a))
        if x is not None:
            out = out + _offdiag(x, self.involutive.tilde(x))
        return out


def linking_and_bundle(x: InvolutiveBimodule) -> LinkingSystem:
    n = x.algebra.n
    tol = x.space.tol
    a0 = [_diag(a) for a in x.algebra.space.basis]
    a1 = [_offdiag(v, x.tilde(v)) for v in x.space.basis]
    bundle = make_bundle(cyclic_group(2), [a0, a1], n=2 * n, tol=tol, name="A_X")

    report = Report().extend(verify_bundle(bundle), prefix="bundle")
    blocks = 0.0
    for u in x.space.basis:
        for v in x.space.basis:
            prod = _offdiag(u, x.tilde(u)) @ _offdiag(v, x.tilde(v))
            top, bottom = prod[:n, :n], prod[n:, n:]
            blocks = max(blocks, rel_residual(top - bottom, prod))
    report.check("offdiagonal_product", ANCHOR_LINKING, blocks, CHECK_TOL)

    left_full = is_left_full(x.base) and is_right_full(x.base)
    report.add(
        "fullness_iff_saturation",
        ANCHOR_LINKING,
        left_full == is_saturated(bundle),
        message=f"full={left_full}",
    )
    if not report.passed:
        ids = ", ".join(r.id for r in report.failures()[:5])
        raise LinkingError(f"linking bundle of X fails: {ids}", report=report)
    logger.debug("linking algebra C_X in M_%d, fiber dims %s", 2 * n, bundle.dims)
    return LinkingSystem(x, bundle.total_algebra, bundle, bundle.fiber_algebra, report)


def bundle_to_involutive(b: GradedCStarBundle) -> InvolutiveBimodule:
    """A₁ as an A₀–A₀ bimodule with the bundle involution as ♮."""
    if b.group.order != 2:
        raise WrongGroup(f"expected a Z2-bundle, got group of order {b.group.order}")
    a0 = b.fiber_algebra
    x = make_bimodule(a0, a0, b.fibers[1 - b.group.identity])
    return InvolutiveBimodule(x, adjoint_natural(x.space))


def check_roundtrip(b: GradedCStarBundle) -> Report:
    """b and the linking bundle of its involutive bimodule agree under a ↦ diag(a, a), x ↦ offdiag(x, x)."""
    x = bundle_to_involutive(b)
    linking = linking_and_bundle(x)
    e = b.group.identity
    g = 1 - e

    def phi(u: CMatrix, t: int) -> CMatrix:
        return _diag(u) if t == e else _offdiag(u, x.tilde(u))

    report = Report()
    report.add(
        "roundtrip.dimensions",
        ANCHOR_LINKING,
        b.dims[e] == linking.z2bundle.dims[0] and b.dims[g] == linking.z2bundle.dims[1],
        message=f"{b.dims} vs {linking.z2bundle.dims}",
    )
    mult = inv = 0.0
    for t in (e, g):
        for u in b.fibers[t].basis:
            pu = phi(u, t)
            inv = max(inv, rel_residual(phi(dagger(u), t) - dagger(pu), pu))
            for s in (e, g):
                for v in b.fibers[s].basis:
                    lhs = pu @ phi(v, s)
                    mult = max(mult, rel_residual(lhs - phi(u @ v, b.group.mul(t, s)), lhs))
    report.check("roundtrip.multiplicative", ANCHOR_LINKING, mult, CHECK_TOL)
    report.check("roundtrip.involution", ANCHOR_LINKING, inv, CHECK_TOL)
    return report


def linking_isomorphism(x: InvolutiveBimodule, y: InvolutiveBimodule, phi: LinearMap) -> Report:
    """For X, Y over one algebra: diag ⊕ offdiag(φ) is a bundle isomorphism A_X → A_Y iff φ is an involutive isomorphism."""
    report = Report().extend(involutive_isomorphism_report(x, y, phi), prefix="bimodules")
    lx, ly = linking_and_bundle(x), linking_and_bundle(y)
    big = _linking_map(x, lx, phi, ly.cx.n)

    mult = adj = 0.0
    for u in lx.cx.space.basis:
        pu = big(u)
        adj = max(adj, rel_residual(big(dagger(u)) - dagger(pu), pu))
        for v in lx.cx.space.basis:
            lhs = pu @ big(v)
            mult = max(mult, rel_residual(lhs - big(u @ v), lhs))
    report.check("linking.well_defined", ANCHOR_LINKING, big.residual, CHECK_TOL)
    report.check("linking.multiplicative", ANCHOR_LINKING, mult, CHECK_TOL)
    report.check("linking.involution", ANCHOR_LINKING, adj, CHECK_TOL)
    image = span([big(u) for u in lx.cx.space.basis], ly.cx.tol, shape=ly.cx.space.shape)
    report.check("linking.onto", ANCHOR_LINKING, equality_residual(image, ly.cx.space), ly.cx.tol)
    return report


# ---------------------------------------------------------------------
# transport M̃ ⊗ X ⊗ M
# ---------------------------------------------------------------------
def transport(m: ConcreteBimodule, x: InvolutiveBimodule) -> InvolutiveBimodule:
    """span(M*·X·M) over B, with m_a*·x·m_b ↦ m_b*·x^♮·m_a extended conjugate-linearly."""
    if m.left.n != x.algebra.n:
        raise ShapeMismatch(f"M has left ambient M_{m.left.n}, X lives over M_{x.algebra.n}")
    ms = list(m.space.basis)
    sources: List[CMatrix] = []
    images: List[CMatrix] = []
    for ma in ms:
        for v in x.space.basis:
            nv = x.natural(v)
            for mb in ms:
                sources.append(dagger(ma) @ v @ mb)
                images.append(dagger(mb) @ nv @ ma)
    k = m.right.n
    space = span(sources, x.space.tol, shape=(k, k))
    natural = AntilinearMap.from_pairs(space, space, sources, images)
    if natural.residual > CHECK_TOL:
        raise IllDefinedInvolution(f"transported involution is inconsistent (residual {natural.residual:.2e})")
    return InvolutiveBimodule(ConcreteBimodule(left=m.right, right=m.right, space=space), natural)


def involution_deviation(x: InvolutiveBimodule, y: InvolutiveBimodule) -> float:
    """Subspace and ♮ disagreement of two involutive bimodules in one ambient."""
    res = equality_residual(x.space, y.space)
    if res > x.space.tol:
        return res
    return x.natural.deviation(AntilinearMap.from_function(x.space, x.space, y.natural))


def transport_functoriality(m: ConcreteBimodule, n: ConcreteBimodule, x: InvolutiveBimodule) -> Report:
    """Transport along M then N equals transport along span(M·N)."""
    stepwise = transport(n, transport(m, x))
    direct = transport(tensor(m, n), x)
    report = Report()
    report.check("transport.functorial", ANCHOR_TRANSPORT, involution_deviation(stepwise, direct), CHECK_TOL)
    return report


# ---------------------------------------------------------------------
# Ψ, Θ and the isomorphism φ
# ---------------------------------------------------------------------
def involutive_isomorphism_report(src: InvolutiveBimodule, dst: InvolutiveBimodule, phi: LinearMap) -> Report:
    """φ is a bijective bimodule map preserving both inner products and ♮."""
    report = Report()
    report.check("phi.well_defined", ANCHOR_PSI, phi.residual, CHECK_TOL)
    report.add("phi.bijective", ANCHOR_PSI, phi.is_bijective())
    xs = list(src.space.basis)
    linner = rinner = acts = nat = 0.0
    for s in xs:
        ps = phi(s)
        for t in xs:
            pt = phi(t)
            lhs = ps @ dagger(pt)
            linner = max(linner, rel_residual(lhs - s @ dagger(t), lhs))
            lhs = dagger(ps) @ pt
            rinner = max(rinner, rel_residual(lhs - dagger(s) @ t, lhs))
        for b in src.algebra.space.basis:
            lhs = phi(b @ s)
            acts = max(acts, rel_residual(lhs - b @ ps, lhs))
            lhs = phi(s @ b)
            acts = max(acts, rel_residual(lhs - ps @ b, lhs))
        for v in (s, 1j * s):
            lhs = phi(src.natural(v))
            nat = max(nat, rel_residual(lhs - dst.natural(phi(v)), lhs))
    report.check("phi.left_inner", ANCHOR_PSI, linner, CHECK_TOL)
    report.check("phi.right_inner", ANCHOR_PSI, rinner, CHECK_TOL)
    report.check("phi.bimodule_map", ANCHOR_PSI, acts, CHECK_TOL)
    report.check("phi.natural", ANCHOR_PSI, nat, CHECK_TOL)
    return report


def _psi(
    m: ConcreteBimodule,
    x: InvolutiveBimodule,
    phi: LinearMap,
    frame: List[CMatrix],
    domain: MatSubspace,
    codomain: MatSubspace,
) -> LinearMap:
    """Ψ(x·m) = Σ_i u_i·φ(u_i*·x·m)."""
    sources, images = [], []
    for v in x.space.basis:
        for mm in m.space.basis:
            s = v @ mm
            sources.append(s)
            images.append(sum((u @ phi(dagger(u) @ s) for u in frame), start=np.zeros_like(s)))
    return LinearMap.from_pairs(domain, codomain, sources, images)


def psi_theta_check(
    m: ConcreteBimodule,
    x: InvolutiveBimodule,
    y: InvolutiveBimodule,
    phi: LinearMap,
) -> Report:
    """Ψ: span(X·M) → span(M·Y) and Θ(m·y) = m·φ⁻¹(y) are mutually inverse and isometric."""
    transported = transport(m, x)
    iso = involutive_isomorphism_report(transported, y, phi)
    if not iso.passed:
        ids = ", ".join(r.id for r in iso.failures()[:5])
        raise NotAnInvolutiveIsomorphism(f"φ is not an involutive isomorphism: {ids}", report=iso)

    report = Report().extend(iso)
    tol = x.space.tol
    shape = m.shape
    xm = product_span(x.space, m.space)
    my = product_span(m.space, y.space)
    frame = left_frame(m)
    psi = _psi(m, x, phi, frame, xm, my)
    report.check("psi.well_defined", ANCHOR_PSI, psi.residual, CHECK_TOL)
    report.add("psi.bijective", ANCHOR_PSI, psi.is_bijective(), message=f"dims {xm.dim} -> {my.dim}")

    linner = rinner = 0.0
    for s in xm.basis:
        ps = psi(s)
        for t in xm.basis:
            pt = psi(t)
            lhs = ps @ dagger(pt)
            linner = max(linner, rel_residual(lhs - s @ dagger(t), lhs))
            lhs = dagger(ps) @ pt
            rinner = max(rinner, rel_residual(lhs - dagger(s) @ t, lhs))
    report.check("psi.left_inner", ANCHOR_PSI, linner, CHECK_TOL)
    report.check("psi.right_inner", ANCHOR_PSI, rinner, CHECK_TOL)

    phi_inv = phi.inverse()
    sources, images = [], []
    for mm in m.space.basis:
        for v in y.space.basis:
            sources.append(mm @ v)
            images.append(mm @ phi_inv(v))
    theta_map = LinearMap.from_pairs(my, xm, sources, images)
    report.check("theta.well_defined", ANCHOR_PSI, theta_map.residual, CHECK_TOL)
    back = max((rel_residual(theta_map(psi(s)) - s, s) for s in xm.basis), default=0.0)
    report.check("theta_after_psi", ANCHOR_PSI, back, CHECK_TOL)
    forth = max((rel_residual(psi(theta_map(s)) - s, s) for s in my.basis), default=0.0)
    report.check("psi_after_theta", ANCHOR_PSI, forth, CHECK_TOL)

    rng = np.random.default_rng(settings.seed)
    w = random_unitary(m.left, rng)
    other = _psi(m, x, phi, [w @ u for u in frame], xm, my)
    report.check("psi.frame_independent", ANCHOR_PSI, psi.deviation(other), CHECK_TOL)

    # Φ̃(m*·x*·n) = (φ(n*·x·m))*
    dsrc, dimg = [], []
    for ma in m.space.basis:
        for v in x.space.basis:
            for mb in m.space.basis:
                dsrc.append(dagger(ma) @ dagger(v) @ mb)
                dimg.append(dagger(phi(dagger(mb) @ v @ ma)))
    tilde = LinearMap.from_pairs(adjoint_span(transported.space), adjoint_span(y.space), dsrc, dimg)
    report.check("phi_tilde.defining_relation", ANCHOR_PSI, tilde.residual, CHECK_TOL)
    tinner = 0.0
    for s in tilde.domain.basis:
        for t in tilde.domain.basis:
            lhs = tilde(s) @ dagger(tilde(t))
            tinner = max(tinner, rel_residual(lhs - s @ dagger(t), lhs))
    report.check("phi_tilde.inner_product", ANCHOR_PSI, tinner, CHECK_TOL)
    logger.debug("Ψ on %s: dims %d -> %d, tol %.1e", shape, xm.dim, my.dim, tol)
    return report


# ---------------------------------------------------------------------
# C_M
# ---------------------------------------------------------------------
class CMResult(NamedTuple):
    datum: InclusionMoritaDatum
    equivalence: EquivalenceBundle
    report: Report


def _linking_map(
    src: InvolutiveBimodule,
    src_linking: LinkingSystem,
    fn: Callable[[CMatrix], CMatrix],
    size: int,
) -> LinearMap:
    """diag(a, a) ↦ diag(a, a), offdiag(v, (v^♮)*) ↦ offdiag(fn(v), (fn(v^♮))*), extended linearly over C_src."""
    sources, images = [], []
    for a in src.algebra.space.basis:
        sources.append(_diag(a))
        images.append(_diag(a))
    for v in src.space.basis:
        sources.append(_offdiag(v, src.tilde(v)))
        images.append(_offdiag(fn(v), dagger(fn(src.natural(v)))))
    return LinearMap.from_pairs(src_linking.cx.space, full_space(size, size, src.space.tol), sources, images)


def build_C_M(
    m: ConcreteBimodule,
    x: InvolutiveBimodule,
    y: InvolutiveBimodule,
    phi: LinearMap,
) -> CMResult:
    """
    C_M = span{[[m₁, x·m₂], [(x^♮)*·m₂, m₁]]} as a C_X–C_Y equivalence bimodule,
    with the right C_Y-action passing through φ, its Z₂ grading and the
    inclusion datum (A ⊂ C_X, B ⊂ C_Y, M₀).
    """
    n, k = m.shape
    tol = max(x.space.tol, m.space.tol)
    y_prime = transport(m, x)
    lx = linking_and_bundle(x)
    ly = linking_and_bundle(y)
    lyp = linking_and_bundle(y_prime)

    m0 = span([_diag(mm) for mm in m.space.basis], tol, shape=(2 * n, 2 * k))
    m1 = span(
        [_offdiag(v @ mm, x.tilde(v) @ mm) for v in x.space.basis for mm in m.space.basis],
        tol,
        shape=(2 * n, 2 * k),
    )
    cm_space = span(list(m0.basis) + list(m1.basis), tol, shape=(2 * n, 2 * k))

    if not phi.is_bijective():
        bad = Report()
        bad.add("phi.bijective", ANCHOR_PSI, False, message=f"dims {phi.domain.dim} -> {phi.codomain.dim}, rank {phi.rank()}")
        raise NotAnInvolutiveIsomorphism("φ is not bijective", report=bad)
    phi_c = _linking_map(y, ly, phi.inverse(), lyp.cx.n)
    closure = 0.0
    for c in cm_space.basis:
        for d in ly.cx.space.basis:
            closure = max(closure, cm_space.distance(c @ phi_c(d)))
    if closure > CHECK_TOL:
        raise ClosureFailure(f"C_M·C_Y leaves C_M (residual {closure:.2e})")

    report = Report()
    report.check("right_action_through_phi", ANCHOR_CM, closure, CHECK_TOL)
    report.check("phi_C.well_defined", ANCHOR_CM, phi_c.residual, CHECK_TOL)

    cm = ConcreteBimodule(left=lx.cx, right=lyp.cx, space=cm_space)
    report.extend(verify_bimodule(cm, require_full=True), prefix="C_M")

    try:
        us = [_diag(u) for u in left_frame(m)]
        vs = [_diag(v) for v in right_frame(m)]
    except FellMoritaError as exc:
        report.add("frames", ANCHOR_CM, False, message=str(exc))
    else:
        lsum = sum((u @ dagger(u) for u in us), start=np.zeros((2 * n, 2 * n), dtype=np.complex128))
        rsum = sum((dagger(v) @ v for v in vs), start=np.zeros((2 * k, 2 * k), dtype=np.complex128))
        report.check("frames.left_sum", ANCHOR_CM, fro(lsum - lx.cx.unit), CHECK_TOL)
        report.check("frames.right_sum", ANCHOR_CM, fro(rsum - ly.cx.unit), CHECK_TOL)
        report.check("frames.in_C_M", ANCHOR_CM, max(cm_space.distance(u) for u in us + vs), CHECK_TOL)

    equivalence = make_equivalence_bundle(lx.z2bundle, lyp.z2bundle, [m0, m1])
    report.extend(verify_equivalence_bundle(equivalence), prefix="z2")

    datum = InclusionMoritaDatum(big=cm, small_space=m0, small_left=lx.corner_a, small_right=lyp.corner_a)
    report.extend(check_inclusion_morita(datum), prefix="datum")
    logger.info("C_M built: dim %d (M0 %d, M1 %d), overall %s", cm_space.dim, m0.dim, m1.dim, report.overall)
    return CMResult(datum, equivalence, report)


# ---------------------------------------------------------------------
# both directions
# ---------------------------------------------------------------------
class Extraction(NamedTuple):
    m: ConcreteBimodule
    x: InvolutiveBimodule
    y: InvolutiveBimodule
    phi: LinearMap
    report: Report


def extract_from_equivalence_bundle(e: EquivalenceBundle) -> Extraction:
    """M = M₀; Φ(m*·x·n) = ⟨m, x·n⟩ is the inclusion span(M₀*·A₁·M₀) → B₁."""
    if e.group.order != 2:
        raise WrongGroup(f"expected a Z2 equivalence bundle, got group of order {e.group.order}")
    ident = e.group.identity
    x = bundle_to_involutive(e.bundle_a)
    y = bundle_to_involutive(e.bundle_b)
    m = make_bimodule(e.bundle_a.fiber_algebra, e.bundle_b.fiber_algebra, e.fibers[ident])
    transported = transport(m, x)
    phi = LinearMap.from_function(transported.space, y.space, lambda s: s)

    report = Report()
    report.check("extraction.phi_into_B1", ANCHOR_INCLUSIONS, phi.residual, CHECK_TOL)
    try:
        report.extend(psi_theta_check(m, x, y, phi), prefix="extraction")
    except NotAnInvolutiveIsomorphism as exc:
        report.extend(exc.report or Report(), prefix="extraction")
    return Extraction(m, x, y, phi, report)


def theorem52_check(
    a: ConcreteStarAlgebra,
    x: InvolutiveBimodule,
    b: ConcreteStarAlgebra,
    y: InvolutiveBimodule,
    m: Optional[ConcreteBimodule] = None,
    phi: Optional[LinearMap] = None,
    equivalence: Optional[EquivalenceBundle] = None,
) -> Report:
    """
    With (M, φ): transport, Ψ/Θ and C_M, concluding that A ⊂ C_X and B ⊂ C_Y
    are strongly Morita equivalent. Always: the hypothesis audit for the
    converse (fullness of X and Y, A′∩C_X). With a Z₂ equivalence bundle:
    extraction of M and Φ.
    """
    report = Report()
    report.check("inputs.algebra_a", ANCHOR_INCLUSIONS, equality_residual(a.space, x.algebra.space), a.tol)
    report.check("inputs.algebra_b", ANCHOR_INCLUSIONS, equality_residual(b.space, y.algebra.space), b.tol)
    report.extend(verify_involutive(x), prefix="X")
    report.extend(verify_involutive(y), prefix="Y")

    if m is not None and phi is not None:
        try:
            report.extend(psi_theta_check(m, x, y, phi), prefix="direction1")
            cm = build_C_M(m, x, y, phi)
        except NotAnInvolutiveIsomorphism as exc:
            report.extend(exc.report or Report(), prefix="direction1")
            report.add("direction1.strongly_morita_equivalent", ANCHOR_INCLUSIONS, False, message=str(exc))
        except (ClosureFailure, IllDefinedInvolution, LinkingError) as exc:
            report.add("direction1.strongly_morita_equivalent", ANCHOR_INCLUSIONS, False, message=str(exc))
        else:
            report.extend(cm.report, prefix="direction1.C_M")
            report.add("direction1.strongly_morita_equivalent", ANCHOR_INCLUSIONS, cm.report.passed)

    for name, v in (("X", x), ("Y", y)):
        full = is_left_full(v.base) and is_right_full(v.base)
        report.skip(f"direction2.{name}_full", ANCHOR_INCLUSIONS, message=f"{name} full with both inner products: {full}")
    try:
        lx = linking_and_bundle(x)
    except LinkingError as exc:
        report.skip("direction2.relative_commutant", ANCHOR_INCLUSIONS, message=f"no linking algebra: {exc}")
    else:
        commutant = relative_commutant(lx.corner_a, lx.cx)
        verdict = "satisfied" if commutant.dim == 1 else "not satisfied"
        report.skip(
            "direction2.relative_commutant",
            ANCHOR_INCLUSIONS,
            message=f"dim A'∩C_X = {commutant.dim}; irreducibility hypothesis {verdict}",
            residual=float(commutant.dim),
        )

    if equivalence is not None:
        report.extend(extract_from_equivalence_bundle(equivalence).report, prefix="direction2")
    return report
