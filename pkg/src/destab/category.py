"""Stabilization functors, their quasi-inverse, and law checkers."""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .algebra import DEFAULT_TOL, StarAlgebra, as_eps, full_matrix_algebra, kron, nullspace, same_span, scalars, span_basis, span_residual
from .destabilization import KAlgebra, apply_units, relative_commutant, theta, untensor
from .errors import DestabError, InvalidInputError, TheoremViolation
from .morphisms import NdMorphism
from .report import Report
from .units import MatrixUnitSystem, amplify_units

__all__ = [
    "NdMorphism",
    "KAlgMorphism",
    "stabilize_object",
    "stabilize_morphism",
    "destabilize_morphism",
    "naturality_check",
    "functor_law_report",
    "quasi_inverse_report",
    "lift_isomorphism",
    "conjugacy_test",
    "SuiteInstance",
    "equivalence_suite",
]


def _max_norm(stack) -> float:
    stack = np.asarray(stack)
    if stack.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(stack.reshape(len(stack), -1), axis=1)))


@dataclass(frozen=True, eq=False)
class KAlgMorphism:
    """A unital *-homomorphism ``phi: A -> B`` with ``phi(e_ij) = f_ij``."""

    source: KAlgebra
    target: KAlgebra
    phi: NdMorphism

    def __post_init__(self):
        if self.phi.source.N != self.source.N or self.phi.target.N != self.target.N:
            raise ValueError("underlying map does not match the K-algebras")
        if self.source.n != self.target.n:
            raise ValueError("K-algebras carry units of different sizes")

    def unit_residual(self) -> float:
        return _max_norm(self.phi(self.source.iota.flat) - self.target.iota.flat)

    def validate(self, tol=DEFAULT_TOL) -> Report:
        rep = self.phi.validate(tol)
        rep.name = "kalg_morphism"
        rep.residuals["unit_condition"] = self.unit_residual()
        return rep

    def check(self, tol=DEFAULT_TOL) -> "KAlgMorphism":
        rep = self.validate(tol)
        if not rep.passed:
            raise InvalidInputError(
                "not a morphism of K-algebras", residuals={k: rep.residuals[k] for k in rep.failures()}
            )
        return self


def stabilize_object(B: StarAlgebra, n: int) -> KAlgebra:
    """``(B (x) M_n, 1 (x) id)``; the commutant ``B (x) 1`` is planted."""
    return KAlgebra(kron(B, full_matrix_algebra(n)), amplify_units(n, B.N), planted=kron(B, scalars(n)))


def stabilize_morphism(phi: NdMorphism, n: int, source: KAlgebra | None = None,
                       target: KAlgebra | None = None) -> KAlgMorphism:
    """``phi (x) id`` between the stabilized objects."""
    source = stabilize_object(phi.source, n) if source is None else source
    target = stabilize_object(phi.target, n) if target is None else target
    Mn = full_matrix_algebra(n)
    images = np.einsum("rab,sij->rsaibj", phi.images, Mn.basis).reshape(
        -1, phi.target.N * n, phi.target.N * n
    )
    return KAlgMorphism(source, target, NdMorphism(source.A, target.A, images))


def destabilize_morphism(psi: KAlgMorphism, tol=DEFAULT_TOL) -> NdMorphism:
    """Restriction ``C(A, iota) -> C(B, zeta)``."""
    eps = as_eps(tol)
    psi.check(tol)
    CA = relative_commutant(psi.source, tol)
    CB = relative_commutant(psi.target, tol)
    images = psi.phi(CA.basis)
    escape = span_residual(CB.basis, images)
    if escape > 10 * eps:
        raise InvalidInputError("restriction leaves C(B, zeta)", residuals={"escape": escape})
    return NdMorphism(CA, CB, images)


def naturality_check(psi: KAlgMorphism, tol=DEFAULT_TOL) -> Report:
    """``theta_B o (C(psi) (x) id) = psi o theta_A`` on a basis of ``C(A, iota) (x) M_n``."""
    eps = as_eps(tol)
    cpsi = destabilize_morphism(psi, tol)
    n = psi.source.n
    cert_A = theta(psi.source, tol, C=cpsi.source)
    cert_B = theta(psi.target, tol, C=cpsi.target)
    Mn = full_matrix_algebra(n)
    amplified = np.einsum("rab,sij->rsaibj", cpsi.images, Mn.basis).reshape(
        -1, psi.target.N * n, psi.target.N * n
    )
    lhs = apply_units(amplified, psi.target.iota.e)
    rhs = psi.phi(cert_A.images)
    res = {"square": _max_norm(lhs - rhs), "theta_A": cert_A.worst, "theta_B": cert_B.worst}
    res.update({f"restriction_{k}": v for k, v in cpsi.residuals().items()})
    return Report("naturality", residuals=res, checks={"theta_A": cert_A.passed, "theta_B": cert_B.passed},
                  threshold=10 * eps, details={"dim_CA": cpsi.source.dim, "dim_CB": cpsi.target.dim})


def functor_law_report(phi: NdMorphism, chi: NdMorphism, n: int, tol=DEFAULT_TOL) -> Report:
    """``S(id) = id`` and ``S(chi o phi) = S(chi) o S(phi)`` for ``S = stabilize_morphism``."""
    eps = as_eps(tol)
    ident = stabilize_morphism(NdMorphism.identity(phi.source), n)
    res = {"identity": _max_norm(ident.phi.images - ident.source.A.basis)}
    Sphi = stabilize_morphism(phi, n)
    Schi = stabilize_morphism(chi, n, source=Sphi.target)
    composite = stabilize_morphism(chi.compose(phi), n, source=Sphi.source, target=Schi.target)
    res["composition"] = _max_norm(composite.phi.images - Schi.phi.compose(Sphi.phi).images)
    res["unit_condition"] = max(Sphi.unit_residual(), Schi.unit_residual())
    return Report("functor_laws", residuals=res, threshold=10 * eps)


def quasi_inverse_report(phi: NdMorphism, n: int, tol=DEFAULT_TOL) -> Report:
    """``C(phi (x) id)`` is ``phi`` once ``C(B (x) M_n, 1 (x) id) = B (x) 1`` is read off a slot."""
    eps = as_eps(tol)
    cpsi = destabilize_morphism(stabilize_morphism(phi, n), tol)
    src, tgt = untensor(cpsi.source.basis, n), untensor(cpsi.images, n)
    res = {
        "recovered": _max_norm(phi(src) - tgt),
        "source_span": same_span(span_basis(src, tol, shape=src.shape[1:]), phi.source.basis, tol)[1],
        "slot": _max_norm(cpsi.source.basis - np.einsum("rab,ij->raibj", src, np.eye(n)).reshape(cpsi.source.basis.shape)),
    }
    checks = {"dimension": cpsi.source.dim == phi.source.dim and cpsi.target.dim == phi.target.dim}
    return Report("quasi_inverse", residuals=res, checks=checks, threshold=10 * eps)


def lift_isomorphism(KA: KAlgebra, theta_iso: NdMorphism, tol=DEFAULT_TOL) -> tuple[KAlgebra, KAlgMorphism]:
    """``(B, theta o iota)`` and ``theta`` itself as the unique lift over it.

    A lift has the same underlying map by definition, and the unit condition
    then forces the target units, so the lift is unique.
    """
    theta_iso.check(tol)
    if not theta_iso.is_bijective(tol):
        raise InvalidInputError("map is not bijective", rank=theta_iso.rank(tol), dim=theta_iso.target.dim)
    if theta_iso.source.N != KA.N:
        raise ValueError("map does not start at the algebra of the K-algebra")
    zeta = MatrixUnitSystem(theta_iso(KA.iota.e))
    KB = KAlgebra(theta_iso.target, zeta)
    KB.check(tol)
    return KB, KAlgMorphism(KA, KB, theta_iso)


def conjugacy_test(iota1: MatrixUnitSystem, iota2: MatrixUnitSystem, A: StarAlgebra, tol=DEFAULT_TOL,
                   attempts: int = 5, seed: int = 0) -> np.ndarray | None:
    """Unitary ``u`` in ``A`` with ``u e_ij u* = f_ij``, or ``None``.

    Solves ``u e = f u`` for the unit generators inside ``A``; ``|u|`` then
    commutes with the ``e_ij`` so the polar part of an invertible solution is
    a witness.  Only inner automorphisms are searched.
    """
    eps = as_eps(tol)
    for name, sys in (("iota1", iota1), ("iota2", iota2)):
        KAlgebra(A, sys).check(tol)
    if iota1.n != iota2.n:
        return None
    e, f = iota1.generators(), iota2.generators()
    if len(e) == 0:
        return np.eye(A.N, dtype=complex)
    d = np.matmul(A.basis[:, None], e[None]) - np.matmul(f[None], A.basis[:, None])
    ker = nullspace(d.reshape(A.dim, -1).T, tol)
    if ker.shape[1] == 0:
        return None
    rng = np.random.default_rng(seed)
    for attempt in range(attempts):
        if attempt == 0 and ker.shape[1] == 1:
            c = ker[:, 0]
        else:
            c = ker @ (rng.standard_normal(ker.shape[1]) + 1j * rng.standard_normal(ker.shape[1]))
        u = A.element(c)
        w, V = np.linalg.eigh(u.conj().T @ u)
        if w[0] <= eps * w[-1]:
            continue
        unitary = u @ (V / np.sqrt(w)) @ V.conj().T
        if _max_norm(unitary @ iota1.flat @ unitary.conj().T - iota2.flat) <= 10 * eps:
            return unitary
    return None


@dataclass
class SuiteInstance:
    """One suite entry; ``kind`` is ``kalgebra``, ``morphism``, ``kmorphism``, ``bimodule`` or ``correspondence``.

    ``payload`` is a :class:`KAlgebra`, an :class:`NdMorphism` with the
    stabilization size ``n``, a :class:`KAlgMorphism`, a linking algebra with
    its units and a small bimodule for the roundtrip, or a correspondence
    with its two unit systems.
    """

    kind: str
    payload: Any = field(repr=False)
    label: str = ""
    n: int = 2


def _bimodule_reports(link, units, base=None, n: int = 2, tol=DEFAULT_TOL) -> list[Report]:
    from .bimodules import HilbertBimodule, bimodule_roundtrip_check, bimodule_theta, corner_identity_report, fullness

    _, corners = corner_identity_report(link, units, tol)
    cert = bimodule_theta(link, units, tol)
    before, after = fullness(HilbertBimodule(link), tol), fullness(cert.commutant, tol)
    transfer = Report("fullness_transfer", checks={k: before[k] == after[k] for k in before},
                      details={"X": before, "CX": after})
    out = [corners, cert, transfer]
    if base is not None:
        out.append(bimodule_roundtrip_check(base, n, tol))
    return out


def _run_instance(inst: SuiteInstance, tol) -> dict:
    from .correspondences import correspondence_roundtrip_destab, correspondence_roundtrip_stab

    reports: list[Report] = []
    try:
        if inst.kind == "kalgebra":
            cert = theta(inst.payload, tol)
            reports.append(cert)
            if inst.payload.planted is not None:
                eq, r = same_span(cert.C, inst.payload.planted, tol)
                reports.append(Report("planted", residuals={"span": r}, checks={"equal": eq}, threshold=10 * as_eps(tol)))
        elif inst.kind == "morphism":
            phi = inst.payload
            phi.check(tol)
            reports.append(functor_law_report(phi, NdMorphism.identity(phi.target), inst.n, tol))
            reports.append(quasi_inverse_report(phi, inst.n, tol))
            reports.append(naturality_check(stabilize_morphism(phi, inst.n), tol))
        elif inst.kind == "kmorphism":
            reports.append(naturality_check(inst.payload, tol))
        elif inst.kind == "bimodule":
            reports.extend(_bimodule_reports(*inst.payload, n=inst.n, tol=tol))
        elif inst.kind == "correspondence":
            X, iota, zeta = inst.payload
            reports.append(correspondence_roundtrip_destab(X, iota, zeta, tol))
            reports.append(correspondence_roundtrip_stab(X, inst.n, tol))
        else:
            raise ValueError(f"unknown instance kind {inst.kind!r}")
    except InvalidInputError as err:
        return {"label": inst.label, "kind": inst.kind, "status": "invalid_input", "worst": float("nan"),
                "message": str(err)}
    except (TheoremViolation, DestabError) as err:
        return {"label": inst.label, "kind": inst.kind, "status": "theorem_failure", "worst": float("inf"),
                "message": str(err)}
    worst = max((r.worst for r in reports), default=0.0)
    ok = all(r.passed for r in reports)
    failed = [f"{r.name}:{k}" for r in reports for k in r.failures()]
    return {"label": inst.label, "kind": inst.kind, "status": "pass" if ok else "theorem_failure",
            "worst": worst, "message": ", ".join(failed)}


def equivalence_suite(instances, tol=DEFAULT_TOL, jobs: int = 1) -> Report:
    """Run every instance; the aggregate passes iff no instance is a theorem failure.

    Invalid inputs (such as a morphism that breaks the unit condition) are
    counted separately and do not fail the suite.
    """
    instances = list(instances)
    if jobs > 1 and len(instances) > 1:
        with ProcessPoolExecutor(max_workers=min(jobs, os.cpu_count() or 1)) as pool:
            rows = list(pool.map(_run_instance, instances, [tol] * len(instances)))
    else:
        rows = [_run_instance(inst, tol) for inst in instances]
    counts = {s: sum(r["status"] == s for r in rows) for s in ("pass", "invalid_input", "theorem_failure")}
    worst_by_kind: dict[str, float] = {}
    for r in rows:
        if r["status"] == "pass":
            worst_by_kind[r["kind"]] = max(worst_by_kind.get(r["kind"], 0.0), r["worst"])
    return Report(
        "equivalence_suite",
        residuals=worst_by_kind,
        checks={"no_theorem_failures": counts["theorem_failure"] == 0},
        threshold=10 * as_eps(tol),
        details={"counts": counts, "instances": rows},
    )
