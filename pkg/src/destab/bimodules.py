"""Hilbert bimodules stored as corners of their linking algebras.

A linking algebra ``L`` lives in ``M_{p+q}`` with the projection
``P = diag(1_p, 0)`` inside it; its corners are ``A = PLP`` (in ``M_p``),
``B = QLQ`` (in ``M_q``) and ``X = PLQ`` (in ``C^{p x q}``).  The right and
left inner products are ``x* y`` and ``x y*``.  The relative commutant of a
bimodule is obtained by destabilizing the linking algebra with the diagonal
unit system ``g_ij = diag(e_ij, f_ij)`` and cutting corners again.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    StarAlgebra,
    as_eps,
    dagger,
    full_matrix_algebra,
    kron,
    membership,
    nullspace,
    orthonormalize,
    same_span,
    span_basis,
    span_residual,
)
from .destabilization import KAlgebra, apply_units, relative_commutant, untensor
from .errors import InvalidInputError, TheoremViolation
from .report import Report
from .units import MatrixUnitSystem, amplify_units


def _corner(basis, rows: slice, cols: slice, tol):
    blocks = np.asarray(basis)[:, rows, cols]
    shape = blocks.shape[1:]
    if not len(blocks) or not np.any(blocks):
        return np.zeros((0,) + shape, dtype=complex)
    return span_basis(blocks, tol, shape=shape)


def _max_norm(stack) -> float:
    stack = np.asarray(stack)
    if stack.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(stack.reshape(len(stack), -1), axis=1)))


@dataclass(frozen=True, eq=False)
class LinkingAlgebraPresentation:
    L: StarAlgebra
    p: int
    q: int

    def __post_init__(self):
        if self.L.N != self.p + self.q:
            raise ValueError(f"linking algebra in M_{self.L.N}, blocks {self.p}+{self.q}")

    def __repr__(self):
        return f"LinkingAlgebraPresentation(p={self.p}, q={self.q}, dim={self.L.dim})"

    @property
    def p_proj(self) -> np.ndarray:
        P = np.zeros((self.L.N, self.L.N), dtype=complex)
        P[: self.p, : self.p] = np.eye(self.p)
        return P

    @cached_property
    def A(self) -> StarAlgebra:
        return StarAlgebra(self.p, _corner(self.L.basis, slice(0, self.p), slice(0, self.p), DEFAULT_TOL))

    @cached_property
    def B(self) -> StarAlgebra:
        p = self.p
        return StarAlgebra(self.q, _corner(self.L.basis, slice(p, None), slice(p, None), DEFAULT_TOL))

    @cached_property
    def X(self) -> np.ndarray:
        """Orthonormal basis of the upper right corner, shape ``(d, p, q)``."""
        p = self.p
        return _corner(self.L.basis, slice(0, p), slice(p, None), DEFAULT_TOL)

    def validate(self, tol=DEFAULT_TOL) -> Report:
        eps = as_eps(tol)
        P = self.p_proj
        Q = np.eye(self.L.N) - P
        b = self.L.basis
        cuts = np.concatenate([P @ b @ P, P @ b @ Q, Q @ b @ P, Q @ b @ Q])
        return Report(
            "linking",
            residuals={
                "p_in_L": membership(self.L, P, tol)[1],
                "corner_invariance": span_residual(b, cuts),
            },
            threshold=10 * eps,
            details={"p": self.p, "q": self.q, "dim": self.L.dim},
        )

    def check(self, tol=DEFAULT_TOL) -> "LinkingAlgebraPresentation":
        rep = self.validate(tol)
        if not rep.passed:
            raise InvalidInputError("invalid linking algebra", residuals={k: rep.residuals[k] for k in rep.failures()})
        return self


@dataclass(frozen=True, eq=False)
class HilbertBimodule:
    """``A``-``B`` Hilbert bimodule viewed as the off-diagonal corner of ``linking``."""

    linking: LinkingAlgebraPresentation

    @property
    def A(self) -> StarAlgebra:
        return self.linking.A

    @property
    def B(self) -> StarAlgebra:
        return self.linking.B

    @property
    def X(self) -> np.ndarray:
        return self.linking.X

    @property
    def dim(self) -> int:
        return len(self.X)

    def __repr__(self):
        return f"HilbertBimodule(p={self.linking.p}, q={self.linking.q}, dim={self.dim})"

    @staticmethod
    def right_inner(x, y):
        return dagger(x) @ y

    @staticmethod
    def left_inner(x, y):
        return x @ dagger(y)

    def validate(self, tol=DEFAULT_TOL, seed: int = 0) -> Report:
        return _bimodule_laws(self.A, self.B, self.X, tol, seed)


def _bimodule_laws(A: StarAlgebra, B: StarAlgebra, X, tol, seed=0) -> Report:
    eps = as_eps(tol)
    X = np.asarray(X)
    res = {"right_inner_in_B": 0.0, "left_inner_in_A": 0.0, "left_action": 0.0, "right_action": 0.0}
    if len(X):
        xh = dagger(X)
        res["right_inner_in_B"] = span_residual(B.basis, np.einsum("rab,sbc->rsac", xh, X).reshape(-1, B.N, B.N))
        res["left_inner_in_A"] = span_residual(A.basis, np.einsum("rab,sbc->rsac", X, xh).reshape(-1, A.N, A.N))
        res["left_action"] = span_residual(X, np.einsum("rab,sbc->rsac", A.basis, X).reshape(-1, A.N, B.N))
        res["right_action"] = span_residual(X, np.einsum("rab,sbc->rsac", X, B.basis).reshape(-1, A.N, B.N))
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(3):
            x, y, z = (np.tensordot(rng.standard_normal(len(X)), X, axes=(0, 0)) for _ in range(3))
            worst = max(worst, float(np.linalg.norm((x @ y.conj().T) @ z - x @ (y.conj().T @ z))))
        res["compatibility"] = worst
    return Report("bimodule", residuals=res, threshold=10 * eps)


def build_linking(A: StarAlgebra, B: StarAlgebra, X_basis, tol=DEFAULT_TOL, seed: int = 0) -> LinkingAlgebraPresentation:
    """Assemble ``L(X) = [[A, X], [X*, B]]`` after checking the module laws."""
    eps = as_eps(tol)
    p, q = A.N, B.N
    X = np.asarray(X_basis, dtype=complex)
    if X.ndim != 3 and X.size == 0:
        X = np.zeros((0, p, q), dtype=complex)
    if X.shape[1:] != (p, q):
        raise ValueError(f"bimodule elements must be {p}x{q}, got {X.shape[1:]}")
    X = span_basis(X, tol, shape=(p, q)) if len(X) and np.any(X) else np.zeros((0, p, q), dtype=complex)
    laws = _bimodule_laws(A, B, X, tol, seed)
    if not laws.passed:
        raise InvalidInputError(
            "bimodule containment failed", residuals={k: laws.residuals[k] for k in laws.failures()}
        )
    N = p + q
    blocks = []
    for a in A.basis:
        m = np.zeros((N, N), dtype=complex)
        m[:p, :p] = a
        blocks.append(m)
    for b in B.basis:
        m = np.zeros((N, N), dtype=complex)
        m[p:, p:] = b
        blocks.append(m)
    for x in X:
        m = np.zeros((N, N), dtype=complex)
        m[:p, p:] = x
        blocks.append(m)
        m = np.zeros((N, N), dtype=complex)
        m[p:, :p] = x.conj().T
        blocks.append(m)
    L = StarAlgebra(N, orthonormalize(np.stack(blocks), tol))
    growth = L.random_closure_residual(np.random.default_rng(seed))
    if growth > 10 * eps * np.sqrt(N):
        raise InvalidInputError("closure grows the linking span", residuals={"closure": growth})
    return LinkingAlgebraPresentation(L, p, q)


@dataclass(frozen=True, eq=False)
class BimoduleUnits:
    """Unit systems on both corners; ``omega`` is ``g_ij = diag(e_ij, f_ij)``."""

    iota: MatrixUnitSystem
    zeta: MatrixUnitSystem

    def __post_init__(self):
        if self.iota.n != self.zeta.n:
            raise ValueError("both corners need units of the same size")

    @property
    def n(self) -> int:
        return self.iota.n

    @cached_property
    def omega(self) -> MatrixUnitSystem:
        n, p, q = self.n, self.iota.N, self.zeta.N
        g = np.zeros((n, n, p + q, p + q), dtype=complex)
        g[:, :, :p, :p] = self.iota.e
        g[:, :, p:, p:] = self.zeta.e
        return MatrixUnitSystem(g)


def _check_units(link: LinkingAlgebraPresentation, units: BimoduleUnits):
    if units.iota.N != link.p or units.zeta.N != link.q:
        raise ValueError("unit systems do not match the linking blocks")


def _intertwiner_corner(X, units: BimoduleUnits, tol):
    """``{x in span X : e_ij x = x f_ij}`` solved in the coordinates of ``X``."""
    X = np.asarray(X)
    p, q = units.iota.N, units.zeta.N
    if not len(X):
        return np.zeros((0, p, q), dtype=complex)
    e, f = units.iota.generators(), units.zeta.generators()
    d = np.matmul(e[None], X[:, None]) - np.matmul(X[:, None], f[None])
    ker = nullspace(d.reshape(len(X), -1).T, tol)
    if ker.shape[1] == 0:
        return np.zeros((0, p, q), dtype=complex)
    return (ker.T @ X.reshape(len(X), -1)).reshape(-1, p, q)


def corner_identity_report(link: LinkingAlgebraPresentation, units: BimoduleUnits, tol=DEFAULT_TOL):
    """Relative commutant of the link and the checks that its corners are the corner commutants.

    Returns ``(C(L, omega), report)``.
    """
    eps = as_eps(tol)
    _check_units(link, units)
    KL = KAlgebra(link.L, units.omega)
    KL.check(tol)
    CL = relative_commutant(KL, tol, check=False)
    p = link.p
    P = link.p_proj
    res = {"p_in_CL": membership(CL, P, tol)[1]}
    CA = StarAlgebra(p, _corner(CL.basis, slice(0, p), slice(0, p), tol))
    CB = StarAlgebra(link.q, _corner(CL.basis, slice(p, None), slice(p, None), tol))
    CX = _corner(CL.basis, slice(0, p), slice(p, None), tol)
    direct_A = relative_commutant(KAlgebra(link.A, units.iota), tol)
    direct_B = relative_commutant(KAlgebra(link.B, units.zeta), tol)
    direct_X = _intertwiner_corner(link.X, units, tol)
    direct_X = span_basis(direct_X, tol, shape=CX.shape[1:]) if len(direct_X) else direct_X
    checks = {}
    for name, cut, direct in (("A", CA.basis, direct_A.basis), ("B", CB.basis, direct_B.basis), ("X", CX, direct_X)):
        eq, r = same_span(cut, direct, tol)
        res[f"corner_{name}"] = r
        checks[f"dim_{name}"] = len(cut) == len(direct)
    return CL, Report("corner_identity", residuals=res, checks=checks, threshold=10 * eps,
                      details={"dim_CA": CA.dim, "dim_CB": CB.dim, "dim_CX": len(CX)})


def bimodule_relative_commutant(link: LinkingAlgebraPresentation, units: BimoduleUnits, tol=DEFAULT_TOL) -> HilbertBimodule:
    """``C(X, iota, zeta)`` as the upper right corner of ``C(L, omega)``."""
    CL, rep = corner_identity_report(link, units, tol)
    if rep.residuals["p_in_CL"] > rep.threshold:
        raise InvalidInputError("projection is not in C(L, omega)", residuals={"p_in_CL": rep.residuals["p_in_CL"]})
    if not rep.passed:
        raise TheoremViolation("corners of C(L, omega) are not the corner commutants", residuals=rep.residuals)
    return HilbertBimodule(LinkingAlgebraPresentation(CL, link.p, link.q))


@dataclass
class BimoduleThetaCertificate(Report):
    images: np.ndarray | None = field(default=None, repr=False)
    commutant: HilbertBimodule | None = field(default=None, repr=False)


def bimodule_theta(link: LinkingAlgebraPresentation, units: BimoduleUnits, tol=DEFAULT_TOL, seed: int = 0) -> BimoduleThetaCertificate:
    """``C(X) (x) M_n -> X``, ``x (x) u_ij -> x f_ij``, with its certificate.

    Checks bijectivity, agreement with the upper right corner of the link's
    ``theta``, and compatibility with the actions (through ``theta`` of the
    corner algebras) and with both inner products.
    """
    eps = as_eps(tol)
    HC = bimodule_relative_commutant(link, units, tol)
    n, p, q = units.n, link.p, link.q
    CX = HC.X
    Mn = full_matrix_algebra(n)
    src = np.einsum("rab,sij->rsaibj", CX, Mn.basis).reshape(-1, p * n, q * n)
    images = apply_units(src, units.zeta.e)
    res, checks = {}, {}
    checks["dimension_law"] = len(src) == len(link.X)
    if len(images):
        coords = np.tensordot(images.reshape(len(images), -1), link.X.reshape(len(link.X), -1).conj(), axes=(1, 1))
        s = np.linalg.svd(coords, compute_uv=False)
        checks["full_rank"] = int(np.sum(s > eps * s[0])) == len(link.X)
        res["into_X"] = span_residual(link.X, images)
        # the same map read off the link's theta
        N = p + q
        lifted = np.zeros((len(CX), N, N), dtype=complex)
        lifted[:, :p, p:] = CX
        big = np.einsum("rab,sij->rsaibj", lifted, Mn.basis).reshape(-1, N * n, N * n)
        link_images = apply_units(big, units.omega.e)
        res["link_corner"] = _max_norm(link_images[:, :p, p:] - images)
        rng = np.random.default_rng(seed)
        SA = kron(HC.A, Mn)
        SB = kron(HC.B, Mn)
        y = np.tensordot(rng.standard_normal(len(src)) + 1j * rng.standard_normal(len(src)), src, axes=(0, 0))
        ty = apply_units(y, units.zeta.e)
        left = apply_units(np.matmul(SA.basis, y), units.zeta.e) - np.matmul(apply_units(SA.basis, units.iota.e), ty)
        res["left_action"] = _max_norm(left)
        b = SB.random_element(rng)
        right = apply_units(np.matmul(src, b), units.zeta.e) - np.matmul(images, apply_units(b, units.zeta.e))
        res["right_action"] = _max_norm(right)
        inner = apply_units(np.matmul(dagger(src), y), units.zeta.e) - np.matmul(dagger(images), ty)
        res["right_inner"] = _max_norm(inner)
        linner = apply_units(np.matmul(src, dagger(y)), units.iota.e) - np.matmul(images, dagger(ty))
        res["left_inner"] = _max_norm(linner)
    else:
        checks["full_rank"] = len(link.X) == 0
    return BimoduleThetaCertificate(
        "bimodule_theta", residuals=res, checks=checks, threshold=10 * eps,
        details={"dim_CX": len(CX), "dim_X": len(link.X), "n": n}, images=images, commutant=HC,
    )


def _span_dims(products, target: StarAlgebra, tol) -> tuple[bool, float]:
    if not len(products) or not np.any(products):
        return False, 0.0
    span = span_basis(products, tol, shape=products.shape[1:])
    return same_span(span, target.basis, tol)


def fullness(HB: HilbertBimodule, tol=DEFAULT_TOL) -> dict[str, bool]:
    """``right_full``: span of ``x* y`` is ``B``; ``left_full``: span of ``x y*`` is ``A``."""
    X = HB.X
    if not len(X):
        return {"right_full": False, "left_full": False}
    right = np.einsum("rab,sbc->rsac", dagger(X), X).reshape(-1, HB.B.N, HB.B.N)
    left = np.einsum("rab,sbc->rsac", X, dagger(X)).reshape(-1, HB.A.N, HB.A.N)
    return {"right_full": _span_dims(right, HB.B, tol)[0], "left_full": _span_dims(left, HB.A, tol)[0]}


def external_tensor_bimodule(HB: HilbertBimodule | LinkingAlgebraPresentation, n: int):
    """Link of ``X (x) M_n`` as ``L(X) (x) M_n`` with the amplified unit systems.

    In ``numpy.kron`` ordering ``diag(1_p, 0) (x) 1_n = diag(1_{pn}, 0)``, so
    the block structure needs no reshuffling.
    """
    link = HB.linking if isinstance(HB, HilbertBimodule) else HB
    big = LinkingAlgebraPresentation(kron(link.L, full_matrix_algebra(n)), link.p * n, link.q * n)
    units = BimoduleUnits(amplify_units(n, link.p), amplify_units(n, link.q))
    return big, units


def bimodule_roundtrip_check(HB: HilbertBimodule | LinkingAlgebraPresentation, n: int, tol=DEFAULT_TOL) -> Report:
    """``C(Y (x) M_n, 1 (x) id, 1 (x) id)`` is isomorphic to ``Y`` via ``y (x) 1 -> y``.

    The isomorphism reads off the ``u_11`` slot; it is checked to be a
    bijection onto ``Y`` that intertwines both actions and both inner
    products, with the corner algebras identified the same way.
    """
    eps = as_eps(tol)
    HB = HB if isinstance(HB, HilbertBimodule) else HilbertBimodule(HB)
    big, units = external_tensor_bimodule(HB, n)
    HC = bimodule_relative_commutant(big, units, tol)
    X, CX = HB.X, HC.X
    EA, EB, EX = untensor(HC.A.basis, n), untensor(HC.B.basis, n), untensor(CX, n)
    res, checks = {}, {}
    checks["dim_X"] = len(CX) == len(X)
    checks["dim_A"] = HC.A.dim == HB.A.dim
    checks["dim_B"] = HC.B.dim == HB.B.dim
    eye = np.eye(n)
    res["slot_injective_X"] = _max_norm(CX - np.einsum("rab,ij->raibj", EX, eye).reshape(CX.shape))
    res["slot_injective_A"] = _max_norm(HC.A.basis - np.einsum("rab,ij->raibj", EA, eye).reshape(HC.A.basis.shape))
    res["slot_injective_B"] = _max_norm(HC.B.basis - np.einsum("rab,ij->raibj", EB, eye).reshape(HC.B.basis.shape))
    for name, img, tgt in (("X", EX, X), ("A", EA, HB.A.basis), ("B", EB, HB.B.basis)):
        if len(img):
            res[f"onto_{name}"] = max(span_residual(tgt, img), span_residual(span_basis(img, tol), tgt))
    if len(CX):
        res["left_action"] = _max_norm(
            untensor(np.einsum("rab,sbc->rsac", HC.A.basis, CX), n) - np.einsum("rab,sbc->rsac", EA, EX)
        )
        res["right_action"] = _max_norm(
            untensor(np.einsum("rab,sbc->rsac", CX, HC.B.basis), n) - np.einsum("rab,sbc->rsac", EX, EB)
        )
        res["right_inner"] = _max_norm(
            untensor(np.einsum("rab,sbc->rsac", dagger(CX), CX), n) - np.einsum("rab,sbc->rsac", dagger(EX), EX)
        )
        res["left_inner"] = _max_norm(
            untensor(np.einsum("rab,sbc->rsac", CX, dagger(CX)), n) - np.einsum("rab,sbc->rsac", EX, dagger(EX))
        )
    return Report("bimodule_roundtrip", residuals=res, checks=checks, threshold=10 * eps,
                  details={"dim_X": len(X), "n": n})
