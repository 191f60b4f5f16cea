"""Factor an algebra with embedded matrix units as ``C(A, iota) (x) M_n``.

With units ``e_ij`` in ``A`` the relative commutant is
``C = {a in A : a e_ij = e_ij a}`` and ``theta(c (x) k) = c iota(k)`` is a
*-isomorphism ``C (x) M_n -> A``.  The corner maps ``tau``, ``psi``,
``sigma`` and the corner isomorphism ``phi`` give an explicit inverse,
``theta^{-1} = (sigma (x) id) o phi``.

Elements of ``C (x) M_n`` are concrete ``(N n) x (N n)`` matrices in the
ordering of ``numpy.kron``, so ``c (x) k`` is ``np.kron(c, k)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    StarAlgebra,
    as_eps,
    commutant_in_full,
    dagger,
    full_matrix_algebra,
    intersect,
    kron,
    membership,
    nullspace,
    operator_norm,
    same_span,
    span_basis,
    span_residual,
)
from .errors import InvalidInputError, TheoremViolation
from .morphisms import NdMorphism
from .report import Report
from .units import MatrixUnitSystem, standard_unit


@dataclass(frozen=True, eq=False)
class KAlgebra:
    """An algebra ``A`` with a unit system ``iota`` inside it.

    ``planted`` optionally carries a commutant known from construction,
    used as an oracle by the fuzz suite.
    """

    A: StarAlgebra
    iota: MatrixUnitSystem
    planted: StarAlgebra | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.A.N != self.iota.N:
            raise ValueError(f"algebra in M_{self.A.N} but units in M_{self.iota.N}")

    @property
    def n(self) -> int:
        return self.iota.n

    @property
    def N(self) -> int:
        return self.A.N

    def validate(self, tol=DEFAULT_TOL) -> Report:
        eps = as_eps(tol)
        rep = self.iota.validate(tol)
        units = self.iota.flat
        rep.name = "kalgebra"
        rep.residuals["units_in_A"] = span_residual(self.A.basis, units) / (1 + np.sqrt(self.N))
        rep.residuals["identity_in_A"] = membership(self.A, np.eye(self.N), tol)[1] / (1 + np.sqrt(self.N))
        rep.threshold = 10 * eps
        return rep

    def check(self, tol=DEFAULT_TOL) -> "KAlgebra":
        rep = self.validate(tol)
        if not rep.passed:
            raise InvalidInputError(
                "invalid K-algebra", residuals={k: rep.residuals.get(k, np.inf) for k in rep.failures()}
            )
        return self


def relative_commutant(KA: KAlgebra, tol=DEFAULT_TOL, check: bool = True) -> StarAlgebra:
    """``{a in A : a e_ij = e_ij a for all i, j}``.

    Solved in the coordinates of ``A`` as the joint kernel of the commutator
    maps with ``e_{i,i+1}`` and ``e_{i+1,i}``, which generate the image of
    ``M_n``.
    """
    if check:
        KA.check(tol)
    A = KA.A
    gens = KA.iota.generators()
    if len(gens) == 0:
        return A
    comm = np.matmul(A.basis[:, None], gens[None]) - np.matmul(gens[None], A.basis[:, None])
    mat = comm.reshape(A.dim, -1).T
    ker = nullspace(mat, tol)
    basis = (ker.T @ A.flat).reshape(-1, A.N, A.N)
    return StarAlgebra(A.N, basis)


def corner_decomposition(KA: KAlgebra, tol=DEFAULT_TOL) -> list[list[np.ndarray]]:
    """Orthonormal bases of the corners ``A_ij = e_ii A e_jj``."""
    KA.check(tol)
    A, e, n = KA.A, KA.iota.e, KA.n
    grid = [
        [span_basis(e[i, i] @ A.basis @ e[j, j], tol, shape=(A.N, A.N)) for j in range(n)]
        for i in range(n)
    ]
    total = sum(len(g) for row in grid for g in row)
    union = np.concatenate([g for row in grid for g in row])
    deficit = span_residual(union, A.basis)
    if total != A.dim or deficit > 10 * as_eps(tol):
        raise InvalidInputError(
            "corners do not decompose A", residuals={"span_deficit": deficit}, corner_dims=total, dim=A.dim
        )
    return grid


def _require(cond: bool, message: str, **residuals):
    if not cond:
        raise InvalidInputError(message, residuals=residuals)


def in_corner(KA: KAlgebra, i: int, j: int, a, tol=DEFAULT_TOL) -> float:
    e = KA.iota.e
    a = np.asarray(a, dtype=complex)
    r = np.linalg.norm(a - e[i, i] @ a @ e[j, j]) + membership(KA.A, a, tol)[1]
    return float(r)


def tau(KA: KAlgebra, i: int, j: int, a, tol=DEFAULT_TOL) -> np.ndarray:
    """Isometry ``A_ij -> A_11``, ``a -> e_1i a e_j1`` (zero-based indices)."""
    r = in_corner(KA, i, j, a, tol)
    _require(r <= as_eps(tol) * (1 + np.linalg.norm(a)), f"element not in corner A_{i}{j}", corner=r)
    e = KA.iota.e
    return e[0, i] @ a @ e[j, 0]


def tau_inverse(KA: KAlgebra, i: int, j: int, d, tol=DEFAULT_TOL) -> np.ndarray:
    """``A_11 -> A_ij``, ``d -> e_i1 d e_1j``."""
    r = in_corner(KA, 0, 0, d, tol)
    _require(r <= as_eps(tol) * (1 + np.linalg.norm(d)), "element not in corner A_00", corner=r)
    e = KA.iota.e
    return e[i, 0] @ d @ e[0, j]


def commutator_residual(units: MatrixUnitSystem, a) -> float:
    a = np.asarray(a, dtype=complex)
    d = np.matmul(units.flat, a) - np.matmul(a, units.flat)
    return float(np.max(np.linalg.norm(d.reshape(len(d), -1), axis=1)))


def psi(KA: KAlgebra, a, tol=DEFAULT_TOL) -> np.ndarray:
    """``C(A, iota) -> A_11``, ``a -> a e_11``."""
    a = np.asarray(a, dtype=complex)
    r = commutator_residual(KA.iota, a) + membership(KA.A, a, tol)[1]
    _require(r <= 10 * as_eps(tol) * (1 + np.linalg.norm(a)), "element not in the relative commutant", commutant=r)
    return a @ KA.iota.e[0, 0]


def sigma(KA: KAlgebra, d, tol=DEFAULT_TOL) -> np.ndarray:
    """``A_11 -> C(A, iota)``, ``d -> sum_i e_i1 d e_1i``."""
    r = in_corner(KA, 0, 0, d, tol)
    _require(r <= as_eps(tol) * (1 + np.linalg.norm(d)), "element not in corner A_00", corner=r)
    e = KA.iota.e
    return np.einsum("iab,bc,icd->ad", e[:, 0], np.asarray(d, dtype=complex), e[0, :])


def corner_isomorphism(KA: KAlgebra, a) -> np.ndarray:
    """``A -> A_11 (x) M_n``, ``sum a_ij -> sum tau_ij(a_ij) (x) u_ij``; accepts stacks."""
    e, n, N = KA.iota.e, KA.n, KA.N
    a = np.asarray(a, dtype=complex)
    # tau_ij(e_ii a e_jj) = e_1i a e_j1
    blocks = np.einsum("iab,...bc,jcd->...ijad", e[0, :], a, e[:, 0], optimize=True)
    lead = a.shape[:-2]
    return np.moveaxis(blocks, (-4, -3), (-3, -1)).reshape(lead + (N * n, N * n))


def apply_units(x, e) -> np.ndarray:
    """``sum_ij x_ij e_ij`` where ``x = sum_ij x_ij (x) u_ij`` is rectangular; accepts stacks.

    ``e`` is an ``n x n`` grid of square matrices acting on the right.
    """
    e = np.asarray(e)
    n = e.shape[0]
    x = np.asarray(x, dtype=complex)
    lead = x.shape[:-2]
    blocks = x.reshape(lead + (x.shape[-2] // n, n, x.shape[-1] // n, n))
    return np.einsum("...aibj,ijbc->...ac", blocks, e, optimize=True)


def theta_map(KA: KAlgebra, x) -> np.ndarray:
    """``theta`` on concrete elements of ``C (x) M_n``: ``sum_ij x_ij e_ij``; accepts stacks."""
    return apply_units(x, KA.iota.e)


def theta_inverse(KA: KAlgebra, a) -> np.ndarray:
    """``(sigma (x) id) o phi``: component at ``u_ij`` is ``sum_k e_ki a e_jk``; accepts stacks."""
    e, n, N = KA.iota.e, KA.n, KA.N
    a = np.asarray(a, dtype=complex)
    comp = np.einsum("kiab,...bc,jkcd->...ijad", e, a, e, optimize=True)
    lead = a.shape[:-2]
    return np.moveaxis(comp, (-4, -3), (-3, -1)).reshape(lead + (N * n, N * n))


@dataclass
class FactorizationCertificate(Report):
    """Evidence that ``theta: C (x) M_n -> A`` is a *-isomorphism."""

    C: StarAlgebra | None = field(default=None, repr=False)
    source: StarAlgebra | None = field(default=None, repr=False)
    images: np.ndarray | None = field(default=None, repr=False)
    condition: float = float("nan")

    def morphism(self) -> NdMorphism:
        """``theta`` as a morphism ``kron(C, M_n) -> A``."""
        return NdMorphism(self.source, self.details["target"], self.images)

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["details"].pop("target", None)
        d["condition"] = self.condition
        return d


def theta(KA: KAlgebra, tol=DEFAULT_TOL, C: StarAlgebra | None = None, seed: int = 0) -> FactorizationCertificate:
    """Certificate for ``theta(c (x) u_ij) = c e_ij``.

    Bijectivity is a rank computation in the coordinates of ``A``.
    Multiplicativity is tested on every basis element of ``C (x) M_n``
    against the unit generators of ``1 (x) M_n`` and a few seeded random
    elements; the defect is bilinear, so random partners detect any
    nonzero defect with probability one.
    """
    eps = as_eps(tol)
    KA.check(tol)
    if C is None:
        C = relative_commutant(KA, tol, check=False)
    A, n, N = KA.A, KA.n, KA.N
    S = kron(C, full_matrix_algebra(n))
    images = theta_map(KA, S.basis)

    res = {}
    checks = {}
    checks["dimension_law"] = A.dim == n * n * C.dim
    coords = A.coords(images)
    s = np.linalg.svd(coords, compute_uv=False) if coords.size else np.zeros(0)
    rank = int(np.sum(s > eps * s[0])) if len(s) else 0
    checks["full_rank"] = rank == A.dim
    condition = float(s[0] / s[-1]) if len(s) and s[-1] > 0 else float("inf")
    res["into_A"] = span_residual(A.basis, images)

    rng = np.random.default_rng(seed)
    partners = [np.kron(np.eye(N), standard_unit(n, i, i + 1)) for i in range(n - 1)]
    partners += [np.kron(np.eye(N), standard_unit(n, i + 1, i)) for i in range(n - 1)]
    partners += [S.random_element(rng) for _ in range(3)]
    mult = 0.0
    for y in partners:
        d = theta_map(KA, np.matmul(S.basis, y)) - np.matmul(images, theta_map(KA, y))
        mult = max(mult, float(np.max(np.linalg.norm(d.reshape(len(d), -1), axis=1))))
    res["multiplicative"] = mult
    d = theta_map(KA, dagger(S.basis)) - dagger(images)
    res["adjoint"] = float(np.max(np.linalg.norm(d.reshape(len(d), -1), axis=1)))
    res["unital"] = float(np.linalg.norm(theta_map(KA, np.eye(N * n)) - np.eye(N)))
    res["commutant"] = max((commutator_residual(KA.iota, c) for c in C.basis), default=0.0)

    back = theta_map(KA, theta_inverse(KA, A.basis)) - A.basis
    res["theta_theta_inv"] = float(np.max(np.linalg.norm(back.reshape(A.dim, -1), axis=1)))
    fwd = theta_inverse(KA, images) - S.basis
    res["theta_inv_theta"] = float(np.max(np.linalg.norm(fwd.reshape(S.dim, -1), axis=1)))

    return FactorizationCertificate(
        "theta",
        residuals=res,
        checks=checks,
        threshold=10 * eps,
        details={"dim_A": A.dim, "dim_C": C.dim, "n": n, "rank": rank, "target": A},
        C=C,
        source=S,
        images=images,
        condition=condition,
    )


def destabilize(KA: KAlgebra, tol=DEFAULT_TOL) -> tuple[StarAlgebra, FactorizationCertificate]:
    """Relative commutant plus a passing certificate, or raise."""
    cert = theta(KA, tol)
    if not cert.checks["dimension_law"]:
        raise InvalidInputError(
            "dim A != n^2 dim C", dim_A=KA.A.dim, dim_C=cert.C.dim, n=KA.n
        )
    if not cert.passed:
        raise TheoremViolation("theta certificate failed", residuals=cert.residuals)
    return cert.C, cert


def norm_multiplicativity_check(KA: KAlgebra, samples: int = 100, seed: int = 0, tol=DEFAULT_TOL) -> float:
    """Largest relative error of ``|a iota(k)| = |a| |k|`` over random ``a in C``, ``k in M_n``."""
    C = relative_commutant(KA, tol)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        a = C.random_element(rng)
        k = rng.standard_normal((KA.n, KA.n)) + 1j * rng.standard_normal((KA.n, KA.n))
        lhs = operator_norm(a @ KA.iota.embed(k))
        rhs = operator_norm(a) * operator_norm(k)
        worst = max(worst, abs(lhs - rhs) / rhs)
    return worst


def idealizer_report(KA: KAlgebra, tol=DEFAULT_TOL) -> Report:
    """Everything in ``A`` commuting with the units is exactly ``C``, and it idealizes ``C``.

    The commuting set is computed independently of :func:`relative_commutant`,
    as the commutant of the units in all of ``M_N`` intersected with ``A``.
    """
    eps = as_eps(tol)
    C = relative_commutant(KA, tol)
    D = intersect(commutant_in_full(KA.iota.generators(), KA.N, tol), KA.A, tol)
    equal, res = same_span(D, C, tol)
    left = right = 0.0
    for d in D.basis:
        left = max(left, span_residual(C.basis, np.matmul(d, C.basis)))
        right = max(right, span_residual(C.basis, np.matmul(C.basis, d)))
    return Report(
        "idealizer",
        residuals={"span": res, "left": left, "right": right},
        checks={"same_dimension": D.dim == C.dim and equal},
        threshold=10 * eps,
    )


def idealizer_check(KA: KAlgebra, tol=DEFAULT_TOL) -> bool:
    return idealizer_report(KA, tol).passed


def untensor(x, n: int) -> np.ndarray:
    """Slot extraction ``b (x) 1_n -> b`` (reads the ``u_11`` block); accepts stacks."""
    x = np.asarray(x)
    r, c = x.shape[-2] // n, x.shape[-1] // n
    return x.reshape(x.shape[:-2] + (r, n, c, n))[..., :, 0, :, 0]
