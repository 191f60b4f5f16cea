"""Nondegenerate correspondences realized as spaces of rectangular matrices.

An ``A``-``B`` correspondence is a subspace ``X`` of ``C^{m x q}`` closed under
right multiplication by ``B`` (in ``M_q``), with ``<x, y> = x* y`` and a left
action ``phi(a)`` by ``m x m`` matrices.  The columns of ``X`` are required to
span ``C^m``, so an operator on ``X`` is determined by its ambient matrix and
``K(X) = span{x y*}`` is a unital subalgebra of ``M_m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    StarAlgebra,
    as_eps,
    dagger,
    full_matrix_algebra,
    intersect,
    kron,
    nullspace,
    orthonormalize,
    same_span,
    span_basis,
    span_residual,
)
from .bimodules import BimoduleUnits, bimodule_relative_commutant, build_linking
from .destabilization import KAlgebra, apply_units, relative_commutant, theta, untensor
from .errors import InvalidInputError, TheoremViolation
from .morphisms import NdMorphism
from .report import Report
from .units import MatrixUnitSystem, amplify_units, standard_unit


def _max_norm(stack) -> float:
    stack = np.asarray(stack)
    if stack.size == 0:
        return 0.0
    return float(np.max(np.linalg.norm(stack.reshape(len(stack), -1), axis=1)))


@dataclass(frozen=True, eq=False)
class Correspondence:
    """``X`` is an orthonormal basis of shape ``(d, m, q)``; ``phi`` holds ``phi(a_k)`` for the basis of ``A``.

    ``products`` is set on balanced tensor products: ``products[r, s]`` is the
    realization of ``x_r (x) y_s``.
    """

    A: StarAlgebra
    B: StarAlgebra
    X: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)
    products: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=complex)
        if X.ndim != 3:
            raise ValueError(f"X must be a stack of matrices, got shape {X.shape}")
        if X.shape[2] != self.B.N:
            raise ValueError(f"X has {X.shape[2]} columns but B acts on C^{self.B.N}")
        phi = np.asarray(self.phi, dtype=complex)
        if phi.shape != (self.A.dim, X.shape[1], X.shape[1]):
            raise ValueError(f"phi must have shape {(self.A.dim, X.shape[1], X.shape[1])}, got {phi.shape}")
        for arr in (X, phi):
            arr.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "phi", phi)

    @property
    def dim(self) -> int:
        return len(self.X)

    @property
    def m(self) -> int:
        return self.X.shape[1]

    @property
    def q(self) -> int:
        return self.X.shape[2]

    def __repr__(self):
        return f"Correspondence(dim={self.dim}, m={self.m}, q={self.q}, dim_A={self.A.dim}, dim_B={self.B.dim})"

    def act(self, a) -> np.ndarray:
        """``phi(a)`` for any element (or stack) of ``A``."""
        return np.tensordot(self.A.coords(a), self.phi, axes=(-1, 0))

    def coords(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return np.tensordot(x, self.X.conj(), axes=([-2, -1], [1, 2]))

    def element(self, c) -> np.ndarray:
        return np.tensordot(np.asarray(c), self.X, axes=(-1, 0))

    def columns(self) -> np.ndarray:
        """All basis vectors side by side, ``m x (d q)``."""
        return np.concatenate(list(self.X), axis=1) if self.dim else np.zeros((self.m, 0), dtype=complex)

    def residuals(self, rng=None) -> tuple[dict, dict]:
        rng = np.random.default_rng(0) if rng is None else rng
        X, A, B, phi = self.X, self.A, self.B, self.phi
        m, d = self.m, self.dim
        res, checks = {}, {}
        res["phi_unital"] = float(np.linalg.norm(self.act(np.eye(A.N)) - np.eye(m)))
        res["phi_adjoint"] = _max_norm(self.act(dagger(A.basis)) - dagger(phi))
        y = A.random_element(rng)
        res["phi_multiplicative"] = _max_norm(self.act(np.matmul(A.basis, y)) - np.matmul(phi, self.act(y)))
        if d:
            inner = np.einsum("rab,sbc->rsac", dagger(X), X).reshape(-1, self.q, self.q)
            res["inner_in_B"] = span_residual(B.basis, inner)
            res["right_action"] = span_residual(X, np.einsum("rab,sbc->rsac", X, B.basis).reshape(-1, m, self.q))
            res["left_action"] = span_residual(X, np.einsum("kab,rbc->krac", phi, X).reshape(-1, m, self.q))
            cols = self.columns()
            gram = cols.conj().T @ cols
            ev = np.linalg.eigvalsh((gram + gram.conj().T) / 2)
            res["gram_negativity"] = float(max(0.0, -ev[0]))
            s = np.linalg.svd(cols, compute_uv=False)
            checks["ambient_full"] = bool(len(s) >= m and s[m - 1] > 1e-6 * s[0])
        else:
            checks["ambient_full"] = m == 0
        return res, checks

    def validate(self, tol=DEFAULT_TOL) -> Report:
        res, checks = self.residuals()
        return Report("correspondence", residuals=res, checks=checks, threshold=10 * as_eps(tol),
                      details={"dim": self.dim, "m": self.m, "q": self.q})

    def check(self, tol=DEFAULT_TOL) -> "Correspondence":
        rep = self.validate(tol)
        if not rep.passed:
            raise InvalidInputError(
                "invalid correspondence", residuals={k: rep.residuals.get(k, np.inf) for k in rep.failures()}
            )
        return self


def compact_operators(X: Correspondence, tol=DEFAULT_TOL) -> StarAlgebra:
    """``K(X) = span{x y*}`` inside ``M_m``."""
    if not X.dim:
        return StarAlgebra(X.m, np.zeros((0, X.m, X.m), dtype=complex))
    rank_one = np.einsum("rab,scb->rsac", X.X, X.X.conj()).reshape(-1, X.m, X.m)
    return StarAlgebra(X.m, orthonormalize(rank_one, tol))


def operators_preserving(X: Correspondence, tol=DEFAULT_TOL) -> StarAlgebra:
    """``{T : T X in X, T* X in X}``, solved as a linear system; independent of :func:`compact_operators`."""
    m, q = X.m, X.q
    flat = X.X.reshape(X.dim, -1)
    perp = np.eye(m * q) - flat.T @ flat.conj()
    # row-major vec(T x) = kron(I_m, x^T) vec(T)
    rows = [perp @ np.kron(np.eye(m), x.T) for x in X.X]
    ker = nullspace(np.concatenate(rows), tol)
    S = StarAlgebra(m, ker.T.reshape(-1, m, m))
    return intersect(S, StarAlgebra(m, dagger(S.basis)), tol)


def standard_correspondence(phi: NdMorphism, tol=DEFAULT_TOL) -> Correspondence:
    """``B`` as an ``A``-``B`` correspondence with left action through ``phi``."""
    phi.check(tol)
    B = phi.target
    return Correspondence(phi.source, B, B.basis, phi.images)


def external_tensor_correspondence(X: Correspondence, n: int) -> Correspondence:
    """``X (x) M_n`` over ``A (x) M_n`` and ``B (x) M_n``; basis ``kron(x_r, u_ij)`` in that order."""
    Mn = full_matrix_algebra(n)
    Xn = np.einsum("rab,sij->rsaibj", X.X, Mn.basis).reshape(-1, X.m * n, X.q * n)
    phin = np.einsum("rab,sij->rsaibj", X.phi, Mn.basis).reshape(-1, X.m * n, X.m * n)
    return Correspondence(kron(X.A, Mn), kron(X.B, Mn), Xn, phin)


def interior_tensor(X: Correspondence, Y: Correspondence, tol=DEFAULT_TOL) -> Correspondence:
    """Balanced tensor product ``X (x)_B Y`` realized from its Gram matrix.

    Every vector ``(x_r (x) y_a) e_j`` is ``sum_i (y_a)_{ij} x_r (x) d_i`` for
    the standard basis ``d_i`` of the space ``Y`` acts into, and the vectors
    ``x_r (x) d_i`` have Gram entries ``phi_Y(x_r* x_s)_{il}``.  A
    factorization ``H = W* W`` of that Gram matrix with the kernel cut off
    realizes ``x_r (x) d_i`` as a column of ``W``; since the columns of ``Y``
    span its ambient space, these columns span the whole tensor product.
    The left action is read off from ``(a x_r) (x) d_i``.
    """
    eps = as_eps(tol)
    if X.B.N != Y.A.N or not same_span(X.B, Y.A, tol)[0]:
        raise InvalidInputError("right algebra of X is not the left algebra of Y")
    dX, dY, mY = X.dim, Y.dim, Y.m
    if not dX or not dY:
        raise InvalidInputError("tensor product with a zero correspondence", dim_X=dX, dim_Y=dY)
    inner = np.einsum("rab,sbc->rsac", dagger(X.X), X.X)
    H = Y.act(inner).transpose(0, 2, 1, 3).reshape(dX * mY, dX * mY)
    H = (H + H.conj().T) / 2
    lam, V = np.linalg.eigh(H)
    top = max(float(lam[-1]), 0.0)
    if lam[0] < -eps * max(1.0, top) * 10:
        raise InvalidInputError("Gram matrix has a negative eigenvalue", residuals={"gram_negativity": -float(lam[0])})
    keep = lam > eps * top
    lam, V = lam[keep], V[:, keep]
    k = len(lam)
    W = np.sqrt(lam)[:, None] * V.conj().T
    W_pinv = V / np.sqrt(lam)[None, :]
    products = np.einsum("kri,aij->rakj", W.reshape(k, dX, mY), Y.X, optimize=True)
    Z = span_basis(products.reshape(-1, k, Y.q), tol, shape=(k, Y.q))
    # phi_X(a) x_r = sum_s beta[r, s] x_s, so a acts on x_r (x) d_i through beta (x) 1
    beta = X.coords(np.matmul(X.phi[:, None], X.X[None]))  # (dA, dX, dX)
    moved = np.einsum("krs,tsi->ktri", beta, W.reshape(k, dX, mY), optimize=True).reshape(len(beta), k, -1)
    phi = moved @ W_pinv
    return Correspondence(X.A, Y.B, Z, phi, products=products)


@dataclass(frozen=True, eq=False)
class CorrespondenceIso:
    """Linear bijection ``source -> target`` in basis coordinates, ``matrix`` of shape ``(d_target, d_source)``.

    ``left_iso`` and ``right_iso`` identify the coefficient algebras; ``None``
    means both sides use the same algebra.  The intertwining conditions are
    ``U(a x b) = alpha(a) U(x) beta(b)`` and ``<Ux, Uy> = beta(<x, y>)``.
    """

    source: Correspondence
    target: Correspondence
    matrix: np.ndarray = field(repr=False)
    left_iso: NdMorphism | None = field(default=None, repr=False)
    right_iso: NdMorphism | None = field(default=None, repr=False)
    fit_residual: float = 0.0

    def __call__(self, x) -> np.ndarray:
        return self.target.element(self.source.coords(x) @ self.matrix.T)

    def alpha(self, a) -> np.ndarray:
        return np.asarray(a, dtype=complex) if self.left_iso is None else self.left_iso(a)

    def beta(self, b) -> np.ndarray:
        return np.asarray(b, dtype=complex) if self.right_iso is None else self.right_iso(b)

    @classmethod
    def from_images(cls, source, target, sources, images, left_iso=None, right_iso=None) -> "CorrespondenceIso":
        """Fit the linear map sending each element of ``sources`` to the matching element of ``images``."""
        cs = source.coords(sources).reshape(-1, source.dim)
        ct = target.coords(images).reshape(-1, target.dim)
        sol, *_ = np.linalg.lstsq(cs, ct, rcond=None)
        fit = float(np.max(np.abs(cs @ sol - ct))) if ct.size else 0.0
        # elements outside the spans also count against the fit
        fit = max(fit, _max_norm(source.element(cs) - np.asarray(sources).reshape(cs.shape[:1] + source.X.shape[1:])))
        fit = max(fit, _max_norm(target.element(ct) - np.asarray(images).reshape(ct.shape[:1] + target.X.shape[1:])))
        return cls(source, target, sol.T, left_iso, right_iso, fit)

    @classmethod
    def identity(cls, X: Correspondence) -> "CorrespondenceIso":
        return cls(X, X, np.eye(X.dim))


def verify_correspondence_iso(X: Correspondence, Y: Correspondence, U: CorrespondenceIso, tol=DEFAULT_TOL) -> Report:
    """Bijectivity, intertwining of both actions and preservation of inner products, as residuals."""
    eps = as_eps(tol)
    for given, held in ((X, U.source), (Y, U.target)):
        if given is not held and (given.X.shape != held.X.shape or not np.allclose(given.X, held.X)):
            raise ValueError("the map is defined on a different correspondence")
    res, checks = {"fit": U.fit_residual}, {}
    M = U.matrix
    checks["same_dimension"] = X.dim == Y.dim and M.shape == (Y.dim, X.dim)
    if M.size:
        s = np.linalg.svd(M, compute_uv=False)
        checks["bijective"] = checks["same_dimension"] and bool(s[-1] > eps * max(1.0, s[0]))
    else:
        checks["bijective"] = checks["same_dimension"]
    if not checks["same_dimension"] or not X.dim:
        return Report("correspondence_iso", residuals=res, checks=checks, threshold=10 * eps)
    UX = U(X.X)
    aA = U.alpha(X.A.basis)
    bB = U.beta(X.B.basis)
    res["left_algebra"] = span_residual(Y.A.basis, aA)
    res["right_algebra"] = span_residual(Y.B.basis, bB)
    for name, iso in (("left_iso", U.left_iso), ("right_iso", U.right_iso)):
        if iso is not None:
            res[name] = max(iso.residuals().values())
            checks[f"{name}_bijective"] = iso.is_bijective(tol)
    res["left_action"] = _max_norm(
        U(np.matmul(X.phi[:, None], X.X[None])) - np.matmul(Y.act(aA)[:, None], UX[None])
    )
    res["right_action"] = _max_norm(
        U(np.matmul(X.X[:, None], X.B.basis[None])) - np.matmul(UX[:, None], bB[None])
    )
    res["inner_product"] = _max_norm(
        np.einsum("rab,sbc->rsac", dagger(UX), UX) - U.beta(np.einsum("rab,sbc->rsac", dagger(X.X), X.X))
    )
    return Report("correspondence_iso", residuals=res, checks=checks, threshold=10 * eps,
                  details={"dim": X.dim})


def _action_matrices(C: Correspondence, left_images):
    """Coordinate matrices of the left action of ``left_images`` and of the right action of ``C.B``."""
    L = C.coords(np.matmul(C.act(left_images)[:, None], C.X[None]))  # (k, r, s): phi(a_k) x_r = sum_s L x_s
    R = C.coords(np.matmul(C.X[:, None], C.B.basis[None]))  # (r, k, s)
    return np.swapaxes(L, 1, 2), np.transpose(R, (1, 2, 0))  # column r holds the image of x_r


def find_correspondence_iso(X: Correspondence, Y: Correspondence, tol=DEFAULT_TOL, attempts: int = 5,
                            seed: int = 0, left_iso: NdMorphism | None = None) -> CorrespondenceIso | None:
    """Search for an isomorphism ``X -> Y`` over the identity of ``B`` (and ``left_iso`` on ``A``).

    Solves for the module intertwiners, samples them, and corrects a sample
    ``t`` to the isometry ``t (t* t)^{-1/2}``.  ``None`` means nothing was
    found within the budget; it is not a proof that no isomorphism exists.
    """
    if X.dim != Y.dim or X.q != Y.q or not X.dim:
        return None
    if not same_span(X.B, Y.B, tol)[0]:
        return None
    aA = X.A.basis if left_iso is None else left_iso(X.A.basis)
    if span_residual(Y.A.basis, aA) > 10 * as_eps(tol):
        return None
    d = X.dim
    LX, RX = _action_matrices(X, X.A.basis)
    LY, _ = _action_matrices(Y, aA)
    RY = np.transpose(Y.coords(np.matmul(Y.X[:, None], X.B.basis[None])), (1, 2, 0))
    eye = np.eye(d)
    # T P = Q T, row-major vec: (I (x) P^T - Q (x) I) vec(T)
    rows = [np.kron(eye, P.T) - np.kron(Q, eye) for P, Q in zip(LX, LY)]
    rows += [np.kron(eye, P.T) - np.kron(Q, eye) for P, Q in zip(RX, RY)]
    ker = nullspace(np.concatenate(rows), tol)
    if ker.shape[1] == 0:
        return None
    rng = np.random.default_rng(seed)
    cols = X.columns()
    cols_pinv = np.linalg.pinv(cols)
    for _ in range(attempts):
        c = rng.standard_normal(ker.shape[1]) + 1j * rng.standard_normal(ker.shape[1])
        T = (ker @ c).reshape(d, d)
        t = np.concatenate(list(Y.element(T.T)), axis=1) @ cols_pinv  # ambient operator, t x_r = T x_r
        h = t.conj().T @ t
        w, V = np.linalg.eigh((h + h.conj().T) / 2)
        if w[0] <= as_eps(tol) * w[-1]:
            continue
        u = t @ (V / np.sqrt(w)) @ V.conj().T
        iso = CorrespondenceIso.from_images(X, Y, X.X, u @ X.X, left_iso=left_iso)
        if verify_correspondence_iso(X, Y, iso, tol).passed:
            return iso
    return None


@dataclass
class DestabilizationReport(Report):
    compacts: StarAlgebra | None = field(default=None, repr=False)


def correspondence_commutant(X: Correspondence, iota: MatrixUnitSystem, zeta: MatrixUnitSystem,
                             tol=DEFAULT_TOL) -> tuple[Correspondence, DestabilizationReport]:
    """``C(X, iota, zeta)`` as a ``C(A, iota)``-``C(B, zeta)`` correspondence, with its checks.

    Goes through ``E = K(X)`` with units ``phi(e_ij)``, the ``E``-``B`` linking
    algebra and its relative commutant; the left action is ``phi`` restricted
    to ``C(A, iota)``.
    """
    eps = as_eps(tol)
    X.check(tol)
    KA = KAlgebra(X.A, iota).check(tol)
    KAlgebra(X.B, zeta).check(tol)
    if iota.n != zeta.n:
        raise ValueError("unit systems of different sizes")
    E = compact_operators(X, tol)
    iota_E = MatrixUnitSystem(X.act(iota.e))
    urep = iota_E.validate(tol)
    if not urep.passed:
        raise InvalidInputError("phi o iota is not a system of matrix units", residuals=urep.residuals)
    link = build_linking(E, X.B, X.X, tol)
    HC = bimodule_relative_commutant(link, BimoduleUnits(iota_E, zeta), tol)
    CA = relative_commutant(KA, tol, check=False)
    phi_c = X.act(CA.basis)
    CX = HC.X
    res = {}
    res["action_in_commutant"] = span_residual(HC.A.basis, phi_c)
    if len(CX):
        res["action_preserves"] = span_residual(CX, np.matmul(phi_c[:, None], CX[None]).reshape(-1, X.m, X.q))
    # direct characterization through the units of A, all n^2 of them
    flat = X.X.reshape(X.dim, -1)
    e_act, f = X.act(iota.flat), zeta.flat
    diff = np.matmul(e_act[:, None], X.X[None]) - np.matmul(X.X[None], f[:, None])  # (n^2, d, m, q)
    ker = nullspace(np.transpose(diff, (1, 0, 2, 3)).reshape(X.dim, -1).T, tol) if X.dim else np.zeros((0, 0))
    direct = (ker.T @ flat).reshape(-1, X.m, X.q) if ker.size else np.zeros((0, X.m, X.q), dtype=complex)
    _, res["direct_characterization"] = same_span(direct, CX, tol) if len(direct) or len(CX) else (True, 0.0)
    checks = {"direct_dimension": len(direct) == len(CX), "dimension_law": X.dim == iota.n ** 2 * len(CX)}
    D = Correspondence(CA, HC.B, CX, phi_c)
    rep = DestabilizationReport("correspondence_commutant", residuals=res, checks=checks, threshold=10 * eps,
                                details={"dim_X": X.dim, "dim_C": len(CX), "n": iota.n}, compacts=E)
    return D, rep


def correspondence_destabilize(X: Correspondence, iota: MatrixUnitSystem, zeta: MatrixUnitSystem,
                               tol=DEFAULT_TOL) -> Correspondence:
    D, rep = correspondence_commutant(X, iota, zeta, tol)
    if not rep.passed:
        raise TheoremViolation("relative commutant of the correspondence failed its checks", residuals=rep.residuals)
    return D


def correspondence_theta(X: Correspondence, iota: MatrixUnitSystem, zeta: MatrixUnitSystem,
                         tol=DEFAULT_TOL) -> CorrespondenceIso:
    """``C(X) (x) M_n -> X``, ``x (x) u_ij -> x f_ij``, over the algebra factorizations of both sides."""
    D = correspondence_destabilize(X, iota, zeta, tol)
    cert_A = theta(KAlgebra(X.A, iota), tol, C=D.A)
    cert_B = theta(KAlgebra(X.B, zeta), tol, C=D.B)
    for cert in (cert_A, cert_B):
        if not cert.passed:
            raise TheoremViolation("theta certificate failed", residuals=cert.residuals)
    S = external_tensor_correspondence(D, iota.n)
    images = apply_units(S.X, zeta.e)
    return CorrespondenceIso.from_images(S, X, S.X, images, cert_A.morphism(), cert_B.morphism())


def correspondence_roundtrip_destab(X: Correspondence, iota, zeta, tol=DEFAULT_TOL) -> Report:
    """Destabilize, stabilize again, and certify the result is ``X`` over the factorizations."""
    U = correspondence_theta(X, iota, zeta, tol)
    rep = verify_correspondence_iso(U.source, X, U, tol)
    rep.name = "correspondence_destab_stab"
    return rep


def slot_iso(D: Correspondence, Y: Correspondence, n: int) -> CorrespondenceIso:
    """``C(Y (x) M_n) -> Y`` reading off the ``u_11`` slot, with the same map on the algebras."""
    alpha = NdMorphism(D.A, Y.A, untensor(D.A.basis, n))
    beta = NdMorphism(D.B, Y.B, untensor(D.B.basis, n))
    return CorrespondenceIso.from_images(D, Y, D.X, untensor(D.X, n), alpha, beta)


def correspondence_roundtrip_stab(Y: Correspondence, n: int, tol=DEFAULT_TOL) -> Report:
    """Stabilize with amplified units, destabilize, and certify the result is ``Y``."""
    X = external_tensor_correspondence(Y, n)
    D = correspondence_destabilize(X, amplify_units(n, Y.A.N), amplify_units(n, Y.B.N), tol)
    U = slot_iso(D, Y, n)
    rep = verify_correspondence_iso(D, Y, U, tol)
    rep.name = "correspondence_stab_destab"
    return rep


def theta_assoc(X: Correspondence, Y: Correspondence, n: int, tol=DEFAULT_TOL) -> CorrespondenceIso:
    """``(X (x) M_n) (x) (Y (x) M_n) -> (X (x) Y) (x) M_n``, ``(x (x) k) (x) (y (x) l) -> (x (x) y) (x) k l``."""
    XY = interior_tensor(X, Y, tol)
    src = interior_tensor(external_tensor_correspondence(X, n), external_tensor_correspondence(Y, n), tol)
    tgt = external_tensor_correspondence(XY, n)
    dX, dY = X.dim, Y.dim
    # source products are indexed by (r, i, j) and (a, k, l); only j == k survives
    P = src.products.reshape(dX, n, n, dY, n, n, *src.products.shape[2:])
    sources, images = [], []
    for j in range(n):
        for i in range(n):
            for l in range(n):
                sources.append(P[:, i, j, :, j, l])
                images.append(np.einsum("rapq,st->rapsqt", XY.products, standard_unit(n, i, l)).reshape(
                    dX, dY, tgt.m, tgt.q))
    kz = src.products.shape[2:]
    zero_pairs = [P[:, i, j, :, k, l] for i in range(n) for j in range(n) for k in range(n) for l in range(n) if j != k]
    sources = np.concatenate([np.stack(sources).reshape(-1, *kz)] + [z.reshape(-1, *kz) for z in zero_pairs])
    images = np.concatenate(
        [np.stack(images).reshape(-1, tgt.m, tgt.q), np.zeros((len(zero_pairs) * dX * dY, tgt.m, tgt.q))]
    )
    return CorrespondenceIso.from_images(src, tgt, sources, images)


def tensor_identity_iso(X: Correspondence, tol=DEFAULT_TOL, side: str = "right") -> CorrespondenceIso:
    """``X (x)_B B -> X`` (``side="right"``) or ``A (x)_A X -> X`` (``side="left"``) on product vectors."""
    if side == "right":
        unit = Correspondence(X.B, X.B, X.B.basis, X.B.basis)
        T = interior_tensor(X, unit, tol)
        images = np.einsum("rab,sbc->rsac", X.X, X.B.basis)
    elif side == "left":
        unit = Correspondence(X.A, X.A, X.A.basis, X.A.basis)
        T = interior_tensor(unit, X, tol)
        images = np.einsum("rab,sbc->rsac", X.phi, X.X)
    else:
        raise ValueError("side must be 'left' or 'right'")
    k, qc = T.products.shape[2:]
    return CorrespondenceIso.from_images(T, X, T.products.reshape(-1, k, qc), images.reshape(-1, X.m, X.q))


def assoc_iso(X: Correspondence, Y: Correspondence, Z: Correspondence, tol=DEFAULT_TOL) -> CorrespondenceIso:
    """``(X (x) Y) (x) Z -> X (x) (Y (x) Z)`` on product vectors."""
    XY, YZ = interior_tensor(X, Y, tol), interior_tensor(Y, Z, tol)
    left, right = interior_tensor(XY, Z, tol), interior_tensor(X, YZ, tol)
    # x_r (x) y_a in the basis of XY, and y_a (x) z_c in the basis of YZ
    cxy = XY.coords(XY.products)  # (dX, dY, dXY)
    cyz = YZ.coords(YZ.products)  # (dY, dZ, dYZ)
    src = np.einsum("rak,kc...->rac...", cxy, left.products)
    tgt = np.einsum("ack,rk...->rac...", cyz, right.products)
    k1, k2 = left.products.shape[2:], right.products.shape[2:]
    return CorrespondenceIso.from_images(left, right, src.reshape(-1, *k1), tgt.reshape(-1, *k2))
