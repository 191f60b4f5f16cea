"""Dense complex matrix algebra: spans, closures and commutants.

Every algebra in the package is a unital *-subalgebra of ``M_N(C)``
stored as an orthonormal basis for the Hilbert-Schmidt inner product
``tr(x* y)``.  Rank decisions are always made relative to a tolerance.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError

DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class Tolerance:
    eps: float = DEFAULT_TOL

    def __post_init__(self):
        if not (0 < self.eps < 1e-3):
            raise ValueError(f"tolerance must satisfy 0 < eps < 1e-3, got {self.eps!r}")

    def __float__(self):
        return float(self.eps)

    @classmethod
    def from_env(cls, default: float = DEFAULT_TOL) -> "Tolerance":
        """Tolerance from ``DESTAB_TOL`` when set, else ``default``."""
        raw = os.environ.get("DESTAB_TOL")
        return cls(float(raw)) if raw else cls(default)


def as_eps(tol) -> float:
    """Accept a float or a :class:`Tolerance`; return a validated float."""
    if isinstance(tol, Tolerance):
        return tol.eps
    return Tolerance(float(tol)).eps


def hs_inner(x, y) -> complex:
    """Hilbert-Schmidt inner product ``tr(x* y)`` (conjugate-linear in ``x``)."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape != y.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {y.shape}")
    return complex(np.vdot(x, y))


def hs_norm(x) -> float:
    return float(np.linalg.norm(np.asarray(x)))


def operator_norm(x) -> float:
    """Largest singular value."""
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    return float(np.linalg.norm(x, 2))


def dagger(x):
    """Conjugate transpose on the last two axes (works on stacks)."""
    return np.conj(np.swapaxes(x, -1, -2))


def orthonormalize(vectors, tol=DEFAULT_TOL, basis=None, scale: float | None = None):
    """Extend ``basis`` by the part of ``vectors`` not already in its span.

    ``vectors`` is a stack of arrays of common shape; ``basis`` (optional) an
    orthonormal stack of the same trailing shape.  Candidate directions whose
    residual after projection falls below ``tol * scale`` are discarded;
    ``scale`` defaults to the largest candidate norm.  Returns the new
    orthonormal stack (old basis first).
    """
    eps = as_eps(tol)
    vectors = np.asarray(vectors, dtype=complex)
    shape = vectors.shape[1:]
    flat = vectors.reshape(len(vectors), -1)
    if basis is None:
        q = np.zeros((0, flat.shape[1]), dtype=complex)
    else:
        q = np.asarray(basis, dtype=complex).reshape(len(basis), -1)
    if len(flat) == 0:
        return q.reshape((len(q),) + shape)
    if scale is None:
        scale = float(np.max(np.linalg.norm(flat, axis=1)))
    if scale == 0.0:
        return q.reshape((len(q),) + shape)
    resid = flat
    # two projection passes keep the result orthogonal to working precision
    for _ in range(2):
        if len(q):
            resid = resid - (resid @ q.conj().T) @ q
    u, s, vh = np.linalg.svd(resid, full_matrices=False)
    keep = s > eps * scale
    new = vh[keep]
    if len(q) and len(new):
        new = new - (new @ q.conj().T) @ q
        new, _ = np.linalg.qr(new.T)
        new = new.T
    q = np.concatenate([q, new], axis=0)
    return q.reshape((len(q),) + shape)


def span_basis(vectors, tol=DEFAULT_TOL, shape=None):
    """Orthonormal basis for the span of a stack (empty stack allowed)."""
    vectors = np.asarray(vectors, dtype=complex)
    if vectors.ndim == 1 or len(vectors) == 0:
        if shape is None:
            raise ValueError("shape is required for an empty stack")
        return np.zeros((0,) + tuple(shape), dtype=complex)
    return orthonormalize(vectors, tol)


def project(basis, x):
    """Orthogonal projection of ``x`` (or a stack of them) onto span(basis)."""
    basis = np.asarray(basis)
    x = np.asarray(x, dtype=complex)
    if len(basis) == 0:
        return np.zeros_like(x)
    flat_b = basis.reshape(len(basis), -1)
    lead = x.shape[: x.ndim - (basis.ndim - 1)]
    flat_x = x.reshape(lead + (-1,))
    coeffs = flat_x @ flat_b.conj().T
    return (coeffs @ flat_b).reshape(x.shape)


def coordinates(basis, x):
    """Coefficients of ``x`` against an orthonormal stack."""
    basis = np.asarray(basis)
    x = np.asarray(x, dtype=complex)
    flat_b = basis.reshape(len(basis), -1)
    lead = x.shape[: x.ndim - (basis.ndim - 1)]
    return x.reshape(lead + (-1,)) @ flat_b.conj().T


def span_residual(basis, x) -> float:
    """Largest HS distance from elements of ``x`` (a stack) to span(basis)."""
    x = np.asarray(x, dtype=complex)
    if len(x) == 0:
        return 0.0
    r = x - project(basis, x)
    return float(np.max(np.linalg.norm(r.reshape(len(x), -1), axis=1)))


def same_span(u, v, tol=DEFAULT_TOL) -> tuple[bool, float]:
    """Span equality for two orthonormal stacks or algebras; returns (equal, residual)."""
    eps = as_eps(tol)
    u = np.asarray(getattr(u, "basis", u))
    v = np.asarray(getattr(v, "basis", v))
    if u.shape[1:] != v.shape[1:]:
        raise ValueError(f"shape mismatch: {u.shape[1:]} vs {v.shape[1:]}")
    res = max(span_residual(v, u), span_residual(u, v))
    return (len(u) == len(v) and res <= 10 * eps), res


def nullspace(mat, tol=DEFAULT_TOL, scale: float = 1.0):
    """Columns spanning the kernel; singular values below ``tol * max(s_max, scale)`` count as zero.

    The floor ``scale`` matters when the system is zero up to rounding:
    callers build systems from unit-norm bases, so ``1.0`` is the natural size.
    """
    mat = np.asarray(mat, dtype=complex)
    if mat.shape[0] == 0 or not np.any(mat):
        return np.eye(mat.shape[1], dtype=complex)
    rows, cols = mat.shape
    if rows > cols:
        # same right singular vectors, far less work for tall systems
        mat = np.linalg.qr(mat, mode="r")
    _, s, vh = np.linalg.svd(mat, full_matrices=True)
    rank = int(np.sum(s > as_eps(tol) * max(s[0], scale))) if len(s) else 0
    return vh[rank:].conj().T


@dataclass(frozen=True, eq=False)
class StarAlgebra:
    """A unital *-subalgebra of ``M_N(C)`` given by an HS-orthonormal basis."""

    N: int
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 3 or b.shape[1:] != (self.N, self.N):
            raise ValueError(f"basis must have shape (d, {self.N}, {self.N}), got {b.shape}")
        b.setflags(write=False)
        object.__setattr__(self, "basis", b)

    @property
    def dim(self) -> int:
        return len(self.basis)

    def __repr__(self):
        return f"StarAlgebra(N={self.N}, dim={self.dim})"

    @cached_property
    def flat(self) -> np.ndarray:
        return self.basis.reshape(self.dim, -1)

    def coords(self, x):
        return coordinates(self.basis, x)

    def element(self, coeffs):
        """Linear combination of basis elements."""
        return np.tensordot(np.asarray(coeffs, dtype=complex), self.basis, axes=(-1, 0))

    def project(self, x):
        return project(self.basis, x)

    def contains(self, x, tol=DEFAULT_TOL) -> bool:
        return membership(self, x, tol)[0]

    def random_element(self, rng) -> np.ndarray:
        c = rng.standard_normal(self.dim) + 1j * rng.standard_normal(self.dim)
        return self.element(c / np.sqrt(2 * max(self.dim, 1)))

    def closure_residuals(self) -> dict[str, float]:
        """Residuals of the *-algebra axioms: products, adjoints, identity, Gram."""
        b = self.basis
        d = self.dim
        gram = self.flat.conj() @ self.flat.T
        res = {"gram": float(np.max(np.abs(gram - np.eye(d)))) if d else 0.0}
        res["identity"] = span_residual(b, np.eye(self.N)[None])
        res["adjoint"] = span_residual(b, dagger(b))
        prod = 0.0
        for x in b:
            prod = max(prod, span_residual(b, np.matmul(x, b)))
        res["products"] = prod
        return res

    def random_closure_residual(self, rng, samples: int = 3) -> float:
        """Cheap closure test: products and adjoints of random elements stay in the span.

        ``(x, y) -> (1 - P)(x y)`` is bilinear, so random pairs see any defect
        with probability one.
        """
        worst = span_residual(self.basis, np.eye(self.N)[None])
        for _ in range(samples):
            x, y = self.random_element(rng), self.random_element(rng)
            worst = max(worst, span_residual(self.basis, np.stack([x @ y, x.conj().T])))
        return worst

    def validate(self, tol=DEFAULT_TOL) -> dict[str, float]:
        eps = as_eps(tol)
        res = self.closure_residuals()
        bad = {k: v for k, v in res.items() if v > 10 * eps * max(1.0, np.sqrt(self.N))}
        if bad:
            raise InvalidInputError("not a unital *-algebra", residuals=bad)
        return res


def membership(A: StarAlgebra, x, tol=DEFAULT_TOL) -> tuple[bool, float]:
    """Whether ``x`` lies in ``A``: HS distance to span at most ``tol * (1 + |x|)``."""
    eps = as_eps(tol)
    x = np.asarray(x, dtype=complex)
    if x.shape != (A.N, A.N):
        raise ValueError(f"expected a {A.N}x{A.N} matrix, got {x.shape}")
    r = hs_norm(x - A.project(x))
    return r <= eps * (1.0 + hs_norm(x)), r


def full_matrix_algebra(n: int) -> StarAlgebra:
    """``M_n`` with the standard matrix units (row-major) as basis."""
    return StarAlgebra(n, np.eye(n * n, dtype=complex).reshape(n * n, n, n))


def scalars(N: int) -> StarAlgebra:
    return StarAlgebra(N, (np.eye(N, dtype=complex) / np.sqrt(N))[None])


def generate_star_algebra(generators: Iterable, N: int, tol=DEFAULT_TOL) -> StarAlgebra:
    """Smallest unital *-subalgebra of ``M_N`` containing ``generators``.

    The span of words in the generators and their adjoints is grown by right
    multiplication of the newest basis elements until the dimension stops
    increasing (it is bounded by ``N**2``).
    """
    gens = [np.asarray(g, dtype=complex) for g in generators]
    for g in gens:
        if g.shape != (N, N):
            raise ValueError(f"generator of shape {g.shape} in M_{N}")
    gens = gens + [g.conj().T for g in gens]
    gens = [g for g in gens if np.any(g)]
    seeds = np.stack([np.eye(N, dtype=complex)] + gens)
    scale = float(max(np.linalg.norm(s) for s in seeds))
    basis = orthonormalize(seeds, tol, scale=scale)
    if not gens:
        return StarAlgebra(N, basis)
    letters = np.stack(gens)
    frontier = basis
    while len(frontier):
        words = np.matmul(frontier[:, None], letters[None]).reshape(-1, N, N)
        scale = max(scale, float(np.max(np.linalg.norm(words.reshape(len(words), -1), axis=1))))
        grown = orthonormalize(words, tol, basis=basis, scale=scale)
        frontier = grown[len(basis):]
        basis = grown
        if len(basis) > N * N:
            raise InvalidInputError(
                "orthonormalization lost rank ambiguously during closure",
                residuals={"dim": float(len(basis))},
            )
    return StarAlgebra(N, basis)


def commutant_in_full(S: Sequence, N: int, tol=DEFAULT_TOL) -> StarAlgebra:
    """``{a in M_N : a s = s a for all s in S}`` as a nullspace (S is *-closed first)."""
    mats = [np.asarray(s, dtype=complex) for s in S]
    for s in mats:
        if s.shape != (N, N):
            raise ValueError(f"element of shape {s.shape} in M_{N}")
    mats = mats + [s.conj().T for s in mats]
    eye = np.eye(N)
    # row-major vec: vec(s a) = (s kron I) vec(a), vec(a s) = (I kron s^T) vec(a)
    rows = [np.kron(s, eye) - np.kron(eye, s.T) for s in mats]
    mat = np.concatenate(rows, axis=0) if rows else np.zeros((0, N * N))
    ker = nullspace(mat, tol)
    return StarAlgebra(N, ker.T.reshape(-1, N, N))


def kron(A: StarAlgebra, B: StarAlgebra) -> StarAlgebra:
    """Tensor product algebra; basis ``[kron(a, b) for a in A for b in B]``."""
    basis = np.einsum("rij,skl->rsikjl", A.basis, B.basis).reshape(
        A.dim * B.dim, A.N * B.N, A.N * B.N
    )
    return StarAlgebra(A.N * B.N, basis)


def direct_sum(A: StarAlgebra, B: StarAlgebra) -> StarAlgebra:
    """Block-diagonal ``A (+) B`` inside ``M_{N_A + N_B}``."""
    N = A.N + B.N
    basis = np.zeros((A.dim + B.dim, N, N), dtype=complex)
    basis[: A.dim, : A.N, : A.N] = A.basis
    basis[A.dim :, A.N :, A.N :] = B.basis
    return StarAlgebra(N, basis)


def conjugate_algebra(A: StarAlgebra, u) -> StarAlgebra:
    """``u A u*`` for a unitary ``u``."""
    u = np.asarray(u, dtype=complex)
    return StarAlgebra(A.N, u @ A.basis @ u.conj().T)


def intersect(A: StarAlgebra, B: StarAlgebra, tol=DEFAULT_TOL) -> StarAlgebra:
    """Intersection of two subalgebras of the same ``M_N``."""
    if A.N != B.N:
        raise ValueError("algebras live in different ambients")
    # x = sum a_r alpha_r = sum b_s beta_s
    mat = np.concatenate([A.flat.T, -B.flat.T], axis=1)
    ker = nullspace(mat, tol)
    vecs = ker[: A.dim].T @ A.flat
    return StarAlgebra(A.N, span_basis(vecs.reshape(-1, A.N, A.N), tol, shape=(A.N, A.N)))
