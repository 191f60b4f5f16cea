"""Linear maps between concrete algebras, given on a basis."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .algebra import DEFAULT_TOL, StarAlgebra, as_eps, dagger, span_residual
from .errors import InvalidInputError
from .report import Report


@dataclass(frozen=True, eq=False)
class NdMorphism:
    """A unital *-homomorphism ``source -> target`` stored as images of the source basis.

    Unital is the finite-dimensional form of nondegenerate.  Nothing is
    checked at construction; call :meth:`validate` or :meth:`check`.
    """

    source: StarAlgebra
    target: StarAlgebra
    images: np.ndarray = field(repr=False)

    def __post_init__(self):
        im = np.asarray(self.images, dtype=complex)
        if im.shape != (self.source.dim, self.target.N, self.target.N):
            raise ValueError(
                f"images must have shape {(self.source.dim, self.target.N, self.target.N)}, got {im.shape}"
            )
        im.setflags(write=False)
        object.__setattr__(self, "images", im)

    @classmethod
    def from_function(cls, source: StarAlgebra, target: StarAlgebra, f: Callable) -> "NdMorphism":
        return cls(source, target, np.stack([f(b) for b in source.basis]))

    @classmethod
    def identity(cls, A: StarAlgebra) -> "NdMorphism":
        return cls(A, A, A.basis)

    @classmethod
    def inner(cls, A: StarAlgebra, u) -> "NdMorphism":
        """``Ad u`` on ``A`` (``u`` unitary in ``A``)."""
        u = np.asarray(u, dtype=complex)
        return cls(A, A, u @ A.basis @ u.conj().T)

    def __call__(self, x):
        return np.tensordot(self.source.coords(x), self.images, axes=(-1, 0))

    def compose(self, first: "NdMorphism") -> "NdMorphism":
        """``self o first``."""
        if first.target.N != self.source.N:
            raise ValueError("morphisms are not composable")
        return NdMorphism(first.source, self.target, self(first.images))

    def residuals(self, rng=None, samples: int = 3) -> dict[str, float]:
        rng = np.random.default_rng(0) if rng is None else rng
        S = self.source
        res = {}
        res["unital"] = float(np.linalg.norm(self(np.eye(S.N)) - np.eye(self.target.N)))
        res["adjoint"] = float(
            np.max(np.linalg.norm((self(dagger(S.basis)) - dagger(self.images)).reshape(S.dim, -1), axis=1))
        )
        # phi(x y) - phi(x) phi(y) is bilinear; a random y against the full
        # basis detects any nonzero defect with probability one
        mult = 0.0
        for _ in range(samples):
            y = S.random_element(rng)
            fy = self(y)
            d = self(np.matmul(S.basis, y)) - np.matmul(self.images, fy)
            mult = max(mult, float(np.max(np.linalg.norm(d.reshape(S.dim, -1), axis=1))))
        res["multiplicative"] = mult
        res["into_target"] = span_residual(self.target.basis, self.images)
        return res

    def validate(self, tol=DEFAULT_TOL, rng=None) -> Report:
        eps = as_eps(tol)
        return Report("nd_morphism", residuals=self.residuals(rng), threshold=10 * eps)

    def check(self, tol=DEFAULT_TOL) -> "NdMorphism":
        rep = self.validate(tol)
        if not rep.passed:
            raise InvalidInputError(
                "not a unital *-homomorphism into the target",
                residuals={k: rep.residuals[k] for k in rep.failures()},
            )
        return self

    def rank(self, tol=DEFAULT_TOL) -> int:
        flat = self.images.reshape(self.source.dim, -1)
        if flat.size == 0:
            return 0
        s = np.linalg.svd(flat, compute_uv=False)
        return int(np.sum(s > as_eps(tol) * s[0]))

    def is_bijective(self, tol=DEFAULT_TOL) -> bool:
        return self.source.dim == self.target.dim and self.rank(tol) == self.source.dim

    def inverse(self, tol=DEFAULT_TOL) -> "NdMorphism":
        if not self.is_bijective(tol):
            raise InvalidInputError("morphism is not bijective")
        m = self.target.coords(self.images)  # (dS, dT): row r = coords of phi(b_r)
        inv = np.linalg.inv(m)  # coords in target -> coords in source
        return NdMorphism(self.target, self.source, np.tensordot(inv, self.source.basis, axes=(1, 0)))

    def distance(self, other: "NdMorphism") -> float:
        """Largest basis-wise difference to another map on the same source."""
        if other.source is not self.source:
            other_im = other(self.source.basis)
        else:
            other_im = other.images
        d = self.images - other_im
        return float(np.max(np.linalg.norm(d.reshape(len(d), -1), axis=1))) if len(d) else 0.0
