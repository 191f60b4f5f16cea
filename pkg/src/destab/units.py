"""Systems of matrix units: the concrete form of an embedding ``M_n -> A``."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import DEFAULT_TOL, StarAlgebra, as_eps, dagger
from .errors import InvalidInputError
from .report import Report


def standard_unit(n: int, i: int, j: int) -> np.ndarray:
    u = np.zeros((n, n), dtype=complex)
    u[i, j] = 1.0
    return u


@dataclass(frozen=True, eq=False)
class MatrixUnitSystem:
    """The images ``e[i, j] = iota(u_ij)`` of the standard units of ``M_n``.

    Indices are zero-based.  The embedding itself is ``embed(k) = sum k_ij e_ij``.
    """

    e: np.ndarray = field(repr=False)

    def __post_init__(self):
        e = np.asarray(self.e, dtype=complex)
        if e.ndim != 4 or e.shape[0] != e.shape[1] or e.shape[2] != e.shape[3]:
            raise ValueError(f"expected an n x n grid of N x N matrices, got {e.shape}")
        e.setflags(write=False)
        object.__setattr__(self, "e", e)

    @property
    def n(self) -> int:
        return self.e.shape[0]

    @property
    def N(self) -> int:
        return self.e.shape[2]

    def __repr__(self):
        return f"MatrixUnitSystem(n={self.n}, N={self.N})"

    def __getitem__(self, ij):
        return self.e[ij]

    @property
    def flat(self) -> np.ndarray:
        """All ``n**2`` units in row-major order."""
        return self.e.reshape(self.n * self.n, self.N, self.N)

    def generators(self) -> np.ndarray:
        """``e_{i,i+1}`` and their adjoints; they generate the image as an algebra."""
        n = self.n
        if n == 1:
            return np.zeros((0, self.N, self.N), dtype=complex)
        up = [self.e[i, i + 1] for i in range(n - 1)]
        return np.stack(up + [self.e[i + 1, i] for i in range(n - 1)])

    @property
    def multiplicity(self) -> int:
        return int(np.linalg.matrix_rank(self.e[0, 0], tol=1e-6))

    def embed(self, k) -> np.ndarray:
        """``iota(k)`` for ``k`` in ``M_n`` (or a stack of them)."""
        return np.tensordot(np.asarray(k, dtype=complex), self.e, axes=([-2, -1], [0, 1]))

    def map(self, f) -> "MatrixUnitSystem":
        """Apply a linear map to every unit."""
        return MatrixUnitSystem(np.stack([[f(self.e[i, j]) for j in range(self.n)] for i in range(self.n)]))

    def validate(self, tol=DEFAULT_TOL) -> "Report":
        return validate_matrix_units(self.e, tol)


def validate_matrix_units(e, tol=DEFAULT_TOL) -> Report:
    """Residuals of ``e_ij e_kl = d_jk e_il``, ``e_ij* = e_ji``, ``sum e_ii = 1``, ``e_ii != 0``."""
    eps = as_eps(tol)
    e = np.asarray(e, dtype=complex)
    if e.ndim != 4 or e.shape[0] != e.shape[1] or e.shape[2] != e.shape[3]:
        raise ValueError(f"expected an n x n grid of N x N matrices, got {e.shape}")
    n, N = e.shape[0], e.shape[2]
    # prod[i,j,k,l] = e_ij e_kl ; expected d_jk e_il
    prod = np.einsum("ijab,klbc->ijklac", e, e)
    expected = np.einsum("jk,ilac->ijklac", np.eye(n), e)
    mult = float(np.max(np.linalg.norm((prod - expected).reshape(-1, N * N), axis=1)))
    adj = float(np.max(np.linalg.norm((dagger(e) - np.swapaxes(e, 0, 1)).reshape(-1, N * N), axis=1)))
    unit = float(np.linalg.norm(np.einsum("iiab->ab", e) - np.eye(N)))
    diag_norms = np.array([np.linalg.norm(e[i, i]) for i in range(n)])
    return Report(
        "matrix_units",
        residuals={"multiplication": mult, "adjoint": adj, "unit_sum": unit},
        checks={"nonzero_diagonal": bool(np.all(diag_norms > 0.5))},
        threshold=10 * eps,
        details={"n": n, "N": N},
    )


def standard_units(n: int) -> MatrixUnitSystem:
    if n < 1:
        raise ValueError("n must be positive")
    return MatrixUnitSystem(np.eye(n * n, dtype=complex).reshape(n, n, n, n))


def amplify_units(n: int, B: StarAlgebra | int) -> MatrixUnitSystem:
    """``e_ij = 1_q (x) u_ij`` inside ``M_{q n}``; ``B`` may be an algebra in ``M_q`` or ``q``."""
    q = B.N if isinstance(B, StarAlgebra) else int(B)
    u = standard_units(n).e
    return MatrixUnitSystem(np.einsum("ab,ijcd->ijacbd", np.eye(q), u).reshape(n, n, q * n, q * n))


def check_unitary(u, tol=DEFAULT_TOL) -> float:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"expected a square matrix, got {u.shape}")
    r = float(np.linalg.norm(u.conj().T @ u - np.eye(len(u))))
    if r > 10 * as_eps(tol) * max(1.0, np.sqrt(len(u))):
        raise InvalidInputError("matrix is not unitary", residuals={"unitarity": r})
    return r


def conjugate_units(E: MatrixUnitSystem, u, tol=DEFAULT_TOL) -> MatrixUnitSystem:
    """``e'_ij = u e_ij u*`` for a unitary ``u``."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (E.N, E.N):
        raise ValueError(f"unitary of shape {u.shape} for units in M_{E.N}")
    check_unitary(u, tol)
    return MatrixUnitSystem(u @ E.e @ u.conj().T)
