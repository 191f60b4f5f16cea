"""Independent reference solvers used to cross-check the package.

They work directly in ``M_N`` coordinates with plain SVDs and never call
the package's own span or nullspace helpers.
"""

import numpy as np


def _kernel(mat, rtol=1e-9):
    _, s, vh = np.linalg.svd(mat)
    rank = int(np.sum(s > rtol * max(s[0], 1.0))) if len(s) else 0
    return vh[rank:].conj().T


def brute_commutant(A_basis, units):
    """``{x in span A : x e = e x for all n^2 units e}`` from one stacked system in ``C^{N^2}``."""
    A_basis = np.asarray(A_basis)
    N = A_basis.shape[1]
    eye = np.eye(N)
    flat = A_basis.reshape(len(A_basis), -1)
    q, _ = np.linalg.qr(flat.T)
    off_A = np.eye(N * N) - q @ q.conj().T
    # row-major vec(e x - x e) = (e (x) I - I (x) e^T) vec(x)
    rows = [np.kron(e, eye) - np.kron(eye, e.T) for e in units] + [off_A]
    ker = _kernel(np.concatenate(rows))
    return ker.T.reshape(-1, N, N)


def span_distance(u, v):
    """Largest distance between unit vectors of one span and the other, both ways."""
    def proj_err(a, b):
        qa = np.linalg.qr(np.asarray(a).reshape(len(a), -1).T)[0]
        qb = np.linalg.qr(np.asarray(b).reshape(len(b), -1).T)[0]
        return np.linalg.norm(qa - qb @ (qb.conj().T @ qa), ord=2)
    if len(u) != len(v):
        return np.inf
    if len(u) == 0:
        return 0.0
    return max(proj_err(u, v), proj_err(v, u))
