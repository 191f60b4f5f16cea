"""Small composable correspondences for tensor-product tests."""

import numpy as np

from destab.algebra import conjugate_algebra, full_matrix_algebra, kron
from destab.correspondences import standard_correspondence
from destab.fuzz import GenConfig, gen_correspondence, random_unitary
from destab.morphisms import NdMorphism


def amplification(B, r, rng):
    """``b -> W (b (x) 1_r) W*`` into ``W (B (x) M_r) W*``."""
    W = random_unitary(B.N * r, rng)
    target = conjugate_algebra(kron(B, full_matrix_algebra(r)), W)
    images = W @ np.einsum("kab,ij->kaibj", B.basis, np.eye(r)).reshape(B.dim, B.N * r, B.N * r) @ W.conj().T
    return NdMorphism(B, target, images)


def composable(seed, count=2, max_dim=4):
    """``count`` correspondences ``X_1, X_2, ...`` with ``X_i.B`` equal to ``X_{i+1}.A``."""
    rng = np.random.default_rng(seed)
    first = gen_correspondence(GenConfig(seed, n=2), max_dim=4 * max_dim).base
    chain = [first]
    while len(chain) < count:
        B = chain[-1].B
        r = 1 if B.N > 2 else int(rng.integers(1, 3))
        chain.append(standard_correspondence(amplification(B, r, rng)))
    return chain
