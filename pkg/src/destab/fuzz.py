"""Seeded generators that build valid instances from known factors.

Everything is assembled from block-diagonal pieces and then conjugated by
random unitaries, so each instance carries its expected answer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    DEFAULT_TOL,
    StarAlgebra,
    conjugate_algebra,
    direct_sum,
    full_matrix_algebra,
    kron,
    scalars,
)
from .bimodules import BimoduleUnits, LinkingAlgebraPresentation
from .category import KAlgMorphism, stabilize_morphism
from .correspondences import Correspondence, external_tensor_correspondence
from .destabilization import KAlgebra
from .morphisms import NdMorphism
from .units import MatrixUnitSystem, amplify_units

# stream tags keep generators independent for a shared seed
_STREAMS = {"algebra": 1, "kalgebra": 2, "bimodule": 3, "correspondence": 4, "morphism": 5, "pair": 6}


@dataclass(frozen=True)
class GenConfig:
    """``block_profile`` lists ``(block size, multiplicity)``; ``None`` draws one from the seed."""

    seed: int
    n: int = 2
    block_profile: tuple[tuple[int, int], ...] | None = None
    max_ambient: int = 24
    tol: float = DEFAULT_TOL
    broken: bool = False
    zero_bimodule: bool = False

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be at least 2")
        if self.block_profile is not None:
            profile = tuple((int(k), int(m)) for k, m in self.block_profile)
            if any(k < 1 or m < 1 for k, m in profile) or not profile:
                raise ValueError("block sizes and multiplicities must be positive")
            object.__setattr__(self, "block_profile", profile)
            if profile_size(profile) > self.max_ambient:
                raise ValueError(f"profile needs M_{profile_size(profile)}, cap is {self.max_ambient}")

    def rng(self, stream: str) -> np.random.Generator:
        return np.random.default_rng([self.seed & (2**64 - 1), _STREAMS[stream]])


def profile_size(profile) -> int:
    return sum(k * m for k, m in profile)


def random_unitary(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a complex Gaussian matrix."""
    z = (rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph[None, :]


def random_profile(rng: np.random.Generator, cap: int, max_blocks: int = 3) -> tuple[tuple[int, int], ...]:
    profile: list[tuple[int, int]] = []
    for _ in range(int(rng.integers(1, max_blocks + 1))):
        room = cap - profile_size(profile)
        if room < 1:
            break
        k = int(rng.integers(1, min(3, room) + 1))
        m = int(rng.integers(1, min(2, room // k) + 1))
        profile.append((k, m))
    return tuple(profile) or ((1, 1),)


def block_algebra(profile) -> StarAlgebra:
    """``(+)_i M_{k_i}^{(+) m_i}``: ``m_i`` independent copies of each block, block-diagonally."""
    alg = None
    for k, m in profile:
        for _ in range(m):
            piece = full_matrix_algebra(k)
            alg = piece if alg is None else direct_sum(alg, piece)
    return alg


def gen_star_algebra(cfg: GenConfig, cap: int | None = None) -> StarAlgebra:
    rng = cfg.rng("algebra")
    profile = cfg.block_profile or random_profile(rng, cap or cfg.max_ambient)
    if profile_size(profile) > (cap or cfg.max_ambient):
        raise ValueError("profile exceeds the ambient cap")
    B = block_algebra(profile)
    return conjugate_algebra(B, random_unitary(B.N, rng))


def gen_kalgebra(cfg: GenConfig) -> KAlgebra:
    """``u (B (x) M_n) u*`` with units ``u (1 (x) u_ij) u*``; ``planted`` is ``u (B (x) 1) u*``."""
    B = gen_star_algebra(cfg, cap=cfg.max_ambient // cfg.n)
    rng = cfg.rng("kalgebra")
    A = kron(B, full_matrix_algebra(cfg.n))
    u = random_unitary(A.N, rng)
    units = amplify_units(cfg.n, B.N)
    return KAlgebra(
        conjugate_algebra(A, u),
        MatrixUnitSystem(u @ units.e @ u.conj().T),
        planted=conjugate_algebra(kron(B, scalars(cfg.n)), u),
    )


def conjugate_units(e: MatrixUnitSystem, u) -> MatrixUnitSystem:
    return MatrixUnitSystem(u @ e.e @ u.conj().T)


@dataclass
class GeneratedBimodule:
    """A stabilized linking algebra with its units, and the small bimodule it came from."""

    link: LinkingAlgebraPresentation
    units: BimoduleUnits
    base: LinkingAlgebraPresentation
    expected: dict = field(default_factory=dict)


def _linking_blocks(blocks):
    """Linking algebra for blocks ``(a, b, mult, linked)``, reordered so the ``a`` parts come first."""
    p = sum(a * m for a, b, m, _ in blocks)
    q = sum(b * m for a, b, m, _ in blocks)
    N = p + q
    mats = []
    pos_p, pos_q = 0, p
    for a, b, m, linked in blocks:
        rows_p = [pos_p + i for i in range(a * m)]
        rows_q = [pos_q + i for i in range(b * m)]
        pos_p += a * m
        pos_q += b * m
        # index c of the (a + b)-dim block, copy t
        def place(c, t, a=a, rows_p=rows_p, rows_q=rows_q, m=m):
            return rows_p[c * m + t] if c < a else rows_q[(c - a) * m + t]

        size = a + b
        for i in range(size):
            for j in range(size):
                if not linked and (i < a) != (j < a):
                    continue
                x = np.zeros((N, N), dtype=complex)
                for t in range(m):
                    x[place(i, t), place(j, t)] = 1 / np.sqrt(m)
                mats.append(x)
    return StarAlgebra(N, np.stack(mats)), p, q


def gen_bimodule(cfg: GenConfig) -> GeneratedBimodule:
    """Block linking algebra, stabilized by ``M_n`` and conjugated by ``diag(V_p, V_q)``.

    Each block is ``M_{a+b} (x) 1_m`` when linked and ``(M_a (+) M_b) (x) 1_m``
    otherwise; ``zero_bimodule`` unlinks every block.
    """
    rng = cfg.rng("bimodule")
    cap = cfg.max_ambient // cfg.n
    blocks = []
    while not blocks or sum((a + b) * m for a, b, m, _ in blocks) < 2:
        blocks = []
        for _ in range(int(rng.integers(1, 3))):
            a, b = int(rng.integers(0, 3)), int(rng.integers(0, 3))
            if a + b == 0:
                a = 1
            m = int(rng.integers(1, 3))
            if sum((x + y) * z for x, y, z, _ in blocks) + (a + b) * m > cap:
                break
            blocks.append((a, b, m, (not cfg.zero_bimodule) and bool(rng.random() < 0.75)))
    if not any(b > 0 for _, b, _, _ in blocks) or not any(a > 0 for a, _, _, _ in blocks):
        a, b, m, linked = blocks[0]
        blocks[0] = (max(a, 1), max(b, 1), 1, linked)
    L0, p, q = _linking_blocks(blocks)
    Vp, Vq = random_unitary(p, rng), random_unitary(q, rng)
    V = np.zeros((p + q, p + q), dtype=complex)
    V[:p, :p], V[p:, p:] = Vp, Vq
    base = LinkingAlgebraPresentation(conjugate_algebra(L0, V), p, q)

    n = cfg.n
    # kron ordering keeps diag(1_p, 0) (x) 1_n = diag(1_{pn}, 0)
    L = kron(L0, full_matrix_algebra(n))
    Wp, Wq = random_unitary(p * n, rng), random_unitary(q * n, rng)
    W = np.zeros(((p + q) * n, (p + q) * n), dtype=complex)
    W[: p * n, : p * n], W[p * n :, p * n :] = Wp, Wq
    link = LinkingAlgebraPresentation(conjugate_algebra(L, W), p * n, q * n)
    units = BimoduleUnits(conjugate_units(amplify_units(n, p), Wp), conjugate_units(amplify_units(n, q), Wq))
    dim_x = sum(a * b for a, b, m, linked in blocks if linked)
    expected = {
        "dim_CX": dim_x,
        "right_full": all(linked and a > 0 for a, b, m, linked in blocks if b > 0),
        "left_full": all(linked and b > 0 for a, b, m, linked in blocks if a > 0),
        "blocks": blocks,
    }
    return GeneratedBimodule(link, units, base, expected)


def conjugate_correspondence(X: Correspondence, VA, Vm, VB) -> Correspondence:
    """``x -> Vm x VB*`` over ``Ad VA`` on ``A`` and ``Ad VB`` on ``B``."""
    A = conjugate_algebra(X.A, VA)
    B = conjugate_algebra(X.B, VB)
    return Correspondence(A, B, Vm @ X.X @ VB.conj().T, Vm @ X.phi @ Vm.conj().T)


@dataclass
class GeneratedCorrespondence:
    """``X`` over K-algebras with units ``iota`` and ``zeta``; ``base`` is the unstabilized factor."""

    X: Correspondence
    iota: MatrixUnitSystem
    zeta: MatrixUnitSystem
    base: Correspondence
    family: str = ""


def _column_family(rng, max_dim):
    m0 = int(rng.integers(1, min(3, max_dim) + 1))
    A0 = block_algebra(random_profile(rng, m0, max_blocks=m0)) if m0 > 1 else scalars(1)
    if A0.N != m0:  # pad the profile with one-dimensional blocks
        A0 = direct_sum(A0, block_algebra(((1, 1),) * (m0 - A0.N)))
    X0 = np.eye(m0, dtype=complex).reshape(m0, m0, 1)
    return Correspondence(A0, scalars(1), X0, A0.basis)


def _standard_family(rng, max_dim):
    k = int(rng.integers(2, min(3, max_dim) + 1))
    B0 = block_algebra(((1, 1),) * k)
    cut = int(rng.integers(1, k))
    # A0 = span{diag(1_cut, 0), diag(0, 1_rest)} inside B0
    d1 = np.diag([1.0] * cut + [0.0] * (k - cut)).astype(complex)
    d2 = np.eye(k, dtype=complex) - d1
    A0 = StarAlgebra(k, np.stack([d1 / np.sqrt(cut), d2 / np.sqrt(k - cut)]))
    return Correspondence(A0, B0, B0.basis, A0.basis)


def _row_family(rng, max_dim):
    X0 = np.eye(2, dtype=complex).reshape(2, 1, 2)
    return Correspondence(scalars(1), full_matrix_algebra(2), X0, np.ones((1, 1, 1), dtype=complex))


def gen_correspondence(cfg: GenConfig, max_dim: int = 12) -> GeneratedCorrespondence:
    """``(Y (x) M_n)`` conjugated on all three sides, where ``Y`` is a small conjugated correspondence.

    ``Y`` is one of: a column space over ``C`` with a subalgebra acting,
    a diagonal algebra over a coarser diagonal subalgebra, or a row space
    ``C``-``M_2``.  ``dim X = n^2 dim Y <= max_dim``.
    """
    rng = cfg.rng("correspondence")
    n = cfg.n
    room = max(1, max_dim // (n * n))
    families = [("column", _column_family)]
    if room >= 2:
        families += [("standard", _standard_family), ("row", _row_family)]
    name, make = families[int(rng.integers(len(families)))]
    Y0 = make(rng, room)
    Y = conjugate_correspondence(Y0, random_unitary(Y0.A.N, rng), random_unitary(Y0.m, rng),
                                 random_unitary(Y0.q, rng))
    S = external_tensor_correspondence(Y, n)
    WA, Wm, WB = random_unitary(S.A.N, rng), random_unitary(S.m, rng), random_unitary(S.q, rng)
    X = conjugate_correspondence(S, WA, Wm, WB)
    iota = conjugate_units(amplify_units(n, Y.A.N), WA)
    zeta = conjugate_units(amplify_units(n, Y.B.N), WB)
    return GeneratedCorrespondence(X, iota, zeta, Y, name)


def gen_nd_morphism(cfg: GenConfig) -> NdMorphism:
    """``a -> W diag(a (x) 1_r, a) W*`` into ``W ((A_0 (x) M_r) (+) M_p) W*``."""
    rng = cfg.rng("morphism")
    budget = cfg.max_ambient // cfg.n
    r = int(rng.integers(1, 3))
    cap = max(1, budget // (r + 1))
    profile = cfg.block_profile or random_profile(rng, cap)
    A0 = block_algebra(profile)
    p = A0.N
    if p * (r + 1) > budget:
        raise ValueError("profile exceeds the ambient cap")
    B0 = direct_sum(kron(A0, full_matrix_algebra(r)), full_matrix_algebra(p))
    images0 = np.zeros((A0.dim, B0.N, B0.N), dtype=complex)
    images0[:, : p * r, : p * r] = np.einsum("kab,ij->kaibj", A0.basis, np.eye(r)).reshape(A0.dim, p * r, p * r)
    images0[:, p * r :, p * r :] = A0.basis
    V, W = random_unitary(p, rng), random_unitary(B0.N, rng)
    A = conjugate_algebra(A0, V)
    B = conjugate_algebra(B0, W)
    return NdMorphism(A, B, W @ images0 @ W.conj().T)


def gen_morphism(cfg: GenConfig, kind: str = "kalg") -> NdMorphism | KAlgMorphism:
    """``kind="nd"``: a unital *-homomorphism; ``kind="kalg"``: its stabilization between conjugated K-algebras.

    With ``cfg.broken`` the K-algebra morphism is followed by ``Ad(1 (x) v)``
    for a random unitary ``v`` in ``M_n``, which breaks the unit condition.
    """
    phi = gen_nd_morphism(cfg)
    if kind == "nd":
        return phi
    if kind != "kalg":
        raise ValueError("kind must be 'nd' or 'kalg'")
    rng = cfg.rng("morphism")
    rng.random(17)  # move past the draws used above
    n = cfg.n
    psi = stabilize_morphism(phi, n)
    UA, UB = random_unitary(psi.source.N, rng), random_unitary(psi.target.N, rng)
    src = KAlgebra(conjugate_algebra(psi.source.A, UA), conjugate_units(psi.source.iota, UA),
                   planted=conjugate_algebra(psi.source.planted, UA))
    tgt = KAlgebra(conjugate_algebra(psi.target.A, UB), conjugate_units(psi.target.iota, UB),
                   planted=conjugate_algebra(psi.target.planted, UB))
    images = UB @ psi.phi.images @ UB.conj().T
    if cfg.broken:
        v = np.kron(np.eye(phi.target.N), random_unitary(n, rng))
        vv = UB @ v @ UB.conj().T
        images = vv @ images @ vv.conj().T
    return KAlgMorphism(src, tgt, NdMorphism(src.A, tgt.A, images))


def random_unitary_in(A: StarAlgebra, rng: np.random.Generator) -> np.ndarray:
    """``exp(i h)`` for a random self-adjoint ``h`` in ``A``."""
    x = A.random_element(rng)
    h = (x + x.conj().T) / 2
    w, V = np.linalg.eigh(h)
    return (V * np.exp(1j * w)[None, :]) @ V.conj().T


def gen_conjugate_pair(cfg: GenConfig):
    """``(KA, iota2, u)`` with ``iota2 = Ad u o iota`` for a planted unitary ``u`` in ``A``."""
    KA = gen_kalgebra(cfg)
    u = random_unitary_in(KA.A, cfg.rng("pair"))
    return KA, conjugate_units(KA.iota, u), u


def gen_mismatched_pair(cfg: GenConfig):
    """Unit systems of sizes ``n`` and ``2n`` in one algebra ``B (x) M_{2n}``.

    Returns ``(A, iota_small, iota_large)``; the small system has
    multiplicity two relative to the large one.
    """
    B = gen_star_algebra(cfg, cap=max(1, cfg.max_ambient // (2 * cfg.n)))
    n = cfg.n
    A = kron(B, full_matrix_algebra(2 * n))
    large = amplify_units(2 * n, B.N)
    small_e = np.einsum("ab,ijcd,ef->ijacebdf", np.eye(B.N), amplify_units(n, 1).e, np.eye(2))
    small = MatrixUnitSystem(small_e.reshape(n, n, A.N, A.N))
    u = random_unitary(A.N, cfg.rng("pair"))
    return conjugate_algebra(A, u), conjugate_units(small, u), conjugate_units(large, u)
