import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from destab.algebra import StarAlgebra, conjugate_algebra, full_matrix_algebra, kron, same_span, scalars
from destab.category import stabilize_object
from destab.destabilization import (
    KAlgebra,
    commutator_residual,
    corner_decomposition,
    corner_isomorphism,
    destabilize,
    idealizer_check,
    idealizer_report,
    norm_multiplicativity_check,
    psi,
    relative_commutant,
    sigma,
    tau,
    tau_inverse,
    theta,
    theta_inverse,
    theta_map,
    untensor,
)
from destab.errors import InvalidInputError
from destab.fuzz import GenConfig, block_algebra, gen_kalgebra, random_unitary
from destab.units import amplify_units, conjugate_units, standard_unit, standard_units
from oracles import brute_commutant, span_distance

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def kalg(seed, n=2, cap=12):
    return gen_kalgebra(GenConfig(seed, n=n, max_ambient=cap))


def conjugated_m4(seed=0):
    u = random_unitary(4, np.random.default_rng(seed))
    return KAlgebra(full_matrix_algebra(4), conjugate_units(amplify_units(2, 2), u)), u


def test_commutant_of_standard_units_is_scalars():
    C = relative_commutant(KAlgebra(full_matrix_algebra(3), standard_units(3)))
    assert C.dim == 1
    assert same_span(C, scalars(3))[0]


@pytest.mark.parametrize("profile", [((1, 1),), ((2, 1),), ((1, 1), (2, 1)), ((3, 1),)])
def test_stabilized_commutant_is_b_tensor_one(profile):
    B = block_algebra(profile)
    KA = stabilize_object(B, 2)
    C = relative_commutant(KA)
    assert C.dim == B.dim
    assert same_span(C, kron(B, scalars(2)))[0]


def test_conjugated_m4_against_brute_force():
    KA, u = conjugated_m4()
    C = relative_commutant(KA)
    assert C.dim == 4
    expected = conjugate_algebra(kron(full_matrix_algebra(2), scalars(2)), u)
    assert same_span(C, expected)[0]
    assert span_distance(C.basis, brute_commutant(KA.A.basis, KA.iota.flat)) < 1e-9


def test_units_outside_algebra_rejected():
    # the diagonal algebra of M_2 does not contain u_12
    diag = StarAlgebra(2, np.stack([np.diag([1.0, 0]), np.diag([0, 1.0])]).astype(complex))
    KA = KAlgebra(diag, standard_units(2))
    assert not KA.validate().passed
    with pytest.raises(InvalidInputError):
        relative_commutant(KA)
    with pytest.raises(ValueError):
        KAlgebra(full_matrix_algebra(3), standard_units(2))


def test_corner_dimensions():
    grid = corner_decomposition(KAlgebra(full_matrix_algebra(2), standard_units(2)))
    assert [[len(g) for g in row] for row in grid] == [[1, 1], [1, 1]]
    grid = corner_decomposition(stabilize_object(full_matrix_algebra(2), 2))
    assert [[len(g) for g in row] for row in grid] == [[4, 4], [4, 4]]


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_corner_dimensions_add_up(seed, n):
    KA = kalg(seed, n)
    grid = corner_decomposition(KA)
    assert sum(len(g) for row in grid for g in row) == KA.A.dim
    assert len({len(g) for row in grid for g in row}) == 1


def test_tau_examples():
    KA = stabilize_object(full_matrix_algebra(2), 2)
    rng = np.random.default_rng(3)
    e = KA.iota.e
    a00 = e[0, 0] @ KA.A.random_element(rng) @ e[0, 0]
    assert np.allclose(tau(KA, 0, 0, a00), a00)
    a01 = e[0, 0] @ KA.A.random_element(rng) @ e[1, 1]
    back = tau_inverse(KA, 0, 1, tau(KA, 0, 1, a01))
    assert np.linalg.norm(back - a01) < 1e-12
    assert np.linalg.norm(tau(KA, 0, 1, a01)) == pytest.approx(np.linalg.norm(a01))
    with pytest.raises(InvalidInputError):
        tau(KA, 0, 1, np.eye(4))


def test_psi_sigma_examples():
    KA = stabilize_object(full_matrix_algebra(2), 2)
    e = KA.iota.e
    assert np.allclose(psi(KA, np.eye(4)), e[0, 0])
    b = np.array([[1, 2j], [3, -1]])
    assert np.allclose(psi(KA, np.kron(b, np.eye(2))), np.kron(b, standard_unit(2, 0, 0)))
    assert np.allclose(sigma(KA, e[0, 0]), np.eye(4))
    assert np.allclose(sigma(KA, np.kron(b, standard_unit(2, 0, 0))), np.kron(b, np.eye(2)))
    with pytest.raises(InvalidInputError):
        psi(KA, e[0, 1])


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_psi_sigma_inverse_pair(seed, n):
    KA = kalg(seed, n)
    C = relative_commutant(KA)
    corner = corner_decomposition(KA)[0][0]
    for c in C.basis:
        assert np.linalg.norm(sigma(KA, psi(KA, c)) - c) < 1e-8
    for d in corner:
        assert np.linalg.norm(psi(KA, sigma(KA, d)) - d) < 1e-8
        assert commutator_residual(KA.iota, sigma(KA, d)) < 1e-8
    # psi is a *-homomorphism on C
    for x in C.basis[:3]:
        for y in C.basis[:3]:
            assert np.linalg.norm(psi(KA, x @ y) - psi(KA, x) @ psi(KA, y)) < 1e-8


def test_theta_canonical_on_full_matrices():
    KA = KAlgebra(full_matrix_algebra(2), standard_units(2))
    C, cert = destabilize(KA)
    assert cert.passed and C.dim == 1
    # theta(1 (x) k) = k
    k = np.array([[1, 2], [3j, 4]])
    assert np.allclose(theta_map(KA, np.kron(np.eye(2), k)), k)


def test_theta_on_stabilized_algebra():
    KA = stabilize_object(full_matrix_algebra(2), 3)
    b = np.array([[0, 1], [1j, 2]])
    x = np.kron(np.kron(b, np.eye(3)), standard_unit(3, 0, 2))
    assert np.allclose(theta_map(KA, x), np.kron(b, standard_unit(3, 0, 2)))
    assert theta(KA).passed


@settings(max_examples=25, deadline=None)
@given(seeds, st.sampled_from([2, 3]))
def test_theta_certificate_and_inverse(seed, n):
    KA = kalg(seed, n)
    C, cert = destabilize(KA)
    assert cert.passed
    assert KA.A.dim == n * n * C.dim
    assert same_span(C, KA.planted)[0]
    assert np.isfinite(cert.condition)
    back = theta_inverse(KA, theta_map(KA, cert.source.basis))
    assert np.max(np.abs(back - cert.source.basis)) < 1e-8


@settings(max_examples=20, deadline=None)
@given(seeds)
def test_conjugation_covariance(seed):
    KA = kalg(seed)
    u = random_unitary(KA.N, np.random.default_rng(seed))
    moved = KAlgebra(conjugate_algebra(KA.A, u), conjugate_units(KA.iota, u))
    assert same_span(relative_commutant(moved), conjugate_algebra(relative_commutant(KA), u))[0]


def test_corner_isomorphism_is_theta_inverse_up_to_sigma():
    KA = kalg(5)
    a = KA.A.random_element(np.random.default_rng(0))
    phi_a = corner_isomorphism(KA, a)
    n, N = KA.n, KA.N
    # sigma applied to each slot of phi(a) gives theta^{-1}(a)
    blocks = phi_a.reshape(N, n, N, n)
    rebuilt = np.zeros_like(phi_a).reshape(N, n, N, n)
    for i in range(n):
        for j in range(n):
            rebuilt[:, i, :, j] = sigma(KA, blocks[:, i, :, j])
    assert np.linalg.norm(rebuilt.reshape(N * n, N * n) - theta_inverse(KA, a)) < 1e-10


def test_norm_examples():
    KA = stabilize_object(full_matrix_algebra(2), 2)
    k = standard_unit(2, 0, 1)
    assert np.linalg.norm(KA.iota.embed(k), ord=2) == pytest.approx(1)
    b = np.array([[2, 1], [0, 1j]])
    lhs = np.linalg.norm(np.kron(b, np.eye(2)) @ KA.iota.embed(k + 3 * standard_unit(2, 1, 1)), ord=2)
    rhs = np.linalg.norm(b, ord=2) * np.linalg.norm(k + 3 * standard_unit(2, 1, 1), ord=2)
    assert lhs == pytest.approx(rhs)
    assert norm_multiplicativity_check(KA) <= 1e-7


def test_idealizer_on_example_families():
    assert idealizer_check(KAlgebra(full_matrix_algebra(3), standard_units(3)))
    assert idealizer_check(stabilize_object(full_matrix_algebra(2), 2))
    rep = idealizer_report(conjugated_m4()[0])
    assert rep.passed, rep


def test_untensor():
    b = np.arange(4.0).reshape(2, 2)
    assert np.allclose(untensor(np.kron(b, np.eye(3)), 3), b)
    assert np.allclose(untensor(np.stack([np.kron(b, np.eye(2))] * 2), 2), np.stack([b, b]))
