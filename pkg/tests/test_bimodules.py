import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from destab.algebra import StarAlgebra, full_matrix_algebra, kron, same_span, scalars
from destab.bimodules import (
    BimoduleUnits,
    HilbertBimodule,
    LinkingAlgebraPresentation,
    bimodule_relative_commutant,
    bimodule_roundtrip_check,
    bimodule_theta,
    build_linking,
    corner_identity_report,
    external_tensor_bimodule,
    fullness,
)
from destab.destabilization import KAlgebra, relative_commutant, theta_map
from destab.errors import InvalidInputError
from destab.fuzz import GenConfig, gen_bimodule
from destab.units import amplify_units, standard_units
from oracles import brute_commutant, span_distance

seeds = st.integers(min_value=0, max_value=2**32 - 1)

DIAG2 = StarAlgebra(2, np.stack([np.diag([1.0, 0]), np.diag([0, 1.0])]).astype(complex))


def column_space():
    return np.eye(2, dtype=complex).reshape(2, 2, 1)


def test_column_link_is_full_matrices():
    link = build_linking(full_matrix_algebra(2), scalars(1), column_space())
    assert link.L.dim == 9
    assert link.validate().passed
    HB = HilbertBimodule(link)
    assert HB.validate().passed
    assert fullness(HB) == {"right_full": True, "left_full": True}


def test_scalar_link_and_zero_bimodule():
    full = build_linking(scalars(1), scalars(1), np.ones((1, 1, 1)))
    assert full.L.dim == 4
    assert fullness(HilbertBimodule(full)) == {"right_full": True, "left_full": True}
    zero = build_linking(scalars(1), scalars(1), np.zeros((0, 1, 1)))
    assert zero.L.dim == 2 and len(zero.X) == 0
    assert fullness(HilbertBimodule(zero)) == {"right_full": False, "left_full": False}


def test_first_coordinate_over_full_matrices_rejected():
    X = np.array([[[1.0], [0.0]]], dtype=complex)
    with pytest.raises(InvalidInputError) as info:
        build_linking(full_matrix_algebra(2), scalars(1), X)
    assert "left_action" in info.value.residuals


def test_first_coordinate_over_diagonals_not_left_full():
    X = np.array([[[1.0], [0.0]]], dtype=complex)
    HB = HilbertBimodule(build_linking(DIAG2, scalars(1), X))
    assert fullness(HB) == {"right_full": True, "left_full": False}


def test_build_linking_shape_checked():
    with pytest.raises(ValueError):
        build_linking(full_matrix_algebra(2), scalars(1), np.zeros((1, 1, 2)))


def test_linking_validation_catches_non_link():
    # M_3 with p = 1 is fine, but a link missing the projection is not
    bad = StarAlgebra(2, np.stack([np.eye(2) / np.sqrt(2), np.array([[0, 1], [1, 0]]) / np.sqrt(2)]).astype(complex))
    link = LinkingAlgebraPresentation(bad, 1, 1)
    assert not link.validate().passed
    with pytest.raises(InvalidInputError):
        link.check()
    with pytest.raises(ValueError):
        LinkingAlgebraPresentation(bad, 1, 2)


def test_full_matrix_bimodule_commutant_is_one_dimensional():
    n = 3
    link = build_linking(full_matrix_algebra(n), full_matrix_algebra(n), full_matrix_algebra(n).basis)
    units = BimoduleUnits(standard_units(n), standard_units(n))
    HC = bimodule_relative_commutant(link, units)
    assert HC.dim == 1 and HC.A.dim == 1 and HC.B.dim == 1
    assert bimodule_theta(link, units).passed


def test_units_outside_link_rejected():
    link = build_linking(DIAG2, DIAG2, DIAG2.basis)
    with pytest.raises(InvalidInputError):
        bimodule_relative_commutant(link, BimoduleUnits(standard_units(2), standard_units(2)))


def test_units_of_wrong_size_rejected():
    link = build_linking(full_matrix_algebra(2), scalars(1), column_space())
    with pytest.raises(ValueError):
        bimodule_relative_commutant(link, BimoduleUnits(standard_units(2), standard_units(2)))
    with pytest.raises(ValueError):
        BimoduleUnits(standard_units(2), standard_units(3))


def test_omega_validates():
    units = BimoduleUnits(amplify_units(2, 3), amplify_units(2, 1))
    assert units.omega.validate().passed
    assert units.omega.N == 8


def test_external_tensor_examples():
    link = build_linking(full_matrix_algebra(2), scalars(1), column_space())
    one, _ = external_tensor_bimodule(link, 1)
    assert same_span(one.L, link.L)[0]
    big, units = external_tensor_bimodule(HilbertBimodule(link), 3)
    assert len(big.X) == 9 * len(link.X)
    assert (big.p, big.q, units.n) == (6, 3, 3)


def test_roundtrip_on_example_families():
    assert bimodule_roundtrip_check(build_linking(full_matrix_algebra(2), scalars(1), column_space()), 2).passed
    assert bimodule_roundtrip_check(build_linking(scalars(1), scalars(1), np.zeros((0, 1, 1))), 2).passed
    X = np.array([[[1.0], [0.0]]], dtype=complex)
    rep = bimodule_roundtrip_check(build_linking(DIAG2, scalars(1), X), 3)
    assert rep.passed, rep.failures()


def test_theta_maps_p_tensor_one_to_p():
    g = gen_bimodule(GenConfig(2))
    CL, rep = corner_identity_report(g.link, g.units)
    assert rep.passed
    P = g.link.p_proj
    KL = KAlgebra(g.link.L, g.units.omega)
    assert np.linalg.norm(theta_map(KL, np.kron(P, np.eye(g.units.n))) - P) < 1e-12


@settings(max_examples=20, deadline=None)
@given(seeds, st.sampled_from([2, 3]), st.booleans())
def test_generated_bimodules(seed, n, zero):
    g = gen_bimodule(GenConfig(seed, n=n, max_ambient=12, zero_bimodule=zero))
    assert g.link.validate().passed
    assert HilbertBimodule(g.link).validate().passed
    # rebuilding the link from its own corners gives the same algebra
    rebuilt = build_linking(g.link.A, g.link.B, g.link.X)
    assert same_span(rebuilt.L, g.link.L)[0]
    _, rep = corner_identity_report(g.link, g.units)
    assert rep.passed, rep.failures()
    cert = bimodule_theta(g.link, g.units)
    assert cert.passed, cert.failures()
    assert cert.commutant.dim == g.expected["dim_CX"]
    before, after = fullness(HilbertBimodule(g.link)), fullness(cert.commutant)
    assert before == after
    assert before == {"right_full": g.expected["right_full"], "left_full": g.expected["left_full"]}
    imprimitivity = lambda f: f["right_full"] and f["left_full"]
    assert imprimitivity(before) == imprimitivity(after)
    assert bimodule_roundtrip_check(g.base, n).passed
    if zero:
        assert cert.commutant.dim == 0


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_corner_matches_brute_force_on_link(seed):
    g = gen_bimodule(GenConfig(seed, max_ambient=10))
    HC = bimodule_relative_commutant(g.link, g.units)
    brute = brute_commutant(g.link.L.basis, g.units.omega.flat)
    assert span_distance(HC.linking.L.basis, brute) < 1e-8
    p = g.link.p
    corner = brute[:, :p, p:]
    corner = corner[np.linalg.norm(corner.reshape(len(corner), -1), axis=1) > 1e-9]
    rank = np.linalg.matrix_rank(corner.reshape(len(corner), -1), tol=1e-8) if len(corner) else 0
    assert rank == HC.dim


def test_commutant_of_stabilized_link_matches_base():
    g = gen_bimodule(GenConfig(11, n=2))
    HC = bimodule_relative_commutant(g.link, g.units)
    assert HC.dim == len(g.base.X)
    assert relative_commutant(KAlgebra(g.link.L, g.units.omega)).dim == g.base.L.dim


def test_kron_link_keeps_blocks():
    link = build_linking(full_matrix_algebra(2), scalars(1), column_space())
    big = kron(link.L, full_matrix_algebra(2))
    assert big.dim == 36
