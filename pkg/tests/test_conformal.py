from math import pi, sqrt

import numpy as np
import pytest

from calderon.conformal import (
    ConformalMapSpec,
    boundary_constants,
    boundary_l2_norm,
    domain_data_matrix,
    domain_hs_norm,
    domain_l2_norm,
    invariance_check,
    map_derivative,
    map_eval,
    pull_back,
    push_forward,
    transform_neumann,
)
from calderon.forward import assemble
from calderon.zernike import ZernikeCoeffs, l2_norm

from conftest import random_coeffs

QUAD = ConformalMapSpec.quadratic(1, 0.2)


def test_identity_map():
    spec = ConformalMapSpec.identity()
    assert map_eval(spec, 0.3 + 0.4j) == 0.3 + 0.4j
    assert map_derivative(spec, 0.3 + 0.4j) == 1


def test_quadratic_derivative():
    assert abs(map_derivative(QUAD, 1.0)) == pytest.approx(1.4)
    assert abs(map_derivative(QUAD, -1.0)) == pytest.approx(0.6)


def test_degenerate_moebius_is_identity():
    spec = ConformalMapSpec.moebius(0, 0)
    w = np.array([0.1, -0.5j, 0.7 + 0.2j])
    np.testing.assert_allclose(map_eval(spec, w), w)
    np.testing.assert_allclose(map_derivative(spec, w), 1)


def test_map_rejects_outside_disk():
    with pytest.raises(ValueError):
        map_eval(QUAD, 1.5)


def test_map_parameter_validation():
    with pytest.raises(ValueError):
        ConformalMapSpec.quadratic(1, 0.5)
    with pytest.raises(ValueError):
        ConformalMapSpec.moebius(1.0)
    with pytest.raises(ValueError):
        ConformalMapSpec("spline")


@pytest.mark.parametrize(
    "spec", [QUAD, ConformalMapSpec.moebius(0.3 - 0.4j, 0.7), ConformalMapSpec.quadratic(2j, 0.5)]
)
def test_inverse_map(spec):
    rng = np.random.default_rng(3)
    w = np.sqrt(rng.random(50)) * np.exp(2j * pi * rng.random(50))
    np.testing.assert_allclose(spec.psi(spec.phi(w)), w, atol=1e-12)
    np.testing.assert_allclose(spec.dpsi(spec.phi(w)) * spec.dphi(w), 1, atol=1e-12)


def test_spec_dict_round_trip():
    spec = ConformalMapSpec.moebius(0.2 + 0.1j, 0.3)
    assert ConformalMapSpec.from_dict(spec.to_dict()) == spec
    alt = ConformalMapSpec.from_dict({"kind": "quadratic", "params": {"c1": [1, 0], "c2": 0.2}})
    assert alt == QUAD


def test_constants_identity():
    c = boundary_constants(ConformalMapSpec.identity())
    assert c.min_boundary_deriv == 1 and c.max_boundary_deriv == 1
    assert c.corollary_constant == pytest.approx(sqrt(pi))


def test_constants_quadratic():
    c = boundary_constants(QUAD)
    assert c.min_boundary_deriv == pytest.approx(0.6, abs=1e-9)
    assert c.max_boundary_deriv == pytest.approx(1.4, abs=1e-9)
    assert c.corollary_constant == pytest.approx(sqrt(pi) * 7 / 3, rel=1e-9)


def test_constants_moebius():
    c = boundary_constants(ConformalMapSpec.moebius(0.5))
    assert c.max_boundary_deriv == pytest.approx(3, abs=1e-9)
    assert c.min_boundary_deriv == pytest.approx(1 / 3, abs=1e-9)


def test_constants_off_grid_extremum():
    # rotate the extreme points away from every sample angle
    spec = ConformalMapSpec.quadratic(1, 0.2 * np.exp(0.0123j))
    c = boundary_constants(spec, n_samples=64)
    assert c.min_boundary_deriv == pytest.approx(0.6, abs=1e-9)
    assert c.max_boundary_deriv == pytest.approx(1.4, abs=1e-9)


def test_transform_neumann_identity():
    s = transform_neumann(1, ConformalMapSpec.identity(), 64)
    np.testing.assert_allclose(s.values, np.exp(1j * s.theta) / sqrt(2 * pi))
    assert boundary_l2_norm(s) == pytest.approx(1)


def test_transform_neumann_quadratic():
    s = transform_neumann(1, QUAD, 64)
    expected = np.exp(1j * s.theta) / (sqrt(2 * pi) * np.abs(1 + 0.4 * np.exp(1j * s.theta)))
    np.testing.assert_allclose(s.values, expected)


def test_transform_neumann_conjugate_symmetry():
    a = transform_neumann(3, QUAD, 128)
    b = transform_neumann(-3, QUAD, 128)
    np.testing.assert_allclose(a.values, np.conj(b.values))


def test_transform_neumann_zero_mode():
    with pytest.raises(ValueError):
        transform_neumann(0, QUAD)


def test_pull_back_constant():
    eta = pull_back(ZernikeCoeffs({(0, 0): 1.0}), QUAD)
    z = QUAD.phi(np.array([0, 0.5, -0.9j, 1.0]))
    np.testing.assert_allclose(eta(z), 1 / sqrt(pi))


def test_push_pull_identity(rng):
    coeffs = random_coeffs(rng, 3, 3)
    spec = ConformalMapSpec.identity()
    back, residual = push_forward(pull_back(coeffs, spec), spec, 3, 3)
    np.testing.assert_allclose(back.to_array(), coeffs.to_array(), atol=1e-10)
    assert residual < 1e-10


def test_push_pull_quadratic():
    coeffs = ZernikeCoeffs({(1, 0): 1.0})
    back, residual = push_forward(pull_back(coeffs, QUAD), QUAD, 3, 3)
    assert back.get((1, 0)) == pytest.approx(1, abs=1e-10)
    assert residual < 1e-10


def test_invariance_examples():
    coeffs = ZernikeCoeffs({(0, 0): 1.0})
    disk, dom = invariance_check(coeffs, ConformalMapSpec.identity(), 2, 2)
    assert disk == pytest.approx(dom, abs=1e-14)
    disk, dom = invariance_check(coeffs, QUAD, 1, 1)
    assert abs(disk - dom) < 1e-6
    assert invariance_check(coeffs, QUAD, 1, -1) == (0, 0)


def test_domain_data_matches_disk(rng):
    coeffs = random_coeffs(rng, 2, 3)
    data, modes = domain_data_matrix(coeffs, QUAD, 5)
    op = assemble(coeffs, 5)
    for i, m in enumerate(modes):
        for k, n in enumerate(modes):
            assert data[i, k] == pytest.approx(op.entry(m, n), abs=1e-9)


def test_norm_chains():
    c = boundary_constants(QUAD)
    coeffs = ZernikeCoeffs({(0, 0): 0.7, (2, 0): -0.4j, (-1, 1): 0.5})
    disk = l2_norm(coeffs)
    dom = domain_l2_norm(pull_back(coeffs, QUAD), QUAD)
    assert disk / c.max_psi_deriv <= dom <= c.max_boundary_deriv * disk

    N = 12
    data, _ = domain_data_matrix(coeffs, QUAD, N)
    hs_disk = assemble(coeffs, N).frobenius_norm()
    hs_dom = domain_hs_norm(data, QUAD, N)
    assert hs_disk / c.max_psi_deriv <= hs_dom <= c.max_boundary_deriv * hs_disk
