from math import pi, sqrt

import mpmath
import numpy as np
import pytest

from calderon.forward import BandedBoundaryOperator, assemble
from calderon.reconstruction import (
    InsufficientTruncationError,
    NoWitnessError,
    ReconstructionRequest,
    amplification_factor,
    dense_monomial_check,
    injectivity_witness,
    monomial_residual,
    probe_cell,
    recover_layer,
    reconstruct,
    required_modes,
)
from calderon.zernike import ZernikeCoeffs

from conftest import random_coeffs, sparse_coeffs


@pytest.mark.parametrize(
    "K, expected",
    [(0, [-1, 1]), (2, [-3, -2, -1, 1, 2, 3])],
)
def test_required_modes(K, expected):
    assert sorted(required_modes(K)) == expected


def test_required_modes_count():
    assert len(required_modes(5)) == 12


def test_layer_examples():
    data = assemble(ZernikeCoeffs({(0, 0): 1.0}), 3)
    layer = recover_layer(data, ZernikeCoeffs(), 0, 0)
    assert layer[0] == pytest.approx(1.0, abs=1e-14)

    data = assemble(ZernikeCoeffs({(0, 1): 1.0}), 3)
    layer = recover_layer(data, ZernikeCoeffs({(0, 0): 0.0}), 1, 0)
    assert layer[0] == pytest.approx(1.0, abs=1e-14)

    zero = BandedBoundaryOperator.from_entries(6, {})
    assert all(v == 0 for v in recover_layer(zero, ZernikeCoeffs(), 2, 3).values())


def test_round_trip_single_basis():
    data = assemble(ZernikeCoeffs({(-3, 2): 1.0}), 64)
    out = reconstruct(ReconstructionRequest(data, 2, 3))
    assert out.get((-3, 2)) == pytest.approx(1.0, abs=1e-10)
    others = [abs(v) for key, v in out.items() if key != (-3, 2)]
    assert max(others, default=0.0) < 1e-10


def test_round_trip_zero():
    out = reconstruct(ReconstructionRequest(BandedBoundaryOperator.from_entries(10, {}), 3, 4))
    assert all(v == 0 for v in out.values())


def test_round_trip_random(rng):
    for _ in range(5):
        eta = random_coeffs(rng, 4, 12)
        out = reconstruct(ReconstructionRequest(assemble(eta, 64), 4, 12))
        err = np.max(np.abs(out.to_array() - eta.to_array()))
        assert err <= 1e-9 * np.max(np.abs(eta.to_array()))


def test_round_trip_at_minimal_truncation(rng):
    K, J = 3, 5
    eta = random_coeffs(rng, K, J)
    out = reconstruct(ReconstructionRequest(assemble(eta, J + K + 1), K, J))
    np.testing.assert_allclose(out.to_array(), eta.to_array(), atol=1e-10)


def test_insufficient_truncation():
    data = assemble(ZernikeCoeffs({(0, 0): 1.0}), 4)
    with pytest.raises(InsufficientTruncationError):
        ReconstructionRequest(data, 2, 2)


def test_layer_locality(rng):
    # layer k only reads the probe cells of orders <= k
    eta = random_coeffs(rng, 3, 4)
    data = dict(assemble(eta, 20).items())
    used = {probe_cell(j, k) for j in range(-4, 5) for k in range(4)}
    for key in data:
        if key not in used:
            data[key] = 1e6
    out = reconstruct(ReconstructionRequest(BandedBoundaryOperator.from_entries(20, data), 3, 4))
    np.testing.assert_allclose(out.to_array(), eta.to_array(), atol=1e-10)


def test_amplification_factor_is_sensitivity():
    eps = 1e-7
    for j, k in [(0, 0), (2, 1), (-3, 2), (1, 3)]:
        data = BandedBoundaryOperator.from_entries(12, {probe_cell(j, k): eps})
        out = reconstruct(ReconstructionRequest(data, k, 4))
        assert abs(out.get((j, k))) == pytest.approx(amplification_factor(j, k) * eps, rel=1e-12)


def test_amplification_values():
    assert amplification_factor(0, 0) == pytest.approx(sqrt(pi))
    assert amplification_factor(0, 1) == pytest.approx(sqrt(3 * pi) * 2)


def test_witness_examples():
    w = injectivity_witness(ZernikeCoeffs({(1, 0): 1.0}))
    assert (w.m, w.n) == (1, 2)
    assert w.value == pytest.approx(-sqrt(2) / (2 * sqrt(pi)), abs=1e-12)
    w = injectivity_witness(ZernikeCoeffs({(0, 0): 1.0}))
    assert (w.m, w.n) == (1, 1)
    assert w.value == pytest.approx(-1 / sqrt(pi), abs=1e-12)
    with pytest.raises(NoWitnessError):
        injectivity_witness(ZernikeCoeffs())


def test_witness_matches_data(rng):
    for _ in range(20):
        eta = sparse_coeffs(rng, 3, 5, int(rng.integers(1, 5)))
        w = injectivity_witness(eta)
        assert abs(w.value) > 1e-12
        M = max(abs(w.m), abs(w.n))
        assert assemble(eta, M).entry(w.m, w.n) == pytest.approx(w.value, abs=1e-12)


def test_witness_for_high_order_cancellation():
    # psi_{0,2} has vanishing moments for n0 = 0, 2
    w = injectivity_witness(ZernikeCoeffs({(0, 2): 1.0}))
    assert w.n0 == 4
    assert assemble(ZernikeCoeffs({(0, 2): 1.0}), 4).entry(w.m, w.n) == pytest.approx(w.value)


def _gram_residual(n, poly, n_terms=41):
    """Least-squares residual through the exact Gram matrix in 60-digit arithmetic."""
    mpmath.mp.dps = 60
    powers = [n + 2 * i for i in range(n_terms)]
    G = mpmath.matrix(n_terms, n_terms)
    b = mpmath.matrix(n_terms, 1)
    for a, pa in enumerate(powers):
        for c, pc in enumerate(powers):
            G[a, c] = mpmath.mpf(1) / (pa + pc + 1)
        b[a] = sum(mpmath.mpf(coef) / (pa + d + 1) for d, coef in enumerate(poly))
    x = mpmath.lu_solve(G, b)
    ff = sum(
        mpmath.mpf(ci) * mpmath.mpf(cj) / (i + j + 1)
        for i, ci in enumerate(poly)
        for j, cj in enumerate(poly)
    )
    proj = sum(x[i] * b[i] for i in range(n_terms))
    return float(mpmath.sqrt(max(ff - proj, 0)))


def test_monomial_residual_matches_gram_oracle():
    res, _ = monomial_residual(0, [0, 0, 0, 1])
    assert res == pytest.approx(_gram_residual(0, [0, 0, 0, 1]), rel=1e-3)


@pytest.mark.parametrize(
    "n, poly, tol, expected",
    [(0, [0, 0, 0, 1], 1e-6, True), (2, [0, 0, 1], 1e-12, True), (0, [0], 1e-12, True)],
)
def test_dense_monomial_check_examples(n, poly, tol, expected):
    assert dense_monomial_check(n, poly, tol) is expected


def test_dense_monomial_check_rejects_outside_span():
    # x^0 is not close to span{x^{3+2m}} in L2(0,1)
    assert dense_monomial_check(3, [1], 1e-3) is False
