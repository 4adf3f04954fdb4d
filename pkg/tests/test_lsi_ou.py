import numpy as np
import pytest

import oracles
from metalsi.fock import random_state, relative_entropy, thermal_state
from metalsi.lsi_ou import (
    alpha_p,
    dirichlet_form,
    dirichlet_form_abstract,
    dirichlet_form_p1,
    eigen_check,
    gamma_power,
    hermite,
    hypercontractivity_time,
    lemma45_check,
    lsi_ratio,
    multimode_alpha2_bound,
    multimode_lsi_check,
    ou_upsilon_offset,
    ou_upsilon_params,
    phi,
    phi_dx,
    quadrature,
    reference_state,
    spectral_block_check,
    thermal_dirichlet,
    thermal_ratio,
    thermal_relative_entropy,
    weighted_inner,
    weighted_p_norm,
)
from metalsi.meta_lsi import upsilon

PS = [1.0, 1.25, 1.5, 2.0]
BETAS = [0.5, 1.0, 2.0]


@pytest.mark.parametrize("p", PS)
@pytest.mark.parametrize("beta", BETAS)
def test_alpha_against_high_precision(p, beta):
    assert alpha_p(p, beta) == pytest.approx(float(oracles.alpha_product(p, beta)), rel=1e-13)


@pytest.mark.parametrize("beta", BETAS)
def test_alpha2_sinh_form(beta):
    assert alpha_p(2, beta) == pytest.approx(float(oracles.alpha2_sinh(beta)), rel=1e-13)


def test_alpha_reference_values_and_limits():
    # exact value 0.25525193...; the commonly quoted 0.2552518 is one unit off in its last digit
    assert alpha_p(2, 1) == pytest.approx(0.25525193041276, abs=1e-13)
    assert abs(alpha_p(2, 1) - 0.2552518) < 1.5e-7
    assert alpha_p(1, 1) == pytest.approx(0.2605477, abs=1e-7)
    assert abs(alpha_p(1 + 1e-8, 1.0) - alpha_p(1, 1.0)) < 1e-6
    with pytest.raises(ValueError):
        alpha_p(2.5, 1.0)
    with pytest.raises(ValueError):
        alpha_p(1.5, 0.0)
    assert hypercontractivity_time(3, 2, 1.0) == pytest.approx(np.log(2) / (4 * alpha_p(2, 1.0)))


@pytest.mark.parametrize("p", [1.25, 1.5, 2.0])
def test_ou_mapping_identity(p):
    beta = 1.0
    prm = ou_upsilon_params(p, beta)
    c = ou_upsilon_offset(p, beta)
    sigma = reference_state(beta, 12)
    for seed in range(4):
        rho = random_state(12, rank=1 + seed, seed=seed).rho
        lhs = upsilon(rho, prm)
        rhs = dirichlet_form(rho, p, beta) / alpha_p(p, beta) - relative_entropy(rho, sigma) + c
        assert lhs == pytest.approx(rhs, abs=1e-10)


@pytest.mark.parametrize("p", [1.5, 2.0])
def test_dirichlet_routes_agree(p):
    rho = random_state(10, rank=10, seed=3)
    assert dirichlet_form(rho, p, 1.0) == pytest.approx(dirichlet_form_abstract(rho, p, 1.0), rel=1e-9)


def test_p1_dirichlet_routes_agree():
    rho = random_state(10, rank=10, seed=5)
    a = dirichlet_form_p1(rho, 1.0)
    b = dirichlet_form_p1(rho, 1.0, route="gamma")
    assert a == pytest.approx(b, rel=1e-8)
    assert a > 0


@pytest.mark.parametrize("p", [1.5, 2.0])
def test_thermal_closed_forms_against_fock(p):
    beta, y = 1.0, 0.5
    tau = thermal_state(y**2, 90)
    assert float(thermal_dirichlet(y, p, beta)) == pytest.approx(dirichlet_form(tau, p, beta), rel=1e-9)
    ref = float(oracles.thermal_relative_entropy(y**2, np.exp(-beta)))
    assert float(thermal_relative_entropy(y, beta)) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("p", PS)
@pytest.mark.parametrize("beta", BETAS)
def test_thermal_ratio_bounded_by_alpha(p, beta):
    ys = np.linspace(0.001, 0.999, 500)
    r = thermal_ratio(ys, p, beta)
    assert np.isfinite(r).all()
    a = alpha_p(p, beta)
    assert r.min() >= a - 1e-12
    assert float(thermal_ratio(1 - 1e-4, p, beta)) == pytest.approx(a, rel=1e-2)


@pytest.mark.parametrize("p", PS)
def test_phi_nonnegative_and_zero_on_diagonal(p):
    g = np.linspace(0.005, 0.995, 200)
    vals = phi(g[:, None], g[None, :], p)
    assert vals.min() >= -1e-12
    assert np.abs(phi(g, g, p)).max() <= 1e-12


@pytest.mark.parametrize("p", PS)
def test_phi_derivative_converges_at_second_order(p):
    x, y, h = 0.7, 0.3, 1e-4
    errs = [abs((phi(x + s, y, p) - phi(x - s, y, p)) / (2 * s) - phi_dx(x, y, p)) for s in (h, h / 2)]
    assert errs[0] / errs[1] == pytest.approx(4.0, rel=0.05)


@pytest.mark.parametrize("k", range(6))
def test_hermite_against_generating_function(k):
    beta = 1.0
    np.testing.assert_allclose(hermite(k, beta).coeffs, oracles.hermite_coeffs(k, beta), atol=1e-13)


def test_low_degree_hermite():
    h1 = hermite(1, 0.7)
    assert h1(0.3) == pytest.approx(0.3)
    h2 = hermite(2, 0.7)
    assert h2(0.0) == pytest.approx(-0.5 / np.tanh(0.35))


@pytest.mark.parametrize("k", range(6))
def test_eigen_relation(k):
    z = np.exp(0.3j)
    lo, hi = eigen_check(k, z, 1.0, 40), eigen_check(k, z, 1.0, 60)
    assert hi.interior < 1e-8
    if k > 0:
        assert hi.weighted < lo.weighted
    with pytest.raises(ValueError):
        quadrature(2.0, 5)


def test_weighted_norms():
    beta, n = 1.0, 40
    sigma = reference_state(beta, n)
    assert weighted_p_norm(np.eye(n), sigma, 1.5) == pytest.approx(1.0, abs=1e-12)
    x = random_state(n, rank=3, seed=1, support=6).rho
    assert weighted_inner(x, x, sigma).real == pytest.approx(weighted_p_norm(x, sigma, 2.0) ** 2, rel=1e-12)
    np.testing.assert_allclose(gamma_power(gamma_power(x, sigma, 0.5), sigma, -0.5), x, atol=1e-10)


def test_spectral_blocks_respect_the_gap():
    rng = np.random.default_rng(0)
    g = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    blocks = spectral_block_check(g + g.conj().T, 1.0)
    assert min(b.margin for b in blocks) >= -1e-10
    zero = [b for b in blocks if b.offset == (0,)]
    assert zero and zero[0].bound == 0.0


@pytest.mark.parametrize("weights", ["uniform", "exponential"])
def test_entropic_block_inequality_on_positive_operators(weights):
    rng = np.random.default_rng(2)
    g = rng.standard_normal((12, 12)) + 1j * rng.standard_normal((12, 12))
    res = lemma45_check(g @ g.conj().T, 1.0, weights=weights)
    assert res.margin >= -1e-8
    assert res.blocks == 23


def test_multimode_bound_value():
    assert multimode_alpha2_bound(2, 1.0) == pytest.approx(float(oracles.multimode_bound(2, [1.0])), rel=1e-13)
    assert multimode_alpha2_bound(2, 1.0) == pytest.approx(0.0922, abs=1e-4)
    with pytest.raises(ValueError):
        multimode_alpha2_bound(0, 1.0)


def test_multimode_lsi_sample():
    rng = np.random.default_rng(5)
    g = rng.standard_normal((36, 36)) + 1j * rng.standard_normal((36, 36))
    chk = multimode_lsi_check(np.eye(36) + 0.3 * (g + g.conj().T) / np.linalg.norm(g, 2), 1.0, 2)
    assert chk.margin >= 0
    assert chk.entropy > 0


def test_lsi_ratio_on_states():
    for seed in range(5):
        rho = random_state(14, rank=14, seed=seed)
        for p in (1.0, 2.0):
            assert lsi_ratio(rho, p, 1.0) >= alpha_p(p, 1.0) - 1e-6
