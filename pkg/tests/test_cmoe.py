import numpy as np
import pytest

import oracles
from metalsi.channels import ChannelFamily, Propagator, Rates, ou_rates, project_psd
from metalsi.cmoe import (
    cmoe_verify,
    entropy_derivative,
    eta_alpha,
    eta_alpha_scaled,
    f_alpha,
    g,
    solve_g,
    theorem52_check,
    production_objective,
    thermal_entropy,
    thermal_flow_entropy_gap,
    thermal_match_entropy,
)
from metalsi.fock import State, random_state, thermal_state, von_neumann_entropy

OU = ou_rates(1.0)


def _tau(x, dim):
    t = thermal_state(x, dim).rho
    return t / np.trace(t).real


def test_entropy_matching():
    assert thermal_match_entropy(0.0) == 0.0
    assert float(thermal_entropy(0.5)) == pytest.approx(1.3862944, abs=1e-7)
    for s in (1e-6, 0.3, 1.3862943611198906, 4.0, 12.0):
        x = thermal_match_entropy(s)
        assert float(oracles.thermal_entropy(x)) == pytest.approx(s, abs=1e-10)
    with pytest.raises(ValueError):
        thermal_match_entropy(-0.1)


def test_thermal_entropy_is_increasing():
    xs = np.linspace(1e-6, 1 - 1e-6, 2000)
    assert np.all(np.diff(thermal_entropy(xs)) > 0)


def test_entropy_derivative_examples():
    sigma = _tau(np.exp(-1.0), 40)
    assert abs(entropy_derivative(sigma, OU)) < 1e-10
    x = 0.3
    expect = (OU.nu1 * x - OU.nu0) * np.log(x) / (1 - x)
    assert entropy_derivative(_tau(x, 60), OU) == pytest.approx(expect, abs=1e-9)


def test_entropy_derivative_finite_difference_halves():
    rho = 0.5 * random_state(20, rank=20, seed=1).rho + 0.5 * _tau(0.3, 20)
    d = entropy_derivative(rho, OU)
    s0 = von_neumann_entropy(rho)
    errs = []
    for dt in (1e-3, 5e-4, 2.5e-4):
        s1 = von_neumann_entropy(project_psd(Propagator(OU, 20, dt).apply(rho))[0])
        errs.append(abs((s1 - s0) / dt - d))
    ratios = np.array(errs[:-1]) / np.array(errs[1:])
    assert np.all((ratios > 1.7) & (ratios < 2.3))


def test_g_shape():
    xs = np.linspace(1e-4, 1 - 1e-4, 3000)
    vals = g(xs, OU)
    assert np.all(np.diff(vals) < 0)
    assert float(g(1 - 1e-9, OU)) < 1e-6
    assert float(g(1e-12, OU)) > 1e6


def test_solve_g_and_stationarity():
    alpha = float(g(0.4, OU))
    x_star = solve_g(alpha, OU)
    assert x_star == pytest.approx(0.4, abs=1e-12)
    h = 1e-6
    slope = (f_alpha(x_star + h, alpha, OU) - f_alpha(x_star - h, alpha, OU)) / (2 * h)
    assert abs(slope) < 1e-6
    with pytest.raises(ValueError):
        solve_g(0.0, OU)


def test_zero_nu0_uses_the_floor():
    r = Rates(0.0, 1.0)
    x = solve_g(0.5, r)
    assert 0 < x < 1
    assert float(g(x, r)) == pytest.approx(0.5, rel=1e-9)


def test_eta_alpha_routes_agree():
    alpha = float(g(0.4, OU))
    res = eta_alpha(alpha, OU)
    assert res.x_star == pytest.approx(0.4, abs=1e-6)
    assert res.value == pytest.approx(float(f_alpha(0.4, alpha, OU)), abs=1e-10)
    assert eta_alpha_scaled(alpha, OU) == pytest.approx(res.value, abs=1e-10)


def test_thermal_input_has_zero_margin():
    tr = cmoe_verify(State(_tau(0.3, 60)), OU, 2.0, 10)
    assert np.abs(tr.margins).max() < 1e-9
    assert tr.times[0] == 0 and np.all(np.diff(tr.times) > 0)


@pytest.mark.parametrize(
    "fam",
    [ChannelFamily("attenuator", float(np.sinh(0.5)), 1.0), ChannelFamily("additive", 0.25)],
)
def test_pure_input_against_vacuum(fam):
    psi = np.zeros(40, dtype=complex)
    psi[[0, 2, 3]] = [0.6, 0.64j, 0.48]
    tr = cmoe_verify(State(np.outer(psi, psi.conj())), fam, 2.0, 10)
    assert tr.x0 == 0.0
    assert tr.min_margin >= -1e-9


def test_random_states_attenuator():
    for seed in range(5):
        st = random_state(40, rank=4, seed=seed, support=10)
        tr = cmoe_verify(st, OU, 2.0, 20)
        assert not tr.flagged
        assert tr.min_margin >= -1e-6


def test_amplifier_blowup_is_flagged():
    fam = ChannelFamily("amplifier", 0.25, 1.0)
    tr = cmoe_verify(random_state(30, rank=2, seed=0, support=10), fam, 5.0, 50)
    assert tr.flagged
    assert tr.times[-1] < 5.0
    assert "edge population" in tr.note


def test_analytic_thermal_flow_matches_fock_evolution():
    for fam in (OU, ChannelFamily("additive", 0.25), ChannelFamily("amplifier", 0.25, 1.0)):
        assert thermal_flow_entropy_gap(0.3, fam, 60, 1.0, 10) < 1e-7


def test_production_bound_saturator_and_samples():
    alpha = float(g(0.4, OU))
    samples = [random_state(20, rank=20, seed=s).rho for s in range(10)]
    rep = theorem52_check(OU, alpha, samples)
    assert rep.saturator == pytest.approx(rep.eta, abs=1e-10)
    assert rep.min_margin >= -1e-6
    assert rep.passed()
    assert production_objective(_tau(0.4, 60), OU, alpha) == pytest.approx(rep.eta, abs=1e-10)
    with pytest.raises(ValueError):
        theorem52_check(OU, -1.0, samples)
