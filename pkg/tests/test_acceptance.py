"""Acceptance suite: one PASS/FAIL line per criterion.

Run with pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent))

import oracles  # noqa: E402
from metalsi import cmoe as cm  # noqa: E402
from metalsi.channels import ou_rates  # noqa: E402
from metalsi.lsi_ou import alpha_p, multimode_alpha2_bound, phi, phi_dx  # noqa: E402
from metalsi.verify import SuiteConfig, run_suite  # noqa: E402

PS = (1.0, 1.25, 1.5, 2.0)
BETAS = (0.5, 1.0, 2.0)


def _emit(record, index: int, title: str, ok: bool, detail: str) -> None:
    record(index, f"{'PASS' if ok else 'FAIL'} A{index} {title}: {detail}")
    assert ok, detail


def _select(checks, *prefixes):
    return [c for c in checks if c.name.startswith(prefixes)]


def _summary(checks) -> tuple[bool, str]:
    bad = [c.name for c in checks if not c.passed]
    return not bad, (f"{len(checks)} checks passed" if not bad else "failing: " + ", ".join(bad))


def test_a01_alpha_closed_form(record_acceptance):
    worst = 0.0
    for p in PS:
        for b in BETAS:
            worst = max(worst, abs(alpha_p(p, b) - float(oracles.alpha_product(p, b))))
            if p == 2.0:
                worst = max(worst, abs(alpha_p(p, b) - float(oracles.alpha2_sinh(b))))
    gap = abs(alpha_p(1 + 1e-8, 1.0) - alpha_p(1.0, 1.0))
    ok = worst <= 1e-12 and gap < 1e-6
    _emit(record_acceptance, 1, "alpha_p closed form", ok, f"max deviation {worst:.2e}, p->1 gap {gap:.2e}")


def test_a02_thermal_optimality(record_acceptance):
    checks = []
    for b in BETAS:
        cks = run_suite("lsi", SuiteConfig(beta=b, samples=1))
        checks += _select(cks, "phi[") if b == 1.0 else []
        checks += [c for c in cks if c.name.endswith(("thermal_ratio_min", "thermal_ratio_near_one"))]
    ok, detail = _summary(checks)
    _emit(record_acceptance, 2, "thermal optimality of alpha_p and phi >= 0", ok, detail)


def test_a03_phi_derivative(record_acceptance):
    h = 1e-5
    plain_worst = rich_worst = 0.0
    for p in PS:
        g = np.linspace(0.02, 0.85, 50)
        xx, yy = np.meshgrid(g, g, indexing="ij")
        fd = (phi(xx + h, yy, p) - phi(xx - h, yy, p)) / (2 * h)
        plain_worst = max(plain_worst, np.abs(fd - phi_dx(xx, yy, p)).max())
        # the O(h^2) term grows near x = 1; Richardson removes it on the wider grid
        g = np.linspace(0.02, 0.98, 50)
        xx, yy = np.meshgrid(g, g, indexing="ij")
        d1 = (phi(xx + h, yy, p) - phi(xx - h, yy, p)) / (2 * h)
        d2 = (phi(xx + h / 2, yy, p) - phi(xx - h / 2, yy, p)) / h
        rich_worst = max(rich_worst, np.abs((4 * d2 - d1) / 3 - phi_dx(xx, yy, p)).max())
    ok = plain_worst <= 1e-6 and rich_worst <= 1e-6
    _emit(
        record_acceptance, 3, "phi_dx vs central difference", ok,
        f"plain FD on [0.02,0.85]^2 {plain_worst:.2e}, Richardson on [0.02,0.98]^2 {rich_worst:.2e}",
    )


def test_a04_meta_sampling(record_acceptance):
    checks = run_suite("meta", SuiteConfig(beta=1.0, p=[1.5, 2.0], dim=20, samples=200, seed=0))
    ok, detail = _summary(checks)
    _emit(record_acceptance, 4, "meta inequality on 200 sampled states", ok, detail)


def test_a05_state_lsi_ratios(record_acceptance):
    checks = _select(run_suite("lsi", SuiteConfig(beta=1.0, dim=20, samples=100, seed=0)), "lsi[p=1].state", "lsi[p=2].state")
    ok, detail = _summary(checks)
    worst = min(c.value - c.target for c in checks)
    _emit(record_acceptance, 5, "general-state LSI ratios", ok, f"{detail}, min excess {worst:.3f}")


def test_a06_spectrum(record_acceptance):
    checks = _select(run_suite("spectrum", SuiteConfig(beta=1.0, samples=50, seed=0)), "eigen", "spectral")
    ok, detail = _summary(checks)
    _emit(record_acceptance, 6, "OU spectrum", ok, detail)


def test_a07_entropic_blocks(record_acceptance):
    checks = _select(run_suite("spectrum", SuiteConfig(beta=1.0, samples=50, seed=0)), "entropic_blocks")
    ok, detail = _summary(checks)
    worst = min(c.value for c in checks)
    _emit(record_acceptance, 7, "entropic block inequality", ok, f"{detail}, min margin {worst:.3f}")


def test_a08_multimode_lsi(record_acceptance):
    bound = multimode_alpha2_bound(2, 1.0)
    ref = float(oracles.multimode_bound(2, [1.0]))
    checks = _select(run_suite("multimode", SuiteConfig(beta=1.0, p=[2.0], samples=1, seed=0)), "multimode_lsi")
    ok_s, detail = _summary(checks)
    ok = ok_s and abs(bound - 0.0922) <= 1e-4 and abs(bound - ref) <= 1e-12
    _emit(record_acceptance, 8, "multimode 2-LSI constant", ok, f"bound {bound:.6f} (reference {ref:.6f}), {detail}")


def test_a09_generators(record_acceptance):
    checks = run_suite("generators", SuiteConfig(beta=1.0))
    ok, detail = _summary(checks)
    _emit(record_acceptance, 9, "generator finite differences and rate maps", ok, detail)


def test_a10_cmoe(record_acceptance):
    checks = run_suite("cmoe", SuiteConfig(beta=1.0, dim=40, samples=50, seed=0))
    cm_checks = _select(checks, "cmoe[")
    # a tail-guard flag is an allowed outcome only for the amplifier
    flagged = [c for c in cm_checks if c.inconclusive]
    bad = [c.name for c in cm_checks if not c.passed and not (c.inconclusive and "amplifier" in c.name)]
    ok = not bad
    detail = f"{len(cm_checks)} checks, {len(flagged)} tail-guard flags" + ("" if ok else ", failing: " + ", ".join(bad))
    _emit(record_acceptance, 10, "constrained minimum output entropy", ok, detail)


def test_a11_entropy_production(record_acceptance):
    checks = _select(run_suite("cmoe", SuiteConfig(beta=1.0, samples=1, cls="attenuator", seed=0)), "production")
    rates = ou_rates(1.0)
    x_star = cm.solve_g(float(cm.g(0.4, rates)), rates)
    ok_s, detail = _summary(checks)
    ok = ok_s and abs(x_star - 0.4) <= 1e-6
    _emit(record_acceptance, 11, "entropy production bound at alpha = g(0.4)", ok, f"{detail}, root {x_star:.10f}")


def test_a12_two_mode_unitaries(record_acceptance):
    checks = _select(run_suite("multimode", SuiteConfig(beta=1.0, dim=12, seed=0)), "unitaries", "diagonal_passive")
    ok, detail = _summary(checks)
    _emit(record_acceptance, 12, "two-mode Gaussian unitary checks", ok, detail)


if __name__ == "__main__":
    status = 0

    def _print(_i, line):
        print(line, flush=True)

    for name, fn in sorted(globals().items()):
        if name.startswith("test_a") and callable(fn):
            try:
                fn(_print)
            except AssertionError:
                status = 1
    sys.exit(status)
