"""Verification suites behind ``metalsi verify``.

Every suite returns a list of :class:`Check` records.  A check is either a
pass/fail comparison of a computed value against a target, or an
inconclusive marker raised when the truncation cannot be trusted.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from . import cmoe as cm
from .channels import ChannelFamily, generator_fd_check, ou_family, ou_rates, spectral_gap
from .fock import (
    State,
    beam_splitter,
    displacement,
    make_rng,
    random_state,
    spawn_seeds,
    squeezer,
    thermal_state,
)
from .lsi_ou import (
    alpha_p,
    eigen_check,
    lemma45_check,
    lsi_ratio,
    multimode_alpha2_bound,
    multimode_lsi_check,
    ou_upsilon_offset,
    ou_upsilon_params,
    phi,
    phi_dx,
    spectral_block_check,
    thermal_ratio,
)
from .meta_lsi import (
    UpsilonParams,
    displacement_check,
    eta_th,
    passive_check,
    squeezer_check,
    upsilon_m,
    verify_meta_lsi,
)

SUITES = ("meta", "lsi", "spectrum", "cmoe", "generators", "multimode")
CLASSES = ("attenuator", "additive", "amplifier")


@dataclass
class Check:
    name: str
    value: float
    target: float
    tolerance: float
    relation: str  # ">=", "<=", "=="
    passed: bool
    inconclusive: bool = False
    note: str = ""

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("value", "target", "tolerance"):
            d[k] = _finite(d[k])
        return d


def _finite(v: float) -> float | str:
    v = float(v)
    if np.isnan(v):
        return "nan"
    if np.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


def ge(name: str, value: float, target: float, tol: float, note: str = "") -> Check:
    return Check(name, float(value), float(target), tol, ">=", bool(value >= target - tol), note=note)


def le(name: str, value: float, target: float, tol: float = 0.0, note: str = "") -> Check:
    return Check(name, float(value), float(target), tol, "<=", bool(value <= target + tol), note=note)


def close(name: str, value: float, target: float, tol: float, note: str = "") -> Check:
    return Check(name, float(value), float(target), tol, "==", bool(abs(value - target) <= tol), note=note)


def inconclusive(name: str, value: float, target: float, note: str) -> Check:
    return Check(name, float(value), float(target), 0.0, "<=", False, inconclusive=True, note=note)


@dataclass
class SuiteConfig:
    beta: float = 1.0
    p: list[float] | None = None
    dim: int | None = None
    samples: int | None = None
    seed: int = 0
    t_max: float | None = None
    steps: int = 20
    cls: str | None = None
    c: float | None = None
    dim_pair: tuple[int, int] | None = None


def _ginibre(dim: int, count: int, seed: int, ranks: tuple[int, int], support: int | None = None, modes: int = 1) -> list[State]:
    lo, hi = ranks
    seeds = spawn_seeds(seed, count)
    return [random_state(dim, rank=lo + i % (hi - lo + 1), seed=s, support=support, modes=modes) for i, s in enumerate(seeds)]


def _hermitian(n: int, seed: int, psd: bool = False) -> np.ndarray:
    rng = make_rng(seed)
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    if psd:
        return g @ g.conj().T / n
    return (g + g.conj().T) / 2


def _normalized_thermal(x: float, dim: int) -> np.ndarray:
    tau = thermal_state(x, dim).rho
    return tau / np.trace(tau).real


# ---------------------------------------------------------------------------


def suite_meta(cfg: SuiteConfig) -> list[Check]:
    dim = cfg.dim or 20
    count = cfg.samples or 200
    states = _ginibre(dim, count, cfg.seed, (1, 5))
    out = []
    for p in cfg.p or [1.5, 2.0]:
        params = ou_upsilon_params(p, cfg.beta)
        rep = verify_meta_lsi(states, params)
        tag = f"meta[p={p:g}]"
        out.append(ge(f"{tag}.rearrangement_margin", rep.min_rearrangement_margin, 0.0, 1e-8))
        out.append(ge(f"{tag}.thermal_margin", rep.min_thermal_margin, 0.0, 1e-6))
        out.append(close(f"{tag}.violations", rep.violations, 0, 0))
        out.append(close(f"{tag}.eta_equals_ou_offset", rep.eta.value, ou_upsilon_offset(p, cfg.beta), 1e-8))
    return out


def suite_lsi(cfg: SuiteConfig) -> list[Check]:
    beta = cfg.beta
    out = []
    ys = np.linspace(0.001, 0.999, 500)
    for p in cfg.p or [1.0, 1.25, 1.5, 2.0]:
        a = alpha_p(p, beta)
        r = thermal_ratio(ys, p, beta)
        out.append(ge(f"lsi[p={p:g}].thermal_ratio_min", np.nanmin(r), a, 1e-12))
        near = float(thermal_ratio(1 - 1e-4, p, beta))
        out.append(close(f"lsi[p={p:g}].thermal_ratio_near_one", near / a, 1.0, 1e-2))
        grid = np.linspace(0.005, 0.995, 200)
        xx, yy = np.meshgrid(grid, grid, indexing="ij")
        out.append(ge(f"phi[p={p:g}].grid_min", phi(xx, yy, p).min(), 0.0, 1e-12))
        out.append(le(f"phi[p={p:g}].diagonal_max_abs", np.abs(phi(grid, grid, p)).max(), 0.0, 1e-12))
        g50 = np.linspace(0.02, 0.98, 50)
        xx, yy = np.meshgrid(g50, g50, indexing="ij")
        h = 1e-5
        d1 = (phi(xx + h, yy, p) - phi(xx - h, yy, p)) / (2 * h)
        d2 = (phi(xx + h / 2, yy, p) - phi(xx - h / 2, yy, p)) / h
        rich = (4 * d2 - d1) / 3
        out.append(le(f"phi_dx[p={p:g}].richardson_error", np.abs(rich - phi_dx(xx, yy, p)).max(), 0.0, 1e-6))

    dim = cfg.dim or 20
    count = cfg.samples or 100
    states = _ginibre(dim, count, cfg.seed, (1, dim))
    tau = _normalized_thermal(np.exp(-beta), dim)
    near = [State((1 - w) * tau + w * s.rho) for s, w in zip(states[:20], np.geomspace(1e-3, 0.5, 20))]
    for p in (1.0, 2.0):
        ratios = [lsi_ratio(s, p, beta) for s in states + near]
        out.append(ge(f"lsi[p={p:g}].state_ratio_min", min(ratios), alpha_p(p, beta), 1e-6))
    return out


def suite_spectrum(cfg: SuiteConfig) -> list[Check]:
    beta = cfg.beta
    out = []
    z = np.exp(0.3j)
    lo, hi = cfg.dim_pair or (40, 60)
    floor = 1e-13  # both residuals at roundoff: nothing left to decrease
    for k in range(6):
        r_lo = eigen_check(k, z, beta, lo)
        r_hi = eigen_check(k, z, beta, hi)
        out.append(le(f"eigen[k={k}].interior_residual_N{hi}", r_hi.interior, 0.0, 1e-8))
        dec = r_hi.weighted < r_lo.weighted or max(r_lo.weighted, r_hi.weighted) <= floor
        out.append(
            Check(f"eigen[k={k}].weighted_residual_N{lo}_to_N{hi}", r_hi.weighted, r_lo.weighted, floor, "<=", bool(dec))
        )
    gap = spectral_gap(ou_rates(beta), cfg.dim or hi)
    out.append(close("spectral_gap", gap, np.sinh(beta / 2), 1e-6))

    count = cfg.samples or 50
    seeds = spawn_seeds(cfg.seed, count)
    worst = min(min(b.margin for b in spectral_block_check(_hermitian(12, s), beta)) for s in seeds)
    out.append(ge("spectral_block.min_margin", worst, 0.0, 1e-10))
    for w in ("uniform", "exponential"):
        m = min(lemma45_check(_hermitian(12, s, psd=True), beta, weights=w).margin for s in seeds)
        out.append(ge(f"entropic_blocks[{w}].min_margin", m, 0.0, 1e-8))
    return out


def _family(kind: str, beta: float, c: float | None) -> ChannelFamily:
    if kind == "attenuator":
        return ChannelFamily(kind, c if c is not None else float(np.sinh(beta / 2)), beta)
    if kind == "additive":
        return ChannelFamily(kind, c if c is not None else 0.25)
    return ChannelFamily(kind, c if c is not None else 0.25, beta)


def suite_cmoe(cfg: SuiteConfig) -> list[Check]:
    beta = cfg.beta
    dim = cfg.dim or 40
    count = cfg.samples or 50
    out = []
    classes = [cfg.cls] if cfg.cls else list(CLASSES)
    states = _ginibre(dim, count, cfg.seed, (1, 4), support=min(10, dim))
    for kind in classes:
        fam = _family(kind, beta, cfg.c)
        t_max = cfg.t_max if cfg.t_max is not None else (0.5 if kind == "amplifier" else 2.0)
        worst, flagged, note = np.inf, 0, ""
        for st in states:
            tr = cm.cmoe_verify(st, fam, t_max, cfg.steps)
            worst = min(worst, tr.min_margin)
            if tr.flagged:
                flagged += 1
                note = note or tr.note
        name = f"cmoe[{kind}]"
        out.append(ge(f"{name}.min_margin", worst, 0.0, 1e-6))
        if flagged:
            out.append(inconclusive(f"{name}.tail_guard", flagged, 0, f"{flagged} trajectories truncated: {note}"))
        gap = cm.thermal_flow_entropy_gap(0.3, fam, 60, 1.0, 10)
        out.append(le(f"{name}.thermal_fock_agreement", gap, 0.0, 1e-7))

    rates = ou_rates(beta)
    alpha = float(cm.g(0.4, rates))
    d52 = 20
    tau = _normalized_thermal(0.4, d52)
    randoms = [s.rho for s in _ginibre(d52, 50, cfg.seed + 1, (1, d52))]
    mixed = [(1 - w) * tau + w * r for r, w in zip(randoms, np.geomspace(1e-4, 0.5, 50))]
    rep = cm.theorem52_check(rates, alpha, randoms + mixed)
    out.append(ge("production.min_margin", rep.min_margin, 0.0, 1e-6))
    out.append(close("production.saturator", rep.saturator, rep.eta, 1e-6))
    out.append(close("production.argmin", rep.x_star, 0.4, 1e-6))
    return out


def suite_generators(cfg: SuiteConfig) -> list[Check]:
    beta = cfg.beta
    out = []
    dim = cfg.dim or 30
    for kind in CLASSES:
        fam = _family(kind, beta, cfg.c)
        fd = generator_fd_check(fam, dim, mean=0.3 + 0.2j, variance=1.6)
        ratios = fd.ratios
        out.append(ge(f"generator[{kind}].halving_ratio_min", ratios.min(), 1.7, 0.0))
        out.append(le(f"generator[{kind}].halving_ratio_max", ratios.max(), 2.3, 0.0))
    r = ou_family(beta).rates
    out.append(close("ou_rates.nu0", r.nu0, np.exp(-beta / 2), 1e-12))
    out.append(close("ou_rates.nu1", r.nu1, np.exp(beta / 2), 1e-12))
    return out


def _total_photon_state(dim: int, max_total: int, rank: int, seed: int) -> np.ndarray:
    idx = [i * dim + j for i in range(dim) for j in range(dim) if i + j <= max_total]
    rng = make_rng(seed)
    g = rng.standard_normal((len(idx), rank)) + 1j * rng.standard_normal((len(idx), rank))
    small = g @ g.conj().T
    rho = np.zeros((dim * dim, dim * dim), dtype=complex)
    rho[np.ix_(idx, idx)] = small / np.trace(small).real
    return 0.5 * (rho + rho.conj().T)


def _twirl(rho: np.ndarray, dim: int, order: int) -> np.ndarray:
    """Average over phase rotations by ``2 pi k / order`` independently on both modes."""
    n = np.arange(dim)
    out = rho
    for mode in range(2):
        acc = np.zeros_like(rho)
        for q in range(order):
            ph = np.exp(2j * np.pi * q / order * n)
            diag = np.kron(ph, np.ones(dim)) if mode == 0 else np.kron(np.ones(dim), ph)
            acc += (diag[:, None] * out) * diag.conj()[None, :]
        out = acc / order
    return out


def suite_multimode(cfg: SuiteConfig) -> list[Check]:
    beta = cfg.beta
    n = cfg.dim or 12
    count = cfg.samples or 20
    seeds = spawn_seeds(cfg.seed, count)
    out = []
    for p in cfg.p or [1.5, 2.0]:
        params = ou_upsilon_params(p, beta)
        tagged = [(f"ou,p={p:g}", params), (f"omega,p={p:g}", UpsilonParams(params.nu0, params.nu1, 0.5, p))]
        for tag, prm in tagged:
            eta_res = eta_th(prm)
            eta = eta_res.value
            bs = beam_splitter(0.7, n)
            dev = ddev = 0.0
            dmarg = smarg = dgap = np.inf
            for i, s in enumerate(seeds):
                rho = _total_photon_state(n, n - 1, 1 + i % 4, s)
                dev = max(dev, abs(passive_check(rho, bs, prm, 2).deviation))
                low = random_state(n, rank=1 + i % 4, seed=s + 1, support=4, modes=2).rho
                xis = [0.1 * np.exp(0.4j * i), 0.05j]
                c = displacement_check(_twirl(low, n, 2), displacement(xis, n, 2), xis, prm, n, 2)
                dmarg, ddev = min(dmarg, c.margin), max(ddev, abs(c.deviation))
                c = squeezer_check(_twirl(low, n, 4), squeezer([0.1, -0.08], n, 2), prm, n, 2)
                smarg = min(smarg, c.margin)
                diag = np.real(np.diag(_total_photon_state(n, n - 1, 1 + i % 4, s + 2)))
                dgap = min(dgap, upsilon_m(bs @ np.diag(diag) @ bs.conj().T, prm, 2) - eta)
            x = eta_res.x_star
            tot = np.add.outer(np.arange(n), np.arange(n)).ravel()
            pops = np.where(tot <= n - 1, x ** tot.astype(float), 0.0)
            dgap = min(dgap, upsilon_m(bs @ np.diag(pops / pops.sum()) @ bs.conj().T, prm, 2) - eta)
            out.append(le(f"unitaries[{tag}].passive_deviation", dev, 0.0, 1e-7))
            out.append(ge(f"unitaries[{tag}].displacement_margin", dmarg, 0.0, 1e-7))
            out.append(le(f"unitaries[{tag}].displacement_shift_error", ddev, 0.0, 1e-7))
            out.append(ge(f"unitaries[{tag}].squeezer_margin", smarg, 0.0, 1e-7))
            out.append(ge(f"diagonal_passive[{tag}].margin", dgap, 0.0, 1e-5))

    bound = multimode_alpha2_bound(2, beta)
    worst = np.inf
    for i, s in enumerate(spawn_seeds(cfg.seed + 1, 50)):
        h = _hermitian(100, s, psd=i % 2 == 0)
        if i % 2:
            h = np.eye(100) + 0.5 * h / np.linalg.norm(h, 2)
        worst = min(worst, multimode_lsi_check(h, beta, 2).margin)
    out.append(ge("multimode_lsi.multimode_bound_positive", bound, 0.0, 0.0))
    out.append(ge("multimode_lsi.sampled_margin", worst, 0.0, 1e-8))
    return out


REGISTRY: dict[str, Callable[[SuiteConfig], list[Check]]] = {
    "meta": suite_meta,
    "lsi": suite_lsi,
    "spectrum": suite_spectrum,
    "cmoe": suite_cmoe,
    "generators": suite_generators,
    "multimode": suite_multimode,
}


def run_suite(name: str, cfg: SuiteConfig) -> list[Check]:
    if name == "all":
        return [c for key in SUITES for c in REGISTRY[key](cfg)]
    return REGISTRY[name](cfg)
