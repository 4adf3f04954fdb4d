"""Constrained minimum output entropy along phase-covariant semigroups.

Among inputs of a given entropy, thermal states minimise the output entropy
of every channel ``Phi_t``.  This module compares the numerically evolved
entropy of a sampled state with the analytic entropy of its entropy-matched
thermal state, and provides the scalar functions ``f_alpha`` and ``g`` whose
minimisation gives the thermal infimum of ``dS/dt + alpha S``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .channels import ChannelFamily, Propagator, Rates, lindbladian_apply, project_psd, thermal_flow_x
from .fock import (
    State,
    edge_population,
    regularized_log,
    thermal_entropy,
    thermal_state,
    von_neumann_entropy,
)
from .meta_lsi import EtaResult, UpsilonParams, eta_th, minimize_unit_interval

__all__ = [
    "thermal_entropy",
    "thermal_match_entropy",
    "entropy_derivative",
    "f_alpha",
    "g",
    "solve_g",
    "eta_alpha",
    "eta_alpha_scaled",
    "Trajectory",
    "cmoe_verify",
    "thermal_flow_entropy_gap",
    "ProductionReport",
    "production_objective",
    "theorem52_check",
]

NU0_FLOOR = 1e-6
MATCH_TOL = 1e-10
TAIL_TOL = 1e-6


def _rates(p: ChannelFamily | Rates) -> Rates:
    return p.rates if isinstance(p, ChannelFamily) else p


def thermal_match_entropy(s_target: float) -> float:
    """Thermal parameter ``x`` with ``S(tau_x) = s_target``.

    Solved in the mean photon number ``n = x/(1-x)`` where the entropy
    ``(n+1) log(n+1) - n log n`` is strictly increasing and unbounded.
    """
    if s_target < 0:
        raise ValueError("target entropy must be non-negative")
    if s_target == 0:
        return 0.0

    def ent(n: float) -> float:
        return float((n + 1) * np.log1p(n) - (n * np.log(n) if n > 0 else 0.0))

    hi = 1.0
    while ent(hi) < s_target:
        hi *= 2.0
    n = brentq(lambda m: ent(m) - s_target, 0.0, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    return n / (n + 1.0)


def entropy_derivative(state: State | np.ndarray, p: ChannelFamily | Rates, eps: float = 1e-12) -> float:
    """``dS(Phi_t rho)/dt`` at ``t = 0``, i.e. ``<L(rho), log rho>``.

    Uses the trace-preserving truncated generator; singular inputs are
    mixed with ``eps`` of the maximally mixed state before the logarithm.
    """
    rho, log_rho = regularized_log(state, eps)
    return float(np.real(np.vdot(lindbladian_apply(_rates(p), rho), log_rho)))


def _nu0_for_g(rates: Rates) -> float:
    return rates.nu0 if rates.nu0 > 0 else NU0_FLOOR


def f_alpha(x: float | np.ndarray, alpha: float, p: ChannelFamily | Rates) -> np.ndarray:
    """``[(nu1 x - nu0) log x - alpha x log x - alpha (1-x) log(1-x)] / (1-x)``."""
    r = _rates(p)
    x = np.asarray(x, dtype=float)
    lx = np.log(x)
    l1 = np.log1p(-x)
    return ((r.nu1 * x - r.nu0) * lx - alpha * x * lx - alpha * (1 - x) * l1) / (1 - x)


def g(x: float | np.ndarray, p: ChannelFamily | Rates) -> np.ndarray:
    """``nu1 - nu0 + (1-x)(nu1 x - nu0) / (x log x)``; decreasing from ``+inf`` to 0."""
    r = _rates(p)
    nu0 = _nu0_for_g(r)
    x = np.asarray(x, dtype=float)
    return r.nu1 - nu0 + (1 - x) * (r.nu1 * x - nu0) / (x * np.log(x))


def solve_g(alpha: float, p: ChannelFamily | Rates) -> float:
    """Unique ``x`` in ``(0, 1)`` with ``g(x) = alpha``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    lo, hi = 1e-300, 1.0 - 1e-12
    if g(hi, p) >= alpha:
        return hi
    return float(brentq(lambda x: float(g(x, p)) - alpha, lo, hi, xtol=1e-16, rtol=1e-15, maxiter=1000))


def eta_alpha(alpha: float, p: ChannelFamily | Rates) -> EtaResult:
    """Infimum of ``f_alpha`` over ``(0, 1)``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    r = _rates(p)
    lim0 = np.inf if r.nu0 > 0 else 0.0
    return minimize_unit_interval(lambda x: f_alpha(x, alpha, r), lim0)


def eta_alpha_scaled(alpha: float, p: ChannelFamily | Rates) -> float:
    """Same infimum through the meta functional at ``p = 1`` with rates divided by ``alpha``."""
    r = _rates(p)
    return alpha * eta_th(UpsilonParams(r.nu0 / alpha, r.nu1 / alpha, 0.0, 1.0)).value


# ---------------------------------------------------------------------------
# trajectories


@dataclass
class Trajectory:
    times: np.ndarray
    s_rho: np.ndarray
    s_tau: np.ndarray
    edge_mass: np.ndarray
    x0: float
    flagged: bool = False
    clipped_mass: float = 0.0
    note: str = ""

    @property
    def margins(self) -> np.ndarray:
        return self.s_rho - self.s_tau

    @property
    def min_margin(self) -> float:
        return float(self.margins.min())


def cmoe_verify(
    rho: State,
    p: ChannelFamily | Rates,
    t_max: float,
    steps: int,
    tail_tol: float = TAIL_TOL,
    edge_width: int = 2,
) -> Trajectory:
    """Entropy of ``Phi_t(rho)`` against ``Phi_t(tau)`` with ``S(tau) = S(rho)``.

    The thermal side is analytic.  The evolution stops and the trajectory is
    flagged once the population of the top ``edge_width`` levels exceeds
    ``tail_tol``; the returned arrays then end at the last trusted time.
    """
    if t_max <= 0 or steps < 1:
        raise ValueError("need t_max > 0 and steps >= 1")
    rates = _rates(p)
    dim = rho.dim
    times = np.linspace(0.0, t_max, steps + 1)
    s0 = max(von_neumann_entropy(rho), 0.0)
    x0 = thermal_match_entropy(s0)
    if abs(float(thermal_entropy(x0)) - s0) > MATCH_TOL:
        raise RuntimeError("entropy matching failed")
    prop = Propagator(rates, dim, float(times[1] - times[0]))

    cur = rho.rho.astype(complex)
    s_rho, edge = [s0], [edge_population(cur, edge_width)]
    flagged, note, clipped = edge[0] > tail_tol, "", 0.0
    for _ in times[1:]:
        if flagged:
            break
        cur = prop.apply(cur)
        e = edge_population(cur, edge_width)
        if e > tail_tol:
            flagged = True
            break
        proj, neg, _ = project_psd(cur)
        clipped = max(clipped, neg)
        s_rho.append(von_neumann_entropy(proj))
        edge.append(e)
    if flagged:
        note = f"edge population above {tail_tol:g} after t={times[len(s_rho) - 1]:.4g}; increase dim or lower t_max"
    kept = times[: len(s_rho)]
    s_tau = thermal_entropy(thermal_flow_x(rates, x0, kept))
    return Trajectory(kept, np.asarray(s_rho), np.asarray(s_tau, dtype=float), np.asarray(edge), x0, flagged, clipped, note)


def thermal_flow_entropy_gap(x0: float, p: ChannelFamily | Rates, dim: int, t_max: float, steps: int) -> float:
    """Largest ``|S_analytic - S_fock|`` for a thermal input along the flow."""
    rates = _rates(p)
    tau = thermal_state(x0, dim).rho
    tau = tau / np.trace(tau).real
    times = np.linspace(0.0, t_max, steps + 1)
    prop = Propagator(rates, dim, float(times[1] - times[0]))
    analytic = thermal_entropy(thermal_flow_x(rates, x0, times))
    gap = abs(von_neumann_entropy(tau) - float(analytic[0]))
    cur = tau.astype(complex)
    for k in range(1, len(times)):
        cur = prop.apply(cur)
        gap = max(gap, abs(von_neumann_entropy(project_psd(cur)[0]) - float(analytic[k])))
    return float(gap)


# ---------------------------------------------------------------------------
# entropy-production infimum


def production_objective(state: State | np.ndarray, p: ChannelFamily | Rates, alpha: float) -> float:
    """``dS/dt + alpha S`` at ``t = 0``."""
    return entropy_derivative(state, p) + alpha * von_neumann_entropy(state)


@dataclass
class ProductionReport:
    alpha: float
    eta: float
    x_star: float
    saturator: float
    values: np.ndarray = field(repr=False)

    @property
    def min_margin(self) -> float:
        return float(self.values.min() - self.eta) if self.values.size else np.inf

    def passed(self, tol: float = 1e-6) -> bool:
        return self.min_margin >= -tol and abs(self.saturator - self.eta) <= tol


def theorem52_check(
    p: ChannelFamily | Rates,
    alpha: float,
    samples: Sequence[State | np.ndarray],
    saturator_dim: int = 60,
) -> ProductionReport:
    """Compare sampled objective values with the thermal infimum of ``f_alpha``.

    The saturator is the normalised truncated thermal state at the argmin,
    evaluated with the same Fock-space objective as the samples.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    rates = _rates(p)
    eta = eta_alpha(alpha, rates)
    tau = thermal_state(eta.x_star, saturator_dim).rho
    tau = tau / np.trace(tau).real
    sat = production_objective(tau, rates, alpha)
    vals = np.array([production_objective(s, rates, alpha) for s in samples])
    return ProductionReport(alpha, eta.value, eta.x_star, sat, vals)
