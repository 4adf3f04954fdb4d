"""The Upsilon functional, its thermal infimum and checks of the meta log-Sobolev inequality.

For ``p > 1`` and a state ``rho`` supported on the retained levels,

    Upsilon(rho) = p_hat <L(rho^{1/p}), rho^{1/p_hat}> + omega tr(rho a^dagger a) + S(rho)

is evaluated in the compressed reading (``a a^dagger`` has diagonal
``n + 1`` on every retained level).  This is the exact full-space value, so
no truncation error enters.  At ``p = 1`` the pairing becomes
``<L(rho), log rho>``, which is infinite for any finitely supported state
when ``nu0 > 0``; :func:`upsilon_p1` therefore uses the truncated model,
in which the top level has no upward transition.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .channels import Rates, lindbladian_apply
from .fock import (
    EPS_CLIP,
    State,
    annihilation,
    embed,
    psd_eigh,
    regularize,
    von_neumann_entropy,
)


class PreconditionError(ValueError):
    """A state does not satisfy the hypothesis of a transformation rule."""


@dataclass(frozen=True)
class UpsilonParams:
    nu0: float
    nu1: float
    omega: float
    p: float

    def __post_init__(self) -> None:
        if min(self.nu0, self.nu1, self.omega) < 0:
            raise ValueError("nu0, nu1 and omega must be non-negative")
        if self.p < 1:
            raise ValueError("p must be at least 1")

    @property
    def p_hat(self) -> float:
        return np.inf if self.p == 1 else self.p / (self.p - 1)

    @property
    def rates(self) -> Rates:
        return Rates(self.nu0, self.nu1)


# ---------------------------------------------------------------------------
# Upsilon on general states


def _pairing_terms(rho: np.ndarray, p: float, lowering: Sequence[np.ndarray]) -> list[tuple[float, float, float, float]]:
    """Per mode: ``tr(rho a^dag a)``, ``tr(rho a a^dag)`` with truncated matrices,
    ``tr(rho^{1/p} a rho^{1/p_hat} a^dag)`` and ``tr(rho^{1/p} a^dag rho^{1/p_hat} a)``."""
    w, v = psd_eigh(rho)
    p_hat = p / (p - 1)
    wp = np.where(w > 0, np.power(np.maximum(w, 0), 1.0 / p), 0.0)
    wq = np.where(w > 0, np.power(np.maximum(w, 0), 1.0 / p_hat), 0.0)
    out = []
    for a in lowering:
        amat = np.abs(v.conj().T @ a @ v) ** 2  # |<k|a|l>|^2
        number = float(w @ amat.sum(axis=0))  # sum_l w_l ||a psi_l||^2
        anti = float(w @ amat.sum(axis=1))
        t0 = float(wp @ amat @ wq)
        t1 = float(wq @ amat @ wp)
        out.append((number, anti, t0, t1))
    return out


def _upsilon_multi(rho: np.ndarray, params: UpsilonParams, modes: int, compressed: bool = True) -> float:
    d = rho.shape[0]
    n = int(round(d ** (1.0 / modes)))
    a = annihilation(n)
    lowering = [a] if modes == 1 else [embed(a, j, modes, n) for j in range(modes)]
    total = 0.0
    norm = float(np.trace(rho).real)
    for number, anti, t0, t1 in _pairing_terms(rho, params.p, lowering):
        # a a^dagger = a^dagger a + 1 on the full space
        up = number + norm if compressed else anti
        form = params.nu0 * (up - t0) + params.nu1 * (number - t1)
        total += params.p_hat * form + params.omega * number
    return (total + von_neumann_entropy(rho)) / modes


def upsilon(state: State | np.ndarray, params: UpsilonParams, compressed: bool = True) -> float:
    """``Upsilon(rho)``; dispatches to :func:`upsilon_p1` when ``p == 1``.

    ``compressed=False`` evaluates the truncated model instead, whose
    ``p -> 1`` limit is :func:`upsilon_p1`.
    """
    if params.p == 1:
        return upsilon_p1(state, params)
    rho = state.rho if isinstance(state, State) else np.asarray(state)
    return _upsilon_multi(rho, params, 1, compressed)


def upsilon_m(state: State | np.ndarray, params: UpsilonParams, modes: int) -> float:
    """Multimode average ``Upsilon_m`` with identical rates on each mode (``p > 1``)."""
    if params.p == 1:
        raise ValueError("the multimode functional is implemented for p > 1")
    rho = state.rho if isinstance(state, State) else np.asarray(state)
    return _upsilon_multi(rho, params, modes)


def upsilon_p1(state: State | np.ndarray, params: UpsilonParams, eps: float = 1e-12) -> float:
    """``<L(rho), log rho> + omega tr(rho a^dag a) + S(rho)`` in the truncated model.

    A state with eigenvalues below the clipping threshold is first mixed
    with weight ``eps`` into the maximally mixed state.
    """
    rho = state.rho if isinstance(state, State) else np.asarray(state)
    h = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(h)
    if w.min() <= EPS_CLIP:
        h = regularize(h, eps)
        w, v = np.linalg.eigh(h)
    log_rho = (v * np.log(w)) @ v.conj().T
    gen = lindbladian_apply(params.rates, h)
    n = h.shape[0]
    number = float(np.real(np.diag(h)) @ np.arange(n))
    ent = float(-(w * np.log(w)).sum())
    return float(np.real(np.trace(gen @ log_rho))) + params.omega * number + ent


def upsilon_diagonal(pops: np.ndarray, params: UpsilonParams) -> float:
    """Series form of Upsilon for a Fock-diagonal state with populations ``pops`` (``p > 1``)."""
    lam = np.asarray(pops, dtype=float)
    n = np.arange(lam.size)
    p, q = params.p, params.p_hat
    up = np.append(lam[1:], 0.0)  # lambda_{n+1}
    down = np.insert(lam[:-1], 0, 0.0)  # lambda_{n-1}
    lp = lam ** (1 / p)
    t0 = (n + 1) * (lam - lp * up ** (1 / q))
    t1 = n * (lam - lp * down ** (1 / q))
    pos = lam[lam > 0]
    return float(
        q * (params.nu0 * t0.sum() + params.nu1 * t1.sum())
        + params.omega * (n * lam).sum()
        - (pos * np.log(pos)).sum()
    )


# ---------------------------------------------------------------------------
# thermal states


def upsilon_thermal(x: float | np.ndarray, params: UpsilonParams) -> np.ndarray:
    """Closed form of Upsilon on the untruncated thermal state ``tau_x``, ``0 < x < 1``."""
    x = np.asarray(x, dtype=float)
    lx = np.log(x)
    if params.p == 1:
        up_term = -lx
        down_term = x * lx
    else:
        q = params.p_hat
        up_term = -q * np.expm1(lx / q)  # q (1 - x^{1/q})
        down_term = -q * x * np.expm1(-lx / q)  # q (x - x^{1/p})
    ent = (-x * lx - (1 - x) * np.log1p(-x)) / (1 - x)
    return (params.nu0 * up_term + params.nu1 * down_term + params.omega * x) / (1 - x) + ent


def _limit_at_zero(params: UpsilonParams) -> float:
    if params.p == 1:
        return np.inf if params.nu0 > 0 else 0.0
    return params.p_hat * params.nu0


@dataclass(frozen=True)
class EtaResult:
    value: float
    x_star: float
    attained_at_boundary: bool
    grid_value: float = field(default=np.nan, compare=False)


def _unit_grid(points: int = 2000, lo: float = 1e-6) -> np.ndarray:
    half = points // 2
    left = np.logspace(np.log10(lo), np.log10(0.5), half)
    right = 1.0 - np.logspace(np.log10(0.5), np.log10(lo), points - half)
    return np.unique(np.concatenate([left, right]))


def minimize_unit_interval(
    func: Callable[[np.ndarray], np.ndarray],
    limit_zero: float,
    limit_one: float = np.inf,
    points: int = 2000,
) -> EtaResult:
    """Infimum of a function on ``(0, 1)``: log-spaced grid, golden-section refinement, boundary limits."""
    grid = _unit_grid(points)
    vals = np.asarray(func(grid), dtype=float)
    vals = np.where(np.isfinite(vals), vals, np.inf)
    i = int(np.argmin(vals))
    grid_min = float(vals[i])
    x_star, best = float(grid[i]), grid_min
    if 0 < i < grid.size - 1:
        res = minimize_scalar(
            lambda t: float(func(np.asarray(t))),
            bracket=(grid[i - 1], grid[i], grid[i + 1]),
            method="golden",
            tol=1e-12,
        )
        if res.fun <= best and 0 < res.x < 1:
            x_star, best = float(res.x), float(res.fun)
    if limit_zero <= best:
        return EtaResult(float(limit_zero), 0.0, True, grid_min)
    if limit_one <= best:
        return EtaResult(float(limit_one), 1.0, True, grid_min)
    return EtaResult(best, x_star, False, grid_min)


def eta_th(params: UpsilonParams) -> EtaResult:
    """``inf_x Upsilon(tau_x)`` over thermal states (the ``x -> 1`` limit is always ``+inf``)."""
    return minimize_unit_interval(lambda x: upsilon_thermal(x, params), _limit_at_zero(params))


# ---------------------------------------------------------------------------
# checks


def diagonal_rearrangement(state: State | np.ndarray) -> State:
    """Eigenvalues in decreasing order placed on the Fock diagonal."""
    rho = state.rho if isinstance(state, State) else np.asarray(state)
    tail = state.tail_mass if isinstance(state, State) else 0.0
    w, _ = psd_eigh(rho)
    w = np.sort(w)[::-1]
    w *= (1.0 - tail) / w.sum()
    return State(np.diag(w), tail_mass=tail)


@dataclass
class MetaLSIReport:
    samples: int
    violations: int
    min_rearrangement_margin: float
    min_thermal_margin: float
    eta: EtaResult
    margins: list[tuple[float, float]] = field(default_factory=list, repr=False)

    @property
    def passed(self) -> bool:
        return self.violations == 0


def verify_meta_lsi(
    states: Sequence[State],
    params: UpsilonParams,
    tail_factor: float = 10.0,
    tol_rearrange: float = 1e-8,
    tol_thermal: float = 1e-6,
) -> MetaLSIReport:
    """Check ``Upsilon(rho) >= Upsilon(rho_hat) >= eta_th`` on each state.

    ``rho_hat`` is the diagonal rearrangement.  The thermal tolerance grows
    by ``tail_factor`` times the tail mass of the state.
    """
    eta = eta_th(params)
    margins = []
    bad = 0
    for st in states:
        u = upsilon(st, params)
        u_hat = upsilon(diagonal_rearrangement(st), params)
        m1 = u - u_hat
        m2 = u_hat - eta.value
        margins.append((m1, m2))
        if m1 < -tol_rearrange or m2 < -(tol_thermal + tail_factor * st.tail_mass):
            bad += 1
    arr = np.asarray(margins) if margins else np.zeros((0, 2))
    return MetaLSIReport(
        samples=len(margins),
        violations=bad,
        min_rearrangement_margin=float(arr[:, 0].min()) if len(arr) else np.nan,
        min_thermal_margin=float(arr[:, 1].min()) if len(arr) else np.nan,
        eta=eta,
        margins=margins,
    )


# ---------------------------------------------------------------------------
# Gaussian unitaries on several modes


@dataclass(frozen=True)
class UnitaryCheck:
    before: float
    after: float
    shift: float  # predicted increase (exact for displacements, zero for passive maps)

    @property
    def margin(self) -> float:
        """``after - before``; non-negative when the functional does not decrease."""
        return self.after - self.before

    @property
    def deviation(self) -> float:
        """``after - before - shift``."""
        return self.after - self.before - self.shift


def _lowering_ops(dim: int, modes: int) -> list[np.ndarray]:
    a = annihilation(dim)
    return [embed(a, j, modes, dim) for j in range(modes)]


def first_moments(rho: np.ndarray, dim: int, modes: int) -> np.ndarray:
    return np.array([np.trace(rho @ a) for a in _lowering_ops(dim, modes)])


def displacement_check(rho: np.ndarray, unitary: np.ndarray, xis: Sequence[complex], params: UpsilonParams, dim: int, modes: int, tol: float = 1e-10) -> UnitaryCheck:
    """Upsilon_m before and after a displacement; requires vanishing first moments."""
    mom = first_moments(rho, dim, modes)
    if np.abs(mom).max() > tol:
        raise PreconditionError(f"first moments {mom} are not zero")
    after = unitary @ rho @ unitary.conj().T
    shift = params.omega * float(np.sum(np.abs(np.asarray(xis)) ** 2)) / modes
    return UnitaryCheck(upsilon_m(rho, params, modes), upsilon_m(after, params, modes), shift)


def passive_check(rho: np.ndarray, unitary: np.ndarray, params: UpsilonParams, modes: int) -> UnitaryCheck:
    after = unitary @ rho @ unitary.conj().T
    return UnitaryCheck(upsilon_m(rho, params, modes), upsilon_m(after, params, modes), 0.0)


def squeezer_check(rho: np.ndarray, unitary: np.ndarray, params: UpsilonParams, dim: int, modes: int, tol: float = 1e-10) -> UnitaryCheck:
    """Upsilon_m before and after squeezing; requires ``tr(rho a^2) = tr(rho^{1/p} a rho^{1/p_hat} a) = 0``."""
    w, v = psd_eigh(rho)
    rp = (v * w ** (1 / params.p)) @ v.conj().T
    rq = (v * w ** (1 / params.p_hat)) @ v.conj().T
    for a in _lowering_ops(dim, modes):
        c1 = np.trace(rho @ a @ a)
        c2 = np.trace(rp @ a @ rq @ a)
        if max(abs(c1), abs(c2)) > tol:
            raise PreconditionError("squeezing precondition fails")
    after = unitary @ rho @ unitary.conj().T
    return UnitaryCheck(upsilon_m(rho, params, modes), upsilon_m(after, params, modes), 0.0)
