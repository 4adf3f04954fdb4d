"""Phase-covariant Gaussian channels and their Lindblad generators.

With ``L0(X) = {a a^dagger, X}/2 - a^dagger X a`` and
``L1(X) = {a^dagger a, X}/2 - a X a^dagger`` the generator is
``L = nu0 L0 + nu1 L1`` and the semigroup is ``Phi_t = exp(-t L)``.  The
Heisenberg-picture adjoint is

    L*(X) = nu0 ({a a^dagger, X}/2 - a X a^dagger)
          + nu1 ({a^dagger a, X}/2 - a^dagger X a).

Superoperators act on column-stacked vectors, ``vec(A X B) = (B^T kron A) vec(X)``.

``L`` maps each offset block ``{X : X_ij = 0 unless j - i = l}`` into
itself, so the superoperator is block diagonal with ``2N - 1`` blocks of
size at most ``N``.  Propagators are built block by block.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Literal

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
from scipy.integrate import solve_ivp

from .fock import (
    EPS_PSD,
    State,
    annihilation,
    anti_number_op,
    displacement_elements,
    embed,
    number_op,
    psd_eigh,
    thermal_state,
)

ChannelClass = Literal["attenuator", "additive", "amplifier"]


@dataclass(frozen=True)
class Rates:
    """Dissipation rates ``nu0`` (coefficient of ``L0``) and ``nu1`` (of ``L1``)."""

    nu0: float
    nu1: float

    def __post_init__(self) -> None:
        if self.nu0 < 0 or self.nu1 < 0:
            raise ValueError("rates must be non-negative")

    @property
    def kind(self) -> ChannelClass:
        if np.isclose(self.nu0, self.nu1, rtol=1e-14, atol=0.0):
            return "additive"
        return "attenuator" if self.nu1 > self.nu0 else "amplifier"

    def scaled(self, factor: float) -> "Rates":
        return Rates(self.nu0 * factor, self.nu1 * factor)


def ou_rates(beta: float) -> Rates:
    """Rates of the quantum Ornstein-Uhlenbeck semigroup at inverse temperature ``beta``."""
    return Rates(float(np.exp(-beta / 2)), float(np.exp(beta / 2)))


@dataclass(frozen=True)
class GaussianChannel:
    """Single-mode phase-covariant Gaussian channel ``(lambda, gamma)``.

    Acts on characteristic functions as
    ``chi(xi) -> exp(-gamma |xi|^2 / 2) chi(sqrt(lambda) xi)``.
    """

    lam: float
    gamma: float

    def __post_init__(self) -> None:
        if self.lam < 0:
            raise ValueError("lambda must be non-negative")
        if self.gamma < abs(1.0 - self.lam) - 1e-12:
            raise ValueError("not completely positive: gamma < |1 - lambda|")

    def act(self, mean: complex, variance: float) -> tuple[complex, float]:
        """Map first moment and variance parameter (``c = 2 n + 1`` for thermal states)."""
        return complex(np.sqrt(self.lam) * mean), float(self.lam * variance + self.gamma)


@dataclass(frozen=True)
class ChannelFamily:
    """Semigroup of Gaussian channels of a fixed class with its generator rates."""

    kind: ChannelClass
    c: float
    beta: float | None = None

    def __post_init__(self) -> None:
        if self.c <= 0:
            raise ValueError("c must be positive")
        if self.kind not in ("attenuator", "additive", "amplifier"):
            raise ValueError(f"unknown channel class {self.kind!r}")
        if self.kind != "additive" and (self.beta is None or self.beta <= 0):
            raise ValueError("attenuator and amplifier families need beta > 0")

    @property
    def coth(self) -> float:
        return 1.0 / np.tanh(self.beta / 2)

    @property
    def rates(self) -> Rates:
        c = self.c
        if self.kind == "additive":
            return Rates(c, c)
        if self.kind == "attenuator":
            return Rates(c * (self.coth - 1), c * (self.coth + 1))
        return Rates(c * (self.coth + 1), c * (self.coth - 1))

    def at(self, t: float) -> GaussianChannel:
        if t < 0:
            raise ValueError("time must be non-negative")
        c = self.c
        if self.kind == "additive":
            return GaussianChannel(1.0, 2 * c * t)
        if self.kind == "attenuator":
            lam = np.exp(-2 * c * t)
            return GaussianChannel(float(lam), float(-self.coth * np.expm1(-2 * c * t)))
        lam = np.exp(2 * c * t)
        return GaussianChannel(float(lam), float(self.coth * np.expm1(2 * c * t)))


def ou_family(beta: float) -> ChannelFamily:
    return ChannelFamily("attenuator", float(np.sinh(beta / 2)), beta)


# ---------------------------------------------------------------------------
# generators


def _ladders(dim: int, modes: int, compressed: bool):
    a = annihilation(dim)
    k = anti_number_op(dim, compressed=compressed)
    m = number_op(dim)
    if modes == 1:
        return [(a, k, m)]
    return [
        (embed(a, j, modes, dim), embed(k, j, modes, dim), embed(m, j, modes, dim))
        for j in range(modes)
    ]


def _mode_dim(total: int, modes: int) -> int:
    n = int(round(total ** (1.0 / modes)))
    if n**modes != total:
        raise ValueError("matrix size is not a power of the mode count")
    return n


def lindbladian_apply(rates: Rates, rho: np.ndarray, compressed: bool = False, modes: int = 1) -> np.ndarray:
    """``L(rho)``, summed over modes with identical rates."""
    rho = rho.rho if isinstance(rho, State) else np.asarray(rho)
    n = _mode_dim(rho.shape[0], modes)
    out = np.zeros_like(rho, dtype=complex)
    for a, k, m in _ladders(n, modes, compressed):
        ad = a.conj().T
        out += rates.nu0 * (0.5 * (k @ rho + rho @ k) - ad @ rho @ a)
        out += rates.nu1 * (0.5 * (m @ rho + rho @ m) - a @ rho @ ad)
    return out


def lindbladian_adjoint_apply(rates: Rates, x: np.ndarray, compressed: bool = False, modes: int = 1) -> np.ndarray:
    """Heisenberg-picture ``L*(X)``."""
    x = np.asarray(x)
    n = _mode_dim(x.shape[0], modes)
    out = np.zeros_like(x, dtype=complex)
    for a, k, m in _ladders(n, modes, compressed):
        ad = a.conj().T
        out += rates.nu0 * (0.5 * (k @ x + x @ k) - a @ x @ ad)
        out += rates.nu1 * (0.5 * (m @ x + x @ m) - ad @ x @ a)
    return out


def lindbladian_superop(rates: Rates, dim: int, compressed: bool = False, adjoint: bool = False) -> sp.csr_matrix:
    """Sparse ``N^2 x N^2`` matrix of ``L`` (or ``L*``) on column-stacked vectors."""
    a = sp.csr_matrix(annihilation(dim))
    ad = a.T.tocsr()
    k = sp.csr_matrix(anti_number_op(dim, compressed=compressed))
    m = sp.csr_matrix(number_op(dim))
    eye = sp.identity(dim, format="csr")

    def anti(h):
        return 0.5 * (sp.kron(eye, h) + sp.kron(h.T, eye))

    def sandwich(left, right):
        return sp.kron(right.T, left)

    if adjoint:
        op = rates.nu0 * (anti(k) - sandwich(a, ad)) + rates.nu1 * (anti(m) - sandwich(ad, a))
    else:
        op = rates.nu0 * (anti(k) - sandwich(ad, a)) + rates.nu1 * (anti(m) - sandwich(a, ad))
    return op.tocsr()


def offset_indices(dim: int, offset: int) -> np.ndarray:
    """Column-stacked indices of the entries ``(i, i + offset)``."""
    i = np.arange(max(0, -offset), dim - max(0, offset))
    return i + (i + offset) * dim


def offset_blocks(rates: Rates, dim: int, compressed: bool = False, adjoint: bool = False) -> dict[int, np.ndarray]:
    """Dense diagonal blocks of the superoperator, keyed by offset ``j - i``."""
    sup = lindbladian_superop(rates, dim, compressed=compressed, adjoint=adjoint)
    out = {}
    for ell in range(-(dim - 1), dim):
        idx = offset_indices(dim, ell)
        out[ell] = sup[idx][:, idx].toarray()
    return out


def superop_spectrum(rates: Rates, dim: int, compressed: bool = False) -> dict[int, tuple[np.ndarray, np.ndarray]]:
    """Eigenvalues and right eigenvectors of every offset block of ``L``."""
    return {ell: np.linalg.eig(b) for ell, b in offset_blocks(rates, dim, compressed).items()}


def spectral_gap(rates: Rates, dim: int, edge: int = 3, edge_tol: float = 1e-6, zero_tol: float = 1e-9) -> float:
    """Smallest nonzero real part in the spectrum of ``L``, interior eigenvectors only.

    An eigenvector is kept when its weight on entries touching the top
    ``edge`` levels is at most ``edge_tol`` of its norm.
    """
    best = np.inf
    for ell, (vals, vecs) in superop_spectrum(rates, dim).items():
        i = np.arange(max(0, -ell), dim - max(0, ell))
        top = np.maximum(i, i + ell) >= dim - edge
        for val, vec in zip(vals, vecs.T):
            if abs(val) < zero_tol:
                continue
            w = np.abs(vec) ** 2
            if w[top].sum() > edge_tol * w.sum():
                continue
            best = min(best, val.real)
    return float(best)


class Propagator:
    """``exp(-t L)`` assembled from offset-block matrix exponentials."""

    def __init__(self, rates: Rates, dim: int, t: float, compressed: bool = False) -> None:
        if t < 0:
            raise ValueError("time must be non-negative")
        self.rates, self.dim, self.t = rates, dim, t
        self._blocks = {
            ell: (offset_indices(dim, ell), sla.expm(-t * b))
            for ell, b in offset_blocks(rates, dim, compressed).items()
        }

    def apply(self, rho: np.ndarray) -> np.ndarray:
        vec = np.asarray(rho, dtype=complex).reshape(-1, order="F")
        out = np.empty_like(vec)
        for idx, prop in self._blocks.values():
            out[idx] = prop @ vec[idx]
        return out.reshape((self.dim, self.dim), order="F")

    @cached_property
    def dense(self) -> np.ndarray:
        full = np.zeros((self.dim**2, self.dim**2), dtype=complex)
        for idx, prop in self._blocks.values():
            full[np.ix_(idx, idx)] = prop
        return full


@dataclass(frozen=True)
class EvolutionResult:
    state: State
    clipped_mass: float
    flagged: bool


def project_psd(rho: np.ndarray, tol: float = EPS_PSD) -> tuple[np.ndarray, float, bool]:
    """Hermitize, clip negative eigenvalues; return the matrix, the clipped mass and a flag."""
    h = 0.5 * (rho + rho.conj().T)
    w, v = np.linalg.eigh(h)
    neg = float(np.clip(-w, 0.0, None).sum())
    w = np.clip(w, 0.0, None)
    return (v * w) @ v.conj().T, neg, neg > tol


def evolve(
    state: State,
    t: float,
    rates: Rates,
    method: Literal["expm", "dense", "rk"] = "expm",
) -> EvolutionResult:
    """``Phi_t(rho) = exp(-t L)(rho)`` in the truncated model.

    ``expm`` exponentiates offset blocks; ``dense`` exponentiates the whole
    ``N^2 x N^2`` superoperator (memory ``16 N^4`` bytes); ``rk`` integrates
    the master equation with an adaptive 8th-order Runge-Kutta scheme.
    """
    rho = state.rho
    n = rho.shape[0]
    if method == "expm":
        out = Propagator(rates, n, t).apply(rho)
    elif method == "dense":
        sup = lindbladian_superop(rates, n).toarray()
        out = (sla.expm(-t * sup) @ rho.reshape(-1, order="F")).reshape((n, n), order="F")
    elif method == "rk":
        out = _evolve_rk(rho, t, rates)
    else:
        raise ValueError(f"unknown method {method!r}")
    proj, clipped, flagged = project_psd(out)
    tail = 1.0 - float(np.trace(proj).real)
    return EvolutionResult(State(proj, tail_mass=tail), clipped, flagged)


def _evolve_rk(rho: np.ndarray, t: float, rates: Rates) -> np.ndarray:
    n = rho.shape[0]
    sup = lindbladian_superop(rates, n)
    if t == 0:
        return rho.astype(complex)
    sol = solve_ivp(
        lambda _s, y: -(sup @ y),
        (0.0, t),
        rho.reshape(-1, order="F").astype(complex),
        method="DOP853",
        rtol=1e-11,
        atol=1e-13,
    )
    if not sol.success:
        raise RuntimeError(sol.message)
    return sol.y[:, -1].reshape((n, n), order="F")


# ---------------------------------------------------------------------------
# Gaussian states and the finite-difference generator check


def gaussian_state(mean: complex, variance: float, dim: int, pad: int = 40) -> np.ndarray:
    """Displaced thermal state with first moment ``mean`` and variance parameter ``variance``.

    Built in ``dim + pad`` levels from exact displacement matrix elements and
    cropped, so the retained block is accurate up to the thermal tail.
    """
    if variance < 1.0:
        raise ValueError("variance parameter must be >= 1")
    x = (variance - 1.0) / (variance + 1.0)
    big = dim + pad
    tau = thermal_state(x, big).rho
    d = displacement_elements(mean, big)
    return (d @ tau @ d.conj().T)[:dim, :dim]


@dataclass(frozen=True)
class FDResult:
    dts: np.ndarray
    residuals: np.ndarray

    @property
    def ratios(self) -> np.ndarray:
        return self.residuals[:-1] / self.residuals[1:]


def generator_fd_check(
    family: ChannelFamily,
    dim: int,
    mean: complex = 0.0,
    variance: float | None = None,
    dts: tuple[float, ...] = (1e-2, 5e-3, 2.5e-3, 1.25e-3),
    interior: int = 3,
    channel_map: Callable[[float], GaussianChannel] | None = None,
) -> FDResult:
    """Compare ``(Phi_dt(rho) - rho)/dt`` from the Gaussian channel law with ``-L(rho)``.

    ``rho`` is a displaced thermal state; ``Phi_dt(rho)`` is built from the
    moment map of the channel at time ``dt`` and ``L`` from the rates of the
    family.  Residuals are Frobenius norms on the block ``0..dim-1-interior``.
    """
    if variance is None:
        variance = family.coth if family.kind != "additive" else 1.5
    channel_map = channel_map or family.at
    rho0 = gaussian_state(mean, variance, dim)
    gen = lindbladian_apply(family.rates, rho0)
    keep = slice(0, dim - interior)
    res = []
    for dt in dts:
        m1, v1 = channel_map(dt).act(mean, variance)
        rho1 = gaussian_state(m1, v1, dim)
        r = (rho1 - rho0) / dt + gen
        res.append(np.linalg.norm(r[keep, keep]))
    return FDResult(np.asarray(dts), np.asarray(res))


def thermal_flow_x(family: ChannelFamily | Rates, x0: float, t: float | np.ndarray) -> np.ndarray:
    """Thermal parameter of ``Phi_t(tau_x0)`` from the mean-photon equation ``n' = -(nu1 - nu0) n + nu0``."""
    rates = family.rates if isinstance(family, ChannelFamily) else family
    n0 = x0 / (1 - x0)
    t = np.asarray(t, dtype=float)
    k = rates.nu1 - rates.nu0
    if abs(k) < 1e-14:
        n = n0 + rates.nu0 * t
    else:
        n_inf = rates.nu0 / k
        n = n_inf + (n0 - n_inf) * np.exp(-k * t)
    return n / (n + 1)


def psd_check(rho: np.ndarray) -> bool:
    try:
        psd_eigh(rho)
    except ValueError:
        return False
    return True
