"""Truncated Fock space: ladder operators, thermal states and matrix functions.

Operators are plain ``numpy`` arrays acting on ``span{|0>, ..., |N-1>}``.
Multimode operators use mode-1-major Kronecker ordering, so that
``np.kron(A, B)`` acts with ``A`` on mode 1 and ``B`` on mode 2.

Two readings of an operator product coexist in this package.  The
*truncated model* multiplies the truncated matrices as they are, which
gives a closed finite-dimensional system.  The *compressed* reading treats
a retained-block operator as an operator on the full Fock space and keeps
only the retained block of every product; for ``a a^dagger`` that means the
diagonal ``n + 1`` on every retained level, including the top one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np
import scipy.linalg as sla
from scipy.special import eval_genlaguerre, gammaln, xlogy

EPS_CLIP = 1e-13
EPS_PSD = 1e-10
EPS_TR = 1e-10


class PSDError(ValueError):
    """A matrix expected to be positive semidefinite is not."""


class SupportError(ValueError):
    """Support of one operator is not contained in that of another."""


@dataclass(frozen=True)
class TruncatedSpace:
    """Fock space cut at ``dim`` levels, optionally with several modes."""

    dim: int
    modes: int = 1

    def __post_init__(self) -> None:
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError(f"dimension must be an integer >= 2, got {self.dim}")
        if int(self.modes) != self.modes or self.modes < 1:
            raise ValueError(f"modes must be a positive integer, got {self.modes}")

    @property
    def total_dim(self) -> int:
        return self.dim**self.modes


def _dim(space: TruncatedSpace | int) -> int:
    if isinstance(space, TruncatedSpace):
        return space.dim
    return TruncatedSpace(int(space)).dim


@dataclass(frozen=True)
class State:
    """Density matrix on a truncated space.

    ``tail_mass`` is the probability carried by levels beyond the cutoff
    (known analytically for thermal states, zero for states built inside
    the truncated space).  The trace must equal ``1 - tail_mass``.
    """

    rho: np.ndarray = field(repr=False)
    tail_mass: float = 0.0

    def __post_init__(self) -> None:
        rho = np.asarray(self.rho)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        scale = max(1.0, float(np.abs(rho).max()))
        if np.abs(rho - rho.conj().T).max() > EPS_PSD * scale:
            raise ValueError("density matrix is not Hermitian")
        if np.linalg.eigvalsh(rho).min() < -EPS_PSD:
            raise PSDError("density matrix has a negative eigenvalue")
        tr = float(np.trace(rho).real)
        if abs(tr - (1.0 - self.tail_mass)) > EPS_TR:
            raise ValueError(f"trace {tr} differs from 1 - tail_mass = {1 - self.tail_mass}")

    @property
    def dim(self) -> int:
        return self.rho.shape[0]


def annihilation(space: TruncatedSpace | int) -> np.ndarray:
    """Truncated ``a`` with ``a[n-1, n] = sqrt(n)``."""
    n = _dim(space)
    return np.diag(np.sqrt(np.arange(1, n, dtype=float)), k=1)


def creation(space: TruncatedSpace | int) -> np.ndarray:
    """Truncated ``a^dagger``, the exact adjoint of :func:`annihilation`."""
    return annihilation(space).T.copy()


def number_op(space: TruncatedSpace | int) -> np.ndarray:
    return np.diag(np.arange(_dim(space), dtype=float))


def anti_number_op(space: TruncatedSpace | int, compressed: bool = True) -> np.ndarray:
    """``a a^dagger``.

    With ``compressed=True`` this is ``a^dagger a + I`` (the full-space
    operator restricted to the retained levels); otherwise the product of
    truncated matrices, whose top entry is 0 instead of ``N``.
    """
    n = _dim(space)
    if compressed:
        return np.diag(np.arange(1, n + 1, dtype=float))
    a = annihilation(n)
    return a @ a.T


def thermal_state(x: float, space: TruncatedSpace | int) -> State:
    """``(1 - x) sum_n x^n |n><n|`` cut at the retained levels, not renormalized."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"thermal parameter must lie in [0, 1), got {x}")
    n = _dim(space)
    levels = np.arange(n)
    pops = (1.0 - x) * np.power(x, levels)
    return State(np.diag(pops), tail_mass=float(x**n))


def thermal_x(beta: float) -> float:
    """Thermal parameter ``e^{-beta}`` of the reference state at inverse temperature ``beta``."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return float(np.exp(-beta))


def _as_matrix(obj: State | np.ndarray) -> np.ndarray:
    return obj.rho if isinstance(obj, State) else np.asarray(obj)


def psd_eigh(mat: State | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a PSD matrix with tiny eigenvalues clipped to zero.

    Raises :class:`PSDError` when an eigenvalue is below ``-EPS_PSD``.
    """
    m = _as_matrix(mat)
    m = 0.5 * (m + m.conj().T)
    w, v = np.linalg.eigh(m)
    if w.size and w.min() < -EPS_PSD:
        raise PSDError(f"eigenvalue {w.min():.3e} below -{EPS_PSD}")
    w = np.where(w < EPS_CLIP, 0.0, w)
    return w, v


def matrix_power(mat: State | np.ndarray, s: float) -> np.ndarray:
    """``M^s`` of a PSD matrix via eigh; zero eigenvalues stay zero (support projection for ``s = 0``)."""
    w, v = psd_eigh(mat)
    ws = np.zeros_like(w)
    pos = w > 0
    ws[pos] = w[pos] ** s
    return (v * ws) @ v.conj().T


def matrix_log(mat: State | np.ndarray) -> np.ndarray:
    """Logarithm of a positive definite matrix; raises on a singular input."""
    w, v = psd_eigh(mat)
    if w.min() <= 0:
        raise SupportError("logarithm of a singular matrix")
    return (v * np.log(w)) @ v.conj().T


def regularize(mat: State | np.ndarray, eps: float = 1e-12) -> np.ndarray:
    """Mix with the maximally mixed state: ``(1 - eps) M + eps tr(M) I / d``."""
    m = _as_matrix(mat)
    d = m.shape[0]
    return (1.0 - eps) * m + eps * np.trace(m).real * np.eye(d) / d


def regularized_log(mat: State | np.ndarray, eps: float = 1e-12) -> tuple[np.ndarray, np.ndarray]:
    """``(rho', log rho')`` where ``rho'`` is ``rho`` regularized only if it is singular within ``EPS_CLIP``."""
    h = _as_matrix(mat)
    h = 0.5 * (h + h.conj().T)
    if np.linalg.eigvalsh(h).min() <= EPS_CLIP:
        h = regularize(h, eps)
    w, v = np.linalg.eigh(h)
    return h, (v * np.log(w)) @ v.conj().T


def _xlogx(w: np.ndarray) -> np.ndarray:
    out = np.zeros_like(w)
    pos = w > 0
    out[pos] = w[pos] * np.log(w[pos])
    return out


def von_neumann_entropy(state: State | np.ndarray) -> float:
    """``-tr(rho log rho)`` in nats, with ``0 log 0 = 0``."""
    w, _ = psd_eigh(state)
    return float(-_xlogx(w).sum())


def relative_entropy(rho: State | np.ndarray, sigma: State | np.ndarray) -> float:
    """``D(rho || sigma) = tr rho (log rho - log sigma)``; ``inf`` when the support condition fails."""
    r = _as_matrix(rho)
    s = _as_matrix(sigma)
    wr, vr = psd_eigh(r)
    ws, vs = psd_eigh(s)
    # squared overlaps between eigenvectors
    overlap = np.abs(vr.conj().T @ vs) ** 2
    pos_r = wr > 0
    pos_s = ws > 0
    leak = overlap[np.ix_(pos_r, ~pos_s)]
    if leak.size and (wr[pos_r][:, None] * leak).sum() > EPS_PSD:
        return float("inf")
    log_s = np.zeros_like(ws)
    log_s[pos_s] = np.log(ws[pos_s])
    cross = float(wr[pos_r] @ (overlap[np.ix_(pos_r, pos_s)] @ log_s[pos_s]))
    return float(_xlogx(wr).sum() - cross)


def binary_relative_entropy(u: float | np.ndarray, v: float | np.ndarray) -> np.ndarray:
    """``d(u || v) = u log(u/v) + (1-u) log((1-u)/(1-v))``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return xlogy(u, u) + xlogy(1 - u, 1 - u) - xlogy(u, v) - xlogy(1 - u, 1 - v)


def thermal_entropy(x: float | np.ndarray) -> np.ndarray:
    """Entropy of the untruncated thermal state ``(1-x) sum x^n |n><n|``."""
    x = np.asarray(x, dtype=float)
    return (-xlogy(x, x) - xlogy(1 - x, 1 - x)) / (1 - x)


def embed(op: np.ndarray, mode: int, modes: int, dim: int) -> np.ndarray:
    """Place a single-mode operator on ``mode`` (0-based) of ``modes`` modes."""
    if not 0 <= mode < modes:
        raise ValueError("mode index out of range")
    factors = [np.eye(dim)] * modes
    factors[mode] = op
    return reduce(np.kron, factors)


def tensor(ops: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product with mode-1-major ordering."""
    if not ops:
        raise ValueError("need at least one factor")
    return reduce(np.kron, ops)


def displacement(xi: complex | Sequence[complex], space: TruncatedSpace | int, modes: int = 1) -> np.ndarray:
    """Truncated ``D_xi = exp(xi a^dagger - conj(xi) a)``, one amplitude per mode.

    The generator is anti-Hermitian on the retained levels, so the result is
    exactly unitary but deviates from the full-space displacement near the
    cutoff.
    """
    n = _dim(space)
    xis = np.atleast_1d(np.asarray(xi, dtype=complex))
    if xis.size != modes:
        raise ValueError("one displacement amplitude per mode is required")
    a = annihilation(n)
    ops = [sla.expm(z * a.T - np.conj(z) * a) for z in xis]
    return tensor(ops)


def displacement_elements(xi: complex, space: TruncatedSpace | int) -> np.ndarray:
    """Retained block of the full-space displacement operator.

    Uses ``<m|D|n> = sqrt(n!/m!) xi^(m-n) e^{-|xi|^2/2} L_n^(m-n)(|xi|^2)``
    for ``m >= n`` and the mirror relation for ``m < n``.
    """
    n = _dim(space)
    r2 = abs(xi) ** 2
    out = np.zeros((n, n), dtype=complex)
    for m in range(n):
        for k in range(n):
            lo, hi = min(m, k), max(m, k)
            mag = np.exp(0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) - 0.5 * r2)
            lag = eval_genlaguerre(lo, hi - lo, r2)
            if m >= k:
                out[m, k] = mag * xi ** (m - k) * lag
            else:
                out[m, k] = mag * (-np.conj(xi)) ** (k - m) * lag
    return out


def squeezer(r: float | Sequence[float], space: TruncatedSpace | int, modes: int = 1) -> np.ndarray:
    """``S_r = exp(sum_j r_j (a_j^2 - a_j^dagger^2) / 2)`` on the truncated space."""
    n = _dim(space)
    rs = np.atleast_1d(np.asarray(r, dtype=float))
    if rs.size != modes:
        raise ValueError("one squeezing parameter per mode is required")
    a = annihilation(n)
    a2 = a @ a
    return tensor([sla.expm(0.5 * rj * (a2 - a2.T)) for rj in rs])


def beam_splitter(theta: float, space: TruncatedSpace | int) -> np.ndarray:
    """Two-mode passive unitary with ``U^dagger a_1 U = cos(theta) a_1 + sin(theta) a_2``.

    The transmissivity is ``cos(theta)^2``.  The generator conserves total
    photon number, so the result is exact on states whose total photon
    number stays below the per-mode cutoff.
    """
    n = _dim(space)
    a = annihilation(n)
    eye = np.eye(n)
    a1, a2 = np.kron(a, eye), np.kron(eye, a)
    gen = theta * (a1.T @ a2 - a1 @ a2.T)
    return sla.expm(gen)


def phase_rotation(phis: float | Sequence[float], space: TruncatedSpace | int) -> np.ndarray:
    """``exp(-i sum_j phi_j a_j^dagger a_j)``."""
    n = _dim(space)
    ph = np.atleast_1d(np.asarray(phis, dtype=float))
    levels = np.arange(n)
    return tensor([np.diag(np.exp(-1j * p * levels)) for p in ph])


def characteristic_function(state: State | np.ndarray, xi: complex) -> complex:
    """``chi(xi) = tr(rho D_xi)`` using exact displacement matrix elements."""
    rho = _as_matrix(state)
    return complex(np.trace(rho @ displacement_elements(xi, rho.shape[0])))


def random_state(
    space: TruncatedSpace | int,
    rank: int,
    seed: int | np.random.Generator,
    support: int | None = None,
    modes: int = 1,
) -> State:
    """Ginibre state ``G G^dagger / tr`` of the given rank.

    ``support`` restricts the state to the lowest ``support`` levels (per
    mode), leaving the remaining levels empty.
    """
    n = _dim(space)
    sup = n if support is None else int(support)
    if not 1 <= sup <= n:
        raise ValueError("support must lie between 1 and the dimension")
    d_sup = sup**modes
    if not 1 <= rank <= d_sup:
        raise ValueError(f"rank must lie in [1, {d_sup}], got {rank}")
    rng = make_rng(seed)
    g = rng.standard_normal((d_sup, rank)) + 1j * rng.standard_normal((d_sup, rank))
    small = g @ g.conj().T
    small /= np.trace(small).real
    if sup == n:
        return State(0.5 * (small + small.conj().T))
    idx = _box_indices(n, sup, modes)
    rho = np.zeros((n**modes, n**modes), dtype=complex)
    rho[np.ix_(idx, idx)] = small
    return State(0.5 * (rho + rho.conj().T))


def _box_indices(n: int, sup: int, modes: int) -> np.ndarray:
    grids = np.meshgrid(*[np.arange(sup)] * modes, indexing="ij")
    flat = np.zeros_like(grids[0])
    for g in grids:
        flat = flat * n + g
    return flat.ravel()


def make_rng(seed: int | np.random.Generator) -> np.random.Generator:
    """Counter-based generator (Philox) from an integer seed."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(int(seed)))


def spawn_seeds(seed: int, count: int) -> list[int]:
    """Independent integer seeds derived from one master seed."""
    ss = np.random.SeedSequence(int(seed))
    return [int(c.generate_state(1, dtype=np.uint64)[0]) for c in ss.spawn(count)]


def level_populations(state: State | np.ndarray, modes: int = 1) -> np.ndarray:
    """Diagonal of ``rho`` reshaped to one axis per mode."""
    rho = _as_matrix(state)
    d = rho.shape[0]
    n = int(round(d ** (1.0 / modes)))
    return np.real(np.diag(rho)).reshape((n,) * modes)


def edge_population(state: State | np.ndarray, width: int = 1) -> float:
    """Population on the top ``width`` retained levels (single mode)."""
    pops = np.real(np.diag(_as_matrix(state)))
    return float(pops[-width:].sum())


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    d = _as_matrix(a) - _as_matrix(b)
    return float(0.5 * np.abs(np.linalg.eigvalsh(0.5 * (d + d.conj().T))).sum())
