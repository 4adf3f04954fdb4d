"""Log-Sobolev constants of the quantum Ornstein-Uhlenbeck semigroup.

The semigroup has rates ``nu0 = e^{-beta/2}``, ``nu1 = e^{beta/2}`` and
fixed point ``sigma = (1 - e^{-beta}) e^{-beta a^dagger a}``.  The reference
state used here is :func:`metalsi.fock.thermal_state` at ``x = e^{-beta}``,
whose retained entries coincide with those of ``sigma``; together with the
compressed ``a a^dagger`` this makes Dirichlet forms, weighted norms and
relative entropies of operators supported on the retained levels exact.

Weighted quantities:

* ``Gamma^s(X) = sigma^{s/2} X sigma^{s/2}``
* ``<X, Y>_sigma = tr(sigma^{1/2} X^dagger sigma^{1/2} Y)``
* ``||X||_{p,sigma} = tr(|Gamma^{1/p}(X)|^p)^{1/p}``
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .channels import lindbladian_adjoint_apply, lindbladian_apply, ou_rates
from .fock import (
    State,
    annihilation,
    binary_relative_entropy,
    embed,
    psd_eigh,
    regularized_log,
    relative_entropy,
    thermal_state,
)
from .meta_lsi import UpsilonParams, _pairing_terms


def _p_hat(p: float) -> float:
    if p < 1:
        raise ValueError("p must be at least 1")
    return np.inf if p == 1 else p / (p - 1)


def alpha_p(p: float, beta: float) -> float:
    """Optimal p-log-Sobolev constant, ``(p p_hat / 4 beta) e^{beta/2} (1 - e^{-beta/p})(1 - e^{-beta/p_hat})``."""
    if not 1 <= p <= 2:
        raise ValueError("p must lie in [1, 2]")
    if beta <= 0:
        raise ValueError("beta must be positive")
    if p == 1:
        return 0.5 * float(np.sinh(beta / 2))
    q = _p_hat(p)
    # q (1 - e^{-beta/q}) stays accurate as q -> inf
    return float(p * (-q * np.expm1(-beta / q)) * np.exp(beta / 2) * (-np.expm1(-beta / p)) / (4 * beta))


def hypercontractivity_time(p: float, q: float, beta: float) -> float:
    """Time after which ``||Phi*_t X||_{p,sigma} <= ||X||_{q,sigma}`` (``1 < q <= p``)."""
    if not 1 < q <= p:
        raise ValueError("need 1 < q <= p")
    return float(np.log((p - 1) / (q - 1)) / (4 * alpha_p(2, beta)))


def ou_upsilon_params(p: float, beta: float) -> UpsilonParams:
    """Upsilon parameters for which ``Upsilon = E_p / alpha_p - D(. || sigma) + const`` (``1 < p <= 2``)."""
    if not 1 < p <= 2:
        raise ValueError("the mapping needs 1 < p <= 2")
    a = alpha_p(p, beta)
    s = (0.5 - 1.0 / p) * beta
    return UpsilonParams(p / 4 * np.exp(s) / a, p / 4 * np.exp(-s) / a, 0.0, p)


def ou_upsilon_offset(p: float, beta: float) -> float:
    """Constant ``c`` with ``Upsilon(rho) = E_p(rho)/alpha_p - D(rho || sigma) + c``."""
    q = _p_hat(p)
    s = (0.5 - 1.0 / p) * beta
    const = p * q / 4 * (np.exp(-beta / 2) - np.exp(s))
    return float(-np.log1p(-np.exp(-beta)) - const / alpha_p(p, beta))


def reference_state(beta: float, dim: int) -> np.ndarray:
    return thermal_state(float(np.exp(-beta)), dim).rho


# ---------------------------------------------------------------------------
# weighted norms and Dirichlet forms


def _sigma_power(sigma: np.ndarray, s: float) -> np.ndarray:
    if np.count_nonzero(sigma - np.diag(np.diag(sigma))) == 0:
        d = np.real(np.diag(sigma))
        if s < 0 and d.min() <= 0:
            raise ValueError("negative power of a singular reference state")
        return np.diag(d**s)
    w, v = np.linalg.eigh(sigma)
    if w.min() <= 0:
        raise ValueError("reference state must be positive definite")
    return (v * w**s) @ v.conj().T


def gamma_power(x: np.ndarray, sigma: np.ndarray, s: float) -> np.ndarray:
    """``Gamma_sigma^s(X) = sigma^{s/2} X sigma^{s/2}``."""
    h = _sigma_power(sigma, s / 2)
    return h @ x @ h


def weighted_inner(x: np.ndarray, y: np.ndarray, sigma: np.ndarray) -> complex:
    h = _sigma_power(sigma, 0.5)
    return complex(np.trace(h @ x.conj().T @ h @ y))


def weighted_p_norm(x: np.ndarray, sigma: np.ndarray, p: float) -> float:
    if p < 1:
        raise ValueError("p must be at least 1")
    if np.isinf(p):
        return float(np.linalg.norm(x, 2))
    sv = np.linalg.svd(gamma_power(x, sigma, 1.0 / p), compute_uv=False)
    return float(np.sum(sv**p) ** (1.0 / p))


def _rho(state: State | np.ndarray) -> np.ndarray:
    return state.rho if isinstance(state, State) else np.asarray(state)


def dirichlet_form(state: State | np.ndarray, p: float, beta: float, modes: int = 1) -> float:
    """``E_p(rho)`` for ``1 < p <= 2`` from the expanded trace formula (exact full-space value)."""
    if p == 1:
        return dirichlet_form_p1(state, beta)
    rho = _rho(state)
    q = _p_hat(p)
    n = int(round(rho.shape[0] ** (1.0 / modes)))
    a = annihilation(n)
    lowering = [a] if modes == 1 else [embed(a, j, modes, n) for j in range(modes)]
    norm = float(np.trace(rho).real)
    total = 0.0
    # pairing with exponents (1/p_hat, 1/p)
    for number, _anti, t0, t1 in _pairing_terms(rho, q, lowering):
        total += np.exp(-beta / 2) * (number + norm - np.exp(beta / p) * t0)
        total += np.exp(beta / 2) * (number - np.exp(-beta / p) * t1)
    return float(p * q / 4 * total)


def dirichlet_form_abstract(state: State | np.ndarray, p: float, beta: float) -> float:
    """``(p p_hat / 4) <Gamma^{-1/p_hat}(rho^{1/p_hat}), L* Gamma^{-1/p}(rho^{1/p})>_sigma`` (single mode)."""
    rho = _rho(state)
    q = _p_hat(p)
    sigma = reference_state(beta, rho.shape[0])
    w, v = psd_eigh(rho)
    rp = (v * w ** (1 / p)) @ v.conj().T
    rq = (v * w ** (1 / q)) @ v.conj().T
    left = gamma_power(rq, sigma, -1.0 / q)
    right = lindbladian_adjoint_apply(ou_rates(beta), gamma_power(rp, sigma, -1.0 / p), compressed=True)
    return float(p * q / 4 * weighted_inner(left, right, sigma).real)


def dirichlet_form_p1(
    state: State | np.ndarray,
    beta: float,
    eps: float = 1e-12,
    route: Literal["direct", "gamma"] = "direct",
) -> float:
    """``E_1(rho) = tr(L(rho)(log rho - log sigma)) / 4`` in the truncated model.

    ``route="gamma"`` evaluates ``L`` as ``Gamma_sigma o L* o Gamma_sigma^{-1}``.
    """
    rho, log_rho = regularized_log(_rho(state), eps)
    n = rho.shape[0]
    sigma = reference_state(beta, n)
    log_sigma = np.diag(np.log(np.diag(sigma)))
    rates = ou_rates(beta)
    if route == "direct":
        gen = lindbladian_apply(rates, rho)
    else:
        gen = gamma_power(lindbladian_adjoint_apply(rates, gamma_power(rho, sigma, -1.0)), sigma, 1.0)
    return float(np.real(np.trace(gen @ (log_rho - log_sigma))) / 4)


def lsi_ratio(state: State | np.ndarray, p: float, beta: float) -> float:
    """``E_p(rho) / D(rho || sigma)``."""
    rho = _rho(state)
    d = relative_entropy(rho, reference_state(beta, rho.shape[0]))
    if d <= 0:
        raise ValueError("relative entropy vanishes; the ratio is undefined")
    return dirichlet_form(rho, p, beta) / d


# ---------------------------------------------------------------------------
# thermal states, tau = (1 - y^2) sum y^{2n} |n><n|


def thermal_dirichlet(y: float | np.ndarray, p: float, beta: float) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    ly = 2 * np.log(y)
    if p == 1:
        return np.exp(beta / 2) * (y**2 - np.exp(-beta)) * (ly + beta) / (4 * (1 - y**2))
    q = _p_hat(p)
    return p * q * np.exp(beta / 2) * (y ** (2 / p) - np.exp(-beta / p)) * (y ** (2 / q) - np.exp(-beta / q)) / (4 * (1 - y**2))


def thermal_relative_entropy(y: float | np.ndarray, beta: float) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    return binary_relative_entropy(y**2, np.exp(-beta)) / (1 - y**2)


def thermal_ratio(y: float | np.ndarray, p: float, beta: float) -> np.ndarray:
    """``E_p(tau_y) / D(tau_y || sigma)``; undefined (nan) at ``y^2 = e^{-beta}``."""
    y = np.asarray(y, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = thermal_dirichlet(y, p, beta) / thermal_relative_entropy(y, beta)
    return np.where(np.isclose(y**2, np.exp(-beta), rtol=0, atol=1e-15), np.nan, out)


def _frac(lx: np.ndarray, ly: np.ndarray, s: float) -> np.ndarray:
    """``(x^s - y^s) / (1 - x^s)`` from logarithms; the ``s -> 0`` limit is ``(ly - lx) / lx``."""
    if s == 0:
        return (ly - lx) / lx
    return (np.expm1(s * lx) - np.expm1(s * ly)) / (-np.expm1(s * lx))


def phi(x: float | np.ndarray, y: float | np.ndarray, p: float) -> np.ndarray:
    """``phi(x, y) = (1 - y^2)(E_p(tau_y)/alpha_p - D(tau_y || sigma))`` with ``x^2 = e^{-beta}``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    q = _p_hat(p)
    lx, ly = np.log(x), np.log(y)
    s_q = 0.0 if np.isinf(q) else 2 / q
    first = -_frac(lx, ly, 2 / p) * _frac(lx, ly, s_q) * 2 * lx
    return first - binary_relative_entropy(y**2, x**2)


def phi_dx(x: float | np.ndarray, y: float | np.ndarray, p: float) -> np.ndarray:
    """Closed-form ``d phi / d x``."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    q = _p_hat(p)
    lx2, ly2 = 2 * np.log(x), 2 * np.log(y)
    if np.isinf(q):
        return 2 * x * (1 - y**2) * (lx2 - ly2) / (1 - x**2) ** 2
    u, v = x ** (2 / p), x ** (2 / q)
    yu, yv = y ** (2 / p), y ** (2 / q)
    den = (1 - u) * (1 - v)
    t1 = 2 * x * ((1 - v) * (1 - yv) * (u - yu) + (1 - u) * (1 - yu) * (v - yv)) / ((1 - x**2) * den)
    t2 = 2 * u * (1 - yu) * (v - yv) / (x * den) * (lx2 / (p * (1 - u)) + 1)
    t3 = 2 * v * (1 - yv) * (u - yu) / (x * den) * (lx2 / (q * (1 - v)) + 1)
    return t1 - t2 - t3


# ---------------------------------------------------------------------------
# spectrum


@dataclass(frozen=True)
class HermitePoly:
    """``h_k`` from ``exp(s t - coth(beta/2) s^2 / 4) = sum_k s^k h_k(t) / k!``."""

    degree: int
    beta: float
    coeffs: np.ndarray  # ascending powers

    def __call__(self, t: float | np.ndarray) -> np.ndarray:
        return np.polynomial.polynomial.polyval(t, self.coeffs)

    def of_operator(self, op: np.ndarray) -> np.ndarray:
        out = np.zeros_like(op, dtype=complex)
        eye = np.eye(op.shape[0])
        for c in self.coeffs[::-1]:
            out = out @ op + c * eye
        return out


def hermite(k: int, beta: float) -> HermitePoly:
    """Recurrence ``h_{k+1} = t h_k - (coth(beta/2)/2) k h_{k-1}``."""
    if k < 0:
        raise ValueError("degree must be non-negative")
    half_coth = 0.5 / np.tanh(beta / 2)
    P = np.polynomial.Polynomial
    prev, cur = P([1.0]), P([0.0, 1.0])
    if k == 0:
        return HermitePoly(0, beta, prev.coef.copy())
    for j in range(1, k):
        prev, cur = cur, P([0.0, 1.0]) * cur - half_coth * j * prev
    return HermitePoly(k, beta, cur.coef.copy())


def quadrature(z: complex, dim: int) -> np.ndarray:
    """``q_z = (z a^dagger + conj(z) a) / sqrt(2)`` with ``|z| = 1``."""
    if not np.isclose(abs(z), 1.0):
        raise ValueError("z must have unit modulus")
    a = annihilation(dim)
    return (z * a.T + np.conj(z) * a) / np.sqrt(2)


@dataclass(frozen=True)
class EigenResidual:
    """Residuals of the Hermite eigen-relation.

    ``interior`` is the relative Frobenius residual on the block ``0..dim-k-2``
    where the cutoff cannot reach; ``weighted`` is the full-space residual in
    the ``sigma``-weighted 2-norm, which carries the truncation error.
    """

    interior: float
    weighted: float


def eigen_check(k: int, z: complex, beta: float, dim: int) -> EigenResidual:
    """Check ``L* h_k(q_z) = sinh(beta/2) k h_k(q_z)`` in the truncated model."""
    if dim - k - 1 < 1:
        raise ValueError("dimension too small for the interior block")
    v = hermite(k, beta).of_operator(quadrature(z, dim))
    res = lindbladian_adjoint_apply(ou_rates(beta), v) - np.sinh(beta / 2) * k * v
    keep = slice(0, dim - k - 1)
    interior = float(np.linalg.norm(res[keep, keep]) / np.linalg.norm(v[keep, keep]))
    sigma = reference_state(beta, dim)
    weighted = weighted_p_norm(res, sigma, 2.0) / weighted_p_norm(v, sigma, 2.0)
    return EigenResidual(interior, float(weighted))


def _mode_indices(dim: int, modes: int) -> np.ndarray:
    """Per-mode occupation numbers of each basis index, shape (total, modes)."""
    total = dim**modes
    idx = np.arange(total)
    out = np.empty((total, modes), dtype=int)
    for j in range(modes - 1, -1, -1):
        out[:, j] = idx % dim
        idx = idx // dim
    return out


def diagonal_decomposition(x: np.ndarray, modes: int = 1) -> dict[tuple[int, ...], np.ndarray]:
    """Split ``X`` into offset components ``X_l`` with ``<n|X_l|n + l> = <n|X|n + l>``; zero blocks dropped."""
    d = x.shape[0]
    n = int(round(d ** (1.0 / modes)))
    occ = _mode_indices(n, modes)
    offs = occ[None, :, :] - occ[:, None, :]  # column minus row
    keys = offs.reshape(-1, modes)
    flat = x.reshape(-1)
    out: dict[tuple[int, ...], np.ndarray] = {}
    uniq, inv = np.unique(keys, axis=0, return_inverse=True)
    inv = inv.reshape(-1)
    for u_i, key in enumerate(uniq):
        mask = inv == u_i
        if not np.any(flat[mask] != 0):
            continue
        block = np.zeros(d * d, dtype=x.dtype)
        block[mask] = flat[mask]
        out[tuple(int(v) for v in key)] = block.reshape(d, d)
    return out


def multimode_reference(beta: float, dim: int, modes: int) -> np.ndarray:
    s = np.diag(reference_state(beta, dim))
    out = s
    for _ in range(modes - 1):
        out = np.kron(out, s)
    return np.diag(out)


def dirichlet_pairing(x: np.ndarray, beta: float, modes: int = 1) -> float:
    """``<X, L_hat* X>_sigma_hat`` with compressed ``a a^dagger`` on every mode."""
    n = int(round(x.shape[0] ** (1.0 / modes)))
    sigma = multimode_reference(beta, n, modes)
    lx = lindbladian_adjoint_apply(ou_rates(beta), x, compressed=True, modes=modes)
    return float(weighted_inner(x, lx, sigma).real)


@dataclass(frozen=True)
class BlockCheck:
    offset: tuple[int, ...]
    form: float
    bound: float

    @property
    def margin(self) -> float:
        return self.form - self.bound


def spectral_block_check(x: np.ndarray, beta: float, modes: int = 1) -> list[BlockCheck]:
    """Compare ``<X_l, L* X_l>_sigma`` with ``sinh(beta/2) |l| ||X_l||^2_{2,sigma}`` per offset block."""
    n = int(round(x.shape[0] ** (1.0 / modes)))
    sigma = multimode_reference(beta, n, modes)
    out = []
    for ell, xl in diagonal_decomposition(x, modes).items():
        norm2 = weighted_inner(xl, xl, sigma).real
        out.append(BlockCheck(ell, dirichlet_pairing(xl, beta, modes), np.sinh(beta / 2) * sum(map(abs, ell)) * norm2))
    return out


# ---------------------------------------------------------------------------
# entropy functional and the multimode bound


def ent22(x: np.ndarray, sigma: np.ndarray) -> float:
    """``Ent_{2,sigma}(X) = ||X||^2 D(rho || sigma)`` with ``rho = |Gamma^{1/2}(X)|^2 / ||X||^2``."""
    y = gamma_power(x, sigma, 0.5)
    yy = y.conj().T @ y
    norm2 = float(np.trace(yy).real)
    if norm2 == 0:
        return 0.0
    return norm2 * relative_entropy(yy / norm2, sigma)


def i22(x: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """``Gamma^{-1/2}(|Gamma^{1/2}(X)|)``."""
    y = gamma_power(x, sigma, 0.5)
    w, v = psd_eigh(y.conj().T @ y)
    return gamma_power((v * np.sqrt(w)) @ v.conj().T, sigma, -0.5)


@dataclass(frozen=True)
class EntropicBlockResult:
    lhs: float
    rhs: float
    blocks: int

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def lemma45_check(
    x: np.ndarray,
    beta: float,
    modes: int = 1,
    weights: Literal["uniform", "exponential"] = "uniform",
    c: float = float(np.log(3.0)),
) -> EntropicBlockResult:
    """Entropic inequality for the diagonal decomposition of a positive ``X``.

    The weight vector runs over offsets with a nonzero block only.
    Exponential weights are ``w_l = exp(-c |l|_1 / 2)``.
    """
    n = int(round(x.shape[0] ** (1.0 / modes)))
    sigma = multimode_reference(beta, n, modes)
    blocks = diagonal_decomposition(x, modes)
    keys = list(blocks)
    if weights == "uniform":
        logw2 = np.zeros(len(keys))
    elif weights == "exponential":
        logw2 = np.array([-c * sum(map(abs, k)) for k in keys], dtype=float)
    else:
        raise ValueError(f"unknown weights {weights!r}")
    log_norm_w2 = float(np.log(np.exp(logw2).sum()))
    rhs = 0.0
    for k, lw in zip(keys, logw2):
        xl = blocks[k]
        norm2 = weighted_inner(xl, xl, sigma).real
        rhs += (log_norm_w2 - lw) * norm2 + ent22(i22(xl, sigma), sigma)
    return EntropicBlockResult(ent22(x, sigma), float(rhs), len(keys))


def multimode_alpha2_bound(m: int, beta: float) -> float:
    """Lower bound ``((2 + log(2m+1)) / sinh(beta/2) + 1/alpha_2)^{-1}`` on the m-mode 2-LSI constant."""
    if m < 1:
        raise ValueError("m must be positive")
    return float(1.0 / ((2 + np.log(2 * m + 1)) / np.sinh(beta / 2) + 1.0 / alpha_p(2, beta)))


@dataclass(frozen=True)
class MultimodeCheck:
    entropy: float
    form: float
    bound: float

    @property
    def margin(self) -> float:
        """``form / bound - entropy``."""
        return self.form / self.bound - self.entropy


def multimode_lsi_check(x: np.ndarray, beta: float, modes: int) -> MultimodeCheck:
    n = int(round(x.shape[0] ** (1.0 / modes)))
    sigma = multimode_reference(beta, n, modes)
    return MultimodeCheck(ent22(x, sigma), dirichlet_pairing(x, beta, modes), multimode_alpha2_bound(modes, beta))
