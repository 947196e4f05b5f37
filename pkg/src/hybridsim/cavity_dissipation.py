"""Charge-qubit decoherence from a lossy cavity.

The cavity loss is a resistor ``R_r`` in series with ``L_r``, shunted by
``C' = (C_r + C_m) / 4``.  Seen from the qubit this gives the impedance

    Z_eff(omega) = (gamma + i omega) / (C' (omega_r^2 - omega^2 + i omega gamma))

with ``omega_r = 1 / sqrt(L_r C')`` and ``gamma = R_r / L_r``.

The imaginary-time kernel of the qubit phase is evaluated as a Matsubara
sum whose coefficients are ``-r^2 nu Z_E(nu)``, ``r = C_m / 2 C_t`` and
``Z_E(s) = Z_eff(-i s)``.  The constant part of the coefficients (a contact
term proportional to a periodic delta function) is dropped, which leaves

    k(tau) = (r^2 / hbar beta C') sum_n omega_r^2 exp(i nu_n tau)
             / (nu_n^2 + omega_r^2 + |nu_n| gamma)

whose terms fall off as 1/n^2.  Continuing the coefficients to
``nu -> delta + i omega`` gives ``r^2 i omega Z_eff(omega)``, and the
spectral density is ``r^2 omega Re Z_eff(omega) coth(hbar omega / 2 k_B T)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .constants import HBAR, K_B, R_K

__all__ = [
    "BathSpec",
    "ConvergenceError",
    "SpectralResult",
    "backsolve_resistance",
    "charge_decoherence_rate",
    "continued_spectral_density",
    "effective_impedance",
    "effective_spectral_density",
    "matsubara_coefficients",
    "matsubara_kernel",
    "zero_damping_kernel",
    "pade_continuation",
    "spectral_pipeline",
]


class ConvergenceError(RuntimeError):
    """A truncated sum did not reach the requested tolerance."""


@dataclass(frozen=True)
class BathSpec:
    """Lossy cavity seen by the charge qubit."""

    R_r: float = 0.031
    temperature: float = 0.1
    C_r: float = 3e-15
    C_m: float = 1e-16
    C_t: float = 2e-16
    L_r: float = 3e-13

    def __post_init__(self) -> None:
        if self.temperature <= 0:
            raise ValueError("temperature must be positive")
        if self.R_r < 0:
            raise ValueError("R_r must be non-negative")
        for name in ("C_r", "C_m", "C_t", "L_r"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    @property
    def c_shunt(self) -> float:
        return (self.C_r + self.C_m) / 4.0

    @property
    def omega_r(self) -> float:
        return 2.0 / np.sqrt((self.C_r + self.C_m) * self.L_r)

    @property
    def gamma(self) -> float:
        """Ohmic damping R_r / L_r (rad/s)."""
        return self.R_r / self.L_r

    @property
    def ratio(self) -> float:
        return self.C_m / (2.0 * self.C_t)

    @property
    def hbar_beta(self) -> float:
        return HBAR / (K_B * self.temperature)

    def matsubara(self, n: np.ndarray) -> np.ndarray:
        return 2.0 * np.pi * np.asarray(n, dtype=float) / self.hbar_beta


@dataclass
class SpectralResult:
    omega_grid: np.ndarray
    Z_eff: np.ndarray
    J_eff: np.ndarray
    J_continued: np.ndarray
    gamma_rq: float
    closure_residual: float
    continuation_residual: float


def effective_impedance(spec: BathSpec, omega: np.ndarray | float) -> np.ndarray | complex:
    """[i omega C' + 1 / (i omega L_r + R_r)]^-1.

    Raises
    ------
    ZeroDivisionError
        At a pole: omega = 0 with R_r = 0, or the lossless LC resonance.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0):
        raise ValueError("omega must be non-negative")
    series = 1j * w * spec.L_r + spec.R_r
    with np.errstate(divide="ignore", invalid="ignore"):
        adm = 1j * w * spec.c_shunt + 1.0 / series
        z = 1.0 / adm
    if np.any(series == 0) or np.any(~np.isfinite(z)) or np.any(np.abs(adm) < 1e-12 * w * spec.c_shunt):
        raise ZeroDivisionError("effective impedance diverges (lossless pole)")
    return complex(z) if np.ndim(omega) == 0 else z


def _impedance_laplace(spec: BathSpec, s: np.ndarray) -> np.ndarray:
    """Z_E(s) = Z_eff(omega = -i s) for complex s in the right half plane."""
    s = np.asarray(s, dtype=complex)
    return (s + spec.gamma) / (spec.c_shunt * (s**2 + spec.omega_r**2 + s * spec.gamma))


def matsubara_coefficients(spec: BathSpec, n: np.ndarray) -> np.ndarray:
    """Regular part of the kernel coefficients, r^2 omega_r^2 / C' (nu^2 + omega_r^2 + |nu| gamma)."""
    nu = np.abs(spec.matsubara(n))
    return spec.ratio**2 * spec.omega_r**2 / (spec.c_shunt * (nu**2 + spec.omega_r**2 + nu * spec.gamma))


def _lossless_sum(a: float, theta: float) -> float:
    """sum over all integers n of a^2 cos(n theta) / (n^2 + a^2), for 0 <= theta < 2 pi.

    Equal to pi a cosh(a (pi - theta)) / sinh(pi a), written with decaying
    exponentials so that large ``a`` does not overflow.
    """
    num = np.exp(-a * theta) + np.exp(-a * (2.0 * np.pi - theta))
    return float(np.pi * a * num / (-np.expm1(-2.0 * np.pi * a)))


def matsubara_kernel(
    spec: BathSpec,
    tau: float,
    n_max: int = 1024,
    rtol: float = 1e-6,
    n_limit: int = 1 << 24,
) -> float:
    """k(tau) as a symmetric Matsubara sum.

    The lossless part of every term is summed in closed form.  What remains
    is the damping correction, whose terms fall off as 1/n^3; it is summed
    directly, doubling ``n_max`` until a doubling changes the result by less
    than ``rtol`` relative.
    """
    step = 2.0 * np.pi / spec.hbar_beta
    a = spec.omega_r / step
    b = spec.gamma / step
    theta = float(np.mod(step * abs(tau), 2.0 * np.pi))
    scale = spec.ratio**2 / (spec.c_shunt * spec.hbar_beta)
    base = _lossless_sum(a, theta)
    if b == 0.0:
        return scale * base

    def total(m: int) -> float:
        n = np.arange(1, m + 1, dtype=float)
        d = -(a**2) * b * n / ((n**2 + a**2) * (n**2 + a**2 + b * n))
        return scale * (base + 2.0 * float(np.sum(d * np.cos(n * theta))))

    prev = total(n_max)
    m = n_max
    while m < n_limit:
        m *= 2
        cur = total(m)
        if abs(cur - prev) <= rtol * abs(cur):
            return cur
        prev = cur
    raise ConvergenceError(f"Matsubara sum not converged at n_max = {m}")


def zero_damping_kernel(spec: BathSpec) -> float:
    """k(0) for R_r = 0: (r^2 / C' hbar beta)(omega_r hbar beta / 2) coth(omega_r hbar beta / 2)."""
    x = spec.omega_r * spec.hbar_beta / 2.0
    return float(spec.ratio**2 / (spec.c_shunt * spec.hbar_beta) * x / np.tanh(x))


def _coth_factor(spec: BathSpec, w: np.ndarray) -> np.ndarray:
    """omega coth(hbar omega / 2 k_B T), finite at omega = 0."""
    x = HBAR * w / (2.0 * K_B * spec.temperature)
    out = np.empty_like(w, dtype=float)
    small = np.abs(x) < 1e-8
    out[small] = 2.0 * K_B * spec.temperature / HBAR
    out[~small] = w[~small] / np.tanh(x[~small])
    return out


def effective_spectral_density(spec: BathSpec, omega: np.ndarray | float) -> np.ndarray | float:
    """J_eff = r^2 omega Re Z_eff coth(hbar omega / 2 k_B T); omega = 0 gives the limit."""
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    z_re = np.real(_impedance_laplace(spec, 1j * w))
    out = spec.ratio**2 * z_re * _coth_factor(spec, w)
    return float(out[0]) if np.ndim(omega) == 0 else out


def pade_continuation(z_points: np.ndarray, f_points: np.ndarray, z_eval: np.ndarray) -> np.ndarray:
    """Thiele continued-fraction interpolant of f(z_points), evaluated at z_eval."""
    z_points = np.asarray(z_points, dtype=complex)
    m = z_points.size
    g = np.zeros((m, m), dtype=complex)
    g[0] = np.asarray(f_points, dtype=complex)
    for p in range(1, m):
        g[p, p:] = (g[p - 1, p - 1] - g[p - 1, p:]) / ((z_points[p:] - z_points[p - 1]) * g[p - 1, p:])
    a = np.diag(g)
    z = np.asarray(z_eval, dtype=complex)
    # evaluate a0 / (1 + a1 (z - z0) / (1 + a2 (z - z1) / ...)) by backward recursion
    acc = np.ones_like(z)
    for p in range(m - 1, 0, -1):
        acc = 1.0 + a[p] * (z - z_points[p - 1]) / acc
    return a[0] / acc


def continued_spectral_density(
    spec: BathSpec,
    omega: np.ndarray,
    n_points: int = 5,
    delta: Optional[float] = None,
    richardson: bool = True,
) -> np.ndarray:
    """J_eff from the Matsubara data alone, by Pade continuation.

    The full coefficients ``-r^2 nu Z_E(nu)`` at ``nu_1 .. nu_n_points`` are
    continued to ``nu = delta + i omega``; ``Im`` of the negated result
    times ``coth`` is the spectral density.  With ``richardson`` the
    ``delta -> 0`` limit is extrapolated from ``delta`` and ``delta / 2``.

    The coefficients are a degree [2/2] rational function of ``nu``, so five
    points determine the continued fraction exactly.  More points add
    spurious pole-zero pairs that cost accuracy near and above resonance.
    """
    w = np.asarray(omega, dtype=float)
    delta = 1e-6 * spec.omega_r if delta is None else delta
    n = np.arange(1, n_points + 1)
    nu = spec.matsubara(n)
    coef = -spec.ratio**2 * nu * _impedance_laplace(spec, nu)
    # scale the variable so the continued fraction works with O(1) numbers
    unit = spec.omega_r

    def at(d: float) -> np.ndarray:
        vals = -pade_continuation(nu / unit, coef, (d + 1j * w) / unit)
        # r^2 Re Z_eff from Im(vals) / omega, or from Re(vals) / delta at omega = 0
        re_z = np.where(w > 0, np.imag(vals) / np.where(w > 0, w, 1.0), np.real(vals) / d)
        return re_z * _coth_factor(spec, w)

    j1 = at(delta)
    if not richardson:
        return j1
    return 2.0 * at(delta / 2.0) - j1


def charge_decoherence_rate(spec: BathSpec) -> tuple[float, float]:
    """(gamma_r^q, J_eff(0+) / R_k) in s^-1.

    ``gamma_r^q = (R_r / R_k)(2 k_B T / hbar)(C_m / 2 C_t)^2``.
    """
    gamma = spec.R_r / R_K * 2.0 * K_B * spec.temperature / HBAR * spec.ratio**2
    j0 = effective_spectral_density(spec, 0.0) / R_K
    return float(gamma), float(j0)


def backsolve_resistance(rate: float, spec: BathSpec) -> float:
    """R_r giving decoherence rate ``rate`` at the temperature and capacitances of ``spec``."""
    unit = charge_decoherence_rate(BathSpec(1.0, spec.temperature, spec.C_r, spec.C_m, spec.C_t, spec.L_r))[0]
    return rate / unit


def spectral_pipeline(spec: BathSpec, omega: np.ndarray) -> SpectralResult:
    """Z_eff, direct and continued J_eff on a grid, plus the closure residuals."""
    w = np.asarray(omega, dtype=float)
    z = _impedance_laplace(spec, 1j * w)
    j = effective_spectral_density(spec, w)
    jc = continued_spectral_density(spec, w)
    gamma, j0 = charge_decoherence_rate(spec)
    closure = abs(gamma - j0) / gamma if gamma > 0 else abs(j0)
    mask = j > 0
    cont = float(np.max(np.abs(jc[mask] / j[mask] - 1))) if mask.any() else 0.0
    return SpectralResult(w, z, j, jc, gamma, closure, cont)
