"""Effective couplings obtained by eliminating the cavity circuit.

Node fluxes are (psi_1, psi_2, psi_a, phi): the two cavity ends, the island
between the SQUID switch and C_m, and the charge-qubit island.  Without the
switch psi_a is merged into psi_2.

The ion enters as an induced charge ``e x / d_i`` on node 1 and the charge
qubit as its island charge ``e sigma_z``.  The coefficient of the product of
these two charges in the Hamiltonian is the (1, phi) element of the inverse
dynamic capacitance ``(C - K / omega^2)^{-1}``, where ``K`` is the
inverse-inductance matrix.  At ``omega -> 0`` the inductors short the cavity
nodes together and the element becomes ``C_m / (C_sigma C_t)`` with the
exact ``C_sigma``; at the qubit frequency the switch branch adds a small
correction that vanishes as ``L_eff -> 0``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .constants import E_CHARGE, HBAR, H_PLANCK, PHI0_REDUCED, TWO_PI

__all__ = [
    "CircuitParams",
    "EffectiveCoupling",
    "QuadraticCircuit",
    "RegimeWarning",
    "SwitchOffError",
    "SwitchParams",
    "balance_residual",
    "build_switch_circuit",
    "coupling_energy_readings",
    "effective_ion_charge_coupling",
    "quasiparticle_resistance",
    "reduce_switch_coupling",
    "secular_modes",
    "thermal_quasiparticle_ratio",
]

GEOMETRY_FACTOR = 10.0  # enhancement 10 L / d_i quoted without derivation


class RegimeWarning(UserWarning):
    """A parameter set is outside the regime where an approximation holds."""


class SwitchOffError(ValueError):
    """The SQUID switch is exactly off, so no inductive branch exists."""


@dataclass(frozen=True)
class CircuitParams:
    """Lumped-element parameters of cavity, coupler and charge qubit.

    Energies ``E_J`` and ``E_c`` are angular frequencies (rad/s).
    """

    C_r: float = 3e-15
    L_r: float = 3e-13
    C_m: float = 1e-16
    C_J: float = 1e-16
    C_g: float = 1e-16
    E_J: float = TWO_PI * 10e9
    E_c: float = TWO_PI * 100e9
    d_i: float = 20e-6
    cavity_length: float = 40e-6
    C_i: float = 2e-17
    C_i2: float = 2e-17
    C_ib: float = 2e-17

    def __post_init__(self) -> None:
        for name in ("C_r", "L_r", "C_m", "C_J", "C_g", "d_i", "cavity_length", "C_i", "C_i2", "C_ib"):
            val = getattr(self, name)
            if not np.isfinite(val) or val <= 0:
                raise ValueError(f"{name} must be strictly positive, got {val}")
        if self.E_J < 0 or self.E_c < 0:
            raise ValueError("energies must be non-negative")

    @property
    def C_t(self) -> float:
        return self.C_J + self.C_g

    @property
    def cavity_node_capacitance(self) -> float:
        """Capacitance of the shorted cavity to ground, C_r + C_i + C_i2."""
        return self.C_r + self.C_i + self.C_i2

    def with_(self, **changes) -> "CircuitParams":
        return replace(self, **changes)


@dataclass(frozen=True)
class SwitchParams:
    """dc-SQUID switch: junction energy (rad/s) and reduced external flux."""

    E_Ja: float
    flux_ratio: float = 0.0

    def __post_init__(self) -> None:
        if self.E_Ja <= 0:
            raise ValueError("E_Ja must be positive")
        if not 0.0 <= self.flux_ratio <= 1.0:
            raise ValueError("flux_ratio must lie in [0, 1]")

    @property
    def E_a(self) -> float:
        return 2.0 * self.E_Ja * np.cos(np.pi * self.flux_ratio)

    @property
    def is_off(self) -> bool:
        return self.flux_ratio == 0.5

    @property
    def L_eff(self) -> float:
        """Linearised inductance (hbar/2e)^2 / |hbar E_a|.

        A negative E_a only moves the potential minimum by pi, so the
        curvature, and hence the inductance, depends on |E_a|.
        """
        e_a = abs(self.E_a)
        if self.is_off or e_a == 0.0:
            raise SwitchOffError("switch is off (flux_ratio = 1/2)")
        return PHI0_REDUCED**2 / (HBAR * e_a)


@dataclass(frozen=True)
class QuadraticCircuit:
    """Quadratic circuit over (psi_1, psi_2, psi_a).

    ``capacitance_matrix`` already has the charge-qubit node eliminated, so
    the island entry is ``C_a = C_m C_t / (C_m + C_t)``.  Rows of
    ``linear_drive_vector`` are the induced node charges per unit ion
    charge (row 0) and per unit qubit charge (row 1).
    """

    capacitance_matrix: np.ndarray
    inverse_inductance_matrix: np.ndarray
    linear_drive_vector: np.ndarray
    full_capacitance_matrix: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        for name in ("capacitance_matrix", "inverse_inductance_matrix"):
            m = getattr(self, name)
            scale = max(np.max(np.abs(m)), 1e-300)
            if np.max(np.abs(m - m.T)) > 1e-15 * scale:
                raise ValueError(f"{name} is not symmetric")
        if np.min(np.linalg.eigvalsh(self.capacitance_matrix)) <= 0:
            raise ValueError("capacitance matrix must be positive definite")

    @property
    def n_modes(self) -> int:
        return self.capacitance_matrix.shape[0]


@dataclass(frozen=True)
class EffectiveCoupling:
    """Coefficient of sigma_z^q x / d_i and the dressed qubit capacitance.

    ``kappa`` is in rad s^-1 m^-1: the interaction energy for a displacement
    ``x`` is ``hbar * kappa * x`` (per unit sigma_z^q).
    """

    kappa: float
    charge_qubit_capacitance_correction: float
    C_sigma: float = float("nan")
    warnings: tuple[str, ...] = ()


# -- helpers -----------------------------------------------------------------


def _branch(n: int, i: int, j: int, inv_l: float) -> np.ndarray:
    k = np.zeros((n, n))
    k[i, i] += inv_l
    k[j, j] += inv_l
    k[i, j] -= inv_l
    k[j, i] -= inv_l
    return k


def _direct_matrices(p: CircuitParams) -> tuple[np.ndarray, np.ndarray]:
    """Capacitance and inverse inductance over (psi_1, psi_2, phi)."""
    c = np.diag([p.C_r / 2 + p.C_i + p.C_i2, p.C_r / 2 + p.C_m, p.C_t + p.C_m])
    c[1, 2] = c[2, 1] = -p.C_m
    return c, _branch(3, 0, 1, 1.0 / p.L_r)


def _switch_full_capacitance(p: CircuitParams) -> np.ndarray:
    c = np.diag([p.C_r / 2 + p.C_i + p.C_i2, p.C_r / 2, p.C_m, p.C_t + p.C_m])
    c[2, 3] = c[3, 2] = -p.C_m
    return c


def _inverse_dynamic_capacitance(c: np.ndarray, k: np.ndarray, omega: float) -> np.ndarray:
    """(C - K/omega^2)^{-1}; at omega = 0 the limit onto null(K) is taken."""
    if omega > 0:
        return np.linalg.inv(c - k / omega**2)
    # static limit: nodes joined by inductors share one flux
    null = _null_space(k)
    return null @ np.linalg.inv(null.T @ c @ null) @ null.T


def _null_space(k: np.ndarray, rtol: float = 1e-12) -> np.ndarray:
    evals, evecs = np.linalg.eigh(k)
    scale = max(np.max(np.abs(evals)), 1e-300)
    return evecs[:, np.abs(evals) <= rtol * scale]


def _regime_warning(p: CircuitParams) -> Optional[str]:
    small = max(p.C_m, p.C_i, p.C_t)
    if p.C_r < 10 * small:
        return (
            f"C_r = {p.C_r:.3g} F is not much larger than max(C_m, C_i, C_t) = {small:.3g} F; "
            "the C_sigma ~ C_r approximation is poor"
        )
    return None


# -- operations --------------------------------------------------------------


def effective_ion_charge_coupling(
    p: CircuitParams, approximate_c_sigma: bool = False
) -> EffectiveCoupling:
    """Ion-charge coupling after eliminating the cavity (static limit).

    Parameters
    ----------
    p : CircuitParams
    approximate_c_sigma : bool
        Use ``C_sigma = C_r`` instead of the exact network value.

    Returns
    -------
    EffectiveCoupling
        ``kappa = e^2 C_m / (hbar C_sigma C_t d_i)``.
    """
    msgs = []
    warn = _regime_warning(p)
    if warn:
        warnings.warn(warn, RegimeWarning, stacklevel=2)
        msgs.append(warn)
    c, k = _direct_matrices(p)
    g = _inverse_dynamic_capacitance(c, k, 0.0)
    c_sigma_exact = p.C_m / (p.C_t * g[0, 2])
    c_sigma = p.C_r if approximate_c_sigma else c_sigma_exact
    kappa = E_CHARGE**2 * p.C_m / (HBAR * c_sigma * p.C_t * p.d_i)
    return EffectiveCoupling(
        kappa=float(kappa),
        charge_qubit_capacitance_correction=float(1.0 / g[2, 2]),
        C_sigma=float(c_sigma),
        warnings=tuple(msgs),
    )


def coupling_energy_readings(coupling: EffectiveCoupling, displacement: float) -> dict[str, float]:
    """Interaction energy for a displacement, in the two common readings.

    ``energy_over_h_Hz`` is E/h and ``energy_over_hbar_rad_s`` is E/hbar.
    A quoted "2 pi x 200 MHz" can be compared with either
    ``energy_over_h_Hz`` (as 200e6) or ``energy_over_hbar_rad_s``
    (as 2 pi 200e6); the two differ by exactly 2 pi.
    """
    energy = HBAR * coupling.kappa * displacement
    return {
        "energy_J": energy,
        "energy_over_h_Hz": energy / H_PLANCK,
        "energy_over_hbar_rad_s": energy / HBAR,
    }


def build_switch_circuit(p: CircuitParams, s: SwitchParams) -> QuadraticCircuit:
    """Three-mode quadratic circuit with the SQUID linearised to L_eff."""
    if s.is_off:
        raise SwitchOffError("switch_off: flux_ratio = 1/2 has no inductive branch")
    full = _switch_full_capacitance(p)
    # eliminate the qubit node from the capacitance matrix (Schur complement)
    c_cc = full[:3, :3]
    c_cq = full[:3, 3:]
    c_cav = c_cc - c_cq @ c_cq.T / full[3, 3]
    k = _branch(3, 0, 1, 1.0 / p.L_r) + _branch(3, 1, 2, 1.0 / s.L_eff)
    # induced charges: the ion sits on node 1, the qubit charge reaches the
    # island as C_cav (C^-1)_{c,phi} = -C_{c,phi} / C_{phi,phi}
    qubit_drive = -c_cq[:, 0] / full[3, 3]
    drive = np.vstack([np.array([1.0, 0.0, 0.0]), qubit_drive])
    return QuadraticCircuit(
        capacitance_matrix=c_cav,
        inverse_inductance_matrix=k,
        linear_drive_vector=drive,
        full_capacitance_matrix=full,
    )


def secular_modes(c: QuadraticCircuit) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors of the inductive form."""
    evals, evecs = np.linalg.eigh(c.inverse_inductance_matrix)
    # fix the sign so the largest component of each vector is positive
    signs = np.sign(evecs[np.argmax(np.abs(evecs), axis=0), np.arange(evecs.shape[1])])
    return evals, evecs * signs


def reduce_switch_coupling(
    p: CircuitParams,
    s: SwitchParams,
    omega: Optional[float] = None,
) -> EffectiveCoupling:
    """Ion-charge coupling through the SQUID switch.

    Parameters
    ----------
    p, s : CircuitParams, SwitchParams
    omega : float, optional
        Frequency (rad/s) at which the cavity and switch are eliminated.
        Defaults to the qubit frequency ``p.E_J``, the scale the switch mode
        has to exceed for the reduction to be adiabatic.

    Notes
    -----
    At ``flux_ratio = 1/2`` the island is disconnected from the cavity and
    ``kappa`` is returned as exactly zero.
    """
    omega = p.E_J if omega is None else omega
    if s.is_off:
        # island floats: only C_m connects it to the qubit
        c_off = np.array([[p.C_m, -p.C_m], [-p.C_m, p.C_m + p.C_t]])
        c_q = 1.0 / np.linalg.inv(c_off)[1, 1]
        return EffectiveCoupling(kappa=0.0, charge_qubit_capacitance_correction=float(c_q))
    msgs = []
    omega_sw = 1.0 / np.sqrt(s.L_eff * p.C_r)
    if omega_sw <= 10.0 * omega:
        msg = (
            f"switch mode 1/sqrt(L_eff C_r) = {omega_sw:.3g} rad/s is not >> "
            f"qubit scale {omega:.3g} rad/s"
        )
        warnings.warn(msg, RegimeWarning, stacklevel=2)
        msgs.append(msg)
    full = _switch_full_capacitance(p)
    k = np.zeros((4, 4))
    k[:3, :3] = build_switch_circuit(p, s).inverse_inductance_matrix
    g = _inverse_dynamic_capacitance(full, k, omega)
    kappa = E_CHARGE**2 * g[0, 3] / (HBAR * p.d_i)
    c_sigma = p.C_m / (p.C_t * g[0, 3])
    return EffectiveCoupling(
        kappa=float(kappa),
        charge_qubit_capacitance_correction=float(1.0 / g[3, 3]),
        C_sigma=float(c_sigma),
        warnings=tuple(msgs),
    )


def balance_residual(p: CircuitParams, V_i: float, V_ib: float, approximate_c_sigma: bool = False) -> float:
    """sigma_z^q coefficient (rad/s) left by imperfect trap-drive balancing.

    ``(e^2 / C_sigma)(C_m / C_t)(C_i V_i + C_ib V_ib) / e``, divided by hbar.
    """
    c_sigma = effective_ion_charge_coupling(p, approximate_c_sigma).C_sigma
    induced = p.C_i * V_i + p.C_ib * V_ib
    return float(E_CHARGE * p.C_m * induced / (HBAR * c_sigma * p.C_t))


def quasiparticle_resistance(R_n: float, n_ratio: float) -> float:
    """Cavity resistance from the quasiparticle fraction, R_r = R_n n_ex / n_0."""
    if R_n <= 0:
        raise ValueError("R_n must be positive")
    if not 0.0 <= n_ratio <= 1.0:
        raise ValueError(f"n_ratio must lie in [0, 1], got {n_ratio}")
    return R_n * n_ratio


def thermal_quasiparticle_ratio(gap_over_kb: float, temperature: float) -> float:
    """Thermal fraction exp(-2 Delta / k_B T); ``gap_over_kb`` is 2 Delta / k_B in K."""
    if temperature <= 0:
        raise ValueError("temperature must be positive")
    return float(np.exp(-gap_over_kb / temperature))
