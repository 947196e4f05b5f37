"""Fast ion / charge-qubit controlled-phase gate built from momentum kicks.

The gate is the eight-step sequence

    K(n1) C(tau1) F(t1) K(-(n1+n2)) C(-(tau1+tau2)) F(t2) K(n2) C(tau2)

with K a block of laser pi pulses, each ``exp(-i z_m dk sigma_z^s x)``
followed by ``sigma_x^s``; C an instantaneous capacitive impulse
``exp(-i kappa tau sigma_z^q x)``; and F free motion at the trap frequency.
The pulse sign ``z_m`` alternates with a running counter over the whole
gate, so every pulse of a block pushes the motion the same way regardless
of how many flips came before it.

Kicks and coupling windows are treated as impulses, so the motion only
evolves during the two free intervals.  ``U0(T)`` is therefore free
evolution for ``T = t1 + t2``; the clock time of the gate additionally
counts the coupling windows.

Two propagation backends are provided.  ``run_gate_displacement`` tracks
each of the four (sigma_z^s, sigma_z^q) sectors as a phased displacement
(exact, no truncation).  ``run_gate_fock`` builds the full propagator on the
truncated composite space.  Phases follow ``U = e^{i phi0} U0(T)
exp(-i alpha sigma_z^q sigma_z^s)``, so the sector phases are
``phi(s, q) = phi0 - alpha s q``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .circuit_reduction import CircuitParams, EffectiveCoupling, effective_ion_charge_coupling
from .constants import E_CHARGE, HBAR, MASS_BE9, MASS_CA43, TWO_PI
from .core_algebra import (
    SIGMA_X,
    SIGMA_Z,
    DisplacementRecord,
    HilbertSpace,
    build_ladder_ops,
    check_leakage,
    compose_many,
    embed,
    matrix_exponential,
)

__all__ = [
    "AnalyticPhase",
    "CommensurabilityError",
    "Coupling",
    "Free",
    "GateResult",
    "IonParams",
    "Kick",
    "PulseSchedule",
    "SECTORS",
    "SweepResult",
    "analytic_phase",
    "bystander_check",
    "canonical_schedule",
    "compose_swap",
    "fidelity_scaling_sweep",
    "fit_power_law",
    "gate_time_for_phase",
    "reduce_to_qubits",
    "run_gate_displacement",
    "run_gate_fock",
    "solve_tau_for_phase",
]

#: (s, q) eigenvalue pairs in basis order |ion, charge> = |00>, |01>, |10>, |11>
SECTORS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


class CommensurabilityError(ValueError):
    """Kick counts or coupling windows do not close the phase-space loop."""


@dataclass(frozen=True)
class IonParams:
    """Trapped-ion parameters; frequencies in rad/s, photon momentum in 1/m."""

    mass: float = MASS_BE9
    trap_frequency: float = TWO_PI * 1e6
    photon_momentum: float = 1e8
    rabi_frequency: float = 0.0
    laser_detuning: float = 0.0

    def __post_init__(self) -> None:
        if self.mass <= 0 or self.trap_frequency <= 0 or self.photon_momentum <= 0:
            raise ValueError("mass, trap_frequency and photon_momentum must be positive")

    @classmethod
    def beryllium9(cls, **kw) -> "IonParams":
        return cls(mass=MASS_BE9, **kw)

    @classmethod
    def calcium43(cls, **kw) -> "IonParams":
        return cls(mass=MASS_CA43, **kw)

    @property
    def x0(self) -> float:
        """Ground-state width sqrt(hbar / 2 m omega)."""
        return math.sqrt(HBAR / (2.0 * self.mass * self.trap_frequency))

    @property
    def lamb_dicke(self) -> float:
        """Displacement per kick in ladder units, dk * x0."""
        return self.photon_momentum * self.x0


# -- schedule ----------------------------------------------------------------


@dataclass(frozen=True)
class Kick:
    count: int


@dataclass(frozen=True)
class Coupling:
    duration: float


@dataclass(frozen=True)
class Free:
    duration: float

    def __post_init__(self) -> None:
        if self.duration < 0:
            raise ValueError("free evolution time must be non-negative")


Segment = Union[Kick, Coupling, Free]


@dataclass(frozen=True)
class PulseSchedule:
    segments: tuple[Segment, ...]
    dead_time: float = 0.0

    @property
    def free_time(self) -> float:
        return float(sum(s.duration for s in self.segments if isinstance(s, Free)))

    @property
    def coupling_time(self) -> float:
        return float(sum(abs(s.duration) for s in self.segments if isinstance(s, Coupling)))

    @property
    def clock_time(self) -> float:
        """Wall time of the gate: free intervals, coupling windows and switch dead time."""
        n_windows = sum(1 for s in self.segments if isinstance(s, Coupling) and s.duration != 0)
        return self.free_time + self.coupling_time + 2 * n_windows * self.dead_time

    @property
    def n_pulses(self) -> int:
        return int(sum(abs(s.count) for s in self.segments if isinstance(s, Kick)))

    def canonical_parameters(self) -> tuple[int, int, float, float, float, float]:
        """(n1, n2, tau1, tau2, t1, t2) of a canonical eight-step schedule."""
        kinds = [type(s) for s in self.segments]
        if kinds != [Kick, Coupling, Free, Kick, Coupling, Free, Kick, Coupling]:
            raise ValueError("schedule is not in canonical eight-step form")
        s = self.segments
        return s[0].count, s[6].count, s[1].duration, s[7].duration, s[2].duration, s[5].duration

    def scaled(self, kick: float = 1.0, coupling: float = 1.0) -> "PulseSchedule":
        """Copy with coupling durations multiplied by ``coupling`` and kick signs by ``kick`` (+-1)."""
        out = []
        for seg in self.segments:
            if isinstance(seg, Kick):
                out.append(Kick(int(kick) * seg.count))
            elif isinstance(seg, Coupling):
                out.append(Coupling(coupling * seg.duration))
            else:
                out.append(seg)
        return PulseSchedule(tuple(out), self.dead_time)


def canonical_schedule(
    n1: int,
    n2: Optional[int],
    tau1: float,
    t1: float,
    t2: float,
    dead_time: float = 0.0,
    rtol: float = 1e-9,
) -> PulseSchedule:
    """Eight-step gate schedule obeying n1 t1 = n2 t2 and tau1 t1 = tau2 t2.

    Parameters
    ----------
    n1 : int
        Pulses in the first kick block.
    n2 : int or None
        Pulses in the last block; derived as ``n1 t1 / t2`` when None and
        checked against it otherwise.
    tau1 : float
        First coupling window (s).  May be zero.
    t1, t2 : float
        Free-evolution intervals (s).
    """
    if t1 <= 0 or t2 <= 0:
        raise ValueError("free intervals must be positive")
    if n1 <= 0:
        raise ValueError("n1 must be positive")
    n2_exact = n1 * t1 / t2
    n2_int = round(n2_exact)
    if abs(n2_exact - n2_int) > rtol * max(1.0, n2_exact):
        raise CommensurabilityError(f"n1 t1 / t2 = {n2_exact} is not an integer")
    if n2 is not None and n2 != n2_int:
        raise CommensurabilityError(f"n2 = {n2} but commensurability requires {n2_int}")
    tau2 = tau1 * t1 / t2
    segs = (
        Kick(n1),
        Coupling(tau1),
        Free(t1),
        Kick(-(n1 + n2_int)),
        Coupling(-(tau1 + tau2)),
        Free(t2),
        Kick(n2_int),
        Coupling(tau2),
    )
    return PulseSchedule(segs, dead_time)


def check_commensurability(schedule: PulseSchedule, rtol: float = 1e-9) -> None:
    n1, n2, tau1, tau2, t1, t2 = schedule.canonical_parameters()
    s = schedule.segments
    if s[3].count != -(n1 + n2):
        raise CommensurabilityError("middle kick block must be -(n1 + n2)")
    if abs(n1 * t1 - n2 * t2) > rtol * max(abs(n1 * t1), 1e-300):
        raise CommensurabilityError("n1 t1 != n2 t2")
    if abs(s[4].duration + tau1 + tau2) > rtol * max(abs(tau1) + abs(tau2), 1e-300):
        raise CommensurabilityError("middle coupling window must be -(tau1 + tau2)")
    if abs(tau1 * t1 - tau2 * t2) > rtol * max(abs(tau1 * t1), 1e-300):
        raise CommensurabilityError("tau1 t1 != tau2 t2")


# -- displacement backend ----------------------------------------------------


def _sector_records(
    schedule: PulseSchedule, ion: IonParams, kappa: float, s: int, q: int
) -> list[DisplacementRecord]:
    """Interaction-picture displacement records of one sector, in time order."""
    omega = ion.trap_frequency
    eta = ion.lamb_dicke
    cpl = kappa * ion.x0
    records = []
    t_acc = 0.0
    spin = s
    pulse = 0
    for seg in schedule.segments:
        if isinstance(seg, Free):
            t_acc += seg.duration
        elif isinstance(seg, Kick):
            sign = 1 if seg.count >= 0 else -1
            rot = np.exp(1j * omega * t_acc)
            for _ in range(abs(seg.count)):
                z = sign * (1 if pulse % 2 == 0 else -1)
                records.append(DisplacementRecord(-1j * z * eta * spin * rot))
                spin = -spin
                pulse += 1
        else:
            if seg.duration != 0.0:
                rot = np.exp(1j * omega * t_acc)
                records.append(DisplacementRecord(-1j * cpl * seg.duration * q * rot))
    if spin != s:
        raise CommensurabilityError("odd total number of pulses leaves the ion flipped")
    return records


def _alpha_from_phases(phases: dict[tuple[int, int], float]) -> float:
    return -(phases[1, 1] + phases[-1, -1] - phases[1, -1] - phases[-1, 1]) / 4.0


def _motional_overlap(eps: complex, beta: complex) -> complex:
    """<beta| D(eps) |beta> for a coherent state."""
    return np.exp(-0.5 * abs(eps) ** 2 + 2j * np.imag(eps * np.conj(beta)))


@dataclass
class GateResult:
    """Outcome of one gate propagation.

    ``sector_phases`` and ``residuals`` are indexed by (s, q).  With the Fock
    backend ``total_unitary`` holds the full propagator; the displacement
    backend leaves it as None.
    """

    extracted_phase: float
    gate_time: float
    infidelity: float
    sector_phases: dict
    residuals: dict
    global_phase: float
    free_time: float
    total_unitary: Optional[np.ndarray] = None
    max_leakage: float = 0.0
    backend: str = "displacement"

    @property
    def alpha(self) -> float:
        return self.extracted_phase


def run_gate_displacement(
    schedule: PulseSchedule,
    ion: IonParams,
    coupling: EffectiveCoupling | float,
    initial_coherent: complex = 0.0,
) -> GateResult:
    """Propagate the gate with the exact displacement algebra.

    Parameters
    ----------
    schedule : PulseSchedule
    ion : IonParams
    coupling : EffectiveCoupling or float
        Coupling object or ``kappa`` in rad s^-1 m^-1.
    initial_coherent : complex
        Motional coherent amplitude used for the infidelity (0 = ground state).
    """
    kappa = coupling.kappa if isinstance(coupling, EffectiveCoupling) else float(coupling)
    phases, residuals = {}, {}
    for s, q in SECTORS:
        total = compose_many(_sector_records(schedule, ion, kappa, s, q))
        phases[s, q] = total.phase
        residuals[s, q] = total.alpha
    alpha = _alpha_from_phases(phases)
    amp = sum(
        np.exp(1j * (phases[s, q] + alpha * s * q)) * _motional_overlap(residuals[s, q], initial_coherent)
        for s, q in SECTORS
    ) / 4.0
    phi0 = float(np.angle(amp))
    infid = float(min(max(1.0 - abs(amp) ** 2, 0.0), 1.0))
    return GateResult(
        extracted_phase=alpha,
        gate_time=schedule.clock_time,
        infidelity=infid,
        sector_phases=phases,
        residuals=residuals,
        global_phase=phi0,
        free_time=schedule.free_time,
    )


# -- Fock backend ------------------------------------------------------------


@dataclass(frozen=True)
class _FockOperators:
    space: HilbertSpace
    x: np.ndarray  # dimensionless a + a^dagger on the full space
    sz_s: np.ndarray
    sz_q: np.ndarray
    sx_s: np.ndarray
    number: np.ndarray  # diagonal of a^dagger a on the full space


def _fock_operators(space: HilbertSpace) -> _FockOperators:
    a, adag = build_ladder_ops(space)
    x = embed(space, "motion", a + adag)
    n_diag = np.tile(np.arange(space.fock_dim, dtype=float), 4)
    return _FockOperators(
        space,
        x,
        embed(space, "ion", SIGMA_Z),
        embed(space, "charge", SIGMA_Z),
        embed(space, "ion", SIGMA_X),
        n_diag,
    )


def _segment_unitaries(
    schedule: PulseSchedule, ion: IonParams, kappa: float, ops: _FockOperators, dim_cap: int
) -> list[np.ndarray]:
    """Unitary of every elementary step, in time order."""
    eta = ion.lamb_dicke
    cpl = kappa * ion.x0
    kick_cache: dict[int, np.ndarray] = {}
    gen_s = ops.sz_s @ ops.x
    gen_q = ops.sz_q @ ops.x
    steps = []
    pulse = 0
    for seg in schedule.segments:
        if isinstance(seg, Free):
            phase = np.exp(-1j * ion.trap_frequency * seg.duration * ops.number)
            steps.append(np.diag(phase))
        elif isinstance(seg, Kick):
            sign = 1 if seg.count >= 0 else -1
            for _ in range(abs(seg.count)):
                z = sign * (1 if pulse % 2 == 0 else -1)
                if z not in kick_cache:
                    kick = matrix_exponential(gen_s, -1j * z * eta, hermitian=True, dim_cap=dim_cap)
                    kick_cache[z] = ops.sx_s @ kick
                steps.append(kick_cache[z])
                pulse += 1
        elif seg.duration != 0.0:
            steps.append(matrix_exponential(gen_q, -1j * cpl * seg.duration, hermitian=True, dim_cap=dim_cap))
    return steps


def _sector_state(space: HilbertSpace, s: int, q: int, motional: np.ndarray) -> np.ndarray:
    ion = np.array([1.0, 0.0]) if s == 1 else np.array([0.0, 1.0])
    chg = np.array([1.0, 0.0]) if q == 1 else np.array([0.0, 1.0])
    return np.kron(np.kron(ion, chg), motional).astype(complex)


def _wrap(x: float, period: float) -> float:
    return (x + period / 2) % period - period / 2


def run_gate_fock(
    schedule: PulseSchedule,
    ion: IonParams,
    coupling: EffectiveCoupling | float,
    space: HilbertSpace,
    initial_motional: np.ndarray,
    dim_cap: int = 256,
    leakage_tol: float = 1e-8,
    alpha_reference: Optional[float] = None,
) -> GateResult:
    """Propagate the gate on the truncated composite space.

    The phase is read from ``<s, q, psi| U0(T)^H U |s, q, psi>`` for the four
    computational sectors; ``4 alpha`` is only defined modulo ``2 pi``, so
    alpha is unwrapped toward ``alpha_reference`` (by default the value of
    the displacement backend).

    Raises
    ------
    LeakageError
        If any sector state puts more than ``leakage_tol`` into the top two
        Fock levels at any step.
    """
    kappa = coupling.kappa if isinstance(coupling, EffectiveCoupling) else float(coupling)
    if schedule.n_pulses % 2:
        raise CommensurabilityError("odd total number of pulses leaves the ion flipped")
    psi_m = np.asarray(initial_motional, dtype=complex)
    if psi_m.shape != (space.fock_dim,):
        raise ValueError("initial motional state must match fock_dim")
    psi_m = psi_m / np.linalg.norm(psi_m)
    ops = _fock_operators(space)
    steps = _segment_unitaries(schedule, ion, kappa, ops, dim_cap)

    states = np.array([_sector_state(space, s, q, psi_m) for s, q in SECTORS]).T
    plus = np.kron(np.kron([1, 1], [1, 1]), psi_m).astype(complex) / 2.0
    u = np.eye(space.dim, dtype=complex)
    worst = 0.0
    for step in steps:
        u = step @ u
        states = step @ states
        worst = max(worst, check_leakage(states.T, space.fock_dim, leakage_tol))
    u0 = np.exp(-1j * ion.trap_frequency * schedule.free_time * ops.number)
    m = u0.conj()[:, None] * u

    amps = {}
    for k, (s, q) in enumerate(SECTORS):
        ket = _sector_state(space, s, q, psi_m)
        amps[s, q] = np.vdot(ket, m @ ket)
    phases = {k: float(np.angle(v)) for k, v in amps.items()}
    raw = -np.angle(amps[1, 1] * amps[-1, -1] * np.conj(amps[1, -1]) * np.conj(amps[-1, 1])) / 4.0
    if alpha_reference is None:
        alpha_reference = run_gate_displacement(schedule, ion, kappa).extracted_phase
    alpha = alpha_reference + _wrap(raw - alpha_reference, np.pi / 2)

    zz = np.kron(np.kron([1.0, -1.0], [1.0, -1.0]), np.ones(space.fock_dim))
    ideal = np.exp(-1j * alpha * zz) * plus
    overlap = np.vdot(ideal, m @ plus)
    infid = float(min(max(1.0 - abs(overlap) ** 2, 0.0), 1.0))
    return GateResult(
        extracted_phase=float(alpha),
        gate_time=schedule.clock_time,
        infidelity=infid,
        sector_phases=phases,
        residuals={k: abs(v) for k, v in amps.items()},
        global_phase=float(np.angle(overlap)),
        free_time=schedule.free_time,
        total_unitary=u,
        max_leakage=worst,
        backend="fock",
    )


# -- analytic phase ----------------------------------------------------------


@dataclass(frozen=True)
class AnalyticPhase:
    """Closed-form gate phase in two prefactor conventions.

    ``alpha_bare`` uses the bare charging energy ``e^2 / C_r`` with no
    ``C_m / C_t`` factor; ``alpha_coupled`` uses the full coupling
    ``e^2 C_m / (C_sigma C_t)``.  Both share the free-particle time factor
    ``n1 tau1 t1 + n2 tau2 t2``.

    ``dynamical_time`` is the time over which the charge-state energy
    accumulates a dynamical phase, taken as the summed length of the
    coupling windows ``2 (tau1 + tau2)``.  This is an assumption; the
    dynamical phase is not otherwise used.
    """

    alpha_bare: float
    alpha_coupled: float
    kappa_bare: float
    kappa_coupled: float
    dynamical_time: float = 0.0


def _phase_per_kappa(schedule: PulseSchedule, ion: IonParams) -> float:
    n1, n2, tau1, tau2, t1, t2 = schedule.canonical_parameters()
    return HBAR * ion.photon_momentum / ion.mass * (n1 * tau1 * t1 + n2 * tau2 * t2)


def analytic_phase(
    schedule: PulseSchedule,
    ion: IonParams,
    circuit: CircuitParams,
    coupling: Optional[EffectiveCoupling] = None,
) -> AnalyticPhase:
    """Free-particle gate phase ``(hbar dk / m) kappa (n1 tau1 t1 + n2 tau2 t2)``."""
    check_commensurability(schedule)
    if coupling is None:
        coupling = effective_ion_charge_coupling(circuit)
    kappa_bare = E_CHARGE**2 / (HBAR * circuit.C_r * circuit.d_i)
    per = _phase_per_kappa(schedule, ion)
    _, _, tau1, tau2, _, _ = schedule.canonical_parameters()
    return AnalyticPhase(
        alpha_bare=per * kappa_bare,
        alpha_coupled=per * coupling.kappa,
        kappa_bare=kappa_bare,
        kappa_coupled=coupling.kappa,
        dynamical_time=2.0 * (abs(tau1) + abs(tau2)),
    )


def solve_tau_for_phase(alpha: float, n1: int, t1: float, t2: float, ion: IonParams, kappa: float) -> float:
    """Coupling window tau1 giving phase ``alpha`` in the free-particle limit."""
    # n1 tau1 t1 + n2 tau2 t2 = 2 n1 tau1 t1 once n2 t2 = n1 t1 and tau2 t2 = tau1 t1
    return alpha * ion.mass / (HBAR * ion.photon_momentum * kappa * 2.0 * n1 * t1)


def gate_time_for_phase(
    alpha: float, n1: int, t1: float, t2: float, ion: IonParams, kappa: float, dead_time: float = 0.0
) -> tuple[float, PulseSchedule]:
    """Clock time of the canonical gate reaching ``alpha``, and its schedule."""
    tau1 = solve_tau_for_phase(alpha, n1, t1, t2, ion, kappa)
    sched = canonical_schedule(n1, None, tau1, t1, t2, dead_time=dead_time)
    return sched.clock_time, sched


# -- fidelity scaling --------------------------------------------------------


@dataclass
class SweepResult:
    omega_nu_T: np.ndarray
    infidelities: np.ndarray
    alpha_numeric: np.ndarray
    alpha_analytic: np.ndarray
    fitted_exponent: float
    fit_intercept: float
    n_kicks: int


def fit_power_law(x: Sequence[float], y: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope and intercept of log y against log x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size < 3:
        raise ValueError("need at least three points for a power-law fit")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs strictly positive data")
    slope, intercept = np.polyfit(np.log(x), np.log(y), 1)
    return float(slope), float(intercept)


def fidelity_scaling_sweep(
    ion: IonParams,
    coupling: EffectiveCoupling | float,
    omega_nu_t_values: Sequence[float],
    n_kicks: int = 1,
    alpha_target: float = np.pi / 4,
) -> SweepResult:
    """Infidelity of the alpha_target gate as a function of omega_nu T.

    The schedule shape is fixed: ``t1 = t2 = T / 2``, ``n1 = n2 = n_kicks``,
    and ``tau1`` is solved from the free-particle phase for each ``T``.  The
    trap frequency is held fixed and ``T`` is the free-evolution time.
    """
    kappa = coupling.kappa if isinstance(coupling, EffectiveCoupling) else float(coupling)
    values = np.asarray(omega_nu_t_values, dtype=float)
    if values.size < 3:
        raise ValueError("need at least three sweep points")
    infid = np.empty_like(values)
    a_num = np.empty_like(values)
    a_ana = np.full_like(values, alpha_target)
    for i, wt in enumerate(values):
        t_half = wt / ion.trap_frequency / 2.0
        tau1 = solve_tau_for_phase(alpha_target, n_kicks, t_half, t_half, ion, kappa)
        sched = canonical_schedule(n_kicks, n_kicks, tau1, t_half, t_half)
        res = run_gate_displacement(sched, ion, kappa)
        infid[i] = res.infidelity
        a_num[i] = res.extracted_phase
    slope, icpt = fit_power_law(values, infid)
    return SweepResult(values, infid, a_num, a_ana, slope, icpt, n_kicks)


# -- swap --------------------------------------------------------------------

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
_I2 = np.eye(2, dtype=complex)


def reduce_to_qubits(u: np.ndarray, space: HilbertSpace, motional: np.ndarray, free_time: float = 0.0, omega: float = 0.0) -> np.ndarray:
    """4x4 block ``<i, psi| U0(T)^H U |j, psi>`` for a fixed motional state."""
    psi = np.asarray(motional, dtype=complex)
    n_diag = np.tile(np.arange(space.fock_dim, dtype=float), 4)
    m = np.exp(1j * omega * free_time * n_diag)[:, None] * u
    kets = np.array([np.kron(e, psi) for e in np.eye(4)]).T
    return kets.conj().T @ m @ kets


def _to_cz(phase_gate: np.ndarray, tol: float) -> np.ndarray:
    """Strip local and global phases from a diagonal pi/4 ZZ gate to get CZ."""
    g = np.asarray(phase_gate, dtype=complex)
    if g.shape != (4, 4):
        raise ValueError("phase gate must be 4x4 on (ion, charge)")
    if np.max(np.abs(g - np.diag(np.diag(g)))) > tol or np.max(np.abs(np.abs(np.diag(g)) - 1)) > tol:
        raise ValueError("input is not a diagonal unitary controlled-phase")
    ph = np.angle(np.diag(g))
    chi = ph[0] - ph[1] - ph[2] + ph[3]
    if abs(_wrap(chi - np.pi, 2 * np.pi)) > 1e-6 and abs(_wrap(chi + np.pi, 2 * np.pi)) > 1e-6:
        raise ValueError(f"controlled phase {chi:.4f} is not of pi/4 type (4 alpha = pi)")
    # local corrections put phases 0 on |00>, |01>, |10>, leaving -1 on |11>
    corr = np.exp(-1j * np.array([ph[0], ph[1], ph[2], ph[1] + ph[2] - ph[0]]))
    return np.diag(corr) @ g


def compose_swap(phase_gate: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """SWAP from three uses of a pi/4 controlled-phase plus single-qubit gates.

    Each use is turned into CZ by local Z rotations, then into a CNOT by
    Hadamards on the target; SWAP = CNOT(s->q) CNOT(q->s) CNOT(s->q).
    """
    cz = _to_cz(phase_gate, tol)
    cnot_sq = np.kron(_I2, _H) @ cz @ np.kron(_I2, _H)
    cnot_qs = np.kron(_H, _I2) @ cz @ np.kron(_H, _I2)
    return cnot_sq @ cnot_qs @ cnot_sq


# -- bystander ---------------------------------------------------------------


def bystander_check(
    schedule: PulseSchedule,
    space: HilbertSpace,
    ion: Optional[IonParams] = None,
    coupling: EffectiveCoupling | float = 0.0,
    bystander_fock_dim: Optional[int] = None,
    bystander_state: Optional[np.ndarray] = None,
    dim_cap: int = 512,
) -> float:
    """Deviation of an unaddressed ion's motion from free evolution.

    The addressed system (ion, charge, motion) and the bystander's motional
    mode are propagated jointly, with every generator embedded in the joint
    space.  Kicks and coupling act on the addressed factors only; free
    intervals evolve both motional modes.

    Returns
    -------
    float
        Without ``bystander_state``: ``max |R - X (x) I|`` where
        ``R = U (I (x) U0_b(T))^H`` and ``X`` is the partial trace of R over
        the bystander divided by its dimension.  With ``bystander_state``:
        the max-norm distance of the bystander's reduced density matrix from
        the freely evolved state, with the addressed system starting in
        ``|+, +, 0>``.
    """
    ion = ion or IonParams()
    kappa = coupling.kappa if isinstance(coupling, EffectiveCoupling) else float(coupling)
    nb = bystander_fock_dim or space.fock_dim
    da = space.dim
    dim = da * nb
    if dim > dim_cap:
        raise ValueError(f"joint dimension {dim} exceeds cap {dim_cap}")
    ops = _fock_operators(space)
    eye_b = np.eye(nb)
    gen_s = np.kron(ops.sz_s @ ops.x, eye_b)
    gen_q = np.kron(ops.sz_q @ ops.x, eye_b)
    sx = np.kron(ops.sx_s, eye_b)
    number = np.kron(ops.number, np.ones(nb)) + np.kron(np.ones(da), np.arange(nb, dtype=float))
    u = np.eye(dim, dtype=complex)
    pulse = 0
    for seg in schedule.segments:
        if isinstance(seg, Free):
            u = np.exp(-1j * ion.trap_frequency * seg.duration * number)[:, None] * u
        elif isinstance(seg, Kick):
            sign = 1 if seg.count >= 0 else -1
            for _ in range(abs(seg.count)):
                z = sign * (1 if pulse % 2 == 0 else -1)
                k = matrix_exponential(gen_s, -1j * z * ion.lamb_dicke, hermitian=True, dim_cap=dim_cap)
                u = sx @ k @ u
                pulse += 1
        elif seg.duration != 0.0:
            k = matrix_exponential(gen_q, -1j * kappa * ion.x0 * seg.duration, hermitian=True, dim_cap=dim_cap)
            u = k @ u
    u0_b = np.exp(-1j * ion.trap_frequency * schedule.free_time * np.arange(nb, dtype=float))
    if bystander_state is None:
        r = u * np.tile(u0_b.conj(), da)[None, :]
        r4 = r.reshape(da, nb, da, nb)
        x = np.einsum("ajbj->ab", r4) / nb
        return float(np.max(np.abs(r - np.kron(x, eye_b))))
    chi = np.asarray(bystander_state, dtype=complex)
    chi = chi / np.linalg.norm(chi)
    psi_a = (np.kron(np.kron([1, 1], [1, 1]), np.eye(space.fock_dim)[0]) / 2.0).astype(complex)
    out = (u @ np.kron(psi_a, chi)).reshape(da, nb)
    rho_b = out.T @ out.conj()
    target = u0_b * chi
    return float(np.max(np.abs(rho_b - np.outer(target, target.conj()))))
