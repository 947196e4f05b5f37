"""Charge-noise dephasing of the charge qubit and its suppression by flips.

Spectral convention: ``S(omega)`` is the symmetric two-sided density of the
gate-voltage noise, ``<dV(t) dV(t')> = int d omega / 2 pi S(omega)
exp(-i omega (t - t'))``, so the variance is ``int S d omega / 2 pi`` over the
whole real line.  Band limits ``omega_min, omega_max`` apply to ``|omega|``.

Flipping the charge qubit every ``tau`` multiplies the noise by a square wave
``g(t)`` of period ``2 tau``.  Its Fourier series is
``sum_{m odd} (4 / pi m) sin(m omega_1 t)`` with ``omega_1 = pi / tau``.

``phase_variance`` reports three long-time forms of the variance:

* ``harmonic_all``: ``c^2 (2/pi^2) sum_{n>=1} S(n omega_1) / n^2 t``, the
  harmonic-sum closed form (white noise gives ``c^2 S0 t / 3``);
* ``harmonic_odd``: the same sum restricted to the odd harmonics that the
  square wave actually contains;
* ``filter_harmonic``: ``c^2 (8/pi^2) sum_{m odd} S(m omega_1) / m^2 t``,
  the long-time limit of the filter-function integral in this convention
  (white noise gives ``c^2 S0 t``, as ``g^2 = 1`` demands).

``filter_integral`` is the finite-time filter-function integral itself and
is what Monte Carlo ensembles converge to.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Literal, Optional, Sequence

import numpy as np
from scipy.integrate import trapezoid

__all__ = [
    "DecoherenceRate",
    "FlipProtocol",
    "NoiseModel",
    "NoiseTrajectory",
    "PhaseVariance",
    "ResolutionError",
    "decoherence_rate",
    "filter_function",
    "g_function",
    "load_spectrum_table",
    "phase_ensemble",
    "phase_variance",
    "stochastic_phase",
    "synthesize_trajectory",
]

SpectrumKind = Literal["one_over_f", "white", "tabulated"]


class ResolutionError(ValueError):
    """Time step too coarse for the requested noise bandwidth."""


@dataclass(frozen=True)
class NoiseModel:
    """Gate-voltage noise spectrum and its coupling to the qubit phase.

    Parameters
    ----------
    spectrum_kind : {"one_over_f", "white", "tabulated"}
    amplitude : float
        ``A`` with ``S = A / |omega|`` (V^2) for 1/f, or ``S0`` (V^2 s) for
        white noise.  Ignored for tabulated spectra.
    omega_min, omega_max : float
        Band edges in rad/s.
    coupling : float
        ``E_c C_g / 2e`` in rad s^-1 V^-1.
    table_omega, table_psd : ndarray, optional
        Tabulated spectrum (rad/s, V^2 s), interpolated log-log.
    """

    spectrum_kind: SpectrumKind = "one_over_f"
    amplitude: float = 1e-9
    omega_min: float = 2 * np.pi * 1e3
    omega_max: float = 2 * np.pi * 10e9
    coupling: float = 1.0
    table_omega: Optional[np.ndarray] = field(default=None, repr=False)
    table_psd: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        if self.spectrum_kind not in ("one_over_f", "white", "tabulated"):
            raise ValueError(f"unknown spectrum kind {self.spectrum_kind!r}")
        if not 0 < self.omega_min < self.omega_max:
            raise ValueError("need 0 < omega_min < omega_max")
        if self.amplitude < 0:
            raise ValueError("amplitude must be non-negative")
        if self.spectrum_kind == "tabulated":
            if self.table_omega is None or self.table_psd is None:
                raise ValueError("tabulated spectrum needs table_omega and table_psd")
            if np.any(np.asarray(self.table_psd) < 0):
                raise ValueError("tabulated spectrum must be non-negative")
            if np.any(np.diff(self.table_omega) <= 0) or self.table_omega[0] <= 0:
                raise ValueError("table_omega must be positive and increasing")

    def psd(self, omega: np.ndarray | float) -> np.ndarray:
        """Two-sided density S(omega) in V^2 s, zero outside the band."""
        w = np.abs(np.asarray(omega, dtype=float))
        inside = (w >= self.omega_min) & (w <= self.omega_max)
        out = np.zeros_like(w)
        if self.spectrum_kind == "white":
            out[inside] = self.amplitude
        elif self.spectrum_kind == "one_over_f":
            out[inside] = self.amplitude / w[inside]
        else:
            tw = np.asarray(self.table_omega, dtype=float)
            tp = np.asarray(self.table_psd, dtype=float)
            inside &= (w >= tw[0]) & (w <= tw[-1])
            logp = np.interp(np.log(w[inside]), np.log(tw), np.log(np.maximum(tp, 1e-300)))
            out[inside] = np.exp(logp)
            out[out < 1e-299] = 0.0
        return out

    def variance(self) -> float:
        """<dV^2> = int S d omega / 2 pi over the whole line."""
        if self.spectrum_kind == "white":
            return self.amplitude * (self.omega_max - self.omega_min) / np.pi
        if self.spectrum_kind == "one_over_f":
            return self.amplitude * np.log(self.omega_max / self.omega_min) / np.pi
        w = np.geomspace(self.omega_min, self.omega_max, 20001)
        return float(trapezoid(self.psd(w), w) / np.pi)


def load_spectrum_table(path, coupling: float = 1.0) -> NoiseModel:
    """Two-column CSV (omega_rad_s, psd_V2s) to a tabulated NoiseModel."""
    data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
    if data.shape[1] != 2:
        raise ValueError("spectrum table must have two columns")
    if not np.isfinite(data).all():
        data = data[np.isfinite(data).all(axis=1)]
    w, s = data[:, 0], data[:, 1]
    return NoiseModel("tabulated", 0.0, float(w[0]), float(w[-1]), coupling, w, s)


@dataclass(frozen=True)
class FlipProtocol:
    """Charge flips every ``interval`` over ``total_time``.

    ``flip_infidelity`` is the population error per flip pulse; flips are
    otherwise instantaneous.  It enters only through ``contrast``.
    """

    interval: float
    total_time: float
    enabled: bool = True
    flip_infidelity: float = 0.0

    def __post_init__(self) -> None:
        if self.total_time <= 0:
            raise ValueError("total_time must be positive")
        if not 0.0 <= self.flip_infidelity < 1.0:
            raise ValueError("flip_infidelity must lie in [0, 1)")
        if self.enabled:
            if self.interval <= 0:
                raise ValueError("interval must be positive")
            n = self.total_time / self.interval
            if abs(n - round(n)) > 1e-9 * n or round(n) % 2 or round(n) < 2:
                raise ValueError(f"total_time / interval = {n} must be an even integer >= 2")

    @property
    def n_intervals(self) -> int:
        return int(round(self.total_time / self.interval))

    @property
    def n_flips(self) -> int:
        """Flip pulses between intervals (the final one restores the state)."""
        return self.n_intervals if self.enabled else 0

    @property
    def contrast(self) -> float:
        """Coherence factor (1 - flip_infidelity)^n_flips from imperfect flips."""
        return (1.0 - self.flip_infidelity) ** self.n_flips

    @property
    def omega_1(self) -> float:
        """Fundamental angular frequency of g(t), pi / interval."""
        return np.pi / self.interval


@dataclass(frozen=True)
class NoiseTrajectory:
    sample_times: np.ndarray
    values: np.ndarray
    seed: int
    dt: float


# -- time domain -------------------------------------------------------------


def g_function(protocol: FlipProtocol, t: np.ndarray | float) -> np.ndarray | float:
    """Square wave +1 on [2n tau, (2n+1) tau), -1 on [(2n+1) tau, (2n+2) tau)."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr >= protocol.total_time):
        raise ValueError("t outside [0, total_time)")
    if not protocol.enabled:
        out = np.ones_like(t_arr)
    else:
        k = np.floor(t_arr / protocol.interval + 1e-12).astype(np.int64)
        out = np.where(k % 2 == 0, 1.0, -1.0)
    return float(out) if np.ndim(t) == 0 else out


def synthesize_trajectory(
    model: NoiseModel, duration: float, dt: float, seed: int, pad: int = 2
) -> NoiseTrajectory:
    """Gaussian noise realisation with spectrum ``model.psd`` on [0, duration].

    Fourier amplitudes on a periodic grid of length ``pad * duration`` are
    complex Gaussian with ``<|X_k|^2> = L S(omega_k) / dt``; the inverse real
    FFT then has variance ``sum_k S(omega_k) / (L dt)``, the Riemann sum of
    ``int S d omega / 2 pi``.  Frequencies below ``2 pi / (pad duration)``
    are not represented.
    """
    if dt >= 2 * np.pi / (10 * model.omega_max):
        raise ResolutionError(
            f"dt = {dt:.3g} s does not resolve omega_max = {model.omega_max:.3g} rad/s"
        )
    n_steps = int(round(duration / dt))
    if abs(n_steps * dt - duration) > 1e-9 * duration:
        raise ResolutionError("duration must be a whole number of time steps")
    length = pad * n_steps
    rng = np.random.default_rng(np.random.SeedSequence(int(seed)))
    omega = 2 * np.pi * np.fft.rfftfreq(length, dt)
    scale = np.sqrt(length * model.psd(omega) / dt)
    re = rng.standard_normal(omega.size)
    im = rng.standard_normal(omega.size)
    spec = scale * (re + 1j * im) / np.sqrt(2.0)
    spec[0] = 0.0
    if length % 2 == 0:
        spec[-1] = scale[-1] * re[-1]
    values = np.fft.irfft(spec, n=length)[: n_steps + 1]
    times = np.arange(n_steps + 1) * dt
    return NoiseTrajectory(times, values, int(seed), dt)


def stochastic_phase(traj: NoiseTrajectory, protocol: FlipProtocol, model: NoiseModel) -> float:
    """Phase ``c int_0^t dV(t') g(t') dt'`` by the trapezoidal rule.

    With flips enabled the integral is taken flip interval by flip interval
    and the pairs are differenced before summing, so a constant trajectory
    gives exactly zero.
    """
    t_end = protocol.total_time
    n_steps = int(round(t_end / traj.dt))
    if traj.sample_times.size < n_steps + 1 or abs(traj.sample_times[n_steps] - t_end) > 1e-9 * t_end:
        raise ValueError("trajectory does not cover the protocol time")
    v = traj.values[: n_steps + 1]
    if not protocol.enabled:
        return float(model.coupling * trapezoid(v, dx=traj.dt))
    per = protocol.interval / traj.dt
    r = int(round(per))
    if abs(per - r) > 1e-9 * per:
        raise ValueError("flip interval must be a whole number of time steps")
    idx = np.arange(protocol.n_intervals)[:, None] * r + np.arange(r + 1)[None, :]
    blocks = trapezoid(v[idx], dx=traj.dt, axis=1)
    pairs = blocks[0::2] - blocks[1::2]
    return float(model.coupling * np.sum(pairs))


def _phases_for_seeds(args) -> np.ndarray:
    model, protocol, dt, seeds = args
    return np.array(
        [stochastic_phase(synthesize_trajectory(model, protocol.total_time, dt, s), protocol, model) for s in seeds]
    )


def phase_ensemble(
    model: NoiseModel,
    protocol: FlipProtocol,
    seeds: Sequence[int],
    dt: float,
    workers: int = 1,
) -> np.ndarray:
    """Stochastic phase for every seed, in the order given.

    Each seed defines its own trajectory, so the result does not depend on
    how the seeds are split across worker processes.
    """
    seeds = [int(s) for s in seeds]
    if workers <= 1 or len(seeds) < 2 * workers:
        return _phases_for_seeds((model, protocol, dt, seeds))
    chunks = [seeds[i::workers] for i in range(workers)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_phases_for_seeds, [(model, protocol, dt, c) for c in chunks]))
    out = np.empty(len(seeds))
    for i, part in enumerate(parts):
        out[i::workers] = part
    return out


# -- frequency domain --------------------------------------------------------


def filter_function(protocol: FlipProtocol, omega: np.ndarray) -> np.ndarray:
    """|G(omega)|^2 with G(omega) = int_0^t g(t) exp(i omega t) dt."""
    w = np.asarray(omega, dtype=float)
    if not protocol.enabled:
        half = 0.5 * w * protocol.total_time
        return protocol.total_time**2 * np.sinc(half / np.pi) ** 2
    tau = protocol.interval
    n = protocol.n_intervals
    theta = w * tau
    single = tau**2 * np.sinc(theta / (2 * np.pi)) ** 2
    # |sum_k (-e^{i theta})^k|^2 is a Dirichlet kernel in theta + pi
    phi = 0.5 * (theta + np.pi)
    den = np.sin(phi) ** 2
    num = np.sin(n * phi) ** 2
    small = den < 1e-24
    ratio = np.where(small, float(n * n), num / np.where(small, 1.0, den))
    return single * ratio


def _filter_grid(model: NoiseModel, protocol: FlipProtocol, points_per_width: int) -> np.ndarray:
    t = protocol.total_time
    width = 2 * np.pi / t
    lo, hi = model.omega_min, model.omega_max
    split = min(max(lo, 0.05 * width), hi)
    parts = []
    if split > lo:
        parts.append(np.geomspace(lo, split, 4000))
    n_lin = int(np.ceil((hi - split) / (width / points_per_width))) + 1
    parts.append(np.linspace(split, hi, max(n_lin, 2)))
    return np.unique(np.concatenate(parts))


def _filter_integral(model: NoiseModel, protocol: FlipProtocol, points_per_width: int = 64) -> float:
    w = _filter_grid(model, protocol, points_per_width)
    integrand = model.psd(w) * filter_function(protocol, w)
    # two-sided symmetric spectrum: int_{-inf}^{inf} d omega / 2 pi = int_0^inf d omega / pi
    return float(model.coupling**2 * trapezoid(integrand, w) / np.pi)


@dataclass(frozen=True)
class PhaseVariance:
    """Phase variance in several normalisations; see the module docstring."""

    variance: float
    harmonic_all: float
    harmonic_odd: float
    filter_harmonic: float
    filter_integral: float
    total_time: float
    n_harmonics: int


def _harmonic_sums(model: NoiseModel, protocol: FlipProtocol, n_cap: int = 1_000_000):
    """Sums of S(n omega_1) / n^2 over all n and over odd n, up to omega_max."""
    w1 = protocol.omega_1
    n_max = int(min(n_cap, max(1, np.floor(model.omega_max / w1))))
    n = np.arange(1, n_max + 1)
    terms = model.psd(n * w1) / n.astype(float) ** 2
    odd = n % 2 == 1
    return float(terms.sum()), float(terms[odd].sum()), n_max


def phase_variance(model: NoiseModel, protocol: FlipProtocol, points_per_width: int = 64) -> PhaseVariance:
    """Variance of the stochastic phase at ``protocol.total_time``.

    ``variance`` is the harmonic-sum form over all n
    (``harmonic_all``).  Without flips only the filter integral is defined
    and ``variance`` equals it.
    """
    c2 = model.coupling**2
    t = protocol.total_time
    integral = _filter_integral(model, protocol, points_per_width)
    if not protocol.enabled:
        nan = float("nan")
        return PhaseVariance(integral, nan, nan, nan, integral, t, 0)
    if protocol.omega_1 * t < 10:
        warnings.warn("omega_1 t is not >> 1; the long-time harmonic forms are inaccurate", RuntimeWarning, stacklevel=2)
    s_all, s_odd, n_used = _harmonic_sums(model, protocol)
    h_all = c2 * 2 / np.pi**2 * s_all * t
    h_odd = c2 * 2 / np.pi**2 * s_odd * t
    f_harm = c2 * 8 / np.pi**2 * s_odd * t
    return PhaseVariance(h_all, h_all, h_odd, f_harm, integral, t, n_used)


@dataclass(frozen=True)
class DecoherenceRate:
    """Dephasing rates (s^-1) and the high-frequency bound.

    ``rate`` is half the slope of the harmonic-sum variance; ``rate_filter``
    uses the filter-function normalisation.  ``bound`` uses the pi^2/6 sum,
    ``bound_odd`` the pi^2/8 sum over odd harmonics.
    """

    rate: float
    rate_odd: float
    rate_filter: float
    bound: float
    bound_odd: float
    delta_v2_max: float


def decoherence_rate(model: NoiseModel, protocol: FlipProtocol, band_factor: float = 100.0) -> DecoherenceRate:
    """Gaussian-phase dephasing rate ``d<phi^2>/dt / 2`` and its bound.

    ``delta_v2_max`` is the largest spectral density on
    ``[omega_1, band_factor * omega_1]``.
    """
    if not protocol.enabled:
        raise ValueError("the harmonic rate is defined for the flip protocol only")
    pv = phase_variance(model, protocol)
    t = protocol.total_time
    w1 = protocol.omega_1
    w = np.geomspace(w1, band_factor * w1, 4001)
    s_max = float(np.max(model.psd(w)))
    c2 = model.coupling**2
    return DecoherenceRate(
        rate=pv.harmonic_all / t / 2,
        rate_odd=pv.harmonic_odd / t / 2,
        rate_filter=pv.filter_harmonic / t / 2,
        bound=c2 * s_max / 3,
        bound_odd=c2 * s_max / 4,
        delta_v2_max=s_max,
    )
