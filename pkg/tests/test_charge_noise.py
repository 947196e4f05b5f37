import warnings
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridsim.charge_noise import (
    FlipProtocol,
    NoiseModel,
    NoiseTrajectory,
    ResolutionError,
    decoherence_rate,
    filter_function,
    g_function,
    load_spectrum_table,
    phase_ensemble,
    phase_variance,
    stochastic_phase,
    synthesize_trajectory,
)

C = 1.96e14  # rad s^-1 V^-1, E_c C_g / 2e at the reference parameters
ONE_OVER_F = NoiseModel("one_over_f", 1e-14, 2 * np.pi * 1e3, 2 * np.pi * 10e9, C)
WHITE = NoiseModel("white", 1e-20, 2 * np.pi * 1e3, 2 * np.pi * 20e9, C)
ECHO = FlipProtocol(1e-9, 20e-9)


def lorentzian(corner):
    w = np.geomspace(2 * np.pi * 1e3, 2 * np.pi * 50e9, 2001)
    return NoiseModel("tabulated", 0.0, w[0], w[-1], C, w, 2e-10 * corner / (corner**2 + w**2))


def test_g_function_branches():
    assert g_function(ECHO, 0.0) == 1.0
    assert g_function(ECHO, 1.5e-9) == -1.0
    assert g_function(FlipProtocol(1e-9, 2e-8, enabled=False), 1.5e-9) == 1.0
    with pytest.raises(ValueError):
        g_function(ECHO, 2e-8)


def test_g_fourier_coefficients():
    tau = 1.0
    p = FlipProtocol(tau, 400 * tau)
    t = (np.arange(400 * 256) + 0.5) * (tau / 256)
    g = g_function(p, t)
    w1 = np.pi / tau  # period 2 tau
    for m in range(1, 8):
        b_m = 2 * np.mean(g * np.sin(m * w1 * t))
        expected = 4 / (np.pi * m) if m % 2 else 0.0
        assert b_m == pytest.approx(expected, abs=1e-3)


def test_protocol_needs_even_interval_count():
    with pytest.raises(ValueError):
        FlipProtocol(1e-9, 3e-9)
    with pytest.raises(ValueError):
        FlipProtocol(1e-9, 2e-9, flip_infidelity=1.0)
    assert FlipProtocol(1e-9, 2e-8, flip_infidelity=0.01).contrast == pytest.approx(0.99**20)


def test_band_limits_and_variance():
    assert ONE_OVER_F.psd(1.0)[()] == 0.0
    w = 2 * np.pi * 1e6
    assert ONE_OVER_F.psd(w)[()] == pytest.approx(1e-14 / w)
    assert ONE_OVER_F.psd(-w)[()] == ONE_OVER_F.psd(w)[()]
    with pytest.raises(ValueError):
        NoiseModel("pink", 1.0)
    with pytest.raises(ValueError):
        NoiseModel("white", 1.0, 2.0, 1.0)


def test_resolution_is_enforced():
    with pytest.raises(ResolutionError):
        synthesize_trajectory(ONE_OVER_F, 20e-9, 1e-10, seed=0)


def test_white_variance_parseval():
    model = NoiseModel("white", 1e-20, 2 * np.pi * 1e6, 2 * np.pi * 10e9, 1.0)
    v = np.concatenate([synthesize_trajectory(model, 20e-9, 5e-12, seed=s).values for s in range(1000)])
    assert np.var(v) == pytest.approx(model.variance(), rel=0.05)


def test_one_over_f_has_equal_power_per_decade():
    model = NoiseModel("one_over_f", 1.0, 2 * np.pi * 1e3, 2 * np.pi * 1e8, 1.0)
    dt = 5e-10
    n = 2**19
    spectra = []
    for s in range(40):
        v = synthesize_trajectory(model, n * dt, dt, seed=s, pad=1).values[:n]
        spectra.append(np.abs(np.fft.rfft(v)) ** 2)
    power = np.mean(spectra, axis=0)
    w = 2 * np.pi * np.fft.rfftfreq(n, dt)
    decades = [(1e5, 1e6), (1e6, 1e7), (1e7, 1e8)]
    bands = [power[(w >= 2 * np.pi * lo) & (w < 2 * np.pi * hi)].sum() for lo, hi in decades]
    assert max(bands) / min(bands) - 1 < 0.10


def test_trajectories_are_reproducible_per_seed():
    a = synthesize_trajectory(ONE_OVER_F, 20e-9, 5e-12, seed=7)
    b = synthesize_trajectory(ONE_OVER_F, 20e-9, 5e-12, seed=7)
    c = synthesize_trajectory(ONE_OVER_F, 20e-9, 5e-12, seed=8)
    assert np.array_equal(a.values, b.values)
    assert not np.array_equal(a.values, c.values)


def test_constant_trajectory_gives_exactly_zero():
    n = 4000
    traj = NoiseTrajectory(np.arange(n + 1) * 5e-12, np.full(n + 1, 0.123), 0, 5e-12)
    assert stochastic_phase(traj, ECHO, ONE_OVER_F) == 0.0


@given(st.floats(-1.0, 1.0), st.integers(0, 50))
def test_offset_does_not_change_the_phase(offset, seed):
    traj = synthesize_trajectory(ONE_OVER_F, 20e-9, 5e-12, seed=seed)
    shifted = NoiseTrajectory(traj.sample_times, traj.values + offset, seed, traj.dt)
    a = stochastic_phase(traj, ECHO, ONE_OVER_F)
    b = stochastic_phase(shifted, ECHO, ONE_OVER_F)
    assert b == pytest.approx(a, abs=1e-12 * C * 20e-9 * (1 + abs(offset)))


def test_ensemble_is_worker_independent():
    seeds = list(range(24))
    one = phase_ensemble(ONE_OVER_F, ECHO, seeds, 5e-12, workers=1)
    four = phase_ensemble(ONE_OVER_F, ECHO, seeds, 5e-12, workers=4)
    assert np.array_equal(one, four)


def test_filter_function_limits():
    assert filter_function(ECHO, np.array([1e-3]))[0] == pytest.approx(0.0, abs=1e-30)
    off = FlipProtocol(1e-9, 20e-9, enabled=False)
    assert filter_function(off, np.array([1e-3]))[0] == pytest.approx((20e-9) ** 2)
    # the flipped filter peaks near the fundamental pi / tau; the finite
    # window pulls the maximum slightly below it
    w = np.linspace(0.5, 1.5, 2001) * np.pi / 1e-9
    assert w[np.argmax(filter_function(ECHO, w))] == pytest.approx(np.pi / 1e-9, rel=1e-2)


def test_filter_integrals_match_quadrature_oracle(oracles):
    f = oracles["filter"]
    on = phase_variance(ONE_OVER_F, ECHO).filter_integral
    off = phase_variance(ONE_OVER_F, FlipProtocol(1e-9, 20e-9, enabled=False)).filter_integral
    assert on == pytest.approx(f["one_over_f_flipped"], rel=2e-3)
    assert off == pytest.approx(f["one_over_f_unflipped"], rel=2e-3)
    assert phase_variance(WHITE, ECHO).filter_integral == pytest.approx(f["white_flipped"], rel=2e-3)


def test_white_closed_forms():
    pv = phase_variance(WHITE, ECHO)
    expected = C**2 * 1e-20 * 20e-9
    # the harmonic-sum normalisation is a third of the filter-function one;
    # harmonics above omega_max are cut, which costs about 1.5 %
    assert pv.variance == pytest.approx(expected / 3, rel=0.02)
    assert pv.filter_harmonic == pytest.approx(expected, rel=0.02)
    rate = decoherence_rate(WHITE, ECHO)
    assert rate.rate == pytest.approx(C**2 * 1e-20 / 6, rel=0.02)
    assert rate.rate == pytest.approx(pv.variance / 20e-9 / 2)


@pytest.mark.parametrize("model", [WHITE, lorentzian(2 * np.pi * 30e9)], ids=["white", "lorentzian"])
@pytest.mark.parametrize("n_intervals", [8, 20, 200])
def test_filter_equivalence_for_smooth_spectra(model, n_intervals):
    p = FlipProtocol(1e-9, n_intervals * 1e-9)
    assert p.omega_1 * p.total_time >= 20
    pv = phase_variance(model, p)
    assert pv.filter_integral == pytest.approx(pv.filter_harmonic, rel=0.02)


def test_filter_equivalence_for_one_over_f_needs_longer_times():
    p = FlipProtocol(1e-9, 200e-9)
    pv = phase_variance(ONE_OVER_F, p)
    assert pv.filter_integral == pytest.approx(pv.filter_harmonic, rel=0.02)


def test_halving_tau_never_increases_variance():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        taus = [4e-9, 2e-9, 1e-9, 5e-10, 2.5e-10]
        var = [phase_variance(ONE_OVER_F, FlipProtocol(t, 40e-9)) for t in taus]
    for field in ("variance", "filter_integral"):
        vals = [getattr(v, field) for v in var]
        assert all(b <= a for a, b in zip(vals, vals[1:]))


def test_gaussian_phase_average():
    model = NoiseModel("white", 1e-21, 2 * np.pi * 1e6, 2 * np.pi * 20e9, C)
    phases = phase_ensemble(model, ECHO, range(2000), 2.5e-12)
    mean = np.mean(np.exp(1j * phases))
    sigma = np.std(np.cos(phases)) / np.sqrt(len(phases))
    assert abs(mean.real - np.exp(-np.var(phases) / 2)) < 3 * sigma


def test_one_over_f_suppression_and_bound():
    off = phase_variance(ONE_OVER_F, FlipProtocol(1e-9, 20e-9, enabled=False)).filter_integral
    on = phase_variance(ONE_OVER_F, ECHO).filter_integral
    assert off / on > 100
    r = decoherence_rate(ONE_OVER_F, ECHO)
    assert r.rate <= r.bound
    assert r.bound_odd == pytest.approx(0.75 * r.bound)


def test_bound_holds_for_every_table(spectra_dir):
    tables = sorted(Path(spectra_dir).glob("*.csv"))
    assert tables
    for path in tables:
        r = decoherence_rate(load_spectrum_table(path, coupling=C), ECHO)
        assert r.rate <= r.bound, path.name


def test_rate_needs_flips():
    with pytest.raises(ValueError):
        decoherence_rate(ONE_OVER_F, FlipProtocol(1e-9, 20e-9, enabled=False))


def test_monte_carlo_matches_filter_integral():
    phases = phase_ensemble(WHITE, ECHO, range(2000), 2.5e-12)
    pv = phase_variance(WHITE, ECHO)
    sem = np.sqrt(2.0 / phases.size)  # relative standard error of a Gaussian second moment
    assert np.mean(phases**2) == pytest.approx(pv.filter_integral, rel=0.03 + 3 * sem)
