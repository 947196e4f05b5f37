import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridsim.cavity_dissipation import (
    BathSpec,
    ConvergenceError,
    backsolve_resistance,
    charge_decoherence_rate,
    continued_spectral_density,
    effective_impedance,
    effective_spectral_density,
    matsubara_coefficients,
    matsubara_kernel,
    pade_continuation,
    spectral_pipeline,
    zero_damping_kernel,
)
from hybridsim.constants import HBAR, K_B

BATH = BathSpec()


def test_kernel_matches_digamma_oracle(oracles):
    m = oracles["matsubara"]
    assert matsubara_kernel(BATH, 0.0) == pytest.approx(m["k0"], rel=1e-6)
    assert matsubara_kernel(BATH, BATH.hbar_beta / 2) == pytest.approx(m["k_half"], rel=1e-6)


def test_lossless_kernel_closed_form(oracles):
    lossless = BathSpec(R_r=0.0)
    k0 = matsubara_kernel(lossless, 0.0)
    assert k0 == pytest.approx(oracles["matsubara"]["k0_lossless"], rel=1e-4)
    assert k0 == pytest.approx(zero_damping_kernel(lossless), rel=1e-4)


def test_kernel_raises_when_limit_too_small():
    with pytest.raises(ConvergenceError):
        matsubara_kernel(BATH, 0.1 * BATH.hbar_beta, n_max=4, rtol=1e-15, n_limit=16)


@given(st.floats(0.0, 0.49))
def test_kernel_even_in_tau(frac):
    tau = frac * BATH.hbar_beta
    a = matsubara_kernel(BATH, tau)
    b = matsubara_kernel(BATH, -tau)
    assert b == pytest.approx(a, rel=1e-10)
    # periodicity in hbar beta mirrors the kernel about hbar beta / 2
    assert matsubara_kernel(BATH, BATH.hbar_beta - tau) == pytest.approx(a, rel=1e-6)


def test_coefficients_are_even_in_n():
    n = np.arange(1, 50)
    assert np.array_equal(matsubara_coefficients(BATH, n), matsubara_coefficients(BATH, -n))


def test_impedance_low_and_high_frequency():
    z0 = effective_impedance(BATH, 1e-3 * BATH.omega_r)
    assert z0.real == pytest.approx(BATH.R_r, rel=0.01)
    w = 1e3 * BATH.omega_r
    assert abs(effective_impedance(BATH, w)) == pytest.approx(1 / (w * BATH.c_shunt), rel=1e-3)


def test_impedance_poles_and_domain():
    lossless = BathSpec(R_r=0.0)
    with pytest.raises(ZeroDivisionError):
        effective_impedance(lossless, 0.0)
    with pytest.raises(ZeroDivisionError):
        effective_impedance(lossless, lossless.omega_r)
    with pytest.raises(ValueError):
        effective_impedance(BATH, -1.0)


def test_spectral_density_zero_frequency_limit():
    j0 = effective_spectral_density(BATH, 0.0)
    assert j0 == pytest.approx(BATH.ratio**2 * BATH.R_r * 2 * K_B * BATH.temperature / HBAR, rel=1e-9)
    # the leading thermal correction is (hbar omega / 2 k_B T)^2 / 3, about 2e-6 here
    assert effective_spectral_density(BATH, 1e-6 * BATH.omega_r) == pytest.approx(j0, rel=1e-5)


def test_spectral_density_low_temperature_limit():
    cold = BathSpec(temperature=1e-6)
    w = np.array([0.1, 0.5]) * cold.omega_r
    j = effective_spectral_density(cold, w)
    expected = cold.ratio**2 * w * np.real(effective_impedance(cold, w))
    np.testing.assert_allclose(j, expected, rtol=1e-12)


@given(st.floats(1e-3, 1.0))
def test_spectral_density_nonnegative(frac):
    assert effective_spectral_density(BATH, frac * BATH.omega_r) >= 0


def test_pade_reproduces_rational_function():
    f = lambda z: (1 + 2 * z + z**2) / (3 + z**2)
    z = np.array([0.5, 1.0, 1.5, 2.0, 2.5])
    probe = np.array([0.1 + 1j, 4.0 - 2j])
    np.testing.assert_allclose(pade_continuation(z, f(z), probe), f(probe), rtol=1e-10)


def test_continuation_on_dissipation_grid():
    w = np.geomspace(1e-3, 1e-1, 25) * BATH.omega_r
    direct = effective_spectral_density(BATH, w)
    cont = continued_spectral_density(BATH, w)
    assert np.max(np.abs(cont / direct - 1)) < 0.02
    at_tenth = continued_spectral_density(BATH, np.array([0.1 * BATH.omega_r]))[0]
    assert at_tenth == pytest.approx(effective_spectral_density(BATH, 0.1 * BATH.omega_r), rel=0.02)


def test_closure_of_rate():
    gamma, j0 = charge_decoherence_rate(BATH)
    assert abs(gamma - j0) / gamma < 1e-6
    assert gamma == pytest.approx(4.94e4, rel=0.01)


def test_zero_resistance_gives_zero_rate():
    assert charge_decoherence_rate(BathSpec(R_r=0.0)) == (0.0, 0.0)


@given(st.floats(1e-3, 1.0), st.floats(1e-2, 4.0))
def test_rate_linear_in_resistance_and_temperature(r, t):
    base = charge_decoherence_rate(BathSpec(R_r=r, temperature=t))[0]
    assert charge_decoherence_rate(BathSpec(R_r=2 * r, temperature=t))[0] == pytest.approx(2 * base)
    assert charge_decoherence_rate(BathSpec(R_r=r, temperature=3 * t))[0] == pytest.approx(3 * base)


def test_backsolved_resistance():
    assert backsolve_resistance(5e4, BATH) == pytest.approx(0.03138, rel=1e-3)


def test_pipeline_fields():
    res = spectral_pipeline(BATH, np.geomspace(1e-3, 1e-1, 11) * BATH.omega_r)
    assert res.closure_residual < 1e-6
    assert res.continuation_residual < 0.02
    assert np.all(res.J_eff >= 0)


def test_invalid_specs():
    with pytest.raises(ValueError):
        BathSpec(temperature=0.0)
    with pytest.raises(ValueError):
        BathSpec(R_r=-1.0)
    with pytest.raises(ValueError):
        BathSpec(C_t=0.0)
