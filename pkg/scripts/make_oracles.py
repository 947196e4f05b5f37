"""Compute reference values with independent methods and freeze them to JSON.

None of these computations call into ``hybridsim``; physical constants come
from scipy and every formula is re-derived here:

* gate phases: Schroedinger-picture composition of displacements and free
  rotations in 50-digit arithmetic;
* static coupling: the 2x2 capacitance matrix of the shorted cavity;
* switch coupling: nodal analysis from a branch list in 50-digit arithmetic;
* Matsubara sums: digamma closed forms;
* filter integrals: explicit time-domain G(omega) and adaptive quadrature.

Usage: python3 scripts/make_oracles.py [output.json]
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import mpmath as mp
import numpy as np
from scipy import constants as sc
from scipy import integrate

mp.mp.dps = 50

HBAR = mp.mpf(sc.hbar)
E = mp.mpf(sc.e)
KB = mp.mpf(sc.k)
AMU = mp.mpf(sc.physical_constants["atomic mass constant"][0])
MASS = {"Be9": mp.mpf("9.0121831") * AMU, "Ca43": mp.mpf("42.9587666") * AMU}
TRAP = 2 * mp.pi * 10**6
DK = mp.mpf(10) ** 8

CIRCUIT = dict(C_r=3e-15, L_r=3e-13, C_m=1e-16, C_J=1e-16, C_g=1e-16, d_i=20e-6, C_i=2e-17, C_i2=2e-17,
               E_J=2 * np.pi * 10e9, E_c=2 * np.pi * 100e9)


# -- gate ---------------------------------------------------------------------


def gate_sector(n1, n2, tau1, t1, t2, kappa, mass, s, q, dk=DK):
    """Schroedinger-picture product e^{i phi} D(beta) U0(T) for one sector."""
    x0 = mp.sqrt(HBAR / (2 * mass * TRAP))
    eta = dk * x0
    tau2 = tau1 * t1 / t2
    steps = [("K", n1), ("C", tau1), ("F", t1), ("K", -(n1 + n2)), ("C", -(tau1 + tau2)), ("F", t2),
             ("K", n2), ("C", tau2)]
    beta, phi, spin, pulse = mp.mpc(0), mp.mpf(0), s, 0
    for kind, val in steps:
        if kind == "F":
            beta = beta * mp.expj(-TRAP * val)
        else:
            if kind == "K":
                sign = 1 if val >= 0 else -1
                amps = []
                for _ in range(abs(val)):
                    z = sign * (1 if pulse % 2 == 0 else -1)
                    amps.append(-1j * z * eta * spin)
                    spin, pulse = -spin, pulse + 1
            else:
                amps = [-1j * kappa * x0 * val * q]
            for k in amps:
                phi += mp.im(k * mp.conj(beta))
                beta += k
    total_t = t1 + t2
    return phi, beta * mp.expj(TRAP * total_t)


def gate_oracle(n1, n2, tau1, t1, t2, kappa, species="Be9", dk=DK):
    mass = MASS[species]
    res = {(s, q): gate_sector(n1, n2, tau1, t1, t2, kappa, mass, s, q, dk) for s in (1, -1) for q in (1, -1)}
    alpha = -(res[1, 1][0] + res[-1, -1][0] - res[1, -1][0] - res[-1, 1][0]) / 4
    amp = sum(mp.expj(res[s, q][0] + alpha * s * q) * mp.exp(-abs(res[s, q][1]) ** 2 / 2) for s, q in res) / 4
    return float(alpha), float(1 - abs(amp) ** 2)


def kappa_bare():
    return E**2 / (HBAR * mp.mpf(CIRCUIT["C_r"]) * mp.mpf(CIRCUIT["d_i"]))


def c_sigma_exact():
    c = {k: mp.mpf(v) for k, v in CIRCUIT.items()}
    c_t = c["C_J"] + c["C_g"]
    node = c["C_r"] + c["C_i"] + c["C_i2"]
    det = (node + c["C_m"]) * (c["C_m"] + c_t) - c["C_m"] ** 2
    return det / c_t


def kappa_coupled():
    c_t = mp.mpf(CIRCUIT["C_J"]) + mp.mpf(CIRCUIT["C_g"])
    return E**2 * mp.mpf(CIRCUIT["C_m"]) / (HBAR * c_sigma_exact() * c_t * mp.mpf(CIRCUIT["d_i"]))


def sweep_oracle(values, n_kicks=1, species="Be9", kappa=None):
    kappa = kappa_bare() if kappa is None else kappa
    mass = MASS[species]
    out = []
    for wt in values:
        t_half = mp.mpf(wt) / TRAP / 2
        tau1 = (mp.pi / 4) * mass / (HBAR * DK * kappa * 2 * n_kicks * t_half)
        out.append(gate_oracle(n_kicks, n_kicks, tau1, t_half, t_half, kappa, species))
    return out


def gate_time_oracle(species, kappa, n=10, t=5e-9):
    mass = MASS[species]
    t = mp.mpf(t)
    tau1 = (mp.pi / 4) * mass / (HBAR * DK * kappa * 2 * n * t)
    return float(2 * t + 4 * tau1)


# -- switch -------------------------------------------------------------------


def nodal_matrices(branches_c, branches_l, n):
    c = mp.zeros(n, n)
    k = mp.zeros(n, n)
    for mat, branches in ((c, branches_c), (k, branches_l)):
        for i, j, val in branches:
            val = mp.mpf(val)
            if j is None:
                mat[i, i] += val
            else:
                mat[i, i] += val
                mat[j, j] += val
                mat[i, j] -= val
                mat[j, i] -= val
    return c, k


def switch_kappa(e_ja_ratio, flux):
    p = {k: mp.mpf(v) for k, v in CIRCUIT.items()}
    c_t = p["C_J"] + p["C_g"]
    # nodes: 0 = cavity end with the ion, 1 = far end, 2 = switch island, 3 = qubit
    caps = [(0, None, p["C_r"] / 2 + p["C_i"] + p["C_i2"]), (1, None, p["C_r"] / 2), (2, 3, p["C_m"]),
            (3, None, c_t)]
    e_ja = mp.mpf(e_ja_ratio) * p["E_J"]
    e_a = abs(2 * e_ja * mp.cos(mp.pi * mp.mpf(flux)))
    l_eff = (HBAR / (2 * E)) ** 2 / (HBAR * e_a)
    inds = [(0, 1, 1 / p["L_r"]), (1, 2, 1 / l_eff)]
    c, k = nodal_matrices(caps, inds, 4)
    w = p["E_J"]
    g = mp.inverse(c - k / w**2)
    return E**2 * g[0, 3] / (HBAR * p["d_i"])


# -- Matsubara ----------------------------------------------------------------


def _pair_sum(a, b, step=1):
    """sum_{n >= 1} a^2 / ((step n)^2 + b step n + a^2) via digamma."""
    disc = mp.sqrt(mp.mpc(b * b - 4 * a * a))
    u = (b + disc) / (2 * step)
    v = (b - disc) / (2 * step)
    if u == v:
        return a * a / step**2 * mp.psi(1, 1 + u)
    return a * a / step**2 * (mp.digamma(1 + u) - mp.digamma(1 + v)) / (u - v)


def matsubara_oracle(R_r, T=0.1, C_r=3e-15, C_m=1e-16, C_t=2e-16, L_r=3e-13):
    """k(0) and k(hbar beta / 2) of the regularised kernel."""
    hb = HBAR / (KB * mp.mpf(T))
    step = 2 * mp.pi / hb
    c_shunt = (mp.mpf(C_r) + mp.mpf(C_m)) / 4
    w_r = 2 / mp.sqrt((mp.mpf(C_r) + mp.mpf(C_m)) * mp.mpf(L_r))
    a = w_r / step
    b = (mp.mpf(R_r) / mp.mpf(L_r)) / step
    scale = (mp.mpf(C_m) / (2 * mp.mpf(C_t))) ** 2 / (c_shunt * hb)
    s_all = _pair_sum(a, b)
    s_even = _pair_sum(a, b, step=2)  # sum over n = 2m
    k0 = scale * (1 + 2 * s_all)
    khalf = scale * (1 + 2 * (2 * s_even - s_all))
    return float(mp.re(k0)), float(mp.re(khalf))


# -- filter integrals ---------------------------------------------------------


def g_transform_sq(omega, tau, n_intervals, flips=True):
    """|int_0^t g(t) e^{i w t} dt|^2 by summing interval integrals explicitly."""
    total = 0j
    for k in range(n_intervals):
        sign = (-1) ** k if flips else 1
        a, b = k * tau, (k + 1) * tau
        total += sign * (np.exp(1j * omega * b) - np.exp(1j * omega * a)) / (1j * omega)
    return abs(total) ** 2


def filter_oracle(psd, w_min, w_max, tau, n_intervals, flips, coupling):
    t = tau * n_intervals
    width = np.pi / t
    edges = np.unique(np.concatenate([
        np.geomspace(w_min, min(width, w_max), 40),
        np.arange(width, w_max, width),
        [w_max],
    ]))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        val, _ = integrate.quad(lambda w: psd(w) * g_transform_sq(w, tau, n_intervals, flips), lo, hi,
                                epsabs=0, epsrel=1e-10, limit=100)
        total += val
    return coupling**2 * total / np.pi


def main(path: str) -> None:
    out: dict = {}
    kb, kc = kappa_bare(), kappa_coupled()
    out["kappa_bare"] = float(kb)
    out["kappa_coupled"] = float(kc)
    out["C_sigma_exact"] = float(c_sigma_exact())
    out["H_int_over_h_Hz_200nm"] = float(HBAR * kc * mp.mpf("2e-7") / (2 * mp.pi * HBAR))
    out["gate_time"] = {
        f"{sp}_{conv}": gate_time_oracle(sp, k) for sp in ("Be9", "Ca43") for conv, k in (("bare", kb), ("coupled", kc))
    }
    values = [float(v) for v in np.geomspace(1e-3, 1e-1, 10)]
    sweep = sweep_oracle(values)
    out["sweep"] = {"omega_nu_T": values, "alpha": [a for a, _ in sweep], "infidelity": [f for _, f in sweep]}

    # small ladder amplitudes (eta = 0.237 per kick) keep the motion inside N = 64
    out["random_schedules_photon_momentum"] = 1e7
    rng = np.random.default_rng(20240611)
    schedules = []
    for _ in range(20):
        n1, n2 = (int(x) for x in rng.integers(1, 4, size=2))
        total = float(rng.uniform(1e-4, 1e-3)) / float(TRAP)
        t1 = total * n2 / (n1 + n2)
        t2 = n1 * t1 / n2
        amp = float(rng.uniform(0.2, 1.0))
        tau1 = amp / (float(kb) * float(mp.sqrt(HBAR / (2 * MASS["Be9"] * TRAP))))
        alpha, infid = gate_oracle(n1, n2, mp.mpf(tau1), mp.mpf(t1), mp.mpf(t2), kb, dk=mp.mpf(10) ** 7)
        schedules.append(dict(n1=n1, n2=n2, tau1=tau1, t1=t1, t2=t2, alpha=alpha, infidelity=infid))
    out["random_schedules"] = schedules

    out["switch_kappa"] = {f"{r}_{f}": float(switch_kappa(r, f)) for r in (100, 1000) for f in (0.0, 0.25, 0.4)}

    k0, kh = matsubara_oracle(0.031)
    k0_free, _ = matsubara_oracle(0.0)
    out["matsubara"] = {"k0": k0, "k_half": kh, "k0_lossless": k0_free}

    c = CIRCUIT["E_c"] * CIRCUIT["C_g"] / (2 * sc.e)
    amp_1f = 1e-14
    w_lo, w_hi = 2 * np.pi * 1e3, 2 * np.pi * 10e9
    psd_1f = lambda w: amp_1f / w  # noqa: E731
    on = filter_oracle(psd_1f, w_lo, w_hi, 1e-9, 20, True, c)
    off = filter_oracle(psd_1f, w_lo, w_hi, 1e-9, 20, False, c)
    s0 = 1e-20
    white = filter_oracle(lambda w: s0, 2 * np.pi * 1e3, 2 * np.pi * 20e9, 1e-9, 20, True, c)
    out["filter"] = {"one_over_f_flipped": on, "one_over_f_unflipped": off, "ratio": off / on,
                     "white_flipped": white, "white_S0": s0, "coupling": c}
    out["thermal_ratio_4K_100mK"] = float(mp.exp(-40))

    Path(path).write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/oracles.json")
