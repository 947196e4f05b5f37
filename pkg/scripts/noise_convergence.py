"""Monte Carlo phase variance against the closed forms as the seed count grows.

Prints, for white noise under the default echo, the sample variance and its
ratio to both the harmonic-sum form (c^2 S0 t / 3) and the filter-function
integral.
"""

import argparse

import numpy as np

from hybridsim.charge_noise import FlipProtocol, NoiseModel, phase_ensemble, phase_variance
from hybridsim.circuit_reduction import CircuitParams
from hybridsim.constants import E_CHARGE


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-seeds", type=int, default=10_000)
    ap.add_argument("--workers", type=int, default=4)
    args = ap.parse_args()
    p = CircuitParams()
    coupling = p.E_c * p.C_g / (2 * E_CHARGE)
    model = NoiseModel("white", 1e-20, 2 * np.pi * 1e3, 2 * np.pi * 20e9, coupling)
    protocol = FlipProtocol(1e-9, 20e-9)
    pv = phase_variance(model, protocol)
    phases = phase_ensemble(model, protocol, range(args.max_seeds), 2.5e-12, workers=args.workers)
    print(f"harmonic form  {pv.variance:.5g} rad^2")
    print(f"filter integral {pv.filter_integral:.5g} rad^2")
    print(f"{'seeds':>8} {'MC var':>10} {'/harmonic':>10} {'/filter':>10}")
    n = 100
    while n <= args.max_seeds:
        var = float(np.mean(phases[:n] ** 2))
        print(f"{n:8d} {var:10.5g} {var / pv.variance:10.4f} {var / pv.filter_integral:10.4f}")
        n *= 10


if __name__ == "__main__":
    main()
