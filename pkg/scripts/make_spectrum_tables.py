"""Write the tabulated gate-voltage spectra used by the tests and examples.

* ``lorentzian.csv``: a single telegraph fluctuator, S = 2 s2 g / (g^2 + w^2);
* ``pink_with_floor.csv``: 1/f noise that flattens into a white floor;
* ``one_over_f_squared.csv``: Brownian-like 1/w^2 noise above a corner.

Columns: omega_rad_s, psd_V2s.  Usage: python3 scripts/make_spectrum_tables.py [dir]
"""

import sys
from pathlib import Path

import numpy as np


def main(out_dir: str) -> None:
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    w = np.geomspace(2 * np.pi * 1e3, 2 * np.pi * 10e9, 801)
    g = 2 * np.pi * 100e6
    tables = {
        "lorentzian.csv": 2 * 1e-10 * g / (g**2 + w**2),
        "pink_with_floor.csv": 1e-14 / w + 1e-22,
        "one_over_f_squared.csv": 1e-4 / (w**2 + (2 * np.pi * 1e6) ** 2),
    }
    for name, psd in tables.items():
        np.savetxt(d / name, np.column_stack([w, psd]), delimiter=",", fmt="%.12e",
                   header="omega_rad_s,psd_V2s")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/data/spectra")
