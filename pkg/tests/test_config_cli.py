import csv
import time
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hybridsim.cli import main
from hybridsim.config import (
    OUTPUT_ENV,
    PARAMETERS,
    ConfigError,
    ScenarioConfig,
    load_config,
    parse_seeds,
    parse_value,
    read_overrides,
)


def write(tmp_path, text, name="run.conf"):
    p = tmp_path / name
    p.write_text(text)
    return p


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_empty_file_gives_defaults(tmp_path):
    cfg = load_config(write(tmp_path, "# nothing here\n\n"), "switch")
    assert cfg.params == {k: p.default for k, p in PARAMETERS.items()}


def test_override_with_units(tmp_path):
    cfg = load_config(write(tmp_path, "C_m = 2e-16 F   # doubled\nC_r = 3 fF\ntemperature = 100 mK\n"), "switch")
    assert cfg["C_m"] == 2e-16
    assert cfg["C_r"] == pytest.approx(3e-15)
    assert cfg["temperature"] == pytest.approx(0.1)


def test_frequency_units_are_angular():
    assert parse_value("trap_frequency", "1 MHz") == pytest.approx(2 * np.pi * 1e6)
    assert parse_value("trap_frequency", "5 rad/s") == 5.0


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("C_m = -1 F", "C_m > 0"),
        ("C_x = 1 F", "unknown key"),
        ("C_m = 1 furlong", "unknown unit"),
        ("C_m = 1 nm", "expected capacitance"),
        ("C_m 1 F", "expected 'key = value"),
        ("flux_ratio = 2", "flux_ratio"),
    ],
)
def test_invalid_lines_report_line_number(tmp_path, text, fragment):
    path = write(tmp_path, "# header\n" + text + "\n")
    with pytest.raises(ConfigError) as info:
        read_overrides(path)
    assert info.value.line == 2
    assert fragment in str(info.value)


def test_duplicate_keys_rejected(tmp_path):
    with pytest.raises(ConfigError):
        read_overrides(write(tmp_path, "C_m = 1e-16 F\nC_m = 2e-16 F\n"))


def test_seed_parsing():
    assert parse_seeds("1,2,5-8") == (1, 2, 5, 6, 7, 8)
    for bad in ("1,1", "-1", "5-3", "a"):
        with pytest.raises(ConfigError):
            parse_seeds(bad)


@given(st.lists(st.integers(0, 10_000), unique=True, min_size=1, max_size=20))
def test_seed_round_trip(seeds):
    assert parse_seeds(",".join(map(str, seeds))) == tuple(seeds)


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "env_out"))
    assert load_config(None, "switch").output_dir == tmp_path / "env_out"
    assert load_config(None, "switch", output_dir=tmp_path / "cli").output_dir == tmp_path / "cli"


def test_digest_ignores_paths_and_workers(tmp_path):
    a = ScenarioConfig("balance", {}, (0, 1), tmp_path / "a", "csv", 1)
    b = ScenarioConfig("balance", {}, (0, 1), tmp_path / "b", "json", 8)
    c = ScenarioConfig("balance", {"C_m": 2e-16}, (0, 1), tmp_path / "a", "csv", 1)
    assert a.digest() == b.digest() != c.digest()


def test_exit_codes(tmp_path, capsys):
    out = str(tmp_path / "o")
    assert main(["balance", "--out", out]) == 0
    assert main(["balance", "--out", out, "--set", "delta_V=1e-2 V"]) == 1
    assert "[FAIL]" in capsys.readouterr().out
    assert main(["balance", "--out", out, "--config", str(tmp_path / "missing.conf")]) == 2
    assert main(["balance", "--out", out, "--set", "bogus=1"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["not_a_scenario"])
    assert info.value.code == 2


def test_switch_off_gives_zero_kappa(tmp_path):
    conf = write(tmp_path, "flux_ratio = 0.5\n")
    assert main(["switch", "--config", str(conf), "--out", str(tmp_path), "--format", "csv"]) == 0
    rows = read_csv(tmp_path / "switch__switch.csv")
    assert rows and all(float(r["kappa"]) == 0.0 for r in rows)


def test_balance_table(tmp_path):
    assert main(["balance", "--out", str(tmp_path), "--format", "csv"]) == 0
    rows = read_csv(tmp_path / "balance__balance.csv")
    assert len(rows) == 8
    for r in rows:
        if r["state"] == "balanced":
            assert float(r["residual_rad_s"]) == 0.0
        else:
            assert abs(float(r["residual_over_h_MHz"])) > 1.0


def test_noise_echo_two_seeds_is_quick(tmp_path):
    t0 = time.perf_counter()
    code = main(["noise_echo", "--seeds", "0,1", "--workers", "1", "--out", str(tmp_path)])
    assert time.perf_counter() - t0 < 1.0
    assert code == 0
    assert len(read_csv(tmp_path / "noise_echo__noise_ensemble.csv")) == 2


def test_output_is_worker_independent(tmp_path):
    outs = []
    for workers in ("1", "4"):
        d = tmp_path / workers
        assert main(["noise_echo", "--seeds", "0-15", "--workers", workers, "--out", str(d)]) == 0
        outs.append({p.name: p.read_bytes() for p in sorted(Path(d).iterdir())})
    assert outs[0] == outs[1]
