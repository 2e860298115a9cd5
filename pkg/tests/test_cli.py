"""Command-line interface and its file outputs."""

import numpy as np
import pytest

from gpsacq.cli import main

TOY_CONFIG = """
m0 = 127
i_total = 4
i_active = 2
paths_r = 1
tau_max_chips = 3
doppler_max_hz = 16000
doppler_step_hz = 8100
p_channels = 16
n_sym = 1
snr_db = inf
seed = 3
"""

SWEEP_CONFIG = TOY_CONFIG + """
snr_grid_db = 0,10
p_list = 16
n_sym_list = 1
receivers = mf,cs
trials = 3
"""


@pytest.fixture()
def toy_config(tmp_path):
    path = tmp_path / "sim.cfg"
    path.write_text(TOY_CONFIG)
    return path


def test_codes_prints_chips_and_table(capsys):
    assert main(["codes", "--prn", "1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "# prn=1 m0=1023"
    chips = out[1].removeprefix("# chips=").split(",")
    assert len(chips) == 1023
    assert set(chips) <= {"+1", "-1"}
    assert out[2] == "prn_a,prn_b,max_abs_cross_correlation"
    rows = [line.split(",") for line in out[3:]]
    assert len(rows) == 31
    assert all(float(r[2]) <= 65 / 1023 + 1e-9 for r in rows)


def test_codes_desk_scale(capsys):
    assert main(["codes", "--prn", "2", "--m0", "127"]) == 0
    out = capsys.readouterr().out.splitlines()
    chips = out[1].removeprefix("# chips=").split(",")
    assert len(chips) == 127


def test_simulate_mf_and_cs(toy_config, capsys):
    assert main(["simulate", "--config", str(toy_config)]) == 0
    out = capsys.readouterr().out
    assert "success=True" in out
    assert main(["simulate", "--config", str(toy_config),
                 "--receiver", "cs", "--seed", "4"]) == 0
    out = capsys.readouterr().out
    assert "receiver=cs" in out and "seed=4" in out


def test_sweep_writes_csv_and_figures(tmp_path, capsys):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(SWEEP_CONFIG)
    out = tmp_path / "out.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out)]) == 0
    assert out.exists()
    assert (tmp_path / "out_success.png").exists()
    assert (tmp_path / "out_rmse.png").exists()
    lines = [l for l in out.read_text().splitlines() if not l.startswith("#")]
    assert len(lines) == 1 + 4  # header + 2 snr x (mf + cs)


def test_sweep_no_plot(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(SWEEP_CONFIG)
    out = tmp_path / "out.csv"
    assert main(["sweep", "--config", str(cfg), "--out", str(out),
                 "--no-plot"]) == 0
    assert not (tmp_path / "out_success.png").exists()


def test_complexity_report(toy_config, tmp_path, capsys):
    out = tmp_path / "cx.csv"
    assert main(["complexity", "--config", str(toy_config),
                 "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    assert "mf,mf_correlations" in printed
    assert "cs,cs_compression" in printed
    assert out.exists()


def test_bench_with_figure(toy_config, tmp_path, capsys):
    out = tmp_path / "bench.csv"
    assert main(["bench", "--config", str(toy_config), "--out", str(out),
                 "--p-list", "8,16", "--reps", "10"]) == 0
    assert out.exists()
    assert (tmp_path / "bench_runtime.png").exists()
