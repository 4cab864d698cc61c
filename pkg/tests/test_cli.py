import csv
import json
import math
import subprocess
import sys

import pytest

from nccic.cli import main

GENERIC = ["--h11", "1,0", "--h12", "0,1", "--h21", "1,0", "--h22", "1,0"]
GAMMA2 = [
    "--h11=0.9842108056615895,0.1770002542906786",
    "--h12=0.7102839190658076,0.7039153033686064",
    "--h21=-0.47831194966681584,-0.8781900015406287",
    "--h22=-0.6019791516507156,-0.7985118039064198",
]


def run(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = main([*argv, "--out", str(out)])
    return code, out.read_text()


def rows_of(text):
    lines = text.splitlines()
    assert lines[0].startswith("# nccic-csv/1 ")
    return list(csv.DictReader(lines[1:]))


def test_rates_symmetric_unit_gain(tmp_path):
    code, text = run(tmp_path, "rates", *GENERIC, "--snr-db", "60")
    assert code == 0
    (row,) = rows_of(text)
    assert float(row["sum"]) <= float(row["sum_upper"])
    assert row["gamma"] == "1"


def test_rates_byte_identical(tmp_path):
    argv = ["rates", "--ensemble", "4", "--snr-db", "20,40", "--rho", "0.5,1", "--seed", "3"]
    _, a = run(tmp_path, *argv, name="a.csv")
    _, b = run(tmp_path, *argv, name="b.csv")
    assert a == b
    assert len(rows_of(a)) == 16
    _, c = run(tmp_path, *argv[:-1], "4", name="c.csv")
    assert c != a


def test_rates_r2_increases_with_rho(tmp_path):
    _, text = run(tmp_path, "rates", *GENERIC, "--snr-db", "40", "--rho", "0.5,1")
    half, one = rows_of(text)
    assert (float(half["rho"]), float(one["rho"])) == (0.5, 1.0)
    assert float(half["r2"]) < float(one["r2"])


def test_gdof_examples(tmp_path):
    _, text = run(tmp_path, "gdof", *GENERIC, "--snr-db", "20,40,60,80", "--rho", "0,1")
    rows = rows_of(text)
    rho0 = [r for r in rows if r["rho"] == "0"]
    rho1 = [r for r in rows if r["rho"] == "1"]
    assert all(float(r["dsum_theory"]) == 1.0 for r in rho0)
    assert abs(float(rho1[-1]["dsum_hat"]) - 2) <= 0.1


def test_gdof_non_decreasing_with_integer_penalty(tmp_path):
    # gamma = 2 here; with gamma = 1 the curve instead falls toward 2 from
    # above as log2(1 + SNR) / log2(SNR) decays
    _, text = run(tmp_path, "gdof", *GAMMA2, "--snr-db", "20,30,40,50,60,70,80")
    ds = [float(r["dsum_hat"]) for r in rows_of(text)]
    assert ds == sorted(ds)
    assert abs(ds[-1] - 2) <= 2 * math.log2(2) / math.log2(1e8) + 1e-9


def test_gdof_overlay(tmp_path):
    overlay = tmp_path / "ic.csv"
    overlay.write_text("rho,ic\n0,1\n2,2\n")
    _, text = run(tmp_path, "gdof", *GENERIC, "--snr-db", "40", "--rho", "0.5,1", "--overlay", str(overlay))
    rows = rows_of(text)
    assert [float(r["overlay_ic"]) for r in rows] == [1.25, 1.5]


def test_bounds(tmp_path):
    code, text = run(tmp_path, "bounds", "--snr-db", "30", "--rho", "0.5,2")
    assert code == 0
    rows = rows_of(text)
    assert [float(r["gdof_limit"]) for r in rows] == [1.5, 3.0]
    for r in rows:
        assert float(r["sum_upper"]) == pytest.approx(float(r["r_sym_upper"]) + float(r["r_max_upper"]))


def test_simulate_noiseless(tmp_path):
    summary = tmp_path / "s.json"
    code, text = run(tmp_path, "simulate", "--snr-db", "40", "--ensemble", "3", "--trials", "500",
                     "--noiseless", "--json-summary", str(summary))
    assert code == 0
    for r in rows_of(text):
        assert float(r["rx1_err_rate"]) == float(r["rx2_err_rate"]) == 0
    s = json.loads(summary.read_text())
    assert s["passed"] and s["exact_cancellation"]["passed"] and s["rows"] == 3


def test_simulate_noise_columns_agree(tmp_path):
    _, text = run(tmp_path, "simulate", *GENERIC, "--snr-db", "40", "--trials", "100000")
    (row,) = rows_of(text)
    measured, theory = float(row["eff_noise_power_measured"]), float(row["eff_noise_power_theory"])
    assert measured == pytest.approx(theory, rel=0.03)


def test_simulate_single_trial(tmp_path):
    code, text = run(tmp_path, "simulate", "--trials", "1", "--snr-db", "30")
    assert code == 0
    (row,) = rows_of(text)
    assert row["trials"] == "1"


def test_simulate_coded(tmp_path):
    code, text = run(tmp_path, "simulate", "--n", "3", "--r", "2", "--trials", "300",
                     "--snr-db", "40", "--noiseless")
    assert code == 0
    assert float(rows_of(text)[0]["rx2_err_rate"]) == 0


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nsnr-db = 20,30\nrho = 0.5\nseed = 5\n")
    _, text = run(tmp_path, "rates", "--config", str(cfg), "--rho", "1.5")
    rows = rows_of(text)
    assert [(r["snr_db"], r["rho"]) for r in rows] == [("20", "1.5"), ("30", "1.5")]
    assert "seed=5" in text.splitlines()[0]


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = blue\n")
    with pytest.raises(SystemExit) as e:
        main(["rates", "--config", str(cfg)])
    assert e.value.code == 2


@pytest.mark.parametrize(
    "argv",
    [
        ["rates", "--p", "5"],
        ["rates", "--p", "263"],
        ["rates", "--snr-db", "inf"],
        ["rates", "--snr-db", ""],
        ["simulate", "--n", "2", "--r", "3"],
        ["simulate", "--trials", "0"],
        ["rates", "--h11", "1,2,3"],
    ],
)
def test_usage_errors_exit_2(argv):
    with pytest.raises(SystemExit) as e:
        main(argv)
    assert e.value.code == 2


def test_zero_gain_and_gdof_snr_rejected(capsys):
    assert main(["rates", "--h21", "0,0"]) == 2
    assert main(["gdof", "--snr-db", "0"]) == 2


def test_module_entry_and_log_env(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "nccic", "simulate", "--trials", "10", "--snr-db", "30"],
        capture_output=True, text=True, env={"NCCIC_LOG": "info", "PATH": ""},
    )
    assert proc.returncode == 0
    assert "INFO" in proc.stderr
    assert proc.stdout.startswith("# nccic-csv/1 tool=nccic-0.1.0 command=simulate")
