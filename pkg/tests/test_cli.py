import json
from pathlib import Path

import numpy as np
import pytest

from phonoctl.cli import (
    EXIT_INADMISSIBLE,
    EXIT_OK,
    EXIT_RUNTIME,
    EXIT_VALIDATION,
    main,
    read_csv,
    write_csv,
)


def run(argv):
    return main(argv)


def test_write_read_csv_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, "rates", ["k", "v"], [(0.1, 1.0 / 3.0), (0.2, 2.0)])
    text = path.read_text()
    assert text.startswith("# schema=rates/v1\n")
    assert "0.33333333333333331" in text  # 17 significant digits
    header, data = read_csv(path, expected_schema="rates")
    assert header == ["k", "v"]
    assert data[0, 1] == 1.0 / 3.0


def test_read_csv_rejects_wrong_schema(tmp_path):
    path = tmp_path / "t.csv"
    write_csv(path, "rates", ["k"], [(0.1,)])
    with pytest.raises(ValueError):
        read_csv(path, expected_schema="control")
    path2 = tmp_path / "v2.csv"
    path2.write_text("# schema=rates/v2\nk\n0.1\n")
    with pytest.raises(ValueError):
        read_csv(path2)


def test_rates_command(tmp_path):
    code = run(
        ["rates", "--omega0", "1", "--out", str(tmp_path), "--nu", "1", "--grid", "32"]
    )
    assert code == EXIT_OK
    header, data = read_csv(tmp_path / "rates.csv", expected_schema="rates")
    assert header == ["k", "r_a", "r_t", "r_r", "sum"]
    assert data.shape == (32, 5)
    assert np.max(np.abs(data[:, 4] - 1.0)) < 1e-12


def test_rates_command_feedback(tmp_path):
    code = run(
        ["rates", "--omega0", "1", "--out", str(tmp_path), "--fhat=-1,0.5", "--grid", "16"]
    )
    assert code == EXIT_OK
    _, data = read_csv(tmp_path / "rates.csv", expected_schema="rates")
    assert np.max(np.abs(data[:, 4] - 1.0)) < 1e-12


def test_rates_feedback_l1_violation_is_runtime_error(tmp_path):
    code = run(["rates", "--omega0", "1", "--out", str(tmp_path), "--fhat", "1,0"])
    assert code == EXIT_RUNTIME


def test_missing_required_arguments():
    with pytest.raises(SystemExit):
        run(["rates"])  # --omega0 is required


def test_design_inadmissible_exit_code(tmp_path):
    code = run(
        ["design", "--omega0", "1", "--out", str(tmp_path), "--constant", "0.5,0.49,0.01"]
    )
    assert code == EXIT_INADMISSIBLE
    report = json.loads((tmp_path / "admissibility.json").read_text())
    assert report["admissible"] is False
    assert "H5" in report["failed"]


def test_design_and_simulate_and_compare_pipeline(tmp_path):
    design_dir = tmp_path / "design"
    code = run(
        [
            "design", "--omega0", "1", "--out", str(design_dir),
            "--constant", "0.35,0.49,0.16", "--grid", "16", "--n-sweep", "8",
        ]
    )
    assert code == EXIT_OK
    report = json.loads((design_dir / "admissibility.json").read_text())
    assert report["admissible"] is True and report["l1_ok"] is True
    header, design = read_csv(design_dir / "design.csv", expected_schema="design")
    assert header == ["k", "RE", "IM", "FT_re", "FT_im", "TH_re", "TH_im", "Fbar_re", "Fbar_im"]
    assert np.all(design[:, 1] < 0)  # RE < 0 on the grid
    _, rec = read_csv(design_dir / "recovered_rates.csv", expected_schema="recovered_rates")
    assert set(rec[:, 1]) == {8.0}
    header, _ = read_csv(design_dir / "control.csv", expected_schema="control")
    assert header == ["t", "F", "F_N"]

    sim_dir = tmp_path / "sim"
    code = run(
        [
            "simulate", "--omega0", "1", "--out", str(sim_dir),
            "--measure", "packet", "--temperature", "0", "--nu", "1",
            "--n-modes", "256", "--realizations", "8", "--horizon", "1",
            "--snapshots", "1", "--seed", "1",
        ]
    )
    assert code == EXIT_OK
    _, energy = read_csv(sim_dir / "energy.csv", expected_schema="energy")
    assert energy.shape[1] == 3
    snapshots = sorted(sim_dir.glob("wigner_t*.bin"))
    assert len(snapshots) == 1

    cmp_dir = tmp_path / "cmp"
    code = run(
        [
            "compare", "--omega0", "1", "--out", str(cmp_dir),
            "--snapshot", str(snapshots[0]), "--measure", "packet",
            "--nu", "1", "--temperature", "0",
        ]
    )
    assert code == EXIT_OK
    lines = (cmp_dir / "compare.csv").read_text().splitlines()
    assert lines[0] == "# schema=compare/v1"
    assert lines[1] == "test_fn_id,simulated,closed_form,abs_diff,stderr"
    assert len(lines) == 2 + 8
    _, frac = read_csv(cmp_dir / "fractions.csv", expected_schema="fractions")
    # measured and theoretical fractions agree loosely even at 8 realizations
    assert np.max(np.abs(frac[0, 1:4] - frac[0, 4:7])) < 0.2


def test_compare_parses_names_column(tmp_path):
    # compare.csv keeps a string id column; read it manually
    sim_dir = tmp_path / "sim"
    run(
        [
            "simulate", "--omega0", "1", "--out", str(sim_dir),
            "--measure", "packet", "--n-modes", "128", "--realizations", "2",
            "--horizon", "0.2", "--snapshots", "0.2", "--seed", "2",
        ]
    )
    snap = sorted(sim_dir.glob("wigner_t*.bin"))[0]
    cmp_dir = tmp_path / "cmp"
    code = run(
        ["compare", "--omega0", "1", "--out", str(cmp_dir), "--snapshot", str(snap)]
    )
    # the packet straddles the boundary at t = 0.2: fractions must refuse
    assert code == EXIT_RUNTIME
    lines = (cmp_dir / "compare.csv").read_text().splitlines()
    assert lines[0] == "# schema=compare/v1"
    names = [ln.split(",")[0] for ln in lines[2:]]
    assert names == [f"gauss_{i}" for i in range(8)]


def test_validation_exit_codes(tmp_path):
    assert run(["design", "--omega0", "1", "--out", str(tmp_path)]) == EXIT_VALIDATION
    assert (
        run(
            [
                "simulate", "--omega0", "1", "--out", str(tmp_path),
                "--control", "feedback",
            ]
        )
        == EXIT_VALIDATION
    )
    assert (
        run(["compare", "--omega0", "1", "--snapshot", str(tmp_path / "missing.bin")])
        == EXIT_VALIDATION
    )


def test_config_file_defaults(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("nu = 2.0\ngrid = 12\n")
    out = tmp_path / "out"
    code = run(
        ["--config", str(cfg), "rates", "--omega0", "1", "--out", str(out)]
    )
    assert code == EXIT_OK
    _, data = read_csv(out / "rates.csv", expected_schema="rates")
    assert data.shape[0] == 12
    # flags still win over the config file
    code = run(
        ["--config", str(cfg), "rates", "--omega0", "1", "--out", str(out), "--grid", "5"]
    )
    assert code == EXIT_OK
    _, data = read_csv(out / "rates.csv", expected_schema="rates")
    assert data.shape[0] == 5


def test_determinism_byte_identical_outputs(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    argv = [
        "simulate", "--omega0", "1", "--measure", "packet", "--n-modes", "128",
        "--realizations", "4", "--horizon", "0.5", "--snapshots", "0.5", "--seed", "3",
    ]
    assert run(argv + ["--out", str(out1)]) == EXIT_OK
    assert run(argv + ["--out", str(out2)]) == EXIT_OK
    for name in ("energy.csv", "wigner_t0.5.bin", "wigner_t0.5.bin.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes(), name
