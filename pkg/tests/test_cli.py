import json

import numpy as np
import pytest

from spinamp import cli


def run(argv, capsys):
    code = cli.main(argv)
    return code, capsys.readouterr()


def test_run_cat_gate_reports_max_contrast(tmp_path, capsys):
    code, out = run(["run", "--scheme", "cat-gate", "--n", "3", "--target", "1", "--out", str(tmp_path)], capsys)
    assert code == 0
    assert "C=2" in out.out and "Mz=-3" in out.out
    tr = cli.read_trace_csv(tmp_path / "cat-gate_n3_trace.csv")
    assert tr.contrast[0] == 2.0


def test_run_random_map_trace_rows(tmp_path, capsys):
    code, _ = run(["run", "--scheme", "random-map", "--n", "5", "--rmax", "25",
                   "--out", str(tmp_path), "--plot-script"], capsys)
    assert code == 0
    lines = (tmp_path / "random-map_n5_trace.csv").read_text().splitlines()
    assert lines[0] == "r,Mz0,Mz1,contrast,Q0,Q1,fidelity"
    assert len(lines) == 26
    assert (tmp_path / "random-map_n5_plot.py").exists()
    meta = json.loads((tmp_path / "random-map_n5_meta.json").read_text())
    assert meta["config"]["r_max"] == 25 and "timestamp" in meta and "version" in meta


def test_size_cap_is_a_clean_error(tmp_path, capsys):
    out_dir = tmp_path / "out"
    code, out = run(["run", "--scheme", "random-map", "--n", "15", "--out", str(out_dir)], capsys)
    assert code == 1
    assert "n:" in out.err
    assert not out_dir.exists()


def test_full_mode_counts_target_qubit(tmp_path, capsys):
    code, out = run(["run", "--scheme", "cnot-chain", "--n", "14", "--mode", "full",
                     "--out", str(tmp_path)], capsys)
    assert code == 1 and "15 qubits" in out.err


@pytest.mark.parametrize("argv, field", [
    (["run", "--scheme", "random-map", "--n", "4", "--rmax", "0"], "r_max"),
    (["run", "--scheme", "cat-gate", "--n", "4", "--target", "2"], "target"),
    (["run", "--scheme", "random-map", "--n", "4", "--first", "9"], "first"),
    (["sweep", "--scheme", "cat-gate", "--ns", "3,4"], "scheme"),
    (["run", "--scheme", "random-map", "--n", "4", "--decay-exponent", "-1"], "decay_exponent"),
])
def test_validation_names_field(argv, field, tmp_path, capsys):
    code, out = run(argv + ["--out", str(tmp_path / "x")], capsys)
    assert code == 1 and f"{field}:" in out.err


def test_rerun_from_config_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    run(["run", "--scheme", "random-map", "--n", "6", "--rmax", "15", "--out", str(a)], capsys)
    meta = json.loads((a / "random-map_n6_meta.json").read_text())
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps(meta["config"]))
    code, _ = run(["run", "--config", str(cfg_file), "--out", str(b)], capsys)
    assert code == 0
    assert (a / "random-map_n6_trace.csv").read_bytes() == (b / "random-map_n6_trace.csv").read_bytes()


def test_trace_round_trip_precision(tmp_path, capsys):
    from spinamp.protocols import MapParams, ProtocolSpec, run_random_map

    tr = run_random_map(ProtocolSpec("random-map", 5), MapParams(r_max=12))
    path = tmp_path / "t.csv"
    path.write_text(cli.trace_csv(tr))
    back = cli.read_trace_csv(path, threshold=tr.threshold)
    for k in ("Mz0", "Mz1", "contrast", "Q0", "Q1", "fidelity"):
        assert np.array_equal(getattr(back, k), getattr(tr, k))
    assert back.r_star == tr.r_star and back.n == 5


def test_sweep_table_and_fit(tmp_path, capsys):
    code, out = run(["sweep", "--ns", "3,4,5", "--rmax", "30", "--threshold", "0.3",
                     "--workers", "2", "--out", str(tmp_path)], capsys)
    assert code == 0
    rows = cli.read_sweep_csv(tmp_path / "sweep_table.csv")
    assert [r["n"] for r in rows] == [3, 4, 5] and rows[1]["N"] == 16
    fit = json.loads((tmp_path / "sweep_fit.json").read_text())
    assert fit["slope"] is not None and "residual" in fit and "intercept" in fit
    assert not list(tmp_path.glob("*.tmp"))


def test_sweep_fit_undefined_for_few_rows(tmp_path, capsys):
    code, out = run(["sweep", "--ns", "4", "--rmax", "10", "--out", str(tmp_path)], capsys)
    assert code == 0 and "fit undefined" in out.out
    assert json.loads((tmp_path / "sweep_fit.json").read_text())["slope"] is None


def test_env_var_output_dir(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_ENV, str(tmp_path / "env"))
    code, _ = run(["run", "--scheme", "cnot-chain", "--n", "2"], capsys)
    assert code == 0 and (tmp_path / "env" / "cnot-chain_n2_trace.csv").exists()


def test_verify_passes_and_reports_prefactor(capsys):
    code, out = run(["verify"], capsys)
    assert code == 0
    assert "FAIL" not in out.out
    assert "prefactor: 1.5" in out.out


def test_verify_negative_control(capsys):
    code, out = run(["verify", "--negate-prefactor"], capsys)
    assert code == 3
    assert "[FAIL] rotated dipolar identity n=2" in out.out


def test_computation_error_exit_code(tmp_path, capsys, monkeypatch):
    def boom(*a, **k):
        raise RuntimeError("synthetic failure")

    monkeypatch.setattr(cli, "run_random_map", boom)
    code, out = run(["run", "--scheme", "random-map", "--n", "4", "--out", str(tmp_path / "o")], capsys)
    assert code == 2 and "synthetic failure" in out.err
    assert not (tmp_path / "o").exists()


def test_config_json_round_trip():
    cfg = cli.RunConfig(n=[5], decay_exponent=float("inf")).validate()
    back = cli.RunConfig.from_dict(json.loads(cfg.to_json()))
    assert back == cfg
