import json
from pathlib import Path

import numpy as np
import pytest

import mssim
from mssim.cli import main
from mssim.config import resolve_config
from mssim.datasets import load_experiment_csv, load_sim_csv, write_counts_csv

CONFIG_DIR = Path(__file__).resolve().parents[1] / "configs"


def small_two_ion_config(tmp_path, grid_points=60, max_loops=4, ppl=4,
                         noise=True, name="cfg.json"):
    cfg = json.loads((CONFIG_DIR / "two_ion_ms.json").read_text())
    cfg["noise"]["grid_points"] = grid_points
    if not noise:
        cfg["noise"] = {}
    cfg["ms"]["max_loops"] = max_loops
    cfg["ms"]["points_per_loop"] = ppl
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return path


def test_simulate_ms_ideal_sinusoid(tmp_path):
    cfg = small_two_ion_config(tmp_path, noise=False)
    out = tmp_path / "run"
    assert main(["simulate-ms", "--config", str(cfg), "--out", str(out)]) == 0
    sim = load_sim_csv(out / "ms_populations.csv")
    probs = sim["probs"]
    # |01> and |10> identical; |00>/|11> oscillate through ~pi/4 per loop
    assert probs[:, 1] == pytest.approx(probs[:, 2], abs=1e-12)
    loop_rows = np.arange(0, probs.shape[0], 4)
    p00 = probs[loop_rows, 0]
    assert p00[0] == pytest.approx(1.0)
    assert p00[3] == pytest.approx(0.5, abs=0.01)   # entangling point at 3 loops
    # purity stays ~1 at integer loops in the ideal pipeline
    import csv
    rows = list(csv.reader(open(out / "ms_populations.csv")))
    purity_col = rows[0].index("purity")
    purities = np.array([float(r[purity_col]) for r in rows[1:]])[loop_rows]
    assert np.all(purities > 0.995)


def test_simulate_ms_noise_changes_output(tmp_path):
    cfg_ideal = small_two_ion_config(tmp_path, noise=False, name="a.json")
    cfg_noisy = small_two_ion_config(tmp_path, grid_points=40, name="b.json")
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["simulate-ms", "--config", str(cfg_ideal), "--out", str(out_a)]) == 0
    assert main(["simulate-ms", "--config", str(cfg_noisy), "--out", str(out_b)]) == 0
    a = (out_a / "ms_populations.csv").read_bytes()
    b = (out_b / "ms_populations.csv").read_bytes()
    assert a != b


def test_simulate_ms_is_byte_deterministic(tmp_path):
    cfg = small_two_ion_config(tmp_path, grid_points=40)
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(["simulate-ms", "--config", str(cfg), "--out", str(out1)]) == 0
    assert main(["simulate-ms", "--config", str(cfg), "--out", str(out2)]) == 0
    assert (out1 / "ms_populations.csv").read_bytes() == \
        (out2 / "ms_populations.csv").read_bytes()


def test_manifest_is_self_contained(tmp_path):
    cfg = small_two_ion_config(tmp_path, grid_points=40)
    out = tmp_path / "run"
    assert main(["simulate-ms", "--config", str(cfg), "--out", str(out)]) == 0
    manifest = json.loads((out / "ms_manifest.json").read_text())
    rerun_cfg = tmp_path / "rerun.json"
    rerun_cfg.write_text(json.dumps(manifest["config"]))
    resolve_config(manifest["config"])  # resolvable as-is
    out2 = tmp_path / "rerun"
    assert main(["simulate-ms", "--config", str(rerun_cfg), "--out", str(out2)]) == 0
    assert (out / "ms_populations.csv").read_bytes() == \
        (out2 / "ms_populations.csv").read_bytes()


def test_ms_csv_roundtrip(tmp_path):
    cfg = small_two_ion_config(tmp_path, grid_points=40, max_loops=2)
    out = tmp_path / "run"
    main(["simulate-ms", "--config", str(cfg), "--out", str(out)])
    sim = load_sim_csv(out / "ms_populations.csv")
    assert sim["probs"].shape == (9, 4)
    assert sim["labels"] == ["00", "01", "10", "11"]


def test_compare_identical_dataset_gives_zero_chi2(tmp_path):
    # Hand-build a sim CSV and a count table that reproduces it exactly.
    times = np.array([0.0, 1e-4])
    shots = 200
    counts = np.array([[120, 30, 30, 20], [80, 50, 50, 20]])
    probs = counts / shots
    errs = np.sqrt(probs * (1 - probs) / shots)
    from mssim.datasets import write_ms_csv
    sim_path = tmp_path / "sim.csv"
    write_ms_csv(sim_path, times, times / 1e-4, probs, errs, np.ones(2))
    data_path = tmp_path / "data.csv"
    write_counts_csv(data_path, ["time_s"], times, counts)
    out = tmp_path / "report.json"
    assert main(["compare", "--sim", str(sim_path), "--data", str(data_path),
                 "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["chi2_red"] == 0.0
    assert report["rmse"] == 0.0
    assert report["n_points"] == 8


def test_compare_diverging_dataset_gives_positive_chi2(tmp_path):
    times = np.array([0.0])
    counts = np.array([[120, 30, 30, 20]])
    probs = np.array([[0.5, 0.2, 0.2, 0.1]])
    errs = np.sqrt(probs * (1 - probs) / 200)
    from mssim.datasets import write_ms_csv
    sim_path = tmp_path / "sim.csv"
    write_ms_csv(sim_path, times, times, probs, errs, np.ones(1))
    data_path = tmp_path / "data.csv"
    write_counts_csv(data_path, ["time_s"], times, counts)
    out = tmp_path / "report.json"
    assert main(["compare", "--sim", str(sim_path), "--data", str(data_path),
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["chi2_red"] > 0


def test_compare_grid_mismatch_exit_code(tmp_path):
    times = np.array([0.0])
    counts = np.array([[120, 30, 30, 20]])
    probs = np.array([[0.5, 0.2, 0.2, 0.1]])
    errs = np.full((1, 4), 0.01)
    from mssim.datasets import write_ms_csv
    sim_path = tmp_path / "sim.csv"
    write_ms_csv(sim_path, times, times, probs, errs, np.ones(1))
    data_path = tmp_path / "data.csv"
    write_counts_csv(data_path, ["time_s"], np.array([3.0]), counts)
    assert main(["compare", "--sim", str(sim_path), "--data", str(data_path),
                 "--out", str(tmp_path / "r.json")]) == 4


def test_fit_spam_cli_roundtrip(tmp_path):
    M = mssim.bitflip_spam_matrix(3, 0.02)
    path = tmp_path / "spam.csv"
    np.savetxt(path, M, delimiter=",")
    out = tmp_path / "fit.json"
    assert main(["fit-spam", "--data", str(path), "--out", str(out)]) == 0
    report = json.loads(out.read_text())
    assert report["eps"] == pytest.approx(0.02, abs=1e-9)
    assert report["trace_norm_distance"] < 1e-9


def test_fit_spam_sampled(tmp_path):
    rng = np.random.default_rng(31)
    M = mssim.bitflip_spam_matrix(3, 0.02)
    sampled = np.column_stack([rng.multinomial(4000, M[:, c]) / 4000
                               for c in range(8)])
    path = tmp_path / "spam.csv"
    np.savetxt(path, sampled, delimiter=",")
    out = tmp_path / "fit.json"
    assert main(["fit-spam", "--data", str(path), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["eps"] == pytest.approx(0.02, abs=0.005)


def test_calibrate_cli_three_ion(tmp_path):
    out = tmp_path / "cal"
    assert main(["calibrate", "--config",
                 str(CONFIG_DIR / "three_ion_qaoa.json"), "--out", str(out)]) == 0
    payload = json.loads((out / "calibration.json").read_text())["calibration"]
    assert payload["rabi_mp_hz"] == pytest.approx(26907.0, rel=0.02)
    assert payload["scan"] is not None


def test_unknown_config_key_exit_code(tmp_path):
    cfg = json.loads((CONFIG_DIR / "two_ion_ms.json").read_text())
    cfg["chain"]["mode_freqs_hzz"] = [1.0, 2.0]
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    assert main(["simulate-ms", "--config", str(path), "--out", str(tmp_path)]) == 2


def test_numerical_error_exit_code(tmp_path):
    cfg = json.loads((CONFIG_DIR / "three_ion_qaoa.json").read_text())
    cfg["qaoa"]["calibration"]["gamma_scan_max"] = 0.4  # no interior maximum
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    assert main(["calibrate", "--config", str(path), "--out", str(tmp_path)]) == 3


def test_verify_subcommand(tmp_path):
    cfg = small_two_ion_config(tmp_path, noise=False)
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path)]) == 0


def test_heatmap_csv_roundtrip(tmp_path):
    grid = mssim.heatmap_sweep(
        mssim.MaxCutInstance(n=2, weights=np.array([[0.0, 1.0], [1.0, 0.0]])),
        [0.4, 0.8], [-0.2, 0.1, 0.3], shots=100)
    from mssim.datasets import write_heatmap_csv
    path = tmp_path / "hm.csv"
    write_heatmap_csv(path, grid)
    back = load_sim_csv(path)
    assert np.array_equal(back.gamma_axis, grid.gamma_axis)
    assert np.array_equal(back.beta_axis, grid.beta_axis)
    assert np.array_equal(back.values, grid.values)
    assert np.array_equal(back.stderr, grid.stderr)


def test_experiment_loader_validation(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("time_s,c_00,c_01,c_10\n0.0,5,5,5\n")
    with pytest.raises(Exception, match="lexicographic|cover"):
        load_experiment_csv(path)
    path.write_text("time_s,c_00,c_01,c_10,c_11\n0.0,5,5,5,-1\n")
    with pytest.raises(Exception, match="non-negative"):
        load_experiment_csv(path)


def test_qaoa_heatmap_cli_three_ion(tmp_path):
    cfg = json.loads((CONFIG_DIR / "three_ion_qaoa.json").read_text())
    cfg["noise"]["grid_points"] = 101  # keep the optimal-pixel run quick
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / "run"
    assert main(["qaoa-heatmap", "--config", str(path), "--out", str(out)]) == 0
    manifest = json.loads((out / "heatmap_manifest.json").read_text())
    assert manifest["r_star_ideal"] == pytest.approx(0.91, abs=0.02)
    assert manifest["r_star"] < manifest["r_star_ideal"]
    assert manifest["rabi_mp_hz"] == pytest.approx(26907.0, rel=0.02)
    w = np.asarray(manifest["weights"])
    assert w[0, 2] == pytest.approx(-0.470, abs=0.01)
    grid = load_sim_csv(out / "heatmap_ideal.csv")
    assert grid.values.max() == pytest.approx(manifest["r_star_ideal"], abs=1e-12)
