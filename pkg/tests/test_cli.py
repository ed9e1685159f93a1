import json

import numpy as np
import pytest

from srpcp import cli, data


def make_video_scene(tmp_path, frames=8, size=16, seed=0):
    """Static smooth background plus one moving bright blob per frame."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:size, 0:size]
    background = 0.25 + 0.45 * (y / (size - 1)) * (x / (size - 1)) + 0.1 * (x / (size - 1))
    frames_dir = tmp_path / "frames"
    frames_dir.mkdir()
    truth = []
    for t in range(frames):
        img = background.copy()
        r0 = 2 + t  # the blob walks down the diagonal
        img[r0 : r0 + 4, r0 : r0 + 4] += 0.35
        img += 0.01 * rng.standard_normal((size, size))
        img = np.clip(img, 0.0, 1.0)
        data.save_pgm(frames_dir / f"frame_{t:02d}.pgm", img)
        truth.append(img)
    return frames_dir, background, truth


def test_cmd_gen_writes_files_and_manifest(tmp_path):
    out = tmp_path / "inst"
    rc = cli.main(
        ["gen", "--n", "30", "--r", "3", "--s", "45", "--sigma", "1e-3",
         "--seed", "7", "--out", str(out)]
    )
    assert rc == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["n"] == 30 and manifest["seed"] == 7
    D = data.load_matrix(out / "D.srpm")
    L0 = data.load_matrix(out / "L0.srpm")
    S0 = data.load_matrix(out / "S0.srpm")
    Z0 = data.load_matrix(out / "Z0.srpm")
    np.testing.assert_array_equal(D, L0 + S0 + Z0)


def test_cmd_gen_determinism(tmp_path):
    args = ["gen", "--n", "20", "--r", "2", "--s", "10", "--sigma", "1e-2", "--seed", "3"]
    cli.main(args + ["--out", str(tmp_path / "a")])
    cli.main(args + ["--out", str(tmp_path / "b")])
    for name in ("D", "L0", "S0", "Z0"):
        a = (tmp_path / "a" / f"{name}.srpm").read_bytes()
        b = (tmp_path / "b" / f"{name}.srpm").read_bytes()
        assert a == b


def test_cmd_gen_rejects_oversized_support(tmp_path):
    rc = cli.main(
        ["gen", "--n", "5", "--r", "2", "--s", "26", "--sigma", "0", "--out",
         str(tmp_path / "x")]
    )
    assert rc == 1


def test_cmd_solve_end_to_end(tmp_path):
    out = tmp_path / "inst"
    cli.main(["gen", "--n", "40", "--r", "2", "--s", "80", "--sigma", "1e-3",
              "--seed", "0", "--out", str(out)])
    prefix = str(tmp_path / "run_")
    rc = cli.main(["solve", "--input", str(out / "D.srpm"), "--out-prefix", prefix])
    assert rc == 0  # tolerance reached
    L = data.load_matrix(prefix + "L_hat.srpm")
    S = data.load_matrix(prefix + "S_hat.srpm")
    assert L.shape == S.shape == (40, 40)
    rows = cli.read_history_csv(prefix + "history.csv")
    etas = [row[2] for row in rows if not np.isnan(row[2])]
    assert etas and etas[-1] < 1e-6
    objs = [row[1] for row in rows]
    assert all(b <= a + 1e-10 for a, b in zip(objs, objs[1:]))


def test_cmd_solve_modes_agree(tmp_path):
    out = tmp_path / "inst"
    cli.main(["gen", "--n", "36", "--r", "2", "--s", "64", "--sigma", "1e-2",
              "--seed", "1", "--out", str(out)])
    pp = str(tmp_path / "plain_")
    pa = str(tmp_path / "acc_")
    assert cli.main(["solve", "--input", str(out / "D.srpm"), "--out-prefix", pp]) == 0
    assert cli.main(["solve", "--input", str(out / "D.srpm"), "--mode", "acc",
                     "--out-prefix", pa]) == 0
    Lp = data.load_matrix(pp + "L_hat.srpm")
    La = data.load_matrix(pa + "L_hat.srpm")
    assert np.linalg.norm(Lp - La) <= 1e-8


def test_cmd_solve_missing_input(tmp_path):
    rc = cli.main(["solve", "--input", str(tmp_path / "missing.srpm"),
                   "--out-prefix", str(tmp_path / "x_")])
    assert rc == 1


def test_cmd_solve_max_iter_exit_code(tmp_path):
    out = tmp_path / "inst"
    cli.main(["gen", "--n", "30", "--r", "2", "--s", "45", "--sigma", "1e-3",
              "--seed", "2", "--out", str(out)])
    rc = cli.main(["solve", "--input", str(out / "D.srpm"), "--max-iter", "2",
                   "--out-prefix", str(tmp_path / "m_")])
    assert rc == 2


def test_cmd_bench_rows_and_roundtrip(tmp_path):
    out = tmp_path / "bench.csv"
    rc = cli.main(["bench", "--n", "30", "--r", "2", "--s", "0.05", "--sigma",
                   "1e-3", "--seeds", "0", "--out", str(out)])
    assert rc == 0
    rows = cli.read_bench_csv(out)
    # 1 data row + mean/min/max aggregates
    assert len(rows) == 4
    assert rows[0]["seed"] == 0 and rows[0]["s"] == 45
    assert {r["seed"] for r in rows[1:]} == {"mean", "min", "max"}
    assert rows[0]["eta_S"] >= 0 and rows[0]["eta_L"] >= 0
    assert rows[1]["obj"] == pytest.approx(rows[0]["obj"])


def test_cmd_bench_modes_agree(tmp_path):
    out = tmp_path / "bench.csv"
    cli.main(["bench", "--n", "36", "--r", "2", "--s", "0.05", "--sigma", "1e-3",
              "--seeds", "0,1", "--modes", "plain,acc", "--out", str(out)])
    rows = [r for r in cli.read_bench_csv(out) if isinstance(r["seed"], int)]
    assert len(rows) == 4
    by = {(r["seed"], r["mode"]): r for r in rows}
    for seed in (0, 1):
        assert by[(seed, "plain")]["eta_S"] == pytest.approx(
            by[(seed, "acc")]["eta_S"], abs=1e-6
        )
        assert by[(seed, "plain")]["eta_L"] == pytest.approx(
            by[(seed, "acc")]["eta_L"], abs=1e-6
        )


def test_cmd_video_end_to_end(tmp_path):
    frames_dir, background, _ = make_video_scene(tmp_path)
    out_dir = tmp_path / "out"
    rc = cli.main(["video", "--frames-dir", str(frames_dir), "--out-dir",
                   str(out_dir), "--stretch"])
    assert rc == 0
    written = sorted(p.name for p in out_dir.glob("*.pgm"))
    assert len(written) == 24  # background/foreground/noise per frame
    assert written[0].startswith("background_")

    result = cli.run_video(frames_dir)
    # exact reconstruction before quantization
    np.testing.assert_array_equal(result.L + result.S + result.Z, result.D)
    # the background columns barely move over time
    per_pixel_std = np.std(result.L, axis=1)
    assert per_pixel_std.max() < 0.05


def test_cmd_bench_parallel_workers_match_serial(tmp_path, monkeypatch):
    serial = tmp_path / "serial.csv"
    parallel = tmp_path / "parallel.csv"
    args = ["bench", "--n", "25,30", "--r", "2", "--s", "0.05", "--sigma", "1e-3",
            "--seeds", "0", "--modes", "plain"]
    monkeypatch.setenv("SRPCP_THREADS", "1")
    cli.main(args + ["--out", str(serial)])
    monkeypatch.setenv("SRPCP_THREADS", "2")
    cli.main(args + ["--out", str(parallel)])
    rs = cli.read_bench_csv(serial)
    rp = cli.read_bench_csv(parallel)
    for a, b in zip(rs, rp):
        for key in ("n", "r", "s", "sigma", "seed", "mode", "iters", "eta_S", "eta_L", "obj"):
            assert a[key] == b[key]


def test_pure_python_backend_env(tmp_path):
    import subprocess
    import sys

    out = subprocess.run(
        [sys.executable, "-c", "import srpcp; print(srpcp.backend_name())"],
        capture_output=True, text=True, env={"SRPCP_PURE_PYTHON": "1", "PATH": "/usr/bin:/bin"},
    )
    assert out.stdout.strip() == "python"


def test_cmd_video_empty_directory(tmp_path):
    empty = tmp_path / "none"
    empty.mkdir()
    rc = cli.main(["video", "--frames-dir", str(empty), "--out-dir",
                   str(tmp_path / "out")])
    assert rc == 1
