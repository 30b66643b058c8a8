"""Black-box checks of the command-line surface: flags, exit codes, outputs."""

import json

import numpy as np
import pytest

from gikit import ReconImage, binary_demo_scene, export_image, read_dataset
from gikit.cli import main


@pytest.fixture
def scene_pgm(tmp_path):
    path = tmp_path / "scene.pgm"
    export_image(ReconImage(binary_demo_scene(12, 12).transmission), path)
    return path


def _simulate(tmp_path, scene_pgm, name="run.gid", n=24, extra=()):
    out = tmp_path / name
    code = main(
        ["simulate", "--scene", str(scene_pgm), "--n", str(n), "--seed", "5", "--out", str(out)]
        + list(extra)
    )
    assert code == 0
    return out


def test_simulate_writes_container_and_summary(tmp_path, scene_pgm, capsys):
    out = _simulate(tmp_path, scene_pgm)
    ds = read_dataset(out)
    assert ds.n == 24 and ds.width == 12
    captured = capsys.readouterr().out
    assert "n=24" in captured and "provenance" in captured


def test_simulate_n_zero_is_usage_error(tmp_path, scene_pgm):
    with pytest.raises(SystemExit) as err:
        main(["simulate", "--scene", str(scene_pgm), "--n", "0", "--out", str(tmp_path / "x.gid")])
    assert err.value.code == 2


def test_simulate_missing_scene_is_runtime_error(tmp_path, capsys):
    code = main(["simulate", "--scene", str(tmp_path / "nope.pgm"), "--n", "4",
                 "--out", str(tmp_path / "x.gid")])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_simulate_deterministic_bytes(tmp_path, scene_pgm):
    a = _simulate(tmp_path, scene_pgm, "a.gid", extra=["--drift", "linear:0.3", "--noise-mean", "0.012", "--noise-std", "0.05"])
    b = _simulate(tmp_path, scene_pgm, "b.gid", extra=["--drift", "linear:0.3", "--noise-mean", "0.012", "--noise-std", "0.05"])
    assert a.read_bytes() == b.read_bytes()


def test_reconstruct_single_image_with_manifest(tmp_path, scene_pgm):
    gid = _simulate(tmp_path, scene_pgm)
    out = tmp_path / "recon"
    manifest = tmp_path / "log"
    code = main([
        "reconstruct", "--in", str(gid), "--method", "sgi1", "--out", str(out),
        "--scene", str(scene_pgm), "--manifest", str(manifest), "--raw",
    ])
    assert code == 0
    assert (tmp_path / "recon.pgm").exists()
    assert (tmp_path / "recon.f64").exists()
    lines = (tmp_path / "log.csv").read_text().strip().splitlines()
    assert len(lines) == 2
    fields = lines[1].split(",")
    assert fields[0] == "sgi1" and fields[1] == "24" and fields[2] == "1"
    assert fields[3] == "none" and fields[6] == "23"
    assert fields[5] != ""  # cnr computed when scene given


def test_reconstruct_limit_and_pair_count(tmp_path, scene_pgm):
    gid = _simulate(tmp_path, scene_pgm)
    manifest = tmp_path / "log"
    code = main([
        "reconstruct", "--in", str(gid), "--method", "sgi1", "--limit", "10",
        "--out", str(tmp_path / "r"), "--manifest", str(manifest),
    ])
    assert code == 0
    fields = (tmp_path / "log.csv").read_text().strip().splitlines()[1].split(",")
    assert fields[1] == "10" and fields[6] == "9"


def test_reconstruct_dual_images(tmp_path, scene_pgm):
    gid = _simulate(tmp_path, scene_pgm)
    for method in ("ci", "sgi2", "sgi3"):
        out = tmp_path / method
        assert main(["reconstruct", "--in", str(gid), "--method", method, "--out", str(out)]) == 0
        assert (tmp_path / f"{method}_pos.pgm").exists()
        assert (tmp_path / f"{method}_neg.pgm").exists()


def test_reconstruct_close_loop_shift_conflict_exits_2(tmp_path, scene_pgm):
    gid = _simulate(tmp_path, scene_pgm)
    with pytest.raises(SystemExit) as err:
        main(["reconstruct", "--in", str(gid), "--method", "sgi1", "--shift", "3",
              "--close-loop", "--out", str(tmp_path / "r")])
    assert err.value.code == 2


def test_reconstruct_unknown_method_exits_2(tmp_path, scene_pgm):
    gid = _simulate(tmp_path, scene_pgm)
    with pytest.raises(SystemExit) as err:
        main(["reconstruct", "--in", str(gid), "--method", "fista", "--out", str(tmp_path / "r")])
    assert err.value.code == 2


def test_reconstruct_ci_constant_buckets_runtime_error(tmp_path, scene_pgm, capsys):
    gid = _simulate(
        tmp_path, scene_pgm, "flat.gid",
        extra=["--pattern", "speckle", "--step-shift", "0", "--jitter", "0"],
    )
    code = main(["reconstruct", "--in", str(gid), "--method", "ci", "--out", str(tmp_path / "r")])
    assert code == 1
    assert "degenerate" in capsys.readouterr().err.lower()


def test_reconstruct_deterministic_outputs(tmp_path, scene_pgm):
    gid = _simulate(tmp_path, scene_pgm)
    for tag in ("x", "y"):
        assert main(["reconstruct", "--in", str(gid), "--method", "dgi",
                     "--out", str(tmp_path / tag)]) == 0
    assert (tmp_path / "x.pgm").read_bytes() == (tmp_path / "y.pgm").read_bytes()


def test_reconstruct_progressive_snapshots(tmp_path, scene_pgm):
    gid = _simulate(tmp_path, scene_pgm, n=10)
    out = tmp_path / "live"
    code = main(["reconstruct", "--in", str(gid), "--method", "sgi1",
                 "--progressive", "3", "--out", str(out)])
    assert code == 0
    for seen in (3, 6, 9):
        assert (tmp_path / f"live_snap{seen:06d}.pgm").exists()
    assert (tmp_path / "live.pgm").exists()
    with pytest.raises(SystemExit) as err:
        main(["reconstruct", "--in", str(gid), "--method", "g2",
              "--progressive", "3", "--out", str(out)])
    assert err.value.code == 2


def test_sweep_noise_mean_cardinality(tmp_path, scene_pgm):
    out = tmp_path / "sweep"
    code = main([
        "sweep", "--scene", str(scene_pgm), "--axis", "noise-mean",
        "--values", "0.012,0.024,0.036,0.048,0.06", "--methods", "dgi,sgi1",
        "--n", "16", "--noise-std", "0.05", "--drift", "linear:0.3",
        "--seed", "3", "--out", str(out),
    ])
    assert code == 0
    lines = (tmp_path / "sweep.csv").read_text().strip().splitlines()
    assert len(lines) == 11  # header + 5 values x 2 methods
    sidecar = json.loads((tmp_path / "sweep.json").read_text())
    assert len(sidecar) == 10 and sidecar[0]["settings"]["axis"] == "noise-mean"


def test_sweep_single_point_and_n_axis(tmp_path, scene_pgm):
    out = tmp_path / "one"
    code = main(["sweep", "--scene", str(scene_pgm), "--axis", "n", "--values", "12",
                 "--methods", "g2", "--n", "12", "--seed", "3", "--out", str(out)])
    assert code == 0
    lines = (tmp_path / "one.csv").read_text().strip().splitlines()
    assert len(lines) == 2
    assert lines[1].split(",")[1] == "12"


def test_sweep_empty_methods_exits_2(tmp_path, scene_pgm):
    with pytest.raises(SystemExit) as err:
        main(["sweep", "--scene", str(scene_pgm), "--axis", "n", "--values", "8",
              "--methods", ",", "--n", "8", "--seed", "1", "--out", str(tmp_path / "s")])
    assert err.value.code == 2


def test_sweep_drift_kind_axis(tmp_path, scene_pgm):
    out = tmp_path / "drifts"
    code = main(["sweep", "--scene", str(scene_pgm), "--axis", "drift-kind",
                 "--values", "none,linear,sinusoidal", "--methods", "sgi1",
                 "--n", "16", "--drift", "linear:0.3", "--seed", "2", "--out", str(out)])
    assert code == 0
    rows = (tmp_path / "drifts.csv").read_text().strip().splitlines()[1:]
    assert [r.split(",")[3] for r in rows] == ["none", "linear", "sinusoidal"]


def test_diagnose_columns_and_boundary(tmp_path, scene_pgm):
    gid = _simulate(tmp_path, scene_pgm, "d.gid", n=2)
    out = tmp_path / "sr.csv"
    assert main(["diagnose", "--in", str(gid), "--out", str(out)]) == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0] == "index,s_r,dev_index,s_r_deviation"
    assert len(lines) == 3
    assert lines[2].endswith(",,")  # deviation column exhausted

    ds = read_dataset(gid)
    s_r = ds.frame_matrix.sum(axis=1)
    assert float(lines[1].split(",")[1]) == pytest.approx(s_r[0])
    assert float(lines[1].split(",")[3]) == pytest.approx(s_r[1] - s_r[0])


def test_diagnose_deterministic(tmp_path, scene_pgm):
    gid = _simulate(tmp_path, scene_pgm, "d.gid", n=8,
                    extra=["--drift", "linear:0.2"])
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["diagnose", "--in", str(gid), "--out", str(a)]) == 0
    assert main(["diagnose", "--in", str(gid), "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_sweep_rows_deterministic_except_wall_time(tmp_path, scene_pgm):
    outs = []
    for tag in ("p", "q"):
        out = tmp_path / tag
        assert main(["sweep", "--scene", str(scene_pgm), "--axis", "n",
                     "--values", "8,16", "--methods", "dgi,sgi1", "--n", "16",
                     "--seed", "9", "--out", str(out)]) == 0
        rows = (tmp_path / f"{tag}.csv").read_text().strip().splitlines()
        outs.append([",".join(r.split(",")[:-1]) for r in rows])  # drop wall_time_ms
    assert outs[0] == outs[1]
