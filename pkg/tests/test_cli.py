import csv
import subprocess
import sys

import numpy as np
import pytest

from salobj import cli
from salobj.raster import load_mask

from conftest import SYNTHETIC10, save_png


def run(*argv):
    return cli.main([str(a) for a in argv])


def read_rows(path):
    lines = [ln for ln in path.read_text().splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(lines))


def meta_of(path):
    return dict(ln[2:].split("=", 1) for ln in path.read_text().splitlines() if ln.startswith("# "))


def tree_bytes(root):
    return {p.relative_to(root).as_posix(): p.read_bytes() for p in sorted(root.rglob("*")) if p.is_file()}


class TestSegment:
    def test_three_entries(self, synthetic_manifest, tmp_path, capsys):
        out = tmp_path / "out"
        assert run("segment", "--manifest", synthetic_manifest, "--out", out) == 0
        masks = sorted(p.name for p in (out / "masks").glob("*.png"))
        assert masks == ["e0.png", "e1.png", "e2.png"]
        assert "e0\tomega=" in capsys.readouterr().out
        assert load_mask(out / "masks" / "e0.png").shape == (64, 64)
        rows = read_rows(out / "segment.csv")
        assert [r["status"] for r in rows] == ["ok"] * 3
        assert read_rows(out / "errors.csv") == []

    def test_one_bad_path(self, synthetic_manifest, tmp_path, capsys):
        (synthetic_manifest.parent / "img1.png").unlink()
        out = tmp_path / "out"
        assert run("segment", "--manifest", synthetic_manifest, "--out", out) == 1
        assert sorted(p.name for p in (out / "masks").glob("*.png")) == ["e0.png", "e2.png"]
        errors = read_rows(out / "errors.csv")
        assert [e["id"] for e in errors] == ["e1"] and "img1.png" in errors[0]["error"]
        assert "img1.png" in capsys.readouterr().err

    def test_sidecar_and_labels(self, synthetic_manifest, tmp_path):
        out = tmp_path / "out"
        run("segment", "--manifest", synthetic_manifest, "--out", out, "--export-labels")
        import json
        side = json.loads((out / "masks" / "e0.json").read_text())
        assert side["config"]["beta"] == 0.7 and side["id"] == "e0"
        assert (out / "masks" / "e0_labels.png").is_file()

    def test_unreadable_manifest(self, tmp_path, capsys):
        out = tmp_path / "out"
        assert run("segment", "--manifest", tmp_path / "missing.yaml", "--out", out) == 2
        assert "configuration error" in capsys.readouterr().err
        assert not (out / "masks").exists()

    def test_no_output_dir(self, synthetic_manifest, monkeypatch):
        monkeypatch.delenv(cli.OUT_ENV, raising=False)
        assert run("segment", "--manifest", synthetic_manifest) == 2

    def test_env_output_dir(self, synthetic_manifest, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "envout"))
        assert run("segment", "--manifest", synthetic_manifest) == 0
        assert (tmp_path / "envout" / "segment.csv").is_file()

    @pytest.mark.parametrize("flags", [["--workers", "0"], ["--seg-k", "-1"], ["--beta", "1.5"]])
    def test_bad_config(self, synthetic_manifest, tmp_path, flags):
        assert run("segment", "--manifest", synthetic_manifest, "--out", tmp_path, *flags) == 2


class TestEval:
    def test_maps_equal_ground_truth(self, synthetic_manifest, tmp_path):
        root = synthetic_manifest.parent
        for i in range(3):
            (root / f"map{i}.png").write_bytes((root / f"mask{i}.png").read_bytes())
        out = tmp_path / "out"
        assert run("eval", "--manifest", synthetic_manifest, "--out", out) == 0
        for row in read_rows(out / "per_image.csv"):
            assert float(row["f_measure"]) == 1.0 and float(row["auc"]) == 1.0
        assert (out / "curves" / "e0_pr.csv").is_file()

    def test_constant_maps(self, synthetic_manifest, tmp_path):
        root = synthetic_manifest.parent
        for i in range(3):
            save_png(root / f"map{i}.png", np.full((64, 64), 0.5))
        out = tmp_path / "out"
        assert run("eval", "--manifest", synthetic_manifest, "--out", out) == 0
        assert all(float(r["auc"]) == 0.5 for r in read_rows(out / "per_image.csv"))

    def test_missing_maps_enumerated(self, synthetic_manifest, tmp_path):
        (synthetic_manifest.parent / "map0.png").unlink()
        (synthetic_manifest.parent / "map2.png").unlink()
        out = tmp_path / "out"
        assert run("eval", "--manifest", synthetic_manifest, "--out", out) == 1
        errors = read_rows(out / "errors.csv")
        assert [e["id"] for e in errors] == ["e0", "e2"]
        assert read_rows(out / "summary.csv")[0]["n_images"] == "1"

    def test_maps_dir(self, tmp_path):
        out = tmp_path / "out"
        manifest = tmp_path / "m.yaml"
        text = (SYNTHETIC10 / "manifest.yaml").read_text()
        lines = [ln for ln in text.splitlines() if "map:" not in ln]
        manifest.write_text("\n".join(lines).replace("images/", f"{SYNTHETIC10}/images/")
                            .replace("masks/", f"{SYNTHETIC10}/masks/") + "\n")
        assert run("eval", "--manifest", manifest, "--out", out,
                   "--maps-dir", SYNTHETIC10 / "maps") == 0
        golden = read_rows(SYNTHETIC10 / "golden" / "summary.csv")
        assert read_rows(out / "summary.csv") == golden

    def test_golden_byte_identity(self, tmp_path):
        out = tmp_path / "out"
        assert run("eval", "--manifest", SYNTHETIC10 / "manifest.yaml", "--out", out) == 0
        for name in ("summary.csv", "per_image.csv", "pr_curve.csv", "roc_curve.csv"):
            assert (out / name).read_bytes() == (SYNTHETIC10 / "golden" / name).read_bytes(), name

    def test_metadata_block(self, synthetic_manifest, tmp_path):
        out = tmp_path / "out"
        run("eval", "--manifest", synthetic_manifest, "--out", out, "--fpr", "paper-printed",
            "--f-mode", "fixed:100", "--alpha", "1")
        meta = meta_of(out / "summary.csv")
        assert meta["fpr"] == "paper-printed" and meta["f_mode"] == "fixed:100"
        assert meta["alpha"] == "1.000000" and meta["discard_border"] == "true"
        assert "workers" not in meta

    def test_bad_f_mode(self, synthetic_manifest, tmp_path):
        assert run("eval", "--manifest", synthetic_manifest, "--out", tmp_path,
                   "--f-mode", "fixed:999") == 2

    @pytest.mark.parametrize("frontend", ["fixations", "interobs", "standin"])
    def test_frontends(self, synthetic_manifest, tmp_path, frontend):
        out = tmp_path / "out"
        assert run("eval", "--manifest", synthetic_manifest, "--out", out,
                   "--frontend", frontend, "--blur-sigma", "5") == 0
        assert len(read_rows(out / "per_image.csv")) == 3

    def test_salbase_target(self, synthetic_manifest, tmp_path):
        out = tmp_path / "out"
        assert run("eval", "--manifest", synthetic_manifest, "--out", out, "--target", "salbase") == 0
        assert read_rows(out / "summary.csv")[0]["model"].startswith("SalBase[")


class TestSweep:
    def test_beta(self, synthetic_manifest, tmp_path):
        out = tmp_path / "out"
        assert run("sweep", "--manifest", synthetic_manifest, "--out", out, "--param", "beta") == 0
        rows = read_rows(out / "sweep.csv")
        assert [r["value"] for r in rows] == ["0.5", "0.6", "0.7", "0.8", "0.9"]
        assert len(read_rows(out / "f_curve.csv")) == 5

    def test_seg(self, synthetic_manifest, tmp_path):
        out = tmp_path / "out"
        assert run("sweep", "--manifest", synthetic_manifest, "--out", out, "--param", "seg") == 0
        rows = read_rows(out / "sweep.csv")
        assert [(r["value"], r["seg_k"], r["seg_min"]) for r in rows] == [
            ("fine", "100.000000", "20"), ("default", "300.000000", "60"),
            ("coarse", "1000.000000", "800")]

    def test_single_value_matches_eval(self, synthetic_manifest, tmp_path):
        run("sweep", "--manifest", synthetic_manifest, "--out", tmp_path / "s",
            "--param", "beta", "--values", "0.6")
        run("eval", "--manifest", synthetic_manifest, "--out", tmp_path / "e",
            "--target", "salbase", "--beta", "0.6")
        s = read_rows(tmp_path / "s" / "sweep.csv")[0]
        e = read_rows(tmp_path / "e" / "summary.csv")[0]
        assert (s["f_measure"], s["auc"], s["mean_omega"]) == (e["f_measure"], e["auc"], e["mean_omega"])

    @pytest.mark.parametrize("values", ["bogus", "x,0.5"])
    def test_bad_values(self, synthetic_manifest, tmp_path, values):
        param = "seg" if values == "bogus" else "beta"
        assert run("sweep", "--manifest", synthetic_manifest, "--out", tmp_path,
                   "--param", param, "--values", values) == 2


class TestStats:
    def test_agreement_column(self, synthetic_manifest, tmp_path):
        out = tmp_path / "out"
        assert run("stats", "--manifest", synthetic_manifest, "--out", out) == 0
        rows = read_rows(out / "stats.csv")
        assert len(rows) == 3
        assert all(float(r["r_k"]) == 1.0 for r in rows)
        assert all(r["fixation_ratio"] != "absent" for r in rows)

    def test_without_fixations(self, synthetic_manifest, tmp_path):
        text = synthetic_manifest.read_text()
        synthetic_manifest.write_text("\n".join(ln for ln in text.splitlines() if "fixations:" not in ln))
        out = tmp_path / "out"
        assert run("stats", "--manifest", synthetic_manifest, "--out", out) == 0
        rows = read_rows(out / "stats.csv")
        assert all(r["fixation_ratio"] == "absent" for r in rows)
        assert meta_of(out / "stats.csv")["fixation_columns"] == "absent"


class TestFixmap:
    def test_writes_maps(self, synthetic_manifest, tmp_path):
        out = tmp_path / "out"
        assert run("fixmap", "--manifest", synthetic_manifest, "--out", out, "--blur-sigma", "3") == 0
        assert sorted(p.name for p in (out / "fixmaps").glob("*.png")) == ["e0.png", "e1.png", "e2.png"]
        rows = read_rows(out / "fixmaps.csv")
        assert [r["n_fixations"] for r in rows] == ["7"] * 3


@pytest.mark.parametrize("command", [["segment"], ["eval"], ["stats"], ["fixmap"],
                                     ["sweep", "--param", "beta", "--values", "0.6,0.8"]])
def test_deterministic_across_runs_and_workers(synthetic_manifest, tmp_path, command):
    outs = []
    for tag, workers in (("a", 1), ("b", 1), ("c", 8)):
        out = tmp_path / tag
        assert run(command[0], "--manifest", synthetic_manifest, "--out", out,
                   "--workers", workers, *command[1:]) == 0
        outs.append(tree_bytes(out))
    assert outs[0] == outs[1] == outs[2]


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "salobj", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "segment" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "salobj", "eval"], capture_output=True, text=True)
    assert proc.returncode == 2
