import json

import pytest

from rcacf import load_result
from rcacf.cli import main


def synth_spec_dict(name, seed=1, frames=12, motion=None, **extra):
    spec = {
        "name": name,
        "size": [140, 90],
        "frames": frames,
        "target_size": [20, 20],
        "texture_seed": seed,
        "motion": motion or {"type": "static"},
    }
    spec.update(extra)
    return spec


def write_spec(tmp_path, name="alpha", **kwargs):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(synth_spec_dict(name, **kwargs)))
    return path


def render(tmp_path, name="alpha", **kwargs):
    spec_path = write_spec(tmp_path, name, **kwargs)
    seq_dir = tmp_path / "seqs" / name
    assert main(["synth", "--spec", str(spec_path), "--out", str(seq_dir)]) == 0
    return seq_dir


class TestSynthCommand:
    def test_renders_otb_layout(self, tmp_path):
        seq = render(tmp_path, frames=7)
        assert len(list((seq / "img").iterdir())) == 7
        assert len((seq / "groundtruth_rect.txt").read_text().splitlines()) == 7

    def test_same_seed_byte_identical(self, tmp_path):
        a = render(tmp_path, name="a", seed=5)
        b = render(tmp_path, name="b", seed=5)
        for pa, pb in zip(sorted((a / "img").iterdir()), sorted((b / "img").iterdir())):
            assert pa.read_bytes() == pb.read_bytes()

    def test_invalid_spec_exits_2(self, tmp_path, capsys):
        spec_path = tmp_path / "bad.json"
        bad = synth_spec_dict("bad", motion={"type": "linear", "vx": 50, "vy": 0}, frames=30)
        spec_path.write_text(json.dumps(bad))
        assert main(["synth", "--spec", str(spec_path), "--out", str(tmp_path / "o")]) == 2
        assert "error" in capsys.readouterr().err


class TestTrackCommand:
    def test_static_scene_constant_boxes(self, tmp_path):
        seq = render(tmp_path)
        out = tmp_path / "r.txt"
        code = main(["track", "--seq", str(seq), "--variant", "rcacf", "--out", str(out)])
        assert code == 0
        result = load_result(out)
        assert len(result.boxes) == 12
        assert all(b == result.boxes[0] for b in result.boxes)
        assert result.variant.startswith("rcacf:")

    def test_missing_ground_truth_exits_2(self, tmp_path, capsys):
        seq = render(tmp_path)
        (seq / "groundtruth_rect.txt").unlink()
        code = main(["track", "--seq", str(seq), "--variant", "base", "--out", str(tmp_path / "r.txt")])
        assert code == 2
        assert "groundtruth_rect.txt" in capsys.readouterr().err

    def test_repeat_runs_byte_identical(self, tmp_path):
        seq = render(tmp_path)
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        assert main(["track", "--seq", str(seq), "--variant", "rcacf", "--out", str(a)]) == 0
        assert main(["track", "--seq", str(seq), "--variant", "rcacf", "--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_flag_overrides_change_fingerprint(self, tmp_path):
        seq = render(tmp_path)
        a, b = tmp_path / "a.txt", tmp_path / "b.txt"
        main(["track", "--seq", str(seq), "--variant", "rcacf", "--out", str(a)])
        main(["track", "--seq", str(seq), "--variant", "rcacf", "--lambda2", "5", "--out", str(b)])
        assert load_result(a).variant != load_result(b).variant

    def test_config_file_applies_between_preset_and_flags(self, tmp_path):
        seq = render(tmp_path)
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"lambda2": 7.0, "learning_rate": 0.05}))
        a = tmp_path / "a.txt"
        b = tmp_path / "b.txt"
        main(["track", "--seq", str(seq), "--variant", "rcacf", "--config", str(cfg_file), "--out", str(a)])
        main(
            [
                "track", "--seq", str(seq), "--variant", "rcacf",
                "--config", str(cfg_file), "--lambda2", "9", "--out", str(b),
            ]
        )
        assert load_result(a).variant != load_result(b).variant


class TestEvalCommand:
    def _tracked(self, tmp_path):
        seq = render(tmp_path)
        out = tmp_path / "results" / "r.txt"
        main(["track", "--seq", str(seq), "--variant", "rcacf", "--out", str(out)])
        return seq, out

    def test_perfect_result_scores(self, tmp_path, capsys):
        seq, _ = self._tracked(tmp_path)
        # hand-build a perfect result from the ground truth itself
        from rcacf import TrackResult, load_sequence, save_result

        meta = load_sequence(seq)
        perfect = TrackResult(meta.name, meta.ground_truth, "perfect:0")
        rpath = tmp_path / "perfect.txt"
        save_result(perfect, rpath)
        out_dir = tmp_path / "report"
        code = main(["eval", "--results", str(rpath), "--meta", str(seq), "--out", str(out_dir)])
        assert code == 0
        printed = capsys.readouterr().out
        assert "precision@20=1.0000" in printed
        report = json.loads((out_dir / "report.json").read_text())
        overall = report["variants"]["perfect:0"]["overall"]
        assert overall["precision_20"] == 1.0
        assert overall["success_auc"] == pytest.approx(20 / 21)

    def test_unknown_sequence_exits_3(self, tmp_path, capsys):
        seq, rpath = self._tracked(tmp_path)
        text = rpath.read_text().replace("seq=alpha", "seq=ghost")
        rpath.write_text(text)
        code = main(["eval", "--results", str(rpath), "--meta", str(seq), "--out", str(tmp_path / "rep")])
        assert code == 3
        assert "ghost" in capsys.readouterr().err

    def test_curves_written_as_csv(self, tmp_path):
        seq, rpath = self._tracked(tmp_path)
        out_dir = tmp_path / "report"
        main(["eval", "--results", str(rpath), "--meta", str(seq.parent), "--out", str(out_dir)])
        csvs = list((out_dir / "curves").iterdir())
        assert any("overall__precision" in p.name for p in csvs)
        first = next(p for p in csvs if "overall__precision" in p.name)
        lines = first.read_text().splitlines()
        assert lines[0] == "threshold,value"
        assert len(lines) == 52

    def test_two_variants_emit_comparison(self, tmp_path):
        seq = render(tmp_path)
        r1, r2 = tmp_path / "r1.txt", tmp_path / "r2.txt"
        main(["track", "--seq", str(seq), "--variant", "base", "--out", str(r1)])
        main(["track", "--seq", str(seq), "--variant", "rcacf", "--out", str(r2)])
        out_dir = tmp_path / "report"
        code = main(
            ["eval", "--results", str(r1), str(r2), "--meta", str(seq), "--out", str(out_dir)]
        )
        assert code == 0
        assert (out_dir / "table_success_rate_50.csv").exists()
        assert (out_dir / "table_success_auc.csv").exists()

    def test_attribute_rollup_in_report(self, tmp_path):
        seq, rpath = self._tracked(tmp_path)
        sidecar = tmp_path / "attrs.txt"
        sidecar.write_text("alpha: BC,LR\n")
        out_dir = tmp_path / "report"
        main(
            [
                "eval", "--results", str(rpath), "--meta", str(seq),
                "--attributes", str(sidecar), "--out", str(out_dir),
            ]
        )
        report = json.loads((out_dir / "report.json").read_text())
        variant = next(iter(report["variants"]))
        assert set(report["variants"][variant]["per_attribute"]) == {"BC", "LR"}


def write_manifest(tmp_path, out_dir, workers=1, corrupt=False):
    sequences = [
        {"synth": synth_spec_dict("s-static", seed=2)},
        {"synth": synth_spec_dict("s-drift", seed=3, motion={"type": "linear", "vx": 2, "vy": 0}, frames=15)},
        {"synth": synth_spec_dict("s-sway", seed=4, motion={"type": "sinusoidal", "amplitude": 6, "period": 10}, frames=15)},
    ]
    if corrupt:
        broken = tmp_path / "broken-seq"
        (broken / "img").mkdir(parents=True)
        sequences.append(str(broken))
    manifest = {
        "sequences": sequences,
        "variants": ["base", "ca", "rcacf"],
        "output_dir": str(out_dir),
        "workers": workers,
        "seed": 11,
    }
    path = tmp_path / "manifest.json"
    path.write_text(json.dumps(manifest))
    return path


class TestBenchCommand:
    def test_full_grid_and_tables(self, tmp_path):
        out_dir = tmp_path / "out"
        manifest = write_manifest(tmp_path, out_dir)
        assert main(["bench", "--manifest", str(manifest)]) == 0
        results = list((out_dir / "results").iterdir())
        assert len(results) == 9
        report = json.loads((out_dir / "report.json").read_text())
        assert set(report["variants"]) == {"base", "ca", "rcacf"}
        table = report["comparison"]["success_rate_50"]
        assert set(table["variants"]) == {"base", "ca", "rcacf"}
        assert len(table["sequences"]) == 3

    def test_corrupt_sequence_partial_report(self, tmp_path, capsys):
        out_dir = tmp_path / "out"
        manifest = write_manifest(tmp_path, out_dir, corrupt=True)
        assert main(["bench", "--manifest", str(manifest)]) == 0
        assert "warning" in capsys.readouterr().err
        report = json.loads((out_dir / "report.json").read_text())
        assert len(report["failures"]) == 3  # one bad sequence x three variants
        assert len(report["variants"]["rcacf"]["per_sequence"]) == 3

    def test_worker_counts_agree(self, tmp_path):
        out1, out4 = tmp_path / "w1", tmp_path / "w4"
        m1 = write_manifest(tmp_path, out1, workers=1)
        assert main(["bench", "--manifest", str(m1)]) == 0
        m4 = write_manifest(tmp_path, out4, workers=4)
        assert main(["bench", "--manifest", str(m4)]) == 0
        assert (out1 / "report.json").read_bytes() == (out4 / "report.json").read_bytes()

    def test_empty_manifest_exits_2(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"sequences": [], "variants": []}))
        assert main(["bench", "--manifest", str(path)]) == 2
