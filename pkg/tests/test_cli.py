import json

import pytest

from cbbench.cli import main
from cbbench.io import read_det_points
from cbbench.metrics import eer


def small_config(tmp_path, **overrides):
    cfg = {
        "master_seed": 11,
        "schemes": ["biohash", "iom-grp"],
        "scenarios": ["normal", "stolen"],
        "params": {"output_length": 32, "iom_k": 8},
        "unlinkability_bins": 10,
        "mi_components": 4,
        "synthetic": {
            "subjects": 6,
            "samples_per_subject": 3,
            "dimension": 16,
            "noise_sigma": 0.35,
            "seed": 5,
        },
        "output_dir": str(tmp_path / "out"),
    }
    cfg.update(overrides)
    path = tmp_path / "bench.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


class TestSynth:
    def test_writes_expected_rows(self, tmp_path, capsys):
        out = tmp_path / "t.csv"
        rc = main(
            [
                "synth", "--subjects", "50", "--samples", "6", "--dim", "128",
                "--sigma", "0.35", "--seed", "42", "--out", str(out),
            ]
        )
        assert rc == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert len(lines) == 301  # header + 50*6 rows
        assert "50 subjects" in capsys.readouterr().out

    def test_byte_identical_reruns(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        args = ["synth", "--subjects", "4", "--samples", "2", "--dim", "16",
                "--sigma", "0.3", "--seed", "1"]
        assert main(args + ["--out", str(a)]) == 0
        assert main(args + ["--out", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_single_subject_usage_error(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(
                ["synth", "--subjects", "1", "--samples", "2", "--dim", "16",
                 "--sigma", "0.3", "--out", str(tmp_path / "t.csv")]
            )
        assert exc.value.code == 2

    def test_unknown_flag_rejected(self, tmp_path):
        with pytest.raises(SystemExit) as exc:
            main(["synth", "--subjects", "2", "--samples", "2", "--dim", "16",
                  "--sigma", "0.3", "--out", str(tmp_path / "t.csv"), "--turbo"])
        assert exc.value.code == 2


@pytest.fixture()
def template_csv(tmp_path):
    out = tmp_path / "templates.csv"
    assert (
        main(["synth", "--subjects", "6", "--samples", "3", "--dim", "16",
              "--sigma", "0.3", "--seed", "3", "--out", str(out)]) == 0
    )
    return out


class TestProtect:
    def test_writes_protected_csv(self, tmp_path, template_csv, capsys):
        out = tmp_path / "protected.csv"
        rc = main(
            ["protect", "--templates", str(template_csv), "--scheme", "biohash",
             "--scenario", "stolen", "--master-seed", "9", "--length", "32",
             "--out", str(out)]
        )
        assert rc == 0
        lines = out.read_text(encoding="utf-8").splitlines()
        assert lines[0].startswith("subject_id,sample_id,p0,")
        assert len(lines) == 19  # header + 18 templates
        values = {v for line in lines[1:] for v in line.split(",")[2:]}
        assert values <= {"0.0", "1.0"}


class TestEvalPerf:
    def test_prints_eer_and_writes_det(self, tmp_path, template_csv, capsys):
        rc = main(
            ["eval-perf", "--templates", str(template_csv), "--scheme", "biohash",
             "--scenario", "normal", "--master-seed", "4", "--length", "32",
             "--out-dir", str(tmp_path / "out")]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "EER 0.0000" in out
        assert "FNMR@FMR=1%" in out
        curve = read_det_points(tmp_path / "out" / "det_biohash_normal.csv")
        assert eer(curve) == 0.0


class TestEvalUnlink:
    def test_refuses_non_sample_specific(self, tmp_path, template_csv, capsys):
        rc = main(
            ["eval-unlink", "--templates", str(template_csv), "--scheme", "biohash",
             "--scenario", "stolen", "--out-dir", str(tmp_path / "out")]
        )
        assert rc == 1
        assert "sample-specific" in capsys.readouterr().err

    def test_runs_sample_specific(self, tmp_path, template_csv, capsys):
        rc = main(
            ["eval-unlink", "--templates", str(template_csv), "--scheme", "biohash",
             "--length", "32", "--bins", "10", "--out-dir", str(tmp_path / "out")]
        )
        assert rc == 0
        out = capsys.readouterr().out
        assert "D_sys" in out
        assert (tmp_path / "out" / "unlink_biohash.csv").exists()


class TestEvalIrrev:
    def test_warns_on_r_shrink_and_writes_artifact(self, tmp_path, template_csv, capsys):
        rc = main(
            ["eval-irrev", "--templates", str(template_csv), "--scheme", "biohash",
             "--scenario", "stolen", "--length", "32", "--r", "100",
             "--out-dir", str(tmp_path / "out")]
        )
        assert rc == 0
        captured = capsys.readouterr()
        assert "MI " in captured.out
        assert "warning" in captured.err and "reduced" in captured.err
        artifact = json.loads(
            (tmp_path / "out" / "irrev_biohash_stolen.json").read_text(encoding="utf-8")
        )
        assert artifact["r_used"] == 16  # min(100, 17, 16, 32)
        assert artifact["mi"] >= 0.0


class TestBench:
    def test_full_structure(self, tmp_path, capsys):
        cfg = small_config(tmp_path)
        assert main(["bench", "--config", str(cfg)]) == 0
        report = json.loads((tmp_path / "out" / "report.json").read_text(encoding="utf-8"))
        assert len(report["cells"]) == 4  # 2 schemes x 2 scenarios
        assert {c["scenario"] for c in report["cells"]} == {"normal", "stolen"}
        assert len(report["unlinkability"]) == 2
        assert all("d_sys" in row for row in report["unlinkability"])
        assert "unprotected_baseline" in report
        for cell in report["cells"]:
            det = read_det_points(tmp_path / "out" / cell["det_csv"])
            assert eer(det) == cell["eer"]
        # cells are sorted by scheme then scenario
        order = [(c["scheme"], c["scenario"]) for c in report["cells"]]
        assert order == sorted(order)

    def test_deterministic_modulo_timestamp(self, tmp_path):
        cfg = small_config(tmp_path)
        assert main(["bench", "--config", str(cfg)]) == 0
        first = json.loads((tmp_path / "out" / "report.json").read_text(encoding="utf-8"))
        assert main(["bench", "--config", str(cfg)]) == 0
        second = json.loads((tmp_path / "out" / "report.json").read_text(encoding="utf-8"))
        first.pop("timestamp")
        second.pop("timestamp")
        assert first == second

    def test_unknown_scheme_names_token(self, tmp_path, capsys):
        cfg = small_config(tmp_path, schemes=["biohash", "quadhash"])
        assert main(["bench", "--config", str(cfg)]) == 1
        assert "quadhash" in capsys.readouterr().err

    def test_failing_cell_removes_partial_outputs(self, tmp_path, capsys):
        # iom-urp with an alphabet wider than the dimension fails at
        # instantiation, after the biohash DET files were already written
        cfg = small_config(
            tmp_path,
            schemes=["biohash", {"name": "iom-urp", "params": {"iom_k": 32}}],
        )
        out_dir = tmp_path / "out"
        assert main(["bench", "--config", str(cfg)]) == 1
        err = capsys.readouterr().err
        assert "iom-urp" in err and "cell" in err
        assert not list(out_dir.glob("*.csv"))
        assert not (out_dir / "report.json").exists()

    def test_seed_override_changes_results(self, tmp_path):
        cfg = small_config(tmp_path)
        assert main(["bench", "--config", str(cfg), "--out-dir", str(tmp_path / "o1")]) == 0
        assert main(
            ["bench", "--config", str(cfg), "--out-dir", str(tmp_path / "o2"), "--seed", "99"]
        ) == 0
        r1 = json.loads((tmp_path / "o1" / "report.json").read_text(encoding="utf-8"))
        r2 = json.loads((tmp_path / "o2" / "report.json").read_text(encoding="utf-8"))
        assert r1["config"]["master_seed"] == 11 and r2["config"]["master_seed"] == 99
        assert [c["mi"] for c in r1["cells"]] != [c["mi"] for c in r2["cells"]]


def test_missing_templates_file_is_runtime_error(tmp_path, capsys):
    rc = main(
        ["eval-perf", "--templates", str(tmp_path / "absent.csv"), "--scheme", "biohash"]
    )
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_unwritable_output_is_runtime_error(tmp_path, capsys):
    out = tmp_path / "no" / "such" / "dir" / "t.csv"
    rc = main(["synth", "--subjects", "2", "--samples", "2", "--dim", "8",
               "--sigma", "0.3", "--out", str(out)])
    assert rc == 1
    err = capsys.readouterr().err
    assert "error" in err and "t.csv" in err
