import json
import math

import pytest

from bellsim import kernels
from bellsim.cli import main

ZW_FITTED_ARGS = ["simulate", "--preset", "zw_fitted", "--n-trials", "4000", "--seed", "5"]


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def report_value(out: str, key: str) -> float:
    for line in out.splitlines():
        if line.startswith(f"{key} = "):
            return float(line.split(" = ", 1)[1])
    raise KeyError(key)


class TestSimulate:
    def test_pipeline_and_manifest(self, capsys, tmp_path):
        log_path = tmp_path / "run.csv"
        code, out, _ = run(capsys, *ZW_FITTED_ARGS, "--out", str(log_path))
        assert code == 0
        assert log_path.exists()

        manifest = json.loads((tmp_path / "run.csv.manifest.json").read_text())
        assert manifest["seed"] == 5
        assert manifest["outputs"] == [str(log_path)]
        assert len(manifest["config_digest"]) == 12

        code, out, _ = run(capsys, "chsh", str(log_path), "--mode", "fair")
        assert code == 0
        assert f"config_digest = {manifest['config_digest']}" in out
        s_max = report_value(out, "s_max")
        assert 2.0 < s_max < 2 * math.sqrt(2)

    def test_zero_trials_rejected_without_output(self, capsys, tmp_path):
        log_path = tmp_path / "never.csv"
        code, _, err = run(
            capsys, "simulate", "--preset", "zw_ideal", "--n-trials", "0", "--out", str(log_path)
        )
        assert code == 2
        assert "n_trials" in err
        assert not log_path.exists()

    def test_bad_config_field_named(self, capsys, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text(
            "model = quantum\nalice_angles_deg = 0, 45\nbob_angles_deg = 22.5, 67.5\n"
            "n_trials = 100\ndetector_efficiency_a = 1.5\n"
        )
        code, _, err = run(capsys, "simulate", "--config", str(cfg), "--out", str(tmp_path / "x.csv"))
        assert code == 2
        assert "detector_efficiency_a" in err

    def test_unwritable_output_is_distinct_error(self, capsys, tmp_path):
        out = tmp_path / "no" / "such" / "dir" / "run.csv"
        code, _, err = run(capsys, "simulate", "--preset", "zw_fitted", "--n-trials", "10",
                           "--out", str(out))
        assert code == 3
        assert "cannot write" in err

    def test_config_and_preset_mutually_exclusive(self, capsys, tmp_path):
        code, _, err = run(
            capsys, "simulate", "--preset", "zw_ideal", "--config", "x.cfg",
            "--out", str(tmp_path / "x.csv"),
        )
        assert code == 2
        assert "exactly one" in err
        code, _, err = run(capsys, "simulate", "--out", str(tmp_path / "x.csv"))
        assert code == 2

    def test_byte_identical_pipelines_across_threads(self, capsys, tmp_path):
        reports = []
        blobs = []
        for threads in ("1", "3"):
            log_path = tmp_path / f"run_t{threads}.csv"
            code, _, _ = run(capsys, *ZW_FITTED_ARGS, "--threads", threads, "--out", str(log_path))
            assert code == 0
            blobs.append(log_path.read_bytes())
            code, out, _ = run(capsys, "chsh", str(log_path))
            assert code == 0
            reports.append(out)
        assert blobs[0] == blobs[1]
        assert reports[0] == reports[1]


class TestChsh:
    def test_missing_log(self, capsys, tmp_path):
        code, _, err = run(capsys, "chsh", str(tmp_path / "none.csv"))
        assert code == 2
        assert "cannot read" in err

    def test_malformed_log(self, capsys, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("trial,a_set,b_set,a_out,b_out,valid\n0,0,0,+9,+1,ok\n")
        code, _, err = run(capsys, "chsh", str(bad))
        assert code == 2
        assert "line 2" in err

    def test_missing_pair_names_it(self, capsys, tmp_path):
        partial = tmp_path / "partial.csv"
        partial.write_text(
            "trial,a_set,b_set,a_out,b_out,valid\n"
            "0,0,0,+1,-1,ok\n1,0,1,+1,-1,ok\n2,1,0,+1,-1,ok\n"
        )
        code, _, err = run(capsys, "chsh", str(partial))
        assert code == 1
        assert "a1, b1" in err

    def test_empty_log_is_an_error(self, capsys, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        code, _, err = run(capsys, "chsh", str(empty))
        assert code == 2

    def test_tampered_digest_warns(self, capsys, tmp_path):
        log_path = tmp_path / "run.csv"
        assert main([*ZW_FITTED_ARGS, "--n-trials", "100", "--out", str(log_path)]) == 0
        capsys.readouterr()
        text = log_path.read_text().replace("# seed = 5", "# seed = 6")
        log_path.write_text(text)
        code, out, err = run(capsys, "chsh", str(log_path))
        assert code == 0
        assert "warning" in err
        assert "digest" in err

    def test_inclusive_mode(self, capsys, tmp_path):
        log_path = tmp_path / "run.csv"
        assert main(["simulate", "--preset", "gisin_gisin", "--n-trials", "20000",
                     "--out", str(log_path)]) == 0
        capsys.readouterr()
        code, out, _ = run(capsys, "chsh", str(log_path), "--mode", "inclusive")
        assert code == 0
        assert "mode = inclusive" in out
        assert report_value(out, "s_max") < 2.0


class TestLightcone:
    def test_preset_pass(self, capsys):
        code, out, _ = run(capsys, "lightcone", "--preset", "photon_400m")
        assert code == 0
        assert "verdict = pass" in out

    def test_preset_fail(self, capsys):
        code, out, _ = run(capsys, "lightcone", "--preset", "ion_trap")
        assert code == 1
        assert "verdict = fail" in out
        assert report_value(out, "min_margin_factor") < 1e-10

    def test_file_input(self, capsys, tmp_path):
        geom = tmp_path / "g.geom"
        geom.write_text(
            "alice_choice_t = 0\nalice_choice_x = -200\n"
            "alice_output_t = 100ns\nalice_output_x = -200\n"
            "bob_choice_t = 0\nbob_choice_x = 200\n"
            "bob_output_t = 100ns\nbob_output_x = 200\n"
        )
        code, out, _ = run(capsys, "lightcone", str(geom))
        assert code == 0
        assert report_value(out, "min_margin_factor") == pytest.approx(13.3425638, abs=1e-6)

    def test_malformed_file(self, capsys, tmp_path):
        geom = tmp_path / "bad.geom"
        geom.write_text("alice_choice_t = whenever\n")
        code, _, err = run(capsys, "lightcone", str(geom))
        assert code == 2

    def test_missing_argument(self, capsys):
        code, _, err = run(capsys, "lightcone")
        assert code == 2


class TestEnumerate:
    def test_bound(self, capsys):
        code, out, _ = run(capsys, "enumerate-lhv")
        assert code == 0
        assert out.strip() == "deterministic_chsh_bound = 2"

    def test_repeated_runs_identical(self, capsys):
        outs = set()
        for _ in range(2):
            _, out, _ = run(capsys, "enumerate-lhv")
            outs.add(out)
        assert len(outs) == 1

    def test_grouping_variant(self, capsys):
        for k, label in enumerate(("e00", "e01", "e10", "e11")):
            code, out, _ = run(capsys, "enumerate-lhv", "--grouping", str(k))
            assert code == 0
            assert out.strip() == f"deterministic_chsh_bound_minus_{label} = 2"


class TestBenchmark:
    def test_smoke(self, capsys):
        code, out, _ = run(capsys, "benchmark", "--preset", "zw_fitted", "--n-trials", "20000")
        assert code == 0
        assert "backend=python" in out
        if kernels.BACKEND_COMPILED in kernels.available_backends():
            assert "backend=compiled" in out
            assert "outputs identical: yes" in out


class TestMisc:
    def test_version(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["--version"])
        assert exc.value.code == 0
        assert "bellsim" in capsys.readouterr().out

    def test_no_command_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2
