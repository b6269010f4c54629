import math

import numpy as np
import pytest

from bellsim.config import ExperimentConfig
from bellsim.core import DegenerateSettingsWarning
from bellsim.errors import ConfigError, LogParseError
from bellsim.sim import (
    CHUNK_TRIALS,
    DOUBLE_FIRE,
    EventLog,
    event_log_to_text,
    parse_event_log,
    read_event_log,
    resolve_detection,
    run_experiment,
    verify_header_digest,
    write_event_log,
)
from oracles import binomial_stderr

LOG_FIELDS = ("a_set", "b_set", "a_out", "b_out", "valid")


def logs_equal(a, b):
    return all(np.array_equal(getattr(a, f), getattr(b, f)) for f in LOG_FIELDS)


class TestValidation:
    def test_invalid_config_rejected_before_work(self):
        with pytest.raises(ConfigError):
            ExperimentConfig(
                model="quantum",
                alice_angles_deg=(0.0, 45.0),
                bob_angles_deg=(22.5, 67.5),
                n_trials=0,
            )
        with pytest.raises(ConfigError):
            ExperimentConfig(
                model="quantum",
                alice_angles_deg=(0.0, 45.0),
                bob_angles_deg=(22.5, 67.5),
                n_trials=100,
                detector_efficiency_a=1.5,
            )

    def test_bad_threads_rejected(self, make_config):
        with pytest.raises(ValueError):
            run_experiment(make_config(), threads=0)


class TestDeterminism:
    def test_same_seed_bit_identical(self, make_config):
        cfg = make_config(n_trials=50_000, detector_efficiency_a=0.8, dark_count_prob=0.01)
        assert logs_equal(run_experiment(cfg), run_experiment(cfg))

    def test_different_seed_differs(self, make_config):
        a = run_experiment(make_config(n_trials=10_000, seed=1))
        b = run_experiment(make_config(n_trials=10_000, seed=2))
        assert not logs_equal(a, b)

    def test_thread_count_does_not_change_log(self, make_config):
        cfg = make_config(n_trials=2 * CHUNK_TRIALS + 123)
        single = run_experiment(cfg, threads=1)
        for threads in (2, 4):
            assert logs_equal(single, run_experiment(cfg, threads=threads))

    def test_serialization_is_byte_stable(self, make_config):
        cfg = make_config(n_trials=5_000)
        text1 = event_log_to_text(run_experiment(cfg))
        text2 = event_log_to_text(run_experiment(cfg))
        assert text1 == text2


class TestPhysicsInvariants:
    def test_equal_angles_perfect_anticorrelation(self):
        cfg = ExperimentConfig(
            model="quantum",
            alice_angles_deg=(30.0, 30.0),
            bob_angles_deg=(30.0, 30.0),
            n_trials=20_000,
            seed=11,
        )
        with pytest.warns(DegenerateSettingsWarning):
            log = run_experiment(cfg)
        assert np.all(log.a_out == -log.b_out)
        assert np.all(log.a_out != 0)

    def test_coincidence_fraction_at_60_percent_efficiency(self, make_config):
        cfg = make_config(
            n_trials=200_000,
            detector_efficiency_a=0.6,
            detector_efficiency_b=0.6,
            seed=21,
        )
        log = run_experiment(cfg)
        frac = float(np.mean((log.a_out != 0) & (log.b_out != 0)))
        assert abs(frac - 0.36) <= 5 * binomial_stderr(0.36, len(log))

    def test_efficiency_accounting_with_transmissions(self, make_config):
        cfg = make_config(
            n_trials=200_000,
            arm_transmission_a=0.9,
            arm_transmission_b=0.8,
            detector_efficiency_a=0.7,
            detector_efficiency_b=0.6,
            seed=22,
        )
        log = run_experiment(cfg)
        want = (0.9 * 0.7) * (0.8 * 0.6)
        frac = float(np.mean((log.a_out != 0) & (log.b_out != 0)))
        assert abs(frac - want) <= 5 * binomial_stderr(want, len(log))

    def test_setting_balance(self, make_config):
        n = 1_000_000
        log = run_experiment(make_config(n_trials=n, seed=23))
        pair = (log.a_set.astype(int) << 1) | log.b_set
        tolerance = 5 * math.sqrt(n * 0.25 * 0.75)
        for k in range(4):
            assert abs(int((pair == k).sum()) - n / 4) <= tolerance

    def test_dark_count_double_fires(self, make_config):
        log = run_experiment(make_config(n_trials=5_000, dark_count_prob=1.0, seed=24))
        assert np.all(log.valid == 1)
        log2 = run_experiment(
            make_config(n_trials=50_000, dark_count_prob=0.05, detector_efficiency_a=0.0,
                        detector_efficiency_b=0.0, seed=25)
        )
        assert 0 < int((log2.valid == 1).sum()) < len(log2)
        # a double-fired record carries outcome 0 on the offending side
        assert set(np.unique(log2.a_out[log2.valid == 1])) <= {-1, 0, 1}


class TestResolveDetection:
    def test_certain_detection(self):
        rng = np.random.default_rng(0)
        assert resolve_detection(+1, survival=1.0, dark_prob=0.0, rng=rng) == +1

    def test_no_detection(self):
        rng = np.random.default_rng(0)
        assert resolve_detection(+1, survival=0.0, dark_prob=0.0, rng=rng) == 0

    def test_certain_double_fire(self):
        rng = np.random.default_rng(0)
        assert resolve_detection(-1, survival=0.0, dark_prob=1.0, rng=rng) == DOUBLE_FIRE

    def test_validation(self):
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            resolve_detection(0, survival=0.5, dark_prob=0.0, rng=rng)
        with pytest.raises(ValueError):
            resolve_detection(+1, survival=1.5, dark_prob=0.0, rng=rng)


class TestEventLogIO:
    def test_round_trip(self, make_config, tmp_path):
        cfg = make_config(n_trials=3_000, detector_efficiency_b=0.7, dark_count_prob=0.02)
        log = run_experiment(cfg)
        path = tmp_path / "run.csv"
        write_event_log(log, path)
        loaded = read_event_log(path)
        assert logs_equal(log, loaded)
        assert loaded.header == log.header
        assert loaded.config_digest == cfg.digest()
        assert verify_header_digest(loaded) is True

    def test_format_shape(self, make_config):
        text = event_log_to_text(run_experiment(make_config(n_trials=3)))
        lines = text.splitlines()
        assert lines[0] == "# bellsim event log v1"
        assert any(line.startswith("# config_digest = ") for line in lines)
        header_at = lines.index("trial,a_set,b_set,a_out,b_out,valid")
        first = lines[header_at + 1].split(",")
        assert first[0] == "0"
        assert first[3] in ("+1", "-1", "0")
        assert first[5] in ("ok", "dbl")

    def test_tampered_header_detected(self, make_config):
        log = run_experiment(make_config(n_trials=10))
        log.header["visibility"] = "0.5"
        assert verify_header_digest(log) is False

    def test_no_digest_returns_none(self):
        log = parse_event_log("trial,a_set,b_set,a_out,b_out,valid\n0,0,0,+1,-1,ok\n")
        assert verify_header_digest(log) is None

    def test_records_accessor(self, make_config):
        log = run_experiment(make_config(n_trials=5))
        records = list(log.iter_records())
        assert len(records) == 5
        assert records[3].trial_id == 3
        assert records[3].alice_setting_index == int(log.a_set[3])
        assert records[3].validity in ("ok", "double_fire")

    @pytest.mark.parametrize(
        "body, fragment",
        [
            ("0,0,0,+1,-1,ok\n0,0,0,+1,-1,ok\n", "trial ids"),
            ("0,0,0,+1,-1\n", "6 fields"),
            ("0,0,2,+1,-1,ok\n", "setting"),
            ("0,0,0,+2,-1,ok\n", "outcomes"),
            ("0,0,0,+1,-1,what\n", "validity"),
            ("zero,0,0,+1,-1,ok\n", "invalid literal"),
        ],
    )
    def test_malformed_records_name_the_line(self, body, fragment):
        text = "trial,a_set,b_set,a_out,b_out,valid\n" + body
        with pytest.raises(LogParseError) as err:
            parse_event_log(text)
        message = str(err.value)
        assert fragment in message
        assert "line" in message

    def test_empty_file_rejected(self):
        with pytest.raises(LogParseError):
            parse_event_log("")

    def test_missing_file_rejected(self, tmp_path):
        with pytest.raises(LogParseError):
            read_event_log(tmp_path / "nope.csv")

    def test_trailing_newline_tolerated(self, make_config, tmp_path):
        path = tmp_path / "run.csv"
        log = run_experiment(make_config(n_trials=7))
        path.write_text(event_log_to_text(log) + "\n")
        assert logs_equal(log, read_event_log(path))


class TestEventLogStructure:
    def test_header_embeds_full_config(self, make_config):
        cfg = make_config(n_trials=10)
        log = run_experiment(cfg)
        assert log.header["model"] == "quantum"
        assert log.header["n_trials"] == "10"
        assert log.header["seed"] == str(cfg.seed)

    def test_n_trials_matches_length(self, make_config):
        assert len(run_experiment(make_config(n_trials=1234))) == 1234
