import json

import pytest

from timebin_cavity import cli
from timebin_cavity.cli import (
    ExperimentConfig,
    SweepRow,
    SWEEP_COLUMNS,
    TRADEOFF_COLUMNS,
    compute_sweep,
    emit_csv,
    emit_json,
    main,
    parse_r_grid,
    parse_sweep,
    parse_tradeoff,
)


def run_cli(*argv):
    return main(list(argv))


class TestParsing:
    def test_colon_grid(self):
        grid = parse_r_grid("0.5:0.9:0.1")
        assert grid == pytest.approx([0.5, 0.6, 0.7, 0.8, 0.9])

    def test_single_value_grid(self):
        assert parse_r_grid("0.25") == [0.25]

    def test_comma_grid(self):
        assert parse_r_grid("0.1,0.4") == [0.1, 0.4]

    def test_bad_grid(self):
        with pytest.raises(cli.UsageError):
            parse_r_grid("0.9:0.5:0.1")

    def test_n_prime_single_and_list(self):
        assert cli.parse_n_prime("32") == 32
        assert cli.parse_n_prime("21,36,66") == [21, 36, 66]


class TestConfigResolution:
    def test_window_defaults_to_four_frames(self):
        cfg = ExperimentConfig(d=8).resolved()
        assert cfg.n_prime == 32

    @pytest.mark.parametrize(
        "kwargs,match",
        [
            (dict(d=1), "d must be"),
            (dict(r_grid=[1.0]), "r_grid"),
            (dict(eta=1.5), "eta"),
            (dict(p_dc=1.0), "p_dc"),
            (dict(n_trials=0), "trials"),
            (dict(output_format="xml"), "format"),
            (dict(n_prime=4, d=8), "n_prime"),
            (dict(k=9, d=8), "k"),
        ],
    )
    def test_validation(self, kwargs, match):
        with pytest.raises(cli.UsageError, match=match):
            ExperimentConfig(**kwargs).resolved()


class TestRoundTrip:
    def test_csv_round_trips_exactly(self):
        config = ExperimentConfig(d=4, r_grid=[0.3, 0.77], n_prime=12).resolved()
        rows = compute_sweep(config)
        parsed = parse_sweep(emit_csv(rows, SWEEP_COLUMNS), "csv")
        assert parsed == rows

    def test_json_round_trips_exactly(self):
        config = ExperimentConfig(d=4, r_grid=[0.3, 0.77], n_prime=12).resolved()
        rows = compute_sweep(config)
        parsed = parse_sweep(emit_json(rows, SWEEP_COLUMNS), "json")
        assert parsed == rows

    def test_csv_header_is_the_documented_column_order(self):
        text = emit_csv([], SWEEP_COLUMNS)
        assert text.splitlines()[0] == (
            "r_sq,p_e_analytic,p_e_closed_form,p_d2,p_e_observed,accepted_probability"
        )

    @pytest.mark.parametrize("fmt", ["csv", "json"])
    def test_tradeoff_round_trips_exactly(self, fmt):
        config = ExperimentConfig(
            d=4, r_grid=[0.8], p_dc=1e-4, n_prime_values=[4, 8, 16]
        ).resolved()
        rows = cli.compute_tradeoff(config)
        emit = emit_csv if fmt == "csv" else emit_json
        assert parse_tradeoff(emit(rows, TRADEOFF_COLUMNS), fmt) == rows


class TestMubVerify:
    def test_pass(self, capsys):
        assert run_cli("mub-verify", "--d", "16") == 0
        assert "pass" in capsys.readouterr().out

    def test_invalid_dimension_is_usage_error(self, capsys):
        assert run_cli("mub-verify", "--d", "0") == 1
        assert "error" in capsys.readouterr().err

    def test_detected_violation_exits_two(self, monkeypatch, capsys):
        monkeypatch.setattr(cli, "verify_mub", lambda d: 1e-6)
        assert run_cli("mub-verify", "--d", "4") == 2
        assert "FAIL" in capsys.readouterr().out


class TestErrorSweep:
    def test_writes_csv_with_decreasing_error(self, tmp_path):
        out = tmp_path / "sweep.csv"
        code = run_cli(
            "error-sweep",
            "--d", "16",
            "--r-grid", "0.5:0.9:0.1",
            "--n-prime", "40",
            "--out", str(out),
        )
        assert code == 0
        rows = parse_sweep(out.read_text(), "csv")
        assert len(rows) == 5
        p_e = [row.p_e_analytic for row in rows]
        assert all(b < a for a, b in zip(p_e, p_e[1:]))
        p_d2 = [row.p_d2 for row in rows]
        assert all(b < a for a, b in zip(p_d2, p_d2[1:]))

    def test_reruns_are_byte_identical(self, tmp_path):
        args = [
            "error-sweep", "--d", "4", "--r-grid", "0.2:0.8:0.2",
            "--n-prime", "12", "--format", "json",
        ]
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert run_cli(*args, "--out", str(first)) == 0
        assert run_cli(*args, "--out", str(second)) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_single_point_grid(self, tmp_path):
        out = tmp_path / "one.csv"
        assert run_cli(
            "error-sweep", "--d", "4", "--r-grid", "0.5", "--out", str(out)
        ) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 2

    def test_larger_dimension_has_larger_error(self, tmp_path):
        rows = {}
        for d in (16, 64):
            out = tmp_path / f"d{d}.csv"
            assert run_cli(
                "error-sweep", "--d", str(d), "--r-grid", "0.9",
                "--n-prime", str(2 * d), "--out", str(out),
            ) == 0
            rows[d] = parse_sweep(out.read_text(), "csv")[0]
        assert rows[64].p_e_analytic > rows[16].p_e_analytic

    def test_brute_force_and_closed_form_columns_agree(self, tmp_path):
        out = tmp_path / "sweep.csv"
        assert run_cli(
            "error-sweep", "--d", "8", "--r-grid", "0:0.9:0.15", "--out", str(out)
        ) == 0
        for row in parse_sweep(out.read_text(), "csv"):
            assert abs(row.p_e_analytic - row.p_e_closed_form) < 1e-10

    def test_closed_form_disagreement_exits_two(self, monkeypatch, capsys):
        monkeypatch.setattr(cli, "total_error_closed_form", lambda r, d: 0.5)
        assert run_cli("error-sweep", "--d", "4", "--r-grid", "0.3") == 2
        assert "invariant" in capsys.readouterr().err

    def test_unwritable_output_path(self, tmp_path):
        target = tmp_path / "missing-dir" / "sweep.csv"
        assert run_cli(
            "error-sweep", "--d", "4", "--r-grid", "0.5", "--out", str(target)
        ) == 1

    def test_stdout_when_no_output_path(self, capsys):
        assert run_cli("error-sweep", "--d", "4", "--r-grid", "0.5") == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].startswith("r_sq,")


class TestDiscriminate:
    def test_report_is_reproducible(self, tmp_path):
        args = [
            "discriminate", "--d", "2", "--r-grid", "0.5",
            "--n-prime", "4", "--trials", "20000", "--seed", "7",
        ]
        first, second = tmp_path / "a.json", tmp_path / "b.json"
        assert run_cli(*args, "--out", str(first)) == 0
        assert run_cli(*args, "--out", str(second)) == 0
        assert first.read_bytes() == second.read_bytes()

    def test_report_contents(self, tmp_path):
        out = tmp_path / "report.json"
        assert run_cli(
            "discriminate", "--d", "2", "--r-grid", "0.5",
            "--n-prime", "4", "--trials", "50000", "--seed", "3",
            "--out", str(out),
        ) == 0
        report = json.loads(out.read_text())
        assert report["d"] == 2
        assert len(report["settings"]) == 2
        assert abs(report["p_e_empirical"] - 0.1) < 0.02
        assert abs(report["p_e_z_score"]) < 5.0
        for entry in report["settings"]:
            assert abs(entry["z"]) < 5.0

    def test_zero_trials_is_usage_error(self, capsys):
        code = run_cli(
            "discriminate", "--d", "2", "--r-grid", "0.5", "--trials", "0"
        )
        assert code == 1
        assert "trials" in capsys.readouterr().err


class TestTradeoff:
    def test_clean_detectors_constant_error_column(self, tmp_path):
        out = tmp_path / "t.csv"
        assert run_cli(
            "tradeoff", "--d", "8", "--r-grid", "0.9",
            "--n-prime", "8,16,32", "--out", str(out),
        ) == 0
        rows = parse_tradeoff(out.read_text(), "csv")
        errors = [row.observed_error for row in rows]
        assert max(errors) - min(errors) < 1e-12
        accepted = [row.accepted_probability for row in rows]
        assert accepted[0] < accepted[1] < accepted[2]

    def test_dark_counts_penalize_long_windows(self, tmp_path):
        out = tmp_path / "t.json"
        assert run_cli(
            "tradeoff", "--d", "16", "--r-grid", "0.99", "--p-dc", "1e-5",
            "--n-prime", "21,36,66", "--format", "json", "--out", str(out),
        ) == 0
        rows = parse_tradeoff(out.read_text(), "json")
        assert rows[0].observed_error < rows[1].observed_error < rows[2].observed_error

    def test_missing_cutoff_list_is_usage_error(self, capsys):
        assert run_cli("tradeoff", "--d", "8", "--r-grid", "0.9") == 1
        assert "cutoff" in capsys.readouterr().err

    def test_cutoff_before_window_is_usage_error(self):
        assert run_cli(
            "tradeoff", "--d", "8", "--r-grid", "0.9", "--n-prime", "4,16"
        ) == 1


class TestDefaults:
    def test_prints_every_config_key(self, capsys):
        assert run_cli("defaults") == 0
        payload = json.loads(capsys.readouterr().out)
        assert set(payload) == {
            "d", "r_grid", "k", "theta", "n_prime", "n_prime_values",
            "eta", "p_dc", "n_trials", "master_seed",
            "output_path", "output_format",
        }


class TestConfigFile:
    def test_file_values_are_used(self, tmp_path, capsys):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"d": 4, "r_grid": [0.5], "n_prime": 12}))
        assert run_cli("error-sweep", "--config", str(path)) == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 2

    def test_flags_override_file(self, tmp_path, capsys):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"d": 4, "r_grid": [0.5, 0.6], "n_prime": 12}))
        assert run_cli("error-sweep", "--config", str(path), "--r-grid", "0.7") == 0
        lines = capsys.readouterr().out.splitlines()
        assert len(lines) == 2
        assert float(lines[1].split(",")[0]) == 0.7

    def test_unknown_keys_rejected(self, tmp_path):
        path = tmp_path / "config.json"
        path.write_text(json.dumps({"dd": 4}))
        assert run_cli("error-sweep", "--config", str(path)) == 1

    def test_missing_file_rejected(self):
        assert run_cli("error-sweep", "--config", "/nonexistent.json") == 1

    def test_bad_flag_exits_one(self):
        assert run_cli("error-sweep", "--bogus") == 1


def test_tradeoff_columns_constant():
    assert TRADEOFF_COLUMNS == ("n_prime", "observed_error", "accepted_probability")


def test_sweep_row_field_order_matches_contract():
    assert SWEEP_COLUMNS == (
        "r_sq",
        "p_e_analytic",
        "p_e_closed_form",
        "p_d2",
        "p_e_observed",
        "accepted_probability",
    )
