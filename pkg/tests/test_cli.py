import json
from pathlib import Path

import pytest

from mmwsched.cli import (
    EXIT_INFEASIBLE,
    EXIT_IO,
    EXIT_MALFORMED,
    EXIT_MISSING_CONFIG,
    EXIT_OK,
    EXIT_SCHEMA,
    config_from_dict,
    config_to_dict,
    main,
    parse_config,
)


def _write(tmp_path: Path, doc: dict, name="config.json") -> Path:
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


FAST = {
    "scheduler": {"kind": "is"},
    "seed": 1,
    "n_slots": 3,
}


class TestParseConfig:
    def test_minimal_config_fills_table_defaults(self, tmp_path):
        cfg = parse_config(_write(tmp_path, {"scheduler": {"kind": "is"}, "seed": 1}))
        assert cfg.room.length_m == 20.0 and cfg.room.width_m == 10.0
        assert cfg.room.height_m == 4.0 and cfg.room.ue_height_m == 1.0
        assert cfg.resolved_ap_positions().shape == (6, 3)
        assert cfg.resolved_active() == tuple(range(6))
        assert cfg.resolved_n_ues() == 40
        assert cfg.az_beamwidth_deg == 30.0
        assert cfg.channel.tx_power_dbm == 10.0
        assert cfg.channel.block_prob == 0.5
        assert cfg.radio.bandwidth_hz == 2.16e9
        assert cfg.radio.bw_efficiency == 0.6
        assert cfg.radio.snr_efficiency == 1.0
        assert cfg.n_slots == 500
        assert cfg.seed == 1

    def test_unknown_key_named_in_error(self, tmp_path):
        path = _write(tmp_path, {"codebook": {"beam_widthh": 30}})
        with pytest.raises(Exception) as err:
            parse_config(path)
        assert "beam_widthh" in str(err.value)

    def test_table_one_transcription(self, tmp_path):
        doc = {
            "room": {"length_m": 20, "width_m": 10, "height_m": 4, "ue_height_m": 1},
            "users": {"density_per_m2": 0.2},
            "channel": {"tx_power_dbm": 10, "block_prob": 0.5},
            "codebook": {"az_beamwidth_deg": 30},
            "radio": {"bandwidth_hz": 2.16e9, "bw_efficiency": 0.6, "snr_efficiency": 1},
            "scheduler": {"kind": "is", "delta_th": 0.1},
            "seed": 0,
        }
        cfg = parse_config(_write(tmp_path, doc))
        assert cfg.resolved_n_ues() == 40
        assert len(cfg.resolved_active()) == 6
        assert cfg.channel.tx_power_dbm == 10.0
        assert cfg.az_beamwidth_deg == 30.0
        assert cfg.radio.bandwidth_hz == 2.16e9
        assert cfg.scheduler.delta_th == 0.1

    def test_echo_round_trips(self, tmp_path):
        cfg = parse_config(_write(tmp_path, FAST))
        echo = config_to_dict(cfg)
        again = config_from_dict(json.loads(json.dumps(echo)))
        assert config_to_dict(again) == echo

    def test_bad_scheduler_kind(self, tmp_path):
        path = _write(tmp_path, {"scheduler": {"kind": "fancy"}})
        with pytest.raises(Exception) as err:
            parse_config(path)
        assert "fancy" in str(err.value)


class TestExitCodes:
    def test_missing_config(self, tmp_path, capsys):
        code = main(["run", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")])
        assert code == EXIT_MISSING_CONFIG

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        code = main(["run", "--config", str(path), "--out", str(tmp_path / "o")])
        assert code == EXIT_MALFORMED

    def test_schema_violation(self, tmp_path, capsys):
        path = _write(tmp_path, {"codebook": {"beam_widthh": 30}})
        code = main(["validate", "--config", str(path)])
        assert code == EXIT_SCHEMA
        assert "beam_widthh" in capsys.readouterr().err

    def test_infeasible_scenario(self, tmp_path):
        doc = dict(FAST)
        doc["users"] = {
            "positions": [[1.0, 1.0, 1.0], [2.0, 1.0, 1.0], [3.0, 1.0, 1.0],
                          [4.0, 1.0, 1.0], [5.0, 1.0, 1.0]]
        }
        path = _write(tmp_path, doc)
        code = main(["validate", "--config", str(path)])
        assert code == EXIT_INFEASIBLE

    def test_unwritable_out_dir(self, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("")
        code = main(
            ["run", "--config", str(_write(tmp_path, FAST)), "--out", str(blocker / "sub")]
        )
        assert code == EXIT_IO

    def test_ok(self, tmp_path):
        code = main(
            ["run", "--config", str(_write(tmp_path, FAST)), "--out", str(tmp_path / "o")]
        )
        assert code == EXIT_OK


class TestRunCommand:
    def test_outputs_written(self, tmp_path):
        out = tmp_path / "out"
        assert main(["run", "--config", str(_write(tmp_path, FAST)), "--out", str(out)]) == 0
        summary = (out / "summary.csv").read_text().splitlines()
        assert summary[0].startswith("scheduler,m_active,n_ues,density_per_m2,seed")
        assert len(summary) == 2
        assert summary[1].startswith("is,6,40,0.2,1,")
        run_doc = json.loads((out / "run-is-seed1.json").read_text())
        assert run_doc["config"]["seed"] == 1
        assert run_doc["metrics"]["total_rate_gbps"] > 0
        assert "trace" not in run_doc

    def test_rerun_byte_identical(self, tmp_path):
        cfg = _write(tmp_path, FAST)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        main(["run", "--config", str(cfg), "--out", str(out_a)])
        main(["run", "--config", str(cfg), "--out", str(out_b)])
        assert (out_a / "summary.csv").read_bytes() == (out_b / "summary.csv").read_bytes()
        assert (out_a / "run-is-seed1.json").read_bytes() == (
            out_b / "run-is-seed1.json"
        ).read_bytes()

    def test_seed_and_scheduler_overrides(self, tmp_path):
        out = tmp_path / "o"
        main(
            ["run", "--config", str(_write(tmp_path, FAST)), "--out", str(out),
             "--seed", "9", "--scheduler", "conv"]
        )
        assert (out / "run-conv-seed9.json").exists()

    def test_trace_flag(self, tmp_path):
        out = tmp_path / "o"
        main(["run", "--config", str(_write(tmp_path, FAST)), "--out", str(out), "--trace"])
        doc = json.loads((out / "run-is-seed1.json").read_text())
        assert len(doc["trace"]) == 3


class TestSweepCommands:
    def test_sweep_aps_plot_shape(self, tmp_path):
        # Four counts, three schedulers; tiny budget makes every ES cell NA.
        doc = dict(FAST)
        doc["n_slots"] = 2
        doc["es_budget"] = 1000
        out = tmp_path / "out"
        code = main(
            ["sweep-aps", "--config", str(_write(tmp_path, doc)), "--out", str(out),
             "--counts", "1,2,3,4"]
        )
        assert code == EXIT_OK
        lines = (out / "plot-rate.csv").read_text().splitlines()
        assert lines[0] == "aps,conv,es,is"
        assert len(lines) == 5
        for line in lines[1:]:
            cells = line.split(",")
            assert len(cells) == 4
            assert cells[2] == "NA"
        notes = (out / "infeasible-notes.txt").read_text()
        assert "es" in notes and "exceeds" in notes
        assert (out / "plot-complexity.csv").exists()

    def test_sweep_density_outputs(self, tmp_path):
        doc = dict(FAST)
        doc["n_slots"] = 2
        out = tmp_path / "out"
        code = main(
            ["sweep-density", "--config", str(_write(tmp_path, doc)), "--out", str(out),
             "--densities", "0.2,0.5", "--scheduler", "conv", "--scheduler", "is"]
        )
        assert code == EXIT_OK
        lines = (out / "plot-rate.csv").read_text().splitlines()
        assert lines[0] == "density,conv,is"
        assert len(lines) == 3
        assert not (out / "plot-complexity.csv").exists()
        summary = (out / "summary.csv").read_text().splitlines()
        assert len(summary) == 5

    def test_sweep_deterministic(self, tmp_path):
        doc = dict(FAST)
        doc["n_slots"] = 2
        cfg = _write(tmp_path, doc)
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        for out in (out_a, out_b):
            main(
                ["sweep-density", "--config", str(cfg), "--out", str(out),
                 "--densities", "0.2", "--scheduler", "is"]
            )
        assert (out_a / "summary.csv").read_bytes() == (out_b / "summary.csv").read_bytes()
        assert (out_a / "plot-rate.csv").read_bytes() == (out_b / "plot-rate.csv").read_bytes()


class TestCompareCommand:
    def test_two_schedulers_with_ratios(self, tmp_path):
        doc = dict(FAST)
        doc["n_slots"] = 3
        doc["aps"] = {"active": [0, 1]}
        out = tmp_path / "out"
        code = main(
            ["compare", "--config", str(_write(tmp_path, doc)), "--out", str(out),
             "--scheduler", "is", "--scheduler", "conv", "--num-seeds", "2"]
        )
        assert code == EXIT_OK
        content = (out / "compare.csv").read_text()
        assert "mean:is" in content and "mean:conv" in content
        assert "ratio:is/conv" in content
        summary = (out / "summary.csv").read_text().splitlines()
        assert len(summary) == 5  # header + 2 schedulers x 2 seeds

    def test_single_scheduler_no_ratios(self, tmp_path):
        out = tmp_path / "out"
        main(
            ["compare", "--config", str(_write(tmp_path, FAST)), "--out", str(out),
             "--scheduler", "is", "--num-seeds", "1"]
        )
        content = (out / "compare.csv").read_text()
        assert "ratio:" not in content


class TestValidateCommand:
    def test_echo_resolved_defaults(self, tmp_path, capsys):
        code = main(["validate", "--config", str(_write(tmp_path, {"seed": 4}))])
        assert code == EXIT_OK
        echo = json.loads(capsys.readouterr().out)
        assert echo["seed"] == 4
        assert len(echo["aps"]["positions"]) == 6
        assert echo["aps"]["active"] == [0, 1, 2, 3, 4, 5]
        assert echo["users"] == {"density_per_m2": 0.2}
        assert echo["channel"]["block_prob"] == 0.5
        assert echo["n_slots"] == 500
