"""CLI harness tests: subcommands, exit codes, env overrides, output shapes."""

import json

import pytest

from motmalin.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, EXIT_VERIFY, main, resolve_port
from motmalin.session import SessionConfig


@pytest.fixture
def grid_file(tmp_path):
    path = tmp_path / "grid.yaml"
    path.write_text(
        "columns: [dog, teacher, water, music]\nrows: [house, fire, tree, ball]\n",
        encoding="utf-8",
    )
    return str(path)


class TestUsage:
    def test_no_subcommand_is_usage_error(self, capsys):
        assert main([]) == EXIT_USAGE
        capsys.readouterr()

    def test_unknown_subcommand_is_usage_error(self, capsys):
        assert main(["conquer"]) == EXIT_USAGE
        capsys.readouterr()

    def test_help_exits_cleanly(self, capsys):
        assert main(["--help"]) == EXIT_OK
        assert "serve" in capsys.readouterr().out


class TestSolve:
    def test_ranked_table(self, capsys, lexicon_file, grid_file):
        code = main(["solve", "--embeddings", str(lexicon_file), "--grid", grid_file, "coach"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert len(lines) == 16
        assert lines[0].startswith("B4 0.70711")
        for line in lines:
            label, score, prob = line.split()
            assert 0.0 <= float(prob) <= 1.0

    def test_oov_banner_and_uniform_lines(self, capsys, lexicon_file, grid_file):
        code = main(["solve", "--embeddings", str(lexicon_file), "--grid", grid_file, "zzz"])
        assert code == EXIT_OK
        lines = capsys.readouterr().out.strip().splitlines()
        assert "OOV" in lines[0]
        assert len(lines) == 17
        assert all(line.endswith("0.06250") for line in lines[1:])

    def test_packaged_demo_data_is_the_default(self, capsys):
        assert main(["solve", "coach"]) == EXIT_OK
        assert capsys.readouterr().out.startswith("B4 0.70711")

    def test_missing_grid_file(self, capsys, lexicon_file):
        code = main(["solve", "--embeddings", str(lexicon_file), "--grid", "/nope.yaml", "coach"])
        assert code == EXIT_DATA
        assert "MissingFile" in capsys.readouterr().err

    def test_missing_embeddings(self, capsys, grid_file):
        code = main(["solve", "--embeddings", "/nope.txt", "--grid", grid_file, "coach"])
        assert code == EXIT_DATA
        capsys.readouterr()


class TestClue:
    def test_best_clue_for_cell(self, capsys, lexicon_file, grid_file):
        code = main(["clue", "--embeddings", str(lexicon_file), "--grid", grid_file, "B4"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert out.startswith("coach 0.70711")

    def test_gate_blocked_cell_reports_no_clue(self, capsys, lexicon_file, grid_file):
        code = main(["clue", "--embeddings", str(lexicon_file), "--grid", grid_file, "A1"])
        assert code == EXIT_OK
        assert "no clue" in capsys.readouterr().out

    def test_bad_cell_label(self, capsys, lexicon_file, grid_file):
        code = main(["clue", "--embeddings", str(lexicon_file), "--grid", grid_file, "E9"])
        assert code == EXIT_DATA
        capsys.readouterr()


class TestSelfplay:
    def test_report_shape(self, capsys):
        assert main(["selfplay", "--n", "3", "--seed", "5"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report["games"] == 3
        assert report["successRate"] == 1.0
        assert report["meanRounds"] == 16.0
        assert [g["seed"] for g in report["perGame"]] == [5, 6, 7]
        assert all(g["rounds"] == 16 for g in report["perGame"])

    def test_zero_games(self, capsys):
        assert main(["selfplay", "--n", "0"]) == EXIT_OK
        report = json.loads(capsys.readouterr().out)
        assert report == {"games": 0, "successRate": 0.0, "meanRounds": 0.0, "perGame": []}

    def test_byte_identical_reports(self, capsys):
        main(["selfplay", "--n", "2", "--seed", "3"])
        first = capsys.readouterr().out
        main(["selfplay", "--n", "2", "--seed", "3"])
        assert capsys.readouterr().out == first

    def test_logs_written_and_verifiable(self, tmp_path, capsys):
        logs = tmp_path / "logs"
        assert main(["selfplay", "--n", "2", "--seed", "0", "--log-dir", str(logs)]) == EXIT_OK
        capsys.readouterr()
        files = sorted(logs.glob("*.jsonl"))
        assert len(files) == 2
        for path in files:
            assert main(["replay-verify", str(path)]) == EXIT_OK
            assert capsys.readouterr().out.startswith("ok: 16 rounds")

    def test_env_log_dir(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("MOTMALIN_LOG_DIR", str(tmp_path / "env_logs"))
        assert main(["selfplay", "--n", "1"]) == EXIT_OK
        capsys.readouterr()
        assert len(list((tmp_path / "env_logs").glob("*.jsonl"))) == 1

    def test_flag_beats_env_log_dir(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("MOTMALIN_LOG_DIR", str(tmp_path / "env_logs"))
        assert main(["selfplay", "--n", "1", "--log-dir", str(tmp_path / "flag_logs")]) == EXIT_OK
        capsys.readouterr()
        assert not (tmp_path / "env_logs").exists()
        assert len(list((tmp_path / "flag_logs").glob("*.jsonl"))) == 1


class TestReplayVerify:
    @pytest.fixture
    def finished_log(self, tmp_path, capsys):
        logs = tmp_path / "logs"
        main(["selfplay", "--n", "1", "--seed", "4", "--log-dir", str(logs)])
        capsys.readouterr()
        return next(logs.glob("*.jsonl"))

    def test_valid_log_passes(self, finished_log, capsys):
        assert main(["replay-verify", str(finished_log)]) == EXIT_OK
        assert "digest" in capsys.readouterr().out

    def test_gapped_log_fails(self, finished_log, capsys):
        lines = finished_log.read_text(encoding="utf-8").splitlines()
        del lines[5]
        finished_log.write_text("\n".join(lines) + "\n", encoding="utf-8")
        assert main(["replay-verify", str(finished_log)]) == EXIT_VERIFY
        assert "SeqGap" in capsys.readouterr().err

    def test_tampered_payload_fails(self, finished_log, capsys):
        lines = finished_log.read_text(encoding="utf-8").splitlines()
        victim = next(i for i, l in enumerate(lines) if '"CellSelected"' in l)
        record = json.loads(lines[victim])
        record["payload"]["cell"] = "Z9"
        lines[victim] = json.dumps(record, separators=(",", ":"))
        finished_log.write_text("\n".join(lines) + "\n", encoding="utf-8")
        assert main(["replay-verify", str(finished_log)]) == EXIT_VERIFY
        err = capsys.readouterr().err
        assert "CorruptRecord" in err and str(victim + 1) in err

    def test_digest_mismatch_fails(self, finished_log, capsys):
        lines = finished_log.read_text(encoding="utf-8").splitlines()
        record = json.loads(lines[-1])
        assert record["type"] == "FinalDigest"
        record["payload"]["digest"] = "0" * 64
        lines[-1] = json.dumps(record, separators=(",", ":"))
        finished_log.write_text("\n".join(lines) + "\n", encoding="utf-8")
        assert main(["replay-verify", str(finished_log)]) == EXIT_VERIFY
        assert "DigestMismatch" in capsys.readouterr().err

    def test_missing_file_is_data_error(self, capsys):
        assert main(["replay-verify", "/nonexistent.jsonl"]) == EXIT_DATA
        capsys.readouterr()


class TestConfigPrecedence:
    def test_port_flag_beats_env_beats_config(self, monkeypatch):
        config = SessionConfig(port=9100)
        assert resolve_port(None, config) == 9100
        monkeypatch.setenv("MOTMALIN_PORT", "9200")
        assert resolve_port(None, config) == 9200
        assert resolve_port(9300, config) == 9300

    def test_config_file_feeds_selfplay(self, tmp_path, capsys):
        path = tmp_path / "session.yaml"
        path.write_text("condition: agents_only\nsessionId: batch\n", encoding="utf-8")
        assert main(["selfplay", "--n", "1", "--config", str(path)]) == EXIT_OK
        assert json.loads(capsys.readouterr().out)["games"] == 1

    def test_bad_config_is_data_error(self, tmp_path, capsys):
        path = tmp_path / "session.yaml"
        path.write_text("condition: nonsense\n", encoding="utf-8")
        assert main(["selfplay", "--n", "1", "--config", str(path)]) == EXIT_DATA
        assert "BadConfig" in capsys.readouterr().err
