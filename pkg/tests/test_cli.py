import dataclasses
import json
import subprocess
import sys

import pytest

from tactile_bci.cli import main
from tactile_bci.session_io import load_session, save_session

HIGH = ["--set", "target_amplitude=5", "--set", "background_rms=0.5"]


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


@pytest.fixture(scope="module")
def calibrated(tmp_path_factory):
    """A high-SNR model file shared by the run/evaluate/replay tests."""
    d = tmp_path_factory.mktemp("cal")
    model = d / "model.json"
    assert main(["calibrate", "--seed", "3", *HIGH, "--model", str(model),
                 "--out", str(d / "cal.jsonl")]) == 0
    return model


def test_calibrate_defaults(workdir, capsys):
    assert main(["calibrate"]) == 0
    out = capsys.readouterr().out
    assert "epochs: 540 (target 90 / nontarget 450), features: 160" in out
    assert "training accuracy:" in out
    assert (workdir / "model.json").is_file()
    assert (workdir / "calibration.jsonl").is_file()


def test_calibrate_is_deterministic(workdir):
    main(["calibrate", "--seed", "7", "--model", "a.json", "--out", "a.jsonl"])
    main(["calibrate", "--seed", "7", "--model", "b.json", "--out", "b.jsonl"])
    assert (workdir / "a.json").read_bytes() == (workdir / "b.json").read_bytes()


def test_bad_config_names_key(workdir, capsys):
    (workdir / "bad.json").write_text(json.dumps({"notch": [52, 48]}))
    assert main(["calibrate", "--config", "bad.json"]) == 2
    assert "notch" in capsys.readouterr().err


def test_bad_override_names_key(workdir, capsys):
    assert main(["calibrate", "--set", "bogus=1"]) == 2
    assert "bogus" in capsys.readouterr().err


def test_unknown_subcommand_is_usage_error():
    assert main(["fly"]) == 2


def test_run_high_snr_succeeds(workdir, calibrated, capsys):
    code = main(["run", "--seed", "3", *HIGH, "--model", str(calibrated)])
    out = capsys.readouterr().out
    assert code == 0
    assert "task: SUCCESS in 6 selections" in out
    assert "accuracy: 100.0% (6/6)" in out
    record = load_session(workdir / "online.jsonl")
    assert len(record.selections) == 6
    assert record.robot_trace[-1].task_done


def test_run_zero_snr_reports_near_chance(workdir, calibrated, capsys):
    (workdir / "intents.json").write_text(json.dumps([i % 6 for i in range(60)]))
    main(["run", "--seed", "4", "--set", "target_amplitude=0", "--model", str(calibrated),
          "--intents", "intents.json"])
    out = capsys.readouterr().out
    line = next(l for l in out.splitlines() if l.startswith("accuracy:"))
    correct = int(line.split("(")[1].split("/")[0])
    assert correct <= 25


def test_run_missing_model(workdir, capsys):
    assert main(["run", "--model", "absent.json"]) == 2
    assert "absent.json" in capsys.readouterr().err


def test_intent_names_accepted(workdir, calibrated, capsys):
    (workdir / "intents.json").write_text(json.dumps(["right", "grasp"]))
    assert main(["run", "--seed", "3", *HIGH, "--model", str(calibrated),
                 "--intents", "intents.json"]) == 0


def test_evaluate_all_correct(workdir, calibrated, capsys):
    main(["run", "--seed", "3", *HIGH, "--model", str(calibrated), "--out", "s.jsonl"])
    capsys.readouterr()
    assert main(["evaluate", "s.jsonl"]) == 0
    out = capsys.readouterr().out
    assert "accuracy: 100.0%" in out
    assert "2.585 bits/selection" in out
    assert "confusion" in out


def test_replay_untouched_and_edited(workdir, calibrated, capsys):
    main(["run", "--seed", "3", *HIGH, "--model", str(calibrated), "--out", "s.jsonl"])
    capsys.readouterr()
    assert main(["replay", "s.jsonl"]) == 0
    assert capsys.readouterr().out.startswith("OK")

    record = load_session(workdir / "s.jsonl")
    sel = record.selections[2]
    scores = list(sel.command_scores)
    scores[0] += 0.25
    record.selections[2] = dataclasses.replace(sel, command_scores=tuple(scores))
    save_session(record, workdir / "edited.jsonl")
    assert main(["replay", "edited.jsonl"]) == 1
    out = capsys.readouterr().out
    assert out.startswith("MISMATCH")
    assert "selection 2" in out


def test_replay_missing_record(workdir):
    assert main(["replay", "nothing.jsonl"]) == 2


def test_sweep_cell_count(workdir, capsys):
    assert main(["sweep", "--amplitudes", "0,5", "--selections", "12", "--seed", "2"]) == 0
    rows = [json.loads(l) for l in (workdir / "sweep.jsonl").read_text().splitlines()]
    cells = [r for r in rows if r["record"] == "cell"]
    assert len(cells) == 2 * 3
    assert [(c["target_amplitude"], c["rounds"]) for c in cells] == [
        (0.0, 1), (0.0, 3), (0.0, 15), (5.0, 1), (5.0, 3), (5.0, 15)]
    assert all(c["n"] == 12 for c in cells)


def test_module_entry_point(workdir):
    proc = subprocess.run([sys.executable, "-m", "tactile_bci", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "calibrate" in proc.stdout
