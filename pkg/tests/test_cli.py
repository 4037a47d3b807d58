import json
import subprocess
import sys

import pytest

from nilmknn.cli import main
from nilmknn.preprocess import read_dataset


@pytest.fixture
def house(tmp_path):
    out = tmp_path / "house_1"
    assert main(["synth", "--out", str(out), "--n-samples", "6000", "--seed", "3"]) == 0
    return out


def test_ingest_json(house, capsys):
    assert main(["ingest", "--house-dir", str(house), "--format", "json"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary[0]["house"] == str(house)
    assert [c["name"] for c in summary[0]["channels"]][0] == "bath_gfi"
    assert all(c["samples"] == 6000 for c in summary[0]["channels"])


def test_windows_writes_csv(house, tmp_path):
    out = tmp_path / "ds.csv"
    assert main(["windows", "--house-dir", str(house), "--all-channels", "--window-len", "25", "--out", str(out)]) == 0
    ds = read_dataset(out)
    assert ds.window_len == 25
    assert len(ds.class_names) == 7


def test_eval_with_config_and_overrides(house, tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({
        "house_dirs": [str(house)],
        "channel_selection": {"oven": [[0, 6]], "electronics": [[0, 2]], "microwave": [["house_1", 5]]},
        "k": 3,
        "format": "text",
    }))
    assert main(["eval", "--config", str(cfg), "--format", "json", "--seed", "4"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["class_names"] == ["electronics", "microwave", "oven"]
    assert report["macro_f"] == 1.0


def test_eval_deterministic_output_file(house, tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        assert main(["eval", "--house-dir", str(house), "--all-channels", "--out", str(path)]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_exit_code_config_error(house, capsys):
    assert main(["eval", "--house-dir", str(house), "--all-channels", "--train-frac", "1.5"]) == 1
    assert "train_frac" in capsys.readouterr().err


def test_exit_code_empty_selection(house):
    assert main(["eval", "--house-dir", str(house)]) == 1


def test_exit_code_parse_error(tmp_path, capsys):
    (tmp_path / "labels.dat").write_text("1 oven\n")
    (tmp_path / "channel_1.dat").write_text("1 2\n0 3\n")
    assert main(["ingest", "--house-dir", str(tmp_path)]) == 2
    assert "channel_1.dat" in capsys.readouterr().err


def test_warnings_go_to_stderr(tmp_path):
    from nilmknn.synth import DEFAULT_PROFILES, generate_corpus

    house = generate_corpus(DEFAULT_PROFILES, 6000, 3, tmp_path / "h")
    (house / "channel_99.dat").write_text("1 2\n")
    proc = subprocess.run(
        [sys.executable, "-m", "nilmknn", "eval", "--house-dir", str(house), "--all-channels", "--k", "4"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    json.loads(proc.stdout)
    assert "channel 99" in proc.stderr
    assert "even" in proc.stderr
    assert "warn" not in proc.stdout.lower()


def test_synth_dump_profiles(capsys):
    assert main(["synth", "--dump-profiles"]) == 0
    assert len(json.loads(capsys.readouterr().out)) == 7
