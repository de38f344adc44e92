import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from element_analysis.cli import build_parser, main
from element_analysis.formats import read_events, read_pgm
from element_analysis.theory import ElementParams, zeta_max

DATA = Path(__file__).resolve().parents[1] / "src" / "element_analysis" / "data" / "e10yri_proxy.csv"


@pytest.fixture
def synth_csv(tmp_path):
    spec = tmp_path / "events.csv"
    spec.write_text("t,c_abs,c_phase,rho\n300,1.0,0.5,10\n700,0.8,-1.0,16\n")
    out = tmp_path / "series.csv"
    assert main(["synth", str(spec), "-o", str(out), "--length", "1024", "--noise-sigma", "0.02",
                 "--mc-trials", "50"]) == 0
    return out


def test_help_lists_commands_and_defaults(capsys):
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args(["--help"])
    assert exc.value.code == 0
    out = capsys.readouterr().out
    for cmd in ("analyze", "transform", "detect", "reconstruct", "filter", "synth", "theory"):
        assert cmd in out
    with pytest.raises(SystemExit):
        build_parser().parse_args(["analyze", "--help"])
    out = capsys.readouterr().out
    assert "default 3" in out and "--no-filter" in out and "--voxels-per-octave" in out


def test_theory_reference_values(capsys):
    assert main(["theory", "--beta", "3", "--mu", "1", "--gamma", "1"]) == 0
    values = dict(line.split("=") for line in capsys.readouterr().out.split())
    assert float(values["s_tilde_max"]) == pytest.approx(1.5)
    assert float(values["eta"]) == pytest.approx(0.03456, rel=1e-6)
    assert float(values["zeta_max"]) == pytest.approx(zeta_max(ElementParams(3, 1, 1)))
    assert float(values["frequency_factor"]) == pytest.approx(0.5)


def test_theory_kernel_dump(tmp_path):
    path = tmp_path / "k.csv"
    assert main(["theory", "--kernel-out", str(path), "--kernel-length", "128", "--kernel-scale", "4"]) == 0
    rows = np.loadtxt(path, delimiter=",", skiprows=1)
    assert rows.shape == (128, 4)
    assert rows[np.argmax(rows[:, 3]), 0] == 0


def test_staged_pipeline_matches_events(tmp_path, synth_csv):
    out = tmp_path / "o"
    common = ["--no-filter", "--mc-trials", "50"]
    assert main(["transform", str(synth_csv), "--out-dir", str(out), *common]) == 0
    assert main(["detect", str(out / "scalogram.npz"), "--out-dir", str(out), *common]) == 0
    events = read_events(out / "events.jsonl")
    assert [round(e.t_sample) for e in events] == [300, 700]
    assert events[0].c_abs == pytest.approx(1.0, rel=0.05)
    assert main(["reconstruct", str(out / "events.jsonl"), "--scalogram", str(out / "scalogram.npz"),
                 "--out-dir", str(out), *common]) == 0
    assert read_pgm(out / "element_scalogram.pgm").shape == read_pgm(out / "scalogram.pgm").shape


def test_filter_command(tmp_path, synth_csv):
    out = tmp_path / "f.csv"
    assert main(["filter", str(synth_csv), "-o", str(out), "--cutoff-period", "2m"]) == 0
    assert out.read_text().startswith("date,value\n2000-01-01")


def test_detect_rejects_mismatched_wavelet(tmp_path, synth_csv, capsys):
    out = tmp_path / "o"
    assert main(["transform", str(synth_csv), "--out-dir", str(out), "--no-filter"]) == 0
    assert main(["detect", str(out / "scalogram.npz"), "--out-dir", str(out), "--beta", "5"]) == 2
    assert "beta" in capsys.readouterr().err


def test_malformed_csv_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("date,value\n2020-01-01,1\n2020-01-02,abc\n")
    assert main(["analyze", str(bad), "--out-dir", str(tmp_path / "o")]) == 2
    assert "bad.csv:3" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["analyze", "missing.csv"],
    ["theory", "--alpha", "1.5"],
    ["theory", "--min-period", "soon"],
])
def test_validation_errors_exit_2(argv, capsys):
    assert main(argv) == 2
    assert "error" in capsys.readouterr().err


def test_unknown_flag_exits_2():
    with pytest.raises(SystemExit) as exc:
        main(["theory", "--bogus"])
    assert exc.value.code == 2


def test_gap_is_reported_with_stage(tmp_path, capsys):
    path = tmp_path / "gap.csv"
    days = [f"2020-01-{d:02d},{d}" for d in (*range(1, 10), *range(20, 31))]
    path.write_text("date,value\n" + "\n".join(days) + "\n")
    assert main(["analyze", str(path), "--out-dir", str(tmp_path / "o")]) == 2
    assert "[resample]" in capsys.readouterr().err


def test_config_file_and_sidelobe_warning(tmp_path, synth_csv, caplog):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"gamma": 4.0, "apply_filter": False, "mc_trials": 50}))
    assert main(["analyze", str(synth_csv), "--config", str(cfg), "--out-dir", str(tmp_path / "o")]) == 0
    assert "sidelobe" in caplog.text
    assert json.loads((tmp_path / "o" / "config.json").read_text())["gamma"] == 4.0


def test_bundled_proxy_end_to_end(tmp_path):
    out = tmp_path / "run"
    proc = subprocess.run([sys.executable, "-m", "element_analysis", "analyze", str(DATA), "--out-dir", str(out)],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "5 significant events" in proc.stdout
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["files"]) == 10
