import os

import pytest

from instrex.cli import (EXIT_CALIBRATION, EXIT_IO, EXIT_OK, EXIT_USAGE,
                         main)


def test_run_and_report(tmp_path, capsys):
    log = str(tmp_path / "run.jsonl")
    assert main(["run", "--task", "attach", "--operator", "expert",
                 "--trials", "3", "--seed", "1", "--out", log]) == EXIT_OK
    out = capsys.readouterr().out
    assert "3 attach trials (expert)" in out
    assert os.path.exists(log)

    out_dir = str(tmp_path / "report")
    assert main(["report", "--in", log, "--out", out_dir]) == EXIT_OK
    assert os.path.exists(os.path.join(out_dir, "summary.txt"))
    assert os.path.exists(os.path.join(out_dir, "trials.csv"))


def test_run_usage_errors(tmp_path):
    log = str(tmp_path / "x.jsonl")
    assert main(["run", "--task", "attach", "--operator", "expert",
                 "--trials", "0", "--out", log]) == EXIT_USAGE
    assert main(["run", "--task", "fly", "--operator", "expert",
                 "--out", log]) == EXIT_USAGE
    assert main(["nonsense"]) == EXIT_USAGE


def test_run_io_error(tmp_path):
    assert main(["run", "--task", "attach", "--operator", "expert",
                 "--trials", "1",
                 "--out", str(tmp_path / "no" / "dir" / "x.jsonl")]) == EXIT_IO


def test_report_missing_input(tmp_path):
    assert main(["report", "--in", str(tmp_path / "absent.jsonl"),
                 "--out", str(tmp_path)]) == EXIT_IO


def test_report_warns_on_corrupt_lines(tmp_path, capsys):
    log = str(tmp_path / "run.jsonl")
    main(["run", "--task", "attach", "--operator", "expert",
          "--trials", "2", "--seed", "0", "--out", log])
    with open(log, "a", encoding="utf-8") as f:
        f.write("{bad\n")
    out_dir = str(tmp_path / "rep")
    assert main(["report", "--in", log, "--out", out_dir]) == EXIT_OK
    assert ":3:" in capsys.readouterr().err


def test_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[latch]\nnope = 1\n", encoding="utf-8")
    assert main(["run", "--task", "attach", "--operator", "expert",
                 "--trials", "1", "--out", str(tmp_path / "x.jsonl"),
                 "--config", str(cfg)]) == EXIT_USAGE


def test_calibrate_unreachable_targets(tmp_path, capsys):
    targets = tmp_path / "targets.ini"
    targets.write_text("[targets]\nexpert_cycle_s = 2\nnovice_cycle_s = 3\n"
                       "trials = 2\n", encoding="utf-8")
    code = main(["calibrate", "--targets", str(targets)])
    assert code == EXIT_CALIBRATION
    assert "calibration failed" in capsys.readouterr().err


def test_calibrate_writes_report(tmp_path):
    targets = tmp_path / "targets.ini"
    targets.write_text("[targets]\ntrials = 4\n", encoding="utf-8")
    out = tmp_path / "calibration.txt"
    code = main(["calibrate", "--targets", str(targets),
                 "--out", str(out)])
    assert code == EXIT_OK
    text = out.read_text(encoding="utf-8")
    assert "calibration report" in text
    assert "[operator.expert]" in text
    assert "[operator.novice]" in text


def test_entry_point_installed():
    import shutil
    assert shutil.which("instrex") is not None
