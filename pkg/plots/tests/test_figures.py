import csv
import shutil
import subprocess

import pytest

from parsu_plots import (RUN_COLUMNS, SPEEDUP_COLUMNS, SchemaError,
                         plot_convergence, plot_speedup)
from parsu_plots.cli import main_convergence, main_speedup


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        w.writerows(rows)


def sample_run_csv(path):
    rows = []
    for mode, threads, times in (("serial", 1, (1.0, 2.0, 3.0)),
                                 ("cyclades", 2, (0.8, 1.5, 2.2)),
                                 ("cyclades", 4, (0.6, 1.1, 1.6))):
        for epoch, t in enumerate(times):
            obj = 1.0 / (epoch + 1)
            rows.append([f"a-{mode}-t{threads}-s0", mode, "a", "d",
                         threads, 0, epoch, repr(obj), repr(0.1),
                         repr(t / 3), repr(t)])
    write_csv(path, RUN_COLUMNS, rows)


def sample_speedup_csv(path):
    rows = [
        ["serial", 1, "0.5", "3.0", "2.7", "1.0", "1.0", 1],
        ["cyclades", 2, "0.5", "1.8", "1.4", "1.666", "1.93", 1],
        ["cyclades", 4, "0.5", "1.0", "0.8", "3.0", "3.375", 1],
    ]
    write_csv(path, SPEEDUP_COLUMNS, rows)


def test_convergence_series_per_mode_threads(tmp_path):
    src = tmp_path / "run.csv"
    sample_run_csv(src)
    out = tmp_path / "conv.png"
    info = plot_convergence(str(src), str(out))
    assert out.exists() and out.stat().st_size > 0
    assert len(info.series) == 3  # (serial,1), (cyclades,2), (cyclades,4)
    assert "serial, 1 thread" in info.series


def test_convergence_log_scale_and_svg(tmp_path):
    src = tmp_path / "run.csv"
    sample_run_csv(src)
    out = tmp_path / "conv.svg"
    info = plot_convergence(str(src), str(out), log_y=True)
    assert out.exists()
    assert info.path.endswith(".svg")


def test_convergence_empty_csv_error(tmp_path):
    src = tmp_path / "empty.csv"
    write_csv(src, RUN_COLUMNS, [])
    with pytest.raises(SchemaError):
        plot_convergence(str(src), str(tmp_path / "x.png"))


def test_convergence_missing_columns_error(tmp_path):
    src = tmp_path / "bad.csv"
    write_csv(src, ["mode", "objective"], [["serial", "1.0"]])
    with pytest.raises(SchemaError):
        plot_convergence(str(src), str(tmp_path / "x.png"))


def test_convergence_deterministic_output(tmp_path):
    src = tmp_path / "run.csv"
    sample_run_csv(src)
    a, b = tmp_path / "a.png", tmp_path / "b.png"
    plot_convergence(str(src), str(a))
    plot_convergence(str(src), str(b))
    assert a.read_bytes() == b.read_bytes()


def test_speedup_chart(tmp_path):
    src = tmp_path / "s.csv"
    sample_speedup_csv(src)
    out = tmp_path / "speed.png"
    info = plot_speedup(str(src), str(out))
    assert out.exists() and out.stat().st_size > 0
    assert set(info.series) == {"serial", "cyclades"}


def test_speedup_updates_only_column(tmp_path):
    src = tmp_path / "s.csv"
    sample_speedup_csv(src)
    out = tmp_path / "speed_upd.png"
    info = plot_speedup(str(src), str(out), column="updates_speedup")
    assert out.exists()
    with pytest.raises(ValueError):
        plot_speedup(str(src), str(out), column="nope")
    del info


def test_cli_entry_points(tmp_path):
    src = tmp_path / "run.csv"
    sample_run_csv(src)
    out = tmp_path / "c.png"
    assert main_convergence(["--input", str(src), "--output", str(out),
                             "--log-y"]) == 0
    assert out.exists()
    st = tmp_path / "s.csv"
    sample_speedup_csv(st)
    out2 = tmp_path / "s.png"
    assert main_speedup(["--input", str(st), "--output", str(out2),
                         "--updates-only"]) == 0
    assert out2.exists()
    assert main_convergence(["--input", str(tmp_path / "nope.csv"),
                             "--output", str(out)]) == 2


@pytest.mark.skipif(shutil.which("parsu") is None,
                    reason="parsu CLI not installed")
def test_renders_from_real_harness_output(tmp_path):
    """End-to-end through the external interface: run the harness, take its
    CSVs, render both figure kinds."""
    run_csv = tmp_path / "run.csv"
    subprocess.run(
        ["parsu", "run", "--algorithm", "saga",
         "--dataset", "synth-ls:rows=200,cols=80,nnz=4,seed=0",
         "--mode", "serial,cyclades", "--threads", "1,2", "--epochs", "4",
         "--stepsize", "0.005", "--no-pin", "--output", str(run_csv)],
        check=True)
    speed_csv = tmp_path / "speed.csv"
    subprocess.run(["parsu", "speedup", "--input", str(run_csv),
                    "--output", str(speed_csv)], check=True)
    conv = plot_convergence(str(run_csv), str(tmp_path / "conv.png"))
    assert len(conv.series) == 3  # serial@1, cyclades@1, cyclades@2
    speed = plot_speedup(str(speed_csv), str(tmp_path / "speed.png"))
    assert "cyclades" in speed.series
