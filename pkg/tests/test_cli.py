import json

import numpy as np
import pytest

from ballkmeans import FormatError, write_binary
from ballkmeans.cli import RunConfig, cmd_report, cmd_run, format_report, main
from ballkmeans.core import IterationMetrics, MetricsLog
from ballkmeans.errors import UsageError


def read_metrics(path):
    return [json.loads(line) for line in path.read_text().splitlines()]


def test_both_mode_reports_equivalent(tmp_path, capsys):
    code = cmd_run(RunConfig(k=6, seed=3, generate=(800, 3, 6, 6.0), algorithm="both",
                             out_dir=str(tmp_path)))
    assert code == 0
    assert "EQUIVALENT" in capsys.readouterr().out
    assert (tmp_path / "verdict.txt").read_text() == "EQUIVALENT\n"
    assert (tmp_path / "ball_assignments.txt").read_bytes() == (
        tmp_path / "lloyd_assignments.txt").read_bytes()


def test_lloyd_metrics_are_nk(tmp_path):
    cmd_run(RunConfig(k=5, seed=1, generate=(300, 2, 5, 6.0), algorithm="lloyd",
                      out_dir=str(tmp_path)))
    recs = read_metrics(tmp_path / "lloyd_metrics.jsonl")
    assert all(r["point_centroid_dist_count"] == 300 * 5 for r in recs)
    assert recs[-1]["moved_point_count"] == 0


def test_no_skip_ablation(tmp_path):
    cmd_run(RunConfig(k=8, seed=2, generate=(1000, 2, 8, 6.0), skip=False, out_dir=str(tmp_path)))
    recs = read_metrics(tmp_path / "ball_metrics.jsonl")
    assert all(r["skipped_pair_count"] == 0 for r in recs)
    assert all(r["centroid_centroid_dist_count"] == 28 for r in recs)


def test_output_formats(tmp_path):
    X = np.random.default_rng(0).normal(size=(50, 3))
    write_binary(tmp_path / "x.bkm", X)
    cmd_run(RunConfig(k=4, seed=0, input=str(tmp_path / "x.bkm"), out_dir=str(tmp_path / "o")))
    lines = (tmp_path / "o" / "ball_assignments.txt").read_text().splitlines()
    assert len(lines) == 50 and set(lines) <= {"0", "1", "2", "3"}
    rows = (tmp_path / "o" / "ball_centroids.csv").read_text().splitlines()
    assert len(rows) == 4 and all(len(r.split(",")) == 3 for r in rows)
    rec = read_metrics(tmp_path / "o" / "ball_metrics.jsonl")[0]
    assert set(rec) == {"algorithm", "n", "k", "iteration", "point_centroid_dist_count",
                        "centroid_centroid_dist_count", "skipped_pair_count",
                        "frozen_cluster_count", "moved_point_count", "sse", "wall_time"}


def test_outputs_independent_of_workers(tmp_path):
    outs = []
    for w in (1, 4):
        d = tmp_path / f"w{w}"
        cmd_run(RunConfig(k=10, seed=7, generate=(3000, 4, 10, 6.0), workers=w, out_dir=str(d)))
        outs.append(((d / "ball_assignments.txt").read_bytes(), (d / "ball_centroids.csv").read_bytes()))
    assert outs[0] == outs[1]


@pytest.mark.parametrize("kwargs", [dict(k=0), dict(algorithm="fast"), dict(init="x"),
                                    dict(max_iter=0), dict(workers=0), dict(generate=None)])
def test_config_validation(kwargs):
    base = dict(k=3, seed=0, generate=(10, 2, 2, 6.0))
    base.update(kwargs)
    with pytest.raises(UsageError):
        RunConfig(**base)


def test_report_summary():
    log = MetricsLog("ball", 100, 4)
    log.append(IterationMetrics(0, 400, 6, 0, 0, 100, 50.0))
    log.append(IterationMetrics(1, 150, 2, 4, 1, 3, 40.0))
    log.append(IterationMetrics(2, 50, 1, 5, 3, 0, 39.0))
    text = format_report(log)
    # 1 - 600 / (3 * 100 * 4) = 0.5
    assert "savings ratio 0.500" in text
    last = text.splitlines()[4].split()
    assert last[0] == "2" and last[6] == "0"
    assert "frozen clusters per iteration: 0 1 3" in text


def test_report_from_run(tmp_path):
    cmd_run(RunConfig(k=5, seed=1, generate=(500, 2, 5, 8.0), out_dir=str(tmp_path)))
    text = cmd_report(tmp_path / "ball_metrics.jsonl")
    assert text.startswith("algorithm=ball n=500 k=5")


def test_report_malformed(tmp_path):
    p = tmp_path / "m.jsonl"
    p.write_text("{broken\n")
    with pytest.raises(FormatError):
        cmd_report(p)
    with pytest.raises(FormatError):
        cmd_report(tmp_path / "missing.jsonl")


def test_main_exit_codes(tmp_path, capsys):
    csv = tmp_path / "d.csv"
    csv.write_text("x,y\n0,0\n0,1\n10,10\n10,11\n")
    assert main(["run", "--input", str(csv), "--k", "2", "--seed", "0", "--algo", "both",
                 "--out-dir", str(tmp_path / "o")]) == 0
    assert main(["report", str(tmp_path / "o" / "ball_metrics.jsonl")]) == 0
    assert main(["run", "--input", str(csv), "--k", "9", "--seed", "0",
                 "--out-dir", str(tmp_path / "o")]) == 2
    bad = tmp_path / "bad.csv"
    bad.write_text("1,2\n3\n")
    assert main(["run", "--input", str(bad), "--k", "1", "--seed", "0"]) == 2
    assert "bad.csv:2:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["run", "--k", "2", "--seed", "0"])


def test_main_generate(tmp_path):
    out = tmp_path / "g.bkm"
    assert main(["generate", "--generate", "60,3,3,6", "--seed", "1", "--output", str(out),
                 "--labels", str(tmp_path / "l.txt")]) == 0
    assert out.read_bytes()[:4] == b"BKM1"
    assert len((tmp_path / "l.txt").read_text().splitlines()) == 60
