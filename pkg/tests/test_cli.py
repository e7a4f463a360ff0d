import csv
import hashlib
import json
import math
import subprocess
import sys

import pytest

from qattention.cli import main, parse_report
from qattention.simulator import WorldConfig, classical_standard_error

SIX_TWEETS = """\
T 2009-06-01 00:00:01
U http://twitter.com/a
W p1

T 2009-06-01 00:00:02
U http://twitter.com/a
W p2

T 2009-06-01 00:00:03
U http://twitter.com/b1
W RT @a: p1

T 2009-06-01 00:00:04
U http://twitter.com/c
W RT @b1: RT @a: p1

T 2009-06-01 00:00:05
U http://twitter.com/c
W RT @b2: RT @a: p2

T 2009-06-01 00:00:06
U http://twitter.com/d
W RT @b1: RT @a: p1
"""


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def test_extract_fixture(tmp_path, capsys):
    corpus = tmp_path / "six.txt"
    corpus.write_text(SIX_TWEETS)
    assert main(["extract", str(corpus), "--out", str(tmp_path / "out")]) == 0
    rows = read_csv(tmp_path / "out" / "patterns.csv")
    assert [(r["n"], r["instance_count"], r["mean_probability"]) for r in rows[:2]] == [
        ("1", "1", "0.5"),  # (a, d, {b1}): 1 of a's 2 tweets
        ("2", "1", "1.0"),  # (a, c, {b1, b2}): 2 of 2
    ]
    assert len(rows) == 6 and all(r["instance_count"] == "0" for r in rows[2:])
    inst = read_csv(tmp_path / "out" / "instances.csv")
    assert {(r["source"], r["receiver"], r["n"], r["relayed"], r["source_total"]) for r in inst} == {
        ("a", "c", "2", "2", "2"),
        ("a", "d", "1", "1", "2"),
    }
    err = capsys.readouterr().err
    assert "records parsed: 6" in err and "malformed: 0" in err


def test_extract_empty(tmp_path):
    corpus = tmp_path / "empty.txt"
    corpus.write_text("")
    assert main(["extract", str(corpus), "--out", str(tmp_path), "--format", "jsonl"]) == 0
    assert read_csv(tmp_path / "instances.csv") == []
    assert all(r["instance_count"] == "0" for r in read_csv(tmp_path / "patterns.csv"))


def test_extract_bad_path(tmp_path, capsys):
    assert main(["extract", str(tmp_path / "missing.txt"), "--out", str(tmp_path)]) == 2
    assert "cannot read" in capsys.readouterr().err


def test_unknown_format_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["extract", "x", "--format", "xml"])
    assert exc.value.code == 2


def write_stats(path, means):
    lines = ["n,instance_count,mean_probability,std_error"]
    lines += [f"{n},1,{m!r}," for n, m in enumerate(means, start=1)]
    path.write_text("\n".join(lines) + "\n")


def test_fit_linear(tmp_path):
    stats = tmp_path / "p.csv"
    write_stats(stats, [0.05, 0.07, 0.09])
    out = tmp_path / "fit.txt"
    assert main(["fit", str(stats), "--model", "classical", "--out", str(out)]) == 0
    rep = parse_report(out.read_text())
    assert float(rep["classical.residual"]) < 1e-30
    assert "quantum.residual" not in rep


def test_fit_drop_prefers_quantum(tmp_path, capsys):
    stats = tmp_path / "p.csv"
    write_stats(stats, [0.05, 0.04])
    assert main(["fit", str(stats), "--model", "both"]) == 0
    rep = parse_report(capsys.readouterr().out)
    assert float(rep["quantum.residual"]) < float(rep["classical.residual"])
    assert "quantum.int.1.2" in rep and float(rep["quantum.int.1.2"]) < 0


@pytest.mark.parametrize("content", ["n,instance_count,mean_probability,std_error\n1,1,0.05,\n", "garbage\n"])
def test_fit_bad_stats(tmp_path, content):
    stats = tmp_path / "p.csv"
    stats.write_text(content)
    assert main(["fit", str(stats)]) == 2


def test_simulate_worked_example(tmp_path, capsys):
    cfg = tmp_path / "world.cfg"
    cfg.write_text("relay_probs = 0.2\nretweet_probs = 0.25\ntweets_per_source = 100\nsources = 50\n")
    corpus = tmp_path / "corpus.txt"
    assert main(["simulate", str(cfg), "--out", str(corpus), "--seed", "1"]) == 0
    assert "1,0.05" in capsys.readouterr().out
    digest = hashlib.sha256(corpus.read_bytes()).hexdigest()
    again = tmp_path / "again.txt"
    assert main(["simulate", str(cfg), "--out", str(again), "--seed", "1"]) == 0
    assert hashlib.sha256(again.read_bytes()).hexdigest() == digest

    assert main(["extract", str(corpus), "--out", str(tmp_path)]) == 0
    row = read_csv(tmp_path / "patterns.csv")[0]
    se = math.sqrt(0.05 * 0.95 / 100 / int(row["instance_count"]))
    assert abs(float(row["mean_probability"]) - 0.05) < 3 * se


def test_simulate_invalid(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("kind = sequence\ntargets = 0.05, 0.001\ntweets_per_source = 100\ninstances_per_pattern = 1\n")
    assert main(["simulate", str(cfg), "--out", str(tmp_path / "c.txt")]) == 2
    assert "target(2)" in capsys.readouterr().err


def test_pipeline_recovers_slope(tmp_path):
    one = WorldConfig([0.2], [0.25], tweets_per_source=2000, sources=20, prefix="x", seed=1)
    two = WorldConfig([0.2, 0.2], [0.25, 0.25], tweets_per_source=2000, sources=20, prefix="y", seed=2)
    paths = []
    for name, world in (("one", one), ("two", two)):
        cfg = tmp_path / f"{name}.cfg"
        cfg.write_text(
            f"prefix = {world.prefix}\nseed = {world.seed}\nsources = {world.sources}\n"
            f"tweets_per_source = {world.tweets_per_source}\n"
            f"relay_probs = {', '.join(map(str, world.relay_probs))}\n"
            f"retweet_probs = {', '.join(map(str, world.retweet_probs))}\n"
        )
        paths.append(str(tmp_path / f"{name}.jsonl"))
        assert main(["simulate", str(cfg), "--out", paths[-1], "--format", "jsonl"]) == 0
    out = tmp_path / "run"
    assert main(["extract", *paths, "--format", "jsonl", "--out", str(out)]) == 0
    assert main(["fit", str(out / "patterns.csv"), "--model", "classical", "--out", str(out / "fit.txt")]) == 0
    slope = float(parse_report((out / "fit.txt").read_text())["classical.slope"])
    sigma = math.hypot(classical_standard_error(one), classical_standard_error(two)) / math.sqrt(20)
    assert abs(slope - 0.05) < 3 * sigma


def test_report_bundle(tmp_path):
    corpus = tmp_path / "six.txt"
    corpus.write_text(SIX_TWEETS)
    out = tmp_path / "rep"
    assert main(["report", str(corpus), "--out", str(out), "--model", "both"]) == 0
    report = json.loads((out / "run_report.json").read_text())
    c = report["counters"]
    assert c["records_parsed"] == c["records_used"] == 6 and c["records_malformed"] == 0
    assert c["instances_built"] == c["instances_kept"] + c["dropped_over_nmax"] + c["dropped_no_source"]
    assert report["fit"]["classical.slope"] == pytest.approx(0.5)
    assert set(report["seconds"]) == {"parse", "extract", "fit"}
    assert (out / "fit.txt").exists() and (out / "patterns.csv").exists()


def test_stdin_and_module_entry(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "qattention.cli", "extract", "-", "--out", str(tmp_path)],
        input=SIX_TWEETS.encode(),
        capture_output=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert proc.stdout == b""
    assert len(read_csv(tmp_path / "instances.csv")) == 2
