import hashlib
import math

import pytest

from qattention.cascade import aggregate_patterns, build_instances, instance_probability
from qattention.ingest import ParseStats, dumps_corpus, extract_retweet_chain, parse_jsonl_stream, parse_snap_stream
from qattention.simulator import (
    SequenceConfig,
    WorldConfig,
    classical_standard_error,
    ground_truth,
    ground_truth_table,
    parse_config,
    sequence_standard_errors,
    simulate_classical_world,
    simulate_sequence_world,
)


def digest(records, fmt="jsonl"):
    return hashlib.sha256(dumps_corpus(records, fmt).encode()).hexdigest()


@pytest.mark.parametrize(
    "r, c, expected",
    [([0.2], [0.25], 0.05), ([0.2, 0.2], [0.25, 0.25], 0.10), ([1, 1], [1, 1], 2.0)],
)
def test_ground_truth(r, c, expected):
    assert ground_truth(WorldConfig(r, c)) == pytest.approx(expected, abs=1e-15)


def test_saturated_world_clamps_downstream():
    recs = simulate_classical_world(WorldConfig([1, 1], [1, 1], tweets_per_source=10))
    (inst,) = build_instances(recs)
    assert inst.relayed_retweet_count == 20
    assert instance_probability(inst) == 1.0


def test_minimal_world():
    recs = simulate_classical_world(WorldConfig([1], [1], tweets_per_source=1))
    assert len(recs) == 3
    (inst,) = build_instances(recs)
    assert instance_probability(inst) == 1.0


def test_single_channel_recovery():
    cfg = WorldConfig([0.2], [0.25], tweets_per_source=10_000, seed=42)
    stats = aggregate_patterns(build_instances(simulate_classical_world(cfg)))
    se = math.sqrt(0.05 * 0.95 / cfg.tweets_per_source)
    assert abs(stats.rows[1].mean_probability - 0.05) < 3 * se


def test_many_sources_average():
    cfg = WorldConfig([0.3, 0.1, 0.2], [0.5, 0.5, 0.4], tweets_per_source=500, sources=40, seed=5)
    stats = aggregate_patterns(build_instances(simulate_classical_world(cfg)))
    assert stats.rows[3].instance_count == 40
    se = classical_standard_error(cfg) / math.sqrt(40)
    assert abs(stats.rows[3].mean_probability - ground_truth(cfg)) < 3 * se


def test_classical_determinism_and_workers():
    cfg = WorldConfig([0.3, 0.4], [0.5, 0.5], tweets_per_source=200, sources=6, seed=99)
    a = simulate_classical_world(cfg)
    assert digest(a) == digest(simulate_classical_world(cfg))
    assert digest(a, "snap") == digest(simulate_classical_world(cfg, workers=3), "snap")
    other = WorldConfig([0.3, 0.4], [0.5, 0.5], tweets_per_source=200, sources=6, seed=100)
    assert digest(a) != digest(simulate_classical_world(other))


@pytest.mark.parametrize("fmt", ["snap", "jsonl"])
def test_output_parses_cleanly(fmt):
    cfg = WorldConfig([0.5, 0.5], [0.5, 0.5], tweets_per_source=50, sources=3, seed=1)
    recs = simulate_classical_world(cfg)
    stats = ParseStats()
    parser = parse_snap_stream if fmt == "snap" else parse_jsonl_stream
    assert list(parser(dumps_corpus(recs, fmt).splitlines(keepends=True), stats)) == recs
    assert stats.malformed == 0
    for rec in recs:
        relays = extract_retweet_chain(rec.text).relays
        if rec.author.endswith("a"):
            assert relays == ()
        elif rec.author.endswith("c"):
            assert len(relays) == 2 and relays[1] == rec.author[:-1] + "a"
        else:
            assert relays == (rec.author.split("b")[0] + "a",)


def test_sequence_recovers_drop():
    cfg = SequenceConfig([0.05, 0.04], instances_per_pattern=40, tweets_per_source=2000, seed=8)
    stats = aggregate_patterns(build_instances(simulate_sequence_world(cfg)), 2)
    ses = sequence_standard_errors(cfg)
    for n, target in enumerate(cfg.targets, start=1):
        assert stats.rows[n].instance_count == 40
        assert abs(stats.rows[n].mean_probability - target) < 3 * ses[n - 1]
    assert stats.rows[2].mean_probability < stats.rows[1].mean_probability


def test_sequence_flat():
    cfg = SequenceConfig([0.1] * 4, instances_per_pattern=30, tweets_per_source=1000, seed=2)
    stats = aggregate_patterns(build_instances(simulate_sequence_world(cfg)), 4)
    se = sequence_standard_errors(cfg)[0]
    for n in range(1, 5):
        assert abs(stats.rows[n].mean_probability - 0.1) < 3 * se


def test_sequence_channel_guarantee():
    cfg = SequenceConfig([0.01, 0.01, 0.01], instances_per_pattern=20, tweets_per_source=300, seed=4)
    stats = aggregate_patterns(build_instances(simulate_sequence_world(cfg)), 3)
    assert [stats.rows[n].instance_count for n in (1, 2, 3)] == [20, 20, 20]


def test_sequence_infeasible():
    with pytest.raises(ValueError, match="target\\(2\\)"):
        SequenceConfig([0.05, 0.001], instances_per_pattern=1, tweets_per_source=100)


def test_sequence_determinism():
    cfg = SequenceConfig([0.05, 0.04, 0.06], instances_per_pattern=5, tweets_per_source=200, seed=12)
    a = simulate_sequence_world(cfg)
    assert digest(a) == digest(simulate_sequence_world(cfg, workers=4))


@pytest.mark.parametrize(
    "kwargs, message",
    [
        (dict(relay_probs=[1.2], retweet_probs=[0.1]), "outside"),
        (dict(relay_probs=[0.2], retweet_probs=[0.1, 0.2]), "same length"),
        (dict(relay_probs=[], retweet_probs=[]), "n must be"),
        (dict(relay_probs=[0.2], retweet_probs=[0.1], tweets_per_source=0), "M"),
        (dict(relay_probs=[0.2], retweet_probs=[0.1], prefix="toolongprefix_"), "valid handle"),
    ],
)
def test_world_config_validation(kwargs, message):
    with pytest.raises(ValueError, match=message):
        WorldConfig(**kwargs)


def test_parse_config():
    cfg = parse_config("kind = classical\nrelay_probs = 0.2\nretweet_probs = 0.25  # one channel\ntweets_per_source = 100\nseed = 3\n")
    assert cfg == WorldConfig([0.2], [0.25], tweets_per_source=100, seed=3)
    assert ground_truth_table(cfg) == {1: pytest.approx(0.05)}
    seq = parse_config("kind = sequence\ntargets = 0.05, 0.04\ntweets_per_source = 1000\ninstances_per_pattern = 3\n")
    assert isinstance(seq, SequenceConfig) and seq.targets == (0.05, 0.04)
    with pytest.raises(ValueError, match="unknown keys"):
        parse_config("relay_probs = 0.1\nretweet_probs = 0.1\nbogus = 1\n")
    with pytest.raises(ValueError, match="missing required key"):
        parse_config("kind = classical\nrelay_probs = 0.1\n")
    with pytest.raises(ValueError):
        parse_config("kind = sequence\ntargets = 0.05, 0.001\ntweets_per_source = 100\n")
