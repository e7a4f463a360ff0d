"""Two-hop transfer instances and per-pattern retweeting probabilities.

An instance is one (source A, receiver C) pair observed through tweets by C
of the form ``RT @B: RT @A: ...``. Its channels are the distinct relays B,
and its probability is the number of such tweets over the number of tweets A
posted. Instances are grouped by channel count n and averaged.
"""

from __future__ import annotations

import csv
import math
from collections import Counter, defaultdict
from dataclasses import dataclass
from typing import IO, Dict, Iterable, List, Mapping, Optional, Tuple

from .ingest import TweetRecord, extract_retweet_chain

DEFAULT_NMAX = 6

INSTANCE_COLUMNS = ["source", "receiver", "n", "relayed", "source_total", "probability"]
PATTERN_COLUMNS = ["n", "instance_count", "mean_probability", "std_error", "tweet_count"]


@dataclass(frozen=True)
class TransferInstance:
    source: str
    receiver: str
    channels: frozenset
    relayed_retweet_count: int
    source_tweet_count: int

    def __post_init__(self):
        if not self.channels:
            raise ValueError("channels must be non-empty")
        if self.source == self.receiver:
            raise ValueError("source and receiver must differ")
        if self.source in self.channels or self.receiver in self.channels:
            raise ValueError("source and receiver cannot be channels")
        if self.relayed_retweet_count < len(self.channels):
            raise ValueError("every channel needs at least one relayed retweet")
        if self.source_tweet_count < 1:
            raise ValueError("source_tweet_count must be >= 1")

    @property
    def n(self) -> int:
        return len(self.channels)


@dataclass
class BuildStats:
    tweets_scanned: int = 0
    two_hop_tweets: int = 0
    excluded_self_reference: int = 0
    instances_total: int = 0
    dropped_over_nmax: int = 0
    dropped_no_source: int = 0
    direct_cooccurrence: int = 0

    @property
    def kept(self) -> int:
        return self.instances_total - self.dropped_over_nmax - self.dropped_no_source


def author_tweet_counts(records: Iterable[TweetRecord]) -> Dict[str, int]:
    """Tweets posted per (lowercased) author, retweets included."""
    counts: Counter = Counter()
    for rec in records:
        counts[rec.author.lower()] += 1
    return dict(counts)


def build_instances(
    records: Iterable[TweetRecord],
    n_max: int = DEFAULT_NMAX,
    stats: Optional[BuildStats] = None,
) -> List[TransferInstance]:
    """Group two-hop retweets by (source, receiver).

    Only the first two relays of a chain are used. Instances with more than
    ``n_max`` channels, or whose source posted nothing in the corpus, are
    dropped and counted in ``stats``. Output is sorted by (source, receiver).
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if stats is None:
        stats = BuildStats()
    authored: Counter = Counter()
    channels: Dict[Tuple[str, str], set] = defaultdict(set)
    relayed: Counter = Counter()
    direct = set()

    for rec in records:
        stats.tweets_scanned += 1
        authored[rec.author] += 1
        relays = extract_retweet_chain(rec.text).relays
        if not relays:
            continue
        direct.add((relays[0], rec.author))
        if len(relays) < 2:
            continue
        b, a, c = relays[0], relays[1], rec.author
        stats.two_hop_tweets += 1
        if a == c or b == a or b == c:
            stats.excluded_self_reference += 1
            continue
        channels[(a, c)].add(b)
        relayed[(a, c)] += 1

    out = []
    for key in sorted(channels):
        a, c = key
        stats.instances_total += 1
        if (a, c) in direct:
            stats.direct_cooccurrence += 1
        chans = channels[key]
        if len(chans) > n_max:
            stats.dropped_over_nmax += 1
            continue
        if authored[a] == 0:
            stats.dropped_no_source += 1
            continue
        out.append(TransferInstance(a, c, frozenset(chans), relayed[key], authored[a]))
    return out


def instance_probability(instance: TransferInstance, counters: Optional[Counter] = None) -> float:
    """Relayed retweets over source tweets, clamped at 1.

    Clamps are tallied under ``counters["clamped"]`` when a counter is given.
    """
    ratio = instance.relayed_retweet_count / instance.source_tweet_count
    if ratio > 1.0:
        if counters is not None:
            counters["clamped"] += 1
        return 1.0
    return ratio


@dataclass(frozen=True)
class PatternRow:
    n: int
    instance_count: int
    mean_probability: Optional[float] = None
    std_error: Optional[float] = None
    tweet_count: int = 0


@dataclass
class PatternStats:
    """Per-channel-count aggregate; ``rows[n]`` exists for every n in 1..n_max."""

    rows: Dict[int, PatternRow]
    n_max: int
    clamped: int = 0

    def __post_init__(self):
        for row in self.rows.values():
            if row.instance_count > 0 and not 0.0 <= row.mean_probability <= 1.0:
                raise ValueError(f"mean probability out of [0, 1] at n={row.n}")

    def populated(self) -> List[int]:
        return [n for n in sorted(self.rows) if self.rows[n].instance_count > 0]

    def means(self) -> Dict[int, float]:
        return {n: self.rows[n].mean_probability for n in self.populated()}

    def counts(self) -> Dict[int, int]:
        return {n: self.rows[n].instance_count for n in sorted(self.rows)}

    @property
    def total_instances(self) -> int:
        return sum(r.instance_count for r in self.rows.values())

    @classmethod
    def from_means(
        cls,
        means: Mapping[int, float],
        counts: Optional[Mapping[int, int]] = None,
        n_max: Optional[int] = None,
    ) -> "PatternStats":
        """Build stats straight from observed P(n) values (one instance each by default)."""
        n_max = n_max or max(means)
        rows = {}
        for n in range(1, n_max + 1):
            if n in means:
                k = 1 if counts is None else counts[n]
                rows[n] = PatternRow(n, k, float(means[n]))
            else:
                rows[n] = PatternRow(n, 0)
        return cls(rows, n_max)

    @classmethod
    def from_sequence(cls, values: Iterable[float]) -> "PatternStats":
        return cls.from_means({i + 1: v for i, v in enumerate(values)})


def aggregate_patterns(instances: Iterable[TransferInstance], n_max: int = DEFAULT_NMAX) -> PatternStats:
    """Mean and standard error of instance probabilities per channel count."""
    counters: Counter = Counter()
    probs: Dict[int, List[float]] = defaultdict(list)
    tweets: Counter = Counter()
    for inst in instances:
        if inst.n > n_max:
            continue
        probs[inst.n].append(instance_probability(inst, counters))
        tweets[inst.n] += inst.relayed_retweet_count

    rows = {}
    for n in range(1, n_max + 1):
        values = sorted(probs.get(n, []))  # sorted so float sums ignore input order
        k = len(values)
        if k == 0:
            rows[n] = PatternRow(n, 0)
            continue
        mean = math.fsum(values) / k
        se = None
        if k > 1:
            var = math.fsum((v - mean) ** 2 for v in values) / (k - 1)
            se = math.sqrt(var / k)
        rows[n] = PatternRow(n, k, min(max(mean, 0.0), 1.0), se, tweets[n])
    return PatternStats(rows, n_max, counters["clamped"])


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_instances_csv(instances: Iterable[TransferInstance], stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(INSTANCE_COLUMNS)
    for inst in instances:
        writer.writerow([
            inst.source, inst.receiver, inst.n, inst.relayed_retweet_count,
            inst.source_tweet_count, _fmt(instance_probability(inst)),
        ])


def write_patterns_csv(stats: PatternStats, stream: IO[str]) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(PATTERN_COLUMNS)
    for n in sorted(stats.rows):
        r = stats.rows[n]
        writer.writerow([n, r.instance_count, _fmt(r.mean_probability), _fmt(r.std_error), r.tweet_count])


def read_patterns_csv(stream: IO[str]) -> PatternStats:
    """Inverse of :func:`write_patterns_csv`; ``tweet_count`` is optional."""
    reader = csv.DictReader(stream)
    required = {"n", "instance_count", "mean_probability", "std_error"}
    if reader.fieldnames is None or not required.issubset(reader.fieldnames):
        raise ValueError(f"pattern table needs columns {sorted(required)}")
    rows = {}
    for line in reader:
        try:
            n = int(line["n"])
            k = int(line["instance_count"])
            mean = float(line["mean_probability"]) if line["mean_probability"] else None
            se = float(line["std_error"]) if line["std_error"] else None
            tweets = int(line.get("tweet_count") or 0)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"bad pattern row {line!r}: {exc}") from None
        if n < 1 or k < 0 or n in rows:
            raise ValueError(f"bad pattern row {line!r}")
        if k > 0 and mean is None:
            raise ValueError(f"row n={n} has instances but no mean")
        rows[n] = PatternRow(n, k, mean if k > 0 else None, se if k > 0 else None, tweets)
    n_max = max(rows) if rows else 0
    for n in range(1, n_max + 1):
        rows.setdefault(n, PatternRow(n, 0))
    return PatternStats(rows, n_max)
