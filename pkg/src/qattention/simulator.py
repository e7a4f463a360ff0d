"""Synthetic corpora with known retweeting probabilities.

Every world is a star gadget: one source A, channels B_1..B_n and one
receiver C. Each world draws from its own Philox stream keyed by
``(seed, world index)``, so worlds can be generated in any order or in
parallel without changing the output.
"""

from __future__ import annotations

import configparser
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Mapping, Sequence, Union

import numpy as np

from .ingest import USERNAME_RE, TweetRecord

BASE_TIME = 1243814400  # 2009-06-01 00:00:00 UTC


def world_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed & (2**64 - 1), index])))


def _check_name(name: str) -> str:
    if not USERNAME_RE.fullmatch(name):
        raise ValueError(f"generated username {name!r} is not a valid handle (1-15 of [A-Za-z0-9_])")
    return name.lower()


@dataclass(frozen=True)
class WorldConfig:
    """Independent-channel worlds.

    ``relay_probs[j]`` is the chance B_j retweets a given tweet of A and
    ``retweet_probs[j]`` the chance C then retweets B_j's relay.
    """

    relay_probs: Sequence[float]
    retweet_probs: Sequence[float]
    tweets_per_source: int = 100
    sources: int = 1
    prefix: str = "u"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "relay_probs", tuple(float(v) for v in self.relay_probs))
        object.__setattr__(self, "retweet_probs", tuple(float(v) for v in self.retweet_probs))
        if len(self.relay_probs) < 1:
            raise ValueError("channel count n must be >= 1")
        if len(self.relay_probs) != len(self.retweet_probs):
            raise ValueError("relay_probs and retweet_probs must have the same length")
        for v in self.relay_probs + self.retweet_probs:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"probability {v!r} outside [0, 1]")
        if self.tweets_per_source < 1:
            raise ValueError("tweets_per_source (M) must be >= 1")
        if self.sources < 1:
            raise ValueError("sources must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        _check_name(f"{self.prefix}{self.sources - 1}b{len(self.relay_probs)}")

    @property
    def channels(self) -> int:
        return len(self.relay_probs)


def ground_truth(config: WorldConfig) -> float:
    """Expected relayed-retweets / source-tweets ratio (not clamped)."""
    return math.fsum(r * c for r, c in zip(config.relay_probs, config.retweet_probs))


def _classical_world(config: WorldConfig, index: int) -> List[TweetRecord]:
    rng = world_rng(config.seed, index)
    n, m = config.channels, config.tweets_per_source
    r = np.array(config.relay_probs)[:, None]
    c = np.array(config.retweet_probs)[:, None]
    relayed = rng.random((n, m)) < r
    retweeted = relayed & (rng.random((n, m)) < c)

    a = _check_name(f"{config.prefix}{index}a")
    bs = [_check_name(f"{config.prefix}{index}b{j + 1}") for j in range(n)]
    cc = _check_name(f"{config.prefix}{index}c")
    t0 = BASE_TIME + index * 10 * m * (2 * n + 1)
    out = []
    clock = t0
    for i in range(m):
        msg = f"msg {index}-{i}"
        out.append(TweetRecord(a, clock, msg))
        clock += 1
        for j in np.flatnonzero(relayed[:, i]):
            out.append(TweetRecord(bs[j], clock, f"RT @{a}: {msg}"))
            clock += 1
        for j in np.flatnonzero(retweeted[:, i]):
            out.append(TweetRecord(cc, clock, f"RT @{bs[j]}: RT @{a}: {msg}"))
            clock += 1
    return out


def _run_worlds(fn, count: int, workers: int) -> List[TweetRecord]:
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, range(count)))
    else:
        parts = [fn(i) for i in range(count)]
    return [rec for part in parts for rec in part]


def simulate_classical_world(config: WorldConfig, workers: int = 1) -> List[TweetRecord]:
    """A's tweets, B_j's ``RT @A`` relays and C's ``RT @B_j: RT @A`` retweets."""
    return _run_worlds(lambda i: _classical_world(config, i), config.sources, workers)


@dataclass(frozen=True)
class SequenceConfig:
    """Worlds whose pattern means follow an arbitrary target profile P(1..n_max)."""

    targets: Sequence[float]
    instances_per_pattern: int = 100
    tweets_per_source: int = 1000
    seed: int = 0
    prefix: str = "s"
    max_rejections: int = 10_000

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(float(v) for v in self.targets))
        if not self.targets:
            raise ValueError("targets must be non-empty")
        for v in self.targets:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"target {v!r} outside [0, 1]")
        if self.instances_per_pattern < 1:
            raise ValueError("instances_per_pattern must be >= 1")
        if self.tweets_per_source < 1:
            raise ValueError("tweets_per_source (M) must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        m = self.tweets_per_source
        for n, t in enumerate(self.targets, start=1):
            if t * m < n:
                raise ValueError(
                    f"target({n}) * M = {t * m:g} < {n}: cannot guarantee {n} distinct channels"
                )
        last = len(self.targets)
        _check_name(f"{self.prefix}{last}n{self.instances_per_pattern - 1}b{last}")


def _sequence_world(config: SequenceConfig, n: int, k: int, index: int) -> List[TweetRecord]:
    rng = world_rng(config.seed, index)
    m = config.tweets_per_source
    target = config.targets[n - 1]
    for _ in range(config.max_rejections):
        hits = int(rng.binomial(m, target))
        if hits >= n:
            break
    else:
        raise RuntimeError(f"could not draw >= {n} matches for n={n} in {config.max_rejections} tries")
    # every channel gets one hit, the rest are spread uniformly
    owner = np.concatenate([np.arange(n), rng.integers(0, n, size=hits - n)])
    picked = np.sort(rng.choice(m, size=hits, replace=False))
    owner = rng.permutation(owner)

    a = _check_name(f"{config.prefix}{n}n{k}a")
    bs = [_check_name(f"{config.prefix}{n}n{k}b{j + 1}") for j in range(n)]
    cc = _check_name(f"{config.prefix}{n}n{k}c")
    by_tweet: Dict[int, List[int]] = {}
    for t, j in zip(picked.tolist(), owner.tolist()):
        by_tweet.setdefault(t, []).append(j)

    clock = BASE_TIME + index * 3 * m
    out = []
    for i in range(m):
        msg = f"msg {n}-{k}-{i}"
        out.append(TweetRecord(a, clock, msg))
        clock += 1
        for j in by_tweet.get(i, ()):
            out.append(TweetRecord(bs[j], clock, f"RT @{a}: {msg}"))
            out.append(TweetRecord(cc, clock + 1, f"RT @{bs[j]}: RT @{a}: {msg}"))
            clock += 2
    return out


def simulate_sequence_world(config: SequenceConfig, workers: int = 1) -> List[TweetRecord]:
    """Per pattern n, ``instances_per_pattern`` gadgets with Binomial(M, target(n)) relayed retweets."""
    jobs = [
        (n, k)
        for n in range(1, len(config.targets) + 1)
        for k in range(config.instances_per_pattern)
    ]
    return _run_worlds(lambda i: _sequence_world(config, *jobs[i], i), len(jobs), workers)


def sequence_standard_errors(config: SequenceConfig) -> List[float]:
    """Binomial standard error of each pattern mean."""
    m, k = config.tweets_per_source, config.instances_per_pattern
    return [math.sqrt(t * (1 - t) / m / k) for t in config.targets]


def classical_standard_error(config: WorldConfig) -> float:
    """Standard error of one world's observed ratio (sum of independent binomials)."""
    m = config.tweets_per_source
    return math.sqrt(math.fsum(r * c * (1 - r * c) for r, c in zip(config.relay_probs, config.retweet_probs)) / m)


def _floats(value: str) -> List[float]:
    return [float(v) for v in value.replace(";", ",").split(",") if v.strip()]


def parse_config(text: str) -> Union[WorldConfig, SequenceConfig]:
    """Read a flat ``key = value`` file.

    ``kind = classical`` needs ``relay_probs`` and ``retweet_probs``;
    ``kind = sequence`` needs ``targets``. Lists are comma separated.
    Validation errors name the violated constraint.
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    try:
        parser.read_string("[world]\n" + text)
    except configparser.Error as exc:
        raise ValueError(f"unreadable config: {exc}") from None
    raw: Mapping[str, str] = dict(parser["world"])
    kind = raw.get("kind", "classical").strip()
    known = {
        "classical": {"kind", "relay_probs", "retweet_probs", "tweets_per_source", "sources", "prefix", "seed"},
        "sequence": {"kind", "targets", "instances_per_pattern", "tweets_per_source", "prefix", "seed"},
    }
    if kind not in known:
        raise ValueError(f"kind must be 'classical' or 'sequence', got {kind!r}")
    unknown = set(raw) - known[kind]
    if unknown:
        raise ValueError(f"unknown keys for kind={kind}: {sorted(unknown)}")
    try:
        ints = {k: int(raw[k]) for k in ("tweets_per_source", "sources", "instances_per_pattern", "seed") if k in raw}
        if kind == "classical":
            for key in ("relay_probs", "retweet_probs"):
                if key not in raw:
                    raise ValueError(f"missing required key {key!r}")
            return WorldConfig(
                _floats(raw["relay_probs"]),
                _floats(raw["retweet_probs"]),
                prefix=raw.get("prefix", "u"),
                **ints,
            )
        if "targets" not in raw:
            raise ValueError("missing required key 'targets'")
        return SequenceConfig(_floats(raw["targets"]), prefix=raw.get("prefix", "s"), **ints)
    except TypeError as exc:
        raise ValueError(str(exc)) from None


def simulate(config: Union[WorldConfig, SequenceConfig], workers: int = 1) -> List[TweetRecord]:
    if isinstance(config, WorldConfig):
        return simulate_classical_world(config, workers)
    return simulate_sequence_world(config, workers)


def ground_truth_table(config: Union[WorldConfig, SequenceConfig]) -> Dict[int, float]:
    """Expected P(n) keyed by channel count."""
    if isinstance(config, WorldConfig):
        return {config.channels: ground_truth(config)}
    return {n: t for n, t in enumerate(config.targets, start=1)}
