"""Tweet corpus readers and retweet-marker extraction.

Two wire formats are supported:

* SNAP 2009 blocks::

      T	2009-06-01 00:00:01
      U	http://twitter.com/alice
      W	hello

  separated by blank lines (space or tab after the tag).
* line-delimited flat JSON objects with ``user``, ``text`` and ``created_at``.

Malformed input is skipped and counted, never fatal.
"""

from __future__ import annotations

import calendar
import io
import json
import re
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import IO, Iterable, Iterator, List, Optional, Union

USERNAME_RE = re.compile(r"[A-Za-z0-9_]{1,15}")
_PROFILE_URL_RE = re.compile(r"^(?:https?://)?(?:www\.)?twitter\.com/([A-Za-z0-9_]{1,15})/?$", re.IGNORECASE)
_RT_MARKER_RE = re.compile(r"[Rr][Tt] @([A-Za-z0-9_]{1,15})")
_NEWLINES_RE = re.compile(r"\r\n|\r|\n")

SNAP_TIME_FORMAT = "%Y-%m-%d %H:%M:%S"

Stream = Union[IO[str], IO[bytes], Iterable[str], Iterable[bytes]]


@dataclass(frozen=True)
class TweetRecord:
    author: str
    timestamp: int
    text: str

    def __post_init__(self):
        if not USERNAME_RE.fullmatch(self.author) or self.author != self.author.lower():
            raise ValueError(f"invalid author {self.author!r}")
        if "\n" in self.text or "\r" in self.text:
            raise ValueError("text must not contain newlines")


@dataclass
class ParseStats:
    """Running counters shared by the readers."""

    parsed: int = 0
    malformed: int = 0

    def merge(self, other: "ParseStats") -> "ParseStats":
        return ParseStats(self.parsed + other.parsed, self.malformed + other.malformed)


def normalize_username(name: str) -> Optional[str]:
    if not isinstance(name, str) or not USERNAME_RE.fullmatch(name):
        return None
    return name.lower()


def normalize_text(text: str) -> str:
    return _NEWLINES_RE.sub(" ", text)


def parse_snap_time(value: str) -> int:
    """``YYYY-MM-DD HH:MM:SS`` (UTC) to epoch seconds."""
    dt = datetime.strptime(value.strip(), SNAP_TIME_FORMAT)
    return calendar.timegm(dt.timetuple())


def format_snap_time(timestamp: int) -> str:
    return datetime.fromtimestamp(timestamp, tz=timezone.utc).strftime(SNAP_TIME_FORMAT)


def _lines(stream: Stream) -> Iterator[str]:
    for line in stream:
        if isinstance(line, bytes):
            line = line.decode("utf-8", errors="replace")
        yield line.rstrip("\r\n")


def _tagged(line: str, tag: str) -> Optional[str]:
    # tag, one separator (space or tab), payload
    if line == tag:
        return ""
    if len(line) >= 2 and line[0] == tag and line[1] in " \t":
        return line[2:]
    return None


def _snap_block(block: List[str]) -> Optional[TweetRecord]:
    if len(block) != 3:
        return None
    t, u, w = (_tagged(block[0], "T"), _tagged(block[1], "U"), _tagged(block[2], "W"))
    if t is None or u is None or w is None:
        return None
    try:
        timestamp = parse_snap_time(t)
    except ValueError:
        return None
    m = _PROFILE_URL_RE.match(u.strip())
    if m is None:
        return None
    return TweetRecord(m.group(1).lower(), timestamp, normalize_text(w))


def parse_snap_stream(stream: Stream, stats: Optional[ParseStats] = None) -> Iterator[TweetRecord]:
    """Yield one record per complete SNAP block.

    A ``T`` line always opens a new block, so concatenated files parse the
    same as their parts even without a separating blank line. The
    ``total number:`` header found at the top of the SNAP dumps is ignored.
    """
    if stats is None:
        stats = ParseStats()
    block: List[str] = []

    def flush():
        if not block:
            return None
        rec = _snap_block(block)
        block.clear()
        if rec is None:
            stats.malformed += 1
        else:
            stats.parsed += 1
        return rec

    for line in _lines(stream):
        if not line.strip():
            rec = flush()
            if rec is not None:
                yield rec
            continue
        if not block and line.startswith("total number:"):
            continue
        if block and _tagged(line, "T") is not None:
            rec = flush()
            if rec is not None:
                yield rec
        block.append(line)
    rec = flush()
    if rec is not None:
        yield rec


def _jsonl_record(line: str) -> Optional[TweetRecord]:
    try:
        obj = json.loads(line)
    except ValueError:
        return None
    if not isinstance(obj, dict):
        return None
    user, text, created = obj.get("user"), obj.get("text"), obj.get("created_at")
    author = normalize_username(user)
    if author is None or not isinstance(text, str):
        return None
    if isinstance(created, bool):
        return None
    if isinstance(created, int):
        timestamp = created
    elif isinstance(created, str):
        try:
            timestamp = parse_snap_time(created)
        except ValueError:
            return None
    else:
        return None
    return TweetRecord(author, timestamp, normalize_text(text))


def parse_jsonl_stream(stream: Stream, stats: Optional[ParseStats] = None) -> Iterator[TweetRecord]:
    """Yield one record per well-formed JSON line; blank lines are ignored."""
    if stats is None:
        stats = ParseStats()
    for line in _lines(stream):
        if not line.strip():
            continue
        rec = _jsonl_record(line)
        if rec is None:
            stats.malformed += 1
            continue
        stats.parsed += 1
        yield rec


PARSERS = {"snap": parse_snap_stream, "jsonl": parse_jsonl_stream}


def read_corpus(path: str, fmt: str = "snap", stats: Optional[ParseStats] = None) -> List[TweetRecord]:
    """Read a whole file (``-`` for stdin) in the given format."""
    try:
        parser = PARSERS[fmt]
    except KeyError:
        raise ValueError(f"unknown format {fmt!r}; expected one of {sorted(PARSERS)}") from None
    if path == "-":
        return list(parser(sys.stdin.buffer, stats))
    with open(path, "rb") as fh:
        return list(parser(fh, stats))


def format_snap(record: TweetRecord) -> str:
    return (
        f"T\t{format_snap_time(record.timestamp)}\n"
        f"U\thttp://twitter.com/{record.author}\n"
        f"W\t{record.text}\n\n"
    )


def format_jsonl(record: TweetRecord) -> str:
    obj = {"user": record.author, "text": record.text, "created_at": record.timestamp}
    return json.dumps(obj, ensure_ascii=False) + "\n"


FORMATTERS = {"snap": format_snap, "jsonl": format_jsonl}


def write_corpus(records: Iterable[TweetRecord], stream: IO[str], fmt: str = "snap") -> int:
    formatter = FORMATTERS[fmt]
    count = 0
    for rec in records:
        stream.write(formatter(rec))
        count += 1
    return count


def dumps_corpus(records: Iterable[TweetRecord], fmt: str = "snap") -> str:
    buf = io.StringIO()
    write_corpus(records, buf, fmt)
    return buf.getvalue()


@dataclass(frozen=True)
class RetweetChain:
    relays: tuple = ()

    def __len__(self):
        return len(self.relays)


def extract_retweet_chain(text: str) -> RetweetChain:
    """Usernames following each ``RT @`` marker, left to right, lowercased.

    ``RT`` is case-insensitive, exactly one space precedes ``@`` and names
    longer than 15 characters are truncated.

    >>> extract_retweet_chain("RT @B1: RT @A: hello").relays
    ('b1', 'a')
    """
    return RetweetChain(tuple(m.group(1).lower() for m in _RT_MARKER_RE.finditer(text)))
