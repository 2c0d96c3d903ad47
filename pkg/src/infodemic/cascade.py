"""Retweet cascades: visibility, counterfactual pruning, and simulation.

A cascade is a seed tweet plus its retweet events in global sequence
order.  Visibility is defined purely by the follower graph and event
order: once the author or any retweeter has acted, all of their followers
(and the actor) can see the tweet from that event's sequence number on.
"""

from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, replace
from datetime import date, timedelta
from enum import Enum
from typing import Iterable, Mapping, Sequence, TextIO

import numpy as np

from ._rng import derive_seed, uniform_for_users
from .graph import SocialGraph, _atomic_write

log = logging.getLogger("infodemic.cascade")

TWEET_HEADER = ["tweet_id", "author_id", "category", "day"]
RETWEET_HEADER = ["user_id", "tweet_id", "day", "seq"]


class CascadeError(ValueError):
    """Invalid cascade data or operation argument."""


class TweetCategory(Enum):
    MISINFORMATION = "misinformation"
    CORRECTIVE = "corrective"
    SOLDOUT = "soldout"

    @classmethod
    def from_label(cls, label: str) -> "TweetCategory":
        try:
            return cls(label.strip().lower())
        except ValueError:
            raise CascadeError(f"unknown tweet category {label!r}") from None


@dataclass(frozen=True)
class SeedTweet:
    tweet_id: str
    author: int
    category: TweetCategory
    day: date
    seq: int


@dataclass(frozen=True)
class RetweetEvent:
    user: int
    tweet_id: str
    day: date
    seq: int


@dataclass(frozen=True)
class Cascade:
    seed: SeedTweet
    events: tuple[RetweetEvent, ...]

    def __post_init__(self):
        seen: set[int] = set()
        prev = self.seed.seq
        for ev in self.events:
            if ev.tweet_id != self.seed.tweet_id:
                raise CascadeError(
                    f"event tweet_id {ev.tweet_id!r} != seed {self.seed.tweet_id!r}"
                )
            if ev.seq <= prev:
                raise CascadeError("events must be strictly increasing in seq")
            if ev.user in seen:
                raise CascadeError(f"user {ev.user} retweets more than once")
            if ev.day < self.seed.day:
                raise CascadeError("event day precedes seed day")
            seen.add(ev.user)
            prev = ev.seq

    @property
    def retweeters(self) -> tuple[int, ...]:
        return tuple(ev.user for ev in self.events)


# -- visibility ------------------------------------------------------------


def visible_set(graph: SocialGraph, cascade: Cascade, seq_limit: int) -> set[int]:
    """Users who could have seen the tweet before `seq_limit`.

    Includes the author and every retweeter as viewers of their own
    action.  Empty if the seed itself is not yet posted at seq_limit.
    """
    if cascade.seed.seq >= seq_limit:
        return set()
    out: set[int] = {cascade.seed.author}
    out.update(int(x) for x in graph.followers_array(cascade.seed.author))
    for ev in cascade.events:
        if ev.seq >= seq_limit:
            break
        out.add(ev.user)
        out.update(int(x) for x in graph.followers_array(ev.user))
    return out


def prune_cascade(graph: SocialGraph, cascade: Cascade, keep: Iterable[int]) -> Cascade:
    """Counterfactually remove retweeters, then close under visibility.

    Every surviving event's user must be visible at the event's seq given
    only the surviving upstream events.  Because visibility only ever
    grows with seq, a single forward scan in seq order computes the unique
    fixpoint that iterated removal would reach in any order.
    """
    keep_set = set(int(u) for u in keep)
    extras = keep_set - set(cascade.retweeters)
    if extras:
        raise CascadeError(f"keep contains non-retweeters: {sorted(extras)[:5]}")
    visible = np.zeros(graph.n_users, dtype=bool)
    visible[cascade.seed.author] = True
    visible[graph.followers_array(cascade.seed.author)] = True
    kept: list[RetweetEvent] = []
    for ev in cascade.events:
        if ev.user in keep_set and visible[ev.user]:
            kept.append(ev)
            visible[ev.user] = True
            visible[graph.followers_array(ev.user)] = True
    return replace(cascade, events=tuple(kept))


def sample_keep_set(cascade: Cascade, retention: float, rng_seed: int) -> frozenset[int]:
    """Uniform subset of retweeters of size round(retention * count).

    Retention levels are nested for a fixed seed: one random permutation
    ranks the retweeters and each level keeps a prefix, so keep(r1) is a
    subset of keep(r2) whenever r1 <= r2.
    """
    if not 0.0 <= retention <= 1.0:
        raise CascadeError("retention must be in [0, 1]")
    users = list(cascade.retweeters)
    rng = np.random.default_rng(derive_seed(rng_seed, "keep", cascade.seed.tweet_id))
    perm = rng.permutation(len(users))
    size = int(np.floor(retention * len(users) + 0.5))
    return frozenset(users[i] for i in perm[:size])


# -- simulation ------------------------------------------------------------


def simulate_cascades(
    graph: SocialGraph,
    seeds: Sequence[SeedTweet],
    rt_rates: Mapping[TweetCategory, float],
    period: tuple[date, date],
    rng_seed: int,
    *,
    corrective_blocks_misinfo: bool = False,
    seq_start: int | None = None,
) -> list[Cascade]:
    """Day-synchronous stochastic diffusion of all seed tweets at once.

    Each day, users who newly entered a tweet's visible set retweet it
    with the category's RT rate; their retweet lands on the next day and
    exposes their followers then.  A user decides at most once per tweet
    (first exposure only).  With `corrective_blocks_misinfo`, a user who
    was already exposed to any corrective tweet as of the start of the
    decision day never retweets misinformation.

    Retweet decisions use one fixed uniform draw per (tweet, user) keyed
    off the seed, so runs with the same seed are coupled across rates:
    raising a rate only ever adds events.
    """
    for cat, r in rt_rates.items():
        if not 0.0 <= r <= 1.0:
            raise CascadeError(f"rt_rate for {cat.value} must be in [0, 1]")
    start, end = period
    if end < start:
        raise CascadeError("empty simulation period")
    for s in seeds:
        if not 0 <= s.author < graph.n_users:
            raise CascadeError(f"seed author {s.author} not in graph")
    n = graph.n_users
    seeds = sorted(seeds, key=lambda s: (s.day, s.seq))
    seq = (max((s.seq for s in seeds), default=0) + 1) if seq_start is None else seq_start

    exposed = [np.zeros(n, dtype=bool) for _ in seeds]
    events: list[list[RetweetEvent]] = [[] for _ in seeds]
    # retweeters whose event lands on the current day, per cascade
    pending: list[np.ndarray] = [np.zeros(0, dtype=np.int64) for _ in seeds]
    corrective_seen = np.zeros(n, dtype=bool)

    day = start
    while day <= end:
        corrective_seen_at_open = corrective_seen.copy() if corrective_blocks_misinfo else None
        newly: list[np.ndarray] = [np.zeros(0, dtype=np.int64) for _ in seeds]
        for i, s in enumerate(seeds):
            fresh: list[np.ndarray] = []
            if s.day == day:
                src = np.concatenate([[s.author], graph.followers_array(s.author)])
                fresh.append(src)
            if len(pending[i]):
                for u in pending[i]:
                    events[i].append(RetweetEvent(int(u), s.tweet_id, day, seq))
                    seq += 1
                    fresh.append(np.concatenate([[u], graph.followers_array(int(u))]))
            if fresh:
                cand = np.unique(np.concatenate(fresh))
                new = cand[~exposed[i][cand]]
                exposed[i][new] = True
                newly[i] = new
                if s.category is TweetCategory.CORRECTIVE:
                    corrective_seen[new] = True
        for i, s in enumerate(seeds):
            rate = rt_rates.get(s.category, 0.0)
            deciders = newly[i]
            deciders = deciders[deciders != s.author]
            if rate <= 0.0 or len(deciders) == 0:
                pending[i] = np.zeros(0, dtype=np.int64)
                continue
            draws = uniform_for_users(
                derive_seed(rng_seed, "rt", s.tweet_id), deciders
            )
            hit = draws < rate
            if (
                corrective_blocks_misinfo
                and s.category is TweetCategory.MISINFORMATION
            ):
                hit &= ~corrective_seen_at_open[deciders]
            pending[i] = deciders[hit]
        day += timedelta(days=1)
    return [Cascade(s, tuple(evs)) for s, evs in zip(seeds, events)]


def simulate_cascade(
    graph: SocialGraph,
    seed_tweet: SeedTweet,
    rt_rate: float,
    horizon: int,
    rng_seed: int,
) -> Cascade:
    """Single-tweet diffusion over `horizon` days starting at the seed day."""
    if horizon < 1:
        raise CascadeError("horizon must be >= 1")
    period = (seed_tweet.day, seed_tweet.day + timedelta(days=horizon - 1))
    (out,) = simulate_cascades(
        graph, [seed_tweet], {seed_tweet.category: rt_rate}, period, rng_seed
    )
    return out


# -- CSV I/O ---------------------------------------------------------------


def load_seed_tweets(stream: TextIO | Iterable[str], graph: SocialGraph) -> list[SeedTweet]:
    """Parse the seed-tweet CSV (`tweet_id,author_id,category,day`).

    Seed seq numbers are not part of the file format; they are assigned
    from day order (ties broken by tweet id) with gaps left for events.
    """
    rows = _read_csv(stream, TWEET_HEADER)
    parsed = []
    for line_no, row in rows:
        try:
            d = date.fromisoformat(row[3])
        except ValueError:
            raise CascadeError(f"line {line_no}: bad date {row[3]!r}") from None
        parsed.append((d, row[0], graph.dense_id(row[1]), TweetCategory.from_label(row[2])))
    parsed.sort(key=lambda t: (t[0], t[1]))
    return [
        SeedTweet(tweet_id=tid, author=a, category=cat, day=d, seq=-(len(parsed) - i))
        for i, (d, tid, a, cat) in enumerate(parsed)
    ]


def load_retweets(
    stream: TextIO | Iterable[str],
    graph: SocialGraph,
    seeds: Sequence[SeedTweet],
) -> list[Cascade]:
    """Parse the retweet CSV (`user_id,tweet_id,day,seq`) into cascades.

    Every seed yields a cascade (possibly with zero events); retweets of
    unknown tweet ids are an error.
    """
    by_tweet = {s.tweet_id: s for s in seeds}
    buckets: dict[str, list[RetweetEvent]] = {s.tweet_id: [] for s in seeds}
    for line_no, row in _read_csv(stream, RETWEET_HEADER):
        tid = row[1]
        if tid not in by_tweet:
            raise CascadeError(f"line {line_no}: retweet of unknown tweet {tid!r}")
        try:
            d = date.fromisoformat(row[2])
            seq = int(row[3])
        except ValueError:
            raise CascadeError(f"line {line_no}: bad day/seq {row[2]!r},{row[3]!r}") from None
        buckets[tid].append(RetweetEvent(graph.dense_id(row[0]), tid, d, seq))
    out = []
    for s in seeds:
        evs = sorted(buckets[s.tweet_id], key=lambda e: e.seq)
        out.append(Cascade(s, tuple(evs)))
    return out


def save_cascades(
    cascades: Sequence[Cascade],
    tweets_path: str | os.PathLike,
    retweets_path: str | os.PathLike,
    graph: SocialGraph,
) -> None:
    tw = ",".join(TWEET_HEADER) + "\n"
    rt = ",".join(RETWEET_HEADER) + "\n"
    for c in cascades:
        tw += (
            f"{c.seed.tweet_id},{graph.external_ids[c.seed.author]},"
            f"{c.seed.category.value},{c.seed.day.isoformat()}\n"
        )
        for ev in c.events:
            rt += (
                f"{graph.external_ids[ev.user]},{ev.tweet_id},"
                f"{ev.day.isoformat()},{ev.seq}\n"
            )
    _atomic_write(tweets_path, tw)
    _atomic_write(retweets_path, rt)


def _read_csv(stream, header: list[str]):
    reader = csv.reader(iter(stream))
    out = []
    saw_header = False
    for line_no, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if not saw_header:
            saw_header = True
            if [c.strip() for c in row] == header:
                continue
            raise CascadeError(f"line {line_no}: expected header {','.join(header)!r}")
        if len(row) != len(header):
            raise CascadeError(f"line {line_no}: malformed record {row!r}")
        out.append((line_no, [c.strip() for c in row]))
    return out
