import io
from datetime import date, timedelta

import numpy as np
import pytest

from conftest import DAY0, random_graph
from infodemic.cascade import Cascade, RetweetEvent, SeedTweet, TweetCategory
from infodemic.exposure import (
    CLASS_CATEGORIES,
    ExposureError,
    ExposureMatrix,
    daily_exposures,
    exposure_matrix,
    total_exposures,
)
from infodemic.graph import SocialGraph


def seed(author, cat, day=DAY0, tid=None, seq=0):
    tid = tid or f"{cat.value[:1]}{author}-{seq}"
    return SeedTweet(tweet_id=tid, author=author, category=cat, day=day, seq=seq)


def oracle_daily(graph, cascades, day, *, cumulative=False, include_actors=True):
    """Classify each user independently by scanning every event."""
    per_user = [set() for _ in range(graph.n_users)]

    def mark(actor, cat):
        for f in graph.followers_array(actor):
            per_user[int(f)].add(cat)
        if include_actors:
            per_user[actor].add(cat)

    for c in cascades:
        if c.seed.day == day or (cumulative and c.seed.day <= day):
            mark(c.seed.author, c.seed.category)
        for e in c.events:
            if e.day == day or (cumulative and e.day <= day):
                mark(e.user, c.seed.category)
    counts = [0] * 7
    for cats in per_user:
        if cats:
            counts[CLASS_CATEGORIES.index(frozenset(cats))] += 1
    return tuple(counts)


def _random_cascades(rng, g):
    out = []
    seq = 0
    for cat in TweetCategory:
        for _ in range(int(rng.integers(0, 3))):
            day = DAY0 + timedelta(days=int(rng.integers(0, 4)))
            s = seed(int(rng.integers(g.n_users)), cat, day=day, tid=f"t{seq}", seq=seq)
            seq += 1
            events = []
            for u in rng.permutation(g.n_users)[: rng.integers(0, 4)]:
                if int(u) == s.author or any(e.user == int(u) for e in events):
                    continue
                events.append(
                    RetweetEvent(int(u), s.tweet_id, day + timedelta(days=int(rng.integers(0, 3))), seq)
                )
                seq += 1
            events.sort(key=lambda e: e.seq)
            out.append(Cascade(s, tuple(events)))
    return out


@pytest.mark.parametrize("cumulative", [False, True])
@pytest.mark.parametrize("include_actors", [False, True])
def test_daily_exposures_matches_per_user_oracle(cumulative, include_actors):
    rng = np.random.default_rng(7 + cumulative * 2 + include_actors)
    for _ in range(50):
        g = random_graph(rng)
        cascades = _random_cascades(rng, g)
        for d in range(6):
            day = DAY0 + timedelta(days=d)
            got = daily_exposures(
                g, cascades, day, cumulative=cumulative, include_actors=include_actors
            ).counts
            want = oracle_daily(
                g, cascades, day, cumulative=cumulative, include_actors=include_actors
            )
            assert got == want


def test_classes_partition_exposed_users():
    # one author per category, shared audience: day counts are disjoint classes
    g = SocialGraph(5, [(3, 0), (3, 1), (3, 2), (4, 0)])
    cascades = [
        Cascade(seed(0, TweetCategory.CORRECTIVE, seq=0), ()),
        Cascade(seed(1, TweetCategory.MISINFORMATION, seq=1), ()),
        Cascade(seed(2, TweetCategory.SOLDOUT, seq=2), ()),
    ]
    d = daily_exposures(g, cascades, DAY0)
    # user 3 sees all three (x7), user 4 and authors 0..2 see corrective only
    # (authors count as viewers of their own tweet), 1 and 2 see their own
    assert d.counts == (2, 1, 1, 0, 0, 0, 1)
    assert d.total_exposed == 5


def test_no_exposure_outside_event_days():
    g = SocialGraph(2, [(1, 0)])
    cascades = [Cascade(seed(0, TweetCategory.CORRECTIVE), ())]
    later = daily_exposures(g, cascades, DAY0 + timedelta(days=1))
    assert later.counts == (0,) * 7
    cum = daily_exposures(g, cascades, DAY0 + timedelta(days=1), cumulative=True)
    assert cum.counts == (2, 0, 0, 0, 0, 0, 0)


def test_exposure_matrix_and_totals():
    g = SocialGraph(3, [(1, 0), (2, 0)])
    cascades = [
        Cascade(seed(0, TweetCategory.CORRECTIVE, day=DAY0), ()),
        Cascade(seed(0, TweetCategory.MISINFORMATION, day=DAY0 + timedelta(days=1), seq=1), ()),
    ]
    m = exposure_matrix(g, cascades, (DAY0, DAY0 + timedelta(days=2)))
    assert m.counts.shape == (3, 7)
    assert m.counts[0, 0] == 3 and m.counts[1, 1] == 3
    assert list(total_exposures(m)) == [3, 3, 0, 0, 0, 0, 0]
    rows = m.rows()
    assert rows[2].counts == (0,) * 7


def test_exposure_matrix_validation():
    with pytest.raises(ExposureError):
        ExposureMatrix((DAY0, DAY0 + timedelta(days=2)), np.zeros((2, 7), dtype=int))
    with pytest.raises(ExposureError):
        ExposureMatrix((DAY0,), np.zeros((1, 6), dtype=int))
    g = SocialGraph(1, [])
    with pytest.raises(ExposureError):
        exposure_matrix(g, [], (DAY0, DAY0 - timedelta(days=1)))


def test_matrix_csv_roundtrip(tmp_path):
    days = tuple(DAY0 + timedelta(days=i) for i in range(3))
    counts = np.arange(21).reshape(3, 7)
    m = ExposureMatrix(days, counts)
    path = tmp_path / "exposure.csv"
    m.to_csv(path, header_comments=["generated for test"])
    text = path.read_text()
    assert text.startswith("# generated for test\n")
    back = ExposureMatrix.from_csv(io.StringIO(text))
    assert back.days == days
    assert np.array_equal(back.counts, counts)


def test_matrix_csv_rejects_garbage():
    with pytest.raises(ExposureError):
        ExposureMatrix.from_csv(io.StringIO("nope\n"))
    bad_row = "day,x1,x2,x3,x4,x5,x6,x7\n2020-02-21,1,2\n"
    with pytest.raises(ExposureError):
        ExposureMatrix.from_csv(io.StringIO(bad_row))
