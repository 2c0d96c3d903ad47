"""What-if experiments: corrective-RT reduction, the misinformation-gated
retweet guideline, and the RT-rate grid sweep.

All experiments run against an immutable graph and a fitted sales model;
each trial derives its own RNG stream from (base seed, cell, trial) so
grids are reproducible and trials independent.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date
from statistics import mean, pstdev
from typing import Sequence

import numpy as np

from ._rng import derive_seed
from .cascade import (
    Cascade,
    CascadeError,
    SeedTweet,
    TweetCategory,
    prune_cascade,
    sample_keep_set,
    simulate_cascades,
)
from .exposure import ExposureMatrix, exposure_matrix, total_exposures
from .graph import SocialGraph, _atomic_write
from .salesmodel import FittedSalesModel, SalesSeries, predict, sum_index

log = logging.getLogger("infodemic.counterfactual")

# the six corrective RT-rate levels studied, highest (real) first, and the
# retention fraction of real corrective retweeters each one represents
CORRECTIVE_RATE_LEVELS: tuple[float, ...] = (0.0079, 0.0063, 0.0047, 0.0032, 0.0016, 0.0)
MISINFO_RATE_LEVELS: tuple[float, ...] = (0.0, 0.00186, 0.01, 0.02, 0.03, 0.04, 0.05)
REAL_CORRECTIVE_RT_RATE = 0.0079
REAL_MISINFO_RT_RATE = 0.00186

# event-time key that totally orders seed posts and retweets across
# cascades, including simulated ones: day first, global seq second
_DAY_SHIFT = 1 << 32


class ExperimentError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    corrective_rt_rate: float = REAL_CORRECTIVE_RT_RATE
    misinfo_rt_rate: float = REAL_MISINFO_RT_RATE
    soldout_rt_rate: float = 0.004
    trials: int = 10
    base_seed: int = 0
    guideline: bool = False
    period: tuple[date, date] | None = None

    def __post_init__(self):
        for r in (self.corrective_rt_rate, self.misinfo_rt_rate, self.soldout_rt_rate):
            if not 0.0 <= r <= 1.0:
                raise ExperimentError("RT rates must be in [0, 1]")
        if self.trials < 1:
            raise ExperimentError("trials must be >= 1")


@dataclass(frozen=True)
class TrialResult:
    trial: int
    matrix: ExposureMatrix
    series: SalesSeries
    sum_index: float
    totals: np.ndarray
    corrective_retweeters_kept: int | None = None

    def __post_init__(self):
        t = np.asarray(self.totals, dtype=np.int64)
        t.setflags(write=False)
        object.__setattr__(self, "totals", t)


@dataclass(frozen=True)
class SweepCell:
    misinfo_rate: float
    corrective_rate: float
    sums: tuple[float, ...]

    @property
    def mean(self) -> float:
        return mean(self.sums)

    @property
    def stddev(self) -> float:
        return pstdev(self.sums)


@dataclass(frozen=True)
class SweepGrid:
    cells: tuple[SweepCell, ...]
    trials: int

    def cell(self, misinfo_rate: float, corrective_rate: float) -> SweepCell:
        for c in self.cells:
            if c.misinfo_rate == misinfo_rate and c.corrective_rate == corrective_rate:
                return c
        raise ExperimentError(f"no cell ({misinfo_rate}, {corrective_rate})")


def _event_key(day: date, seq: int) -> int:
    return day.toordinal() * _DAY_SHIFT + seq


def _result(
    graph: SocialGraph,
    cascades: Sequence[Cascade],
    model: FittedSalesModel,
    period: tuple[date, date],
    trial: int,
    kept: int | None = None,
) -> TrialResult:
    matrix = exposure_matrix(graph, cascades, period)
    series = predict(model, matrix)
    return TrialResult(
        trial=trial,
        matrix=matrix,
        series=series,
        sum_index=sum_index(series),
        totals=total_exposures(matrix),
        corrective_retweeters_kept=kept,
    )


def reduce_corrective(
    graph: SocialGraph,
    real_cascades: Sequence[Cascade],
    model: FittedSalesModel,
    retention: float,
    seed: int,
    period: tuple[date, date],
    trial: int = 0,
) -> TrialResult:
    """Keep a random `retention` fraction of each corrective cascade's
    retweeters, close under visibility, and re-predict the index sum.

    Retention levels share the coupled prefix sampling of
    `sample_keep_set`, so for one seed the kept sets are nested across
    levels and the resulting index sums are noise-free monotone.
    """
    out: list[Cascade] = []
    kept = 0
    for c in real_cascades:
        if c.seed.category is TweetCategory.CORRECTIVE:
            keep = sample_keep_set(c, retention, seed)
            c = prune_cascade(graph, c, keep)
            kept += len(c.events)
        out.append(c)
    return _result(graph, out, model, period, trial, kept)


def guideline_experiment(
    graph: SocialGraph,
    real_cascades: Sequence[Cascade],
    model: FittedSalesModel,
    misinfo_rt_rate: float | None = None,
    seed: int = 0,
    period: tuple[date, date] = None,
    trial: int = 0,
) -> TrialResult:
    """Apply the policy: a corrective retweet survives only if its user
    had been exposed to misinformation strictly before retweeting.

    By default the gate uses the misinformation cascades as recorded in
    `real_cascades` (whose spread already embodies the observed
    misinformation RT rate).  Passing `misinfo_rt_rate` instead
    re-simulates misinformation diffusion at that rate from the real
    misinformation seed tweets; the simulated cascades then both gate the
    corrective events and replace the real ones in the exposure counts.
    """
    others = [
        c for c in real_cascades if c.seed.category is not TweetCategory.MISINFORMATION
    ]
    if misinfo_rt_rate is None:
        mis_cascades = [
            c for c in real_cascades if c.seed.category is TweetCategory.MISINFORMATION
        ]
    else:
        mis_seeds = [
            c.seed
            for c in real_cascades
            if c.seed.category is TweetCategory.MISINFORMATION
        ]
        max_seq = max(
            [c.seed.seq for c in real_cascades]
            + [ev.seq for c in real_cascades for ev in c.events],
            default=0,
        )
        mis_cascades = simulate_cascades(
            graph,
            mis_seeds,
            {TweetCategory.MISINFORMATION: misinfo_rt_rate},
            period,
            derive_seed(seed, "guideline-mis", trial),
            seq_start=max_seq + 1,
        )
    first_mis = np.full(graph.n_users, np.iinfo(np.int64).max, dtype=np.int64)
    for c in mis_cascades:
        key = _event_key(c.seed.day, c.seed.seq)
        idx = np.concatenate([[c.seed.author], graph.followers_array(c.seed.author)])
        np.minimum.at(first_mis, idx, key)
        for ev in c.events:
            key = _event_key(ev.day, ev.seq)
            idx = np.concatenate([[ev.user], graph.followers_array(ev.user)])
            np.minimum.at(first_mis, idx, key)
    out: list[Cascade] = list(mis_cascades)
    kept = 0
    for c in others:
        if c.seed.category is TweetCategory.CORRECTIVE:
            keep = {
                ev.user
                for ev in c.events
                if first_mis[ev.user] < _event_key(ev.day, ev.seq)
            }
            c = prune_cascade(graph, c, keep)
            kept += len(c.events)
        out.append(c)
    return _result(graph, out, model, period, trial, kept)


def simulate_trial(
    graph: SocialGraph,
    seed_tweets: Sequence[SeedTweet],
    model: FittedSalesModel,
    config: ExperimentConfig,
    period: tuple[date, date],
    trial_seed: int,
    trial: int = 0,
) -> TrialResult:
    """One fully regenerated stochastic trial at the config's RT rates.

    Corrective exposure suppresses misinformation retweets (a user who
    already saw a correction does not pass the misinformation on).
    """
    cascades = simulate_cascades(
        graph,
        seed_tweets,
        {
            TweetCategory.MISINFORMATION: config.misinfo_rt_rate,
            TweetCategory.CORRECTIVE: config.corrective_rt_rate,
            TweetCategory.SOLDOUT: config.soldout_rt_rate,
        },
        period,
        trial_seed,
        corrective_blocks_misinfo=True,
    )
    return _result(graph, cascades, model, period, trial)


def sweep(
    graph: SocialGraph,
    seed_tweets: Sequence[SeedTweet],
    model: FittedSalesModel,
    corrective_rates: Sequence[float],
    misinfo_rates: Sequence[float],
    trials: int,
    base_seed: int,
    period: tuple[date, date],
    soldout_rt_rate: float = 0.004,
    threads: int = 1,
) -> SweepGrid:
    """Full rate grid; per cell, `trials` regenerated runs and their
    index-sum statistics.

    Trial seeds depend only on (base_seed, trial), not on the cell, so
    runs at different rates within one trial share their per-(tweet,
    user) retweet draws and are monotone-coupled across rates.
    """
    if not corrective_rates or not misinfo_rates:
        raise ExperimentError("rate lists must be non-empty")
    jobs = []
    for mi, m_rate in enumerate(misinfo_rates):
        for ci, c_rate in enumerate(corrective_rates):
            cfg = ExperimentConfig(
                corrective_rt_rate=c_rate,
                misinfo_rt_rate=m_rate,
                soldout_rt_rate=soldout_rt_rate,
                trials=trials,
                base_seed=base_seed,
            )
            for t in range(trials):
                jobs.append((mi, ci, m_rate, c_rate, cfg, t))

    def run(job):
        mi, ci, m_rate, c_rate, cfg, t = job
        ts = derive_seed(base_seed, "trial", t)
        return simulate_trial(graph, seed_tweets, model, cfg, period, ts, t).sum_index

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            sums = list(pool.map(run, jobs))
    else:
        sums = [run(j) for j in jobs]
    by_cell: dict[tuple[int, int], list[float]] = {}
    for job, s in zip(jobs, sums):
        by_cell.setdefault((job[0], job[1]), []).append(s)
    cells = []
    for mi, m_rate in enumerate(misinfo_rates):
        for ci, c_rate in enumerate(corrective_rates):
            cells.append(SweepCell(m_rate, c_rate, tuple(by_cell[(mi, ci)])))
    return SweepGrid(tuple(cells), trials)


def compare(baseline_sum: float, variant_sum: float) -> float:
    """Fractional reduction of the index sum relative to the baseline."""
    if baseline_sum == 0:
        raise ExperimentError("baseline sum is zero")
    return (baseline_sum - variant_sum) / baseline_sum


# -- CSV output ------------------------------------------------------------


def sweep_trials_csv(
    grid: SweepGrid, path: str | os.PathLike, header_comments: Sequence[str] = ()
) -> None:
    lines = [f"# {c}" for c in header_comments]
    lines.append("misinfo_rate,corrective_rate,trial,sum_sales_index")
    for c in grid.cells:
        for t, s in enumerate(c.sums):
            lines.append(f"{c.misinfo_rate!r},{c.corrective_rate!r},{t},{s!r}")
    _atomic_write(path, "\n".join(lines) + "\n")


def sweep_summary_csv(
    grid: SweepGrid, path: str | os.PathLike, header_comments: Sequence[str] = ()
) -> None:
    lines = [f"# {c}" for c in header_comments]
    lines.append("misinfo_rate,corrective_rate,mean,stddev,trials")
    for c in grid.cells:
        lines.append(
            f"{c.misinfo_rate!r},{c.corrective_rate!r},{c.mean!r},{c.stddev!r},{grid.trials}"
        )
    _atomic_write(path, "\n".join(lines) + "\n")
