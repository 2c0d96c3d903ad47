"""Follower graphs: ingestion, synthesis, and adjacency queries.

Edge direction convention: an edge (u, v) means "u follows v", so
information posted by v flows to u.  `follows` is the forward adjacency
(who a user follows) and `followers` the reverse one (the user's audience).
Graphs are immutable after construction and safe for concurrent reads.
"""

from __future__ import annotations

import csv
import io
import logging
import os
import tempfile
from dataclasses import dataclass
from typing import Iterable, Iterator, TextIO

import numpy as np

log = logging.getLogger("infodemic.graph")

EDGE_HEADER = ["follower_id", "followee_id"]


class GraphError(ValueError):
    """Invalid graph input or query."""


class EdgeParseError(GraphError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class _Csr:
    """Compact adjacency: per-node sorted neighbor arrays."""

    __slots__ = ("indptr", "indices")

    def __init__(self, n: int, src: np.ndarray, dst: np.ndarray):
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(self.indptr, src + 1, 1)
        np.cumsum(self.indptr, out=self.indptr)
        self.indices = dst.astype(np.int64)
        self.indptr.setflags(write=False)
        self.indices.setflags(write=False)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u] : self.indptr[u + 1]]


class SocialGraph:
    """Immutable follower graph over dense user ids 0..n_users-1.

    External (string) ids from ingestion are retained for round-trip
    export; synthesized graphs use the stringified dense id.
    """

    def __init__(
        self,
        n_users: int,
        edges: Iterable[tuple[int, int]],
        external_ids: list[str] | None = None,
        self_edges_dropped: int = 0,
    ):
        pairs = {(int(a), int(b)) for a, b in edges}
        dropped = sum(1 for a, b in pairs if a == b)
        pairs = {(a, b) for a, b in pairs if a != b}
        if pairs:
            arr = np.array(sorted(pairs), dtype=np.int64)
            if arr.min() < 0 or arr.max() >= n_users:
                raise GraphError("edge endpoint outside 0..n_users-1")
            src, dst = arr[:, 0], arr[:, 1]
        else:
            src = dst = np.zeros(0, dtype=np.int64)
        self.n_users = int(n_users)
        self.n_edges = len(src)
        self.self_edges_dropped = self_edges_dropped + dropped
        self._follows = _Csr(self.n_users, src, dst)
        self._followers = _Csr(self.n_users, dst, src)
        if external_ids is None:
            external_ids = [str(i) for i in range(self.n_users)]
        if len(external_ids) != self.n_users:
            raise GraphError("external_ids length must equal n_users")
        self.external_ids = tuple(external_ids)
        self._id_index = {x: i for i, x in enumerate(self.external_ids)}

    # -- queries -----------------------------------------------------------

    def _check(self, u: int) -> int:
        if not 0 <= u < self.n_users:
            raise GraphError(f"user id {u} out of range 0..{self.n_users - 1}")
        return int(u)

    def follows(self, u: int) -> np.ndarray:
        """Users that u follows (sorted, read-only)."""
        return self._follows.neighbors(self._check(u))

    def followers_array(self, u: int) -> np.ndarray:
        """Followers of u as a sorted read-only array (hot path)."""
        return self._followers.neighbors(self._check(u))

    def followers_of(self, u: int) -> set[int]:
        """Followers of u as a plain set."""
        return set(int(x) for x in self.followers_array(u))

    def out_degrees(self) -> np.ndarray:
        return np.diff(self._follows.indptr)

    def in_degrees(self) -> np.ndarray:
        return np.diff(self._followers.indptr)

    def dense_id(self, external: str) -> int:
        try:
            return self._id_index[external]
        except KeyError:
            raise GraphError(f"unknown user id {external!r}") from None

    def edge_list(self) -> Iterator[tuple[int, int]]:
        for u in range(self.n_users):
            for v in self.follows(u):
                yield u, int(v)


@dataclass(frozen=True)
class GraphGenConfig:
    """Synthetic follower-graph recipe.

    Out-degrees (follows counts) are drawn from a truncated discrete power
    law with the given exponent, or are all `fixed_degree` when set.
    Followees are chosen with popularity weights that are themselves
    power-law distributed, which produces heavy-tailed follower counts.
    """

    n_users: int
    exponent: float = 2.5
    min_degree: int = 1
    max_degree: int | None = None
    fixed_degree: int | None = None
    # shape of the followee-popularity weights (smaller = more concentrated
    # follower counts on a few hub accounts)
    popularity_exponent: float = 1.5
    seed: int = 0

    def __post_init__(self):
        if self.n_users < 0:
            raise GraphError("n_users must be >= 0")
        if self.n_users == 0:
            return
        if self.fixed_degree is not None:
            if not 0 <= self.fixed_degree < self.n_users:
                raise GraphError("fixed_degree must be in [0, n_users)")
            return
        if not self.exponent > 1:
            raise GraphError("power-law exponent must be > 1")
        hi = self.n_users - 1 if self.max_degree is None else self.max_degree
        if not 0 <= self.min_degree <= hi < self.n_users:
            raise GraphError("need 0 <= min_degree <= max_degree < n_users")


def generate_graph(config: GraphGenConfig) -> SocialGraph:
    """Deterministic synthetic graph for a fixed config (seed included)."""
    n = config.n_users
    if n == 0:
        return SocialGraph(0, [])
    rng = np.random.default_rng(config.seed)
    if config.fixed_degree is not None:
        degrees = np.full(n, config.fixed_degree, dtype=np.int64)
    else:
        lo = max(config.min_degree, 0)
        hi = config.n_users - 1 if config.max_degree is None else config.max_degree
        ks = np.arange(max(lo, 1), hi + 1, dtype=np.float64)
        if len(ks) == 0:
            degrees = np.zeros(n, dtype=np.int64)
        else:
            w = ks ** (-config.exponent)
            w /= w.sum()
            degrees = rng.choice(ks.astype(np.int64), size=n, p=w)
    # popularity weights: heavy-tailed follower counts
    pop = rng.pareto(config.popularity_exponent, size=n) + 1.0
    cum = np.cumsum(pop / pop.sum())
    cum[-1] = 1.0
    edges: set[tuple[int, int]] = set()
    for u in range(n):
        d = int(min(degrees[u], n - 1))
        if d == 0:
            continue
        chosen: set[int] = set()
        attempts = 0
        while len(chosen) < d and attempts < 20:
            need = d - len(chosen)
            cand = np.searchsorted(cum, rng.random(need * 2 + 4))
            for v in cand:
                v = int(v)
                if v != u and v not in chosen:
                    chosen.add(v)
                    if len(chosen) == d:
                        break
            attempts += 1
        edges.update((u, v) for v in chosen)
    return SocialGraph(n, edges)


def load_edges(stream: TextIO | Iterable[str]) -> SocialGraph:
    """Parse `follower_id,followee_id` CSV records into a graph.

    Duplicate edges collapse to one; self-edges are dropped and counted
    (exposed as `SocialGraph.self_edges_dropped`, with a logged warning).
    External ids are remapped to dense integers in first-appearance order.
    """
    reader = csv.reader(iter(stream))
    ids: dict[str, int] = {}
    order: list[str] = []

    def dense(x: str) -> int:
        if x not in ids:
            ids[x] = len(order)
            order.append(x)
        return ids[x]

    pairs: set[tuple[int, int]] = set()
    self_edges = 0
    saw_header = False
    for line_no, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if not saw_header:
            saw_header = True
            if [c.strip() for c in row] == EDGE_HEADER:
                continue
            raise EdgeParseError(line_no, f"expected header {','.join(EDGE_HEADER)!r}")
        if len(row) != 2 or not row[0].strip() or not row[1].strip():
            raise EdgeParseError(line_no, f"malformed edge record {row!r}")
        a, b = row[0].strip(), row[1].strip()
        if a == b:
            self_edges += 1
            continue
        pairs.add((dense(a), dense(b)))
    if self_edges:
        log.warning("dropped %d self-follow edge(s)", self_edges)
    return SocialGraph(len(order), pairs, external_ids=order, self_edges_dropped=self_edges)


def load_edges_file(path: str | os.PathLike) -> SocialGraph:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        return load_edges(fh)


def save_edges(graph: SocialGraph, path: str | os.PathLike) -> None:
    """Write the edge CSV atomically (temp file + rename)."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(EDGE_HEADER)
    for u, v in graph.edge_list():
        w.writerow([graph.external_ids[u], graph.external_ids[v]])
    _atomic_write(path, buf.getvalue())


def _atomic_write(path: str | os.PathLike, text: str) -> None:
    d = os.path.dirname(os.fspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
