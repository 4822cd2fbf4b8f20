"""Replica detection and originator assignment.

Edge scores are split with Jenks natural breaks; edges above the upper
break join posts into replica clusters (connected components), and each
cluster's originator is the earliest post, with posting-hour profiles
breaking near-simultaneous ties.
"""

from __future__ import annotations

import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import Corpus, Post
from .profile import Edge

logger = logging.getLogger(__name__)

FALLBACK_THRESHOLD = 0.8
DEFAULT_EPSILON = 300
CIRCADIAN_ALPHA = 0.5


class JenksError(ValueError):
    pass


@dataclass(frozen=True)
class JenksBreaks:
    k: int
    breaks: tuple[float, ...]
    gvf: float
    sdcm: float
    class_sizes: tuple[int, ...]


def _ssd(values) -> float:
    """Sum of squared deviations from the mean, correctly rounded."""
    values = list(values)
    mean = math.fsum(values) / len(values)
    return math.fsum((v - mean) ** 2 for v in values)


def _split_cost(csum, csum2, cw, lo, hi):
    """Within-class squared deviation for class ``[lo, hi)`` from prefix sums (vectorised)."""
    w = cw[hi] - cw[lo]
    s = csum[hi] - csum[lo]
    return (csum2[hi] - csum2[lo]) - s * s / w


def _best_two_split(x: np.ndarray) -> int:
    """Size of the lower class of the optimal 2-class split of sorted ``x``."""
    xc = x - x.mean()
    csum = np.concatenate(([0.0], np.cumsum(xc)))
    csum2 = np.concatenate(([0.0], np.cumsum(xc * xc)))
    cw = np.arange(len(x) + 1, dtype=float)
    n = len(x)
    cut = np.arange(1, n)
    cost = _split_cost(csum, csum2, cw, 0, cut) + _split_cost(csum, csum2, cw, cut, n)
    # re-rank near-ties with exact sums so rounding in the prefix sums cannot
    # pick a worse split; the smallest lower class wins exact ties
    best = cost.min()
    tol = 16 * n * np.finfo(float).eps * max(abs(best), csum2[-1])
    near = np.flatnonzero(cost <= best + tol)
    if len(near) == 1:
        return int(cut[near[0]])
    contenders = cut[near[np.argsort(cost[near], kind="stable")[:16]]]
    exact = [(_ssd(x[:c]) + _ssd(x[c:]), int(c)) for c in contenders]
    return min(exact)[1]


def _dp_partition(values: np.ndarray, weights: np.ndarray, k: int) -> list[int]:
    """Optimal k-class partition of weighted sorted distinct values.

    Suffix dynamic program: ``best[c][i]`` is the minimum cost of splitting
    ``values[i:]`` into ``c`` classes.  The forward pass then takes the
    shortest optimal first class at each step, which yields the
    lexicographically smallest class-size vector among optimal partitions.
    Returns the class boundaries in distinct-value indices.
    """
    m = len(values)
    xc = values - np.average(values, weights=weights)
    cw = np.concatenate(([0.0], np.cumsum(weights)))
    csum = np.concatenate(([0.0], np.cumsum(weights * xc)))
    csum2 = np.concatenate(([0.0], np.cumsum(weights * xc * xc)))

    inf = np.inf
    best = np.full((k + 1, m + 1), inf)
    best[0, m] = 0.0
    idx = np.arange(m + 1)
    for c in range(1, k + 1):
        for i in range(m - c, -1, -1):
            ends = idx[i + 1:m - c + 2]
            tails = best[c - 1, ends]
            cost = _split_cost(csum, csum2, cw, i, ends) + tails
            best[c, i] = cost.min()

    bounds = [0]
    i = 0
    for c in range(k, 1, -1):
        ends = idx[i + 1:m - c + 2]
        cost = _split_cost(csum, csum2, cw, i, ends) + best[c - 1, ends]
        i = int(ends[np.argmin(cost)])
        bounds.append(i)
    bounds.append(m)
    return bounds


def jenks_breaks(values: Sequence[float], k: int = 2) -> JenksBreaks:
    """Exact Jenks natural breaks for ``k`` classes.

    Breaks are midpoints between the largest value of one class and the
    smallest value of the next.  Raises :class:`JenksError` for fewer values
    than classes or for fewer than ``k`` distinct values.
    """
    if k < 2:
        raise JenksError("k must be >= 2")
    x = np.sort(np.asarray(values, dtype=float))
    if len(x) < k:
        raise JenksError(f"need at least k={k} values, got {len(x)}")
    distinct, counts = np.unique(x, return_counts=True)
    if len(distinct) < k:
        raise JenksError(f"need at least k={k} distinct values, got {len(distinct)}")

    if k == 2:
        sizes = [0, _best_two_split(x), len(x)]
    else:
        bounds = _dp_partition(distinct, counts.astype(float), k)
        cum = np.concatenate(([0], np.cumsum(counts)))
        sizes = [int(cum[b]) for b in bounds]

    classes = [x[sizes[c]:sizes[c + 1]] for c in range(k)]
    breaks = tuple(float((classes[c][-1] + classes[c + 1][0]) / 2) for c in range(k - 1))
    sdcm = math.fsum(_ssd(cls) for cls in classes)
    sdam = _ssd(x)
    # sdam can underflow to 0 for tiny distinct values; such data is perfectly split
    gvf = 1.0 - sdcm / sdam if sdam > 0 else 1.0
    return JenksBreaks(k, breaks, min(max(gvf, 0.0), 1.0), sdcm, tuple(len(c) for c in classes))


class _UnionFind:
    def __init__(self, items: Iterable[str]):
        self.parent = {x: x for x in items}

    def find(self, x: str) -> str:
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # smaller id becomes the root, keeps roots deterministic
            if rb < ra:
                ra, rb = rb, ra
            self.parent[rb] = ra


def cluster_replicas(edges: Iterable[Edge], threshold: float, post_ids: Iterable[str]) -> list[list[str]]:
    """Connected components over edges with ``score >= threshold``.

    Each cluster is a sorted list of post ids; clusters are ordered by their
    smallest id.  Posts without a qualifying edge are singletons.
    """
    uf = _UnionFind(post_ids)
    for e in edges:
        if e.score >= threshold:
            uf.union(e.post_a, e.post_b)
    groups: dict[str, list[str]] = defaultdict(list)
    for pid in uf.parent:
        groups[uf.find(pid)].append(pid)
    clusters = [sorted(g) for g in groups.values()]
    clusters.sort(key=lambda c: c[0])
    return clusters


@dataclass(frozen=True)
class CircadianProfile:
    bins: tuple[float, ...]

    def __getitem__(self, hour: int) -> float:
        return self.bins[hour]


def build_circadian(posts: Sequence[Post], alpha: float = CIRCADIAN_ALPHA) -> CircadianProfile:
    """Laplace-smoothed share of an account's posts per UTC hour."""
    if not posts:
        raise ValueError("cannot build a circadian profile from zero posts")
    counts = [0] * 24
    for p in posts:
        counts[p.hour] += 1
    total = len(posts) + 24 * alpha
    return CircadianProfile(tuple((c + alpha) / total for c in counts))


def build_circadians(corpus: Corpus, alpha: float = CIRCADIAN_ALPHA) -> dict[str, CircadianProfile]:
    return {aid: build_circadian(posts, alpha)
            for aid, posts in corpus.posts_by_account().items() if posts}


def assign_originator(cluster: Sequence[Post], circadians: Mapping[str, CircadianProfile],
                      epsilon: float = DEFAULT_EPSILON) -> tuple[str, str]:
    """Pick ``(post_id, account_id)`` of the originating post of a cluster."""
    if not cluster:
        raise ValueError("empty cluster")
    first = min(p.timestamp for p in cluster)
    candidates = [p for p in cluster if p.timestamp <= first + epsilon]
    if len(candidates) == 1:
        winner = candidates[0]
    else:
        winner = min(candidates,
                     key=lambda p: (-circadians[p.account_id][p.hour], p.account_id, p.id))
    return winner.id, winner.account_id


@dataclass(frozen=True)
class ReplicaCluster:
    cluster_id: int
    post_ids: tuple[str, ...]
    originator_post: str
    originator_account: str


@dataclass(frozen=True)
class AttributionResult:
    clusters: tuple[ReplicaCluster, ...]
    replica_threshold: float
    gvf: float | None
    used_fallback: bool

    def cluster_of(self) -> dict[str, int]:
        return {pid: c.cluster_id for c in self.clusters for pid in c.post_ids}


def choose_threshold(scores: Sequence[float], k: int = 2) -> tuple[float, float | None, bool]:
    """Upper Jenks break of the edge scores, or the fixed fallback."""
    try:
        jb = jenks_breaks(scores, k)
    except JenksError as exc:
        logger.warning("Jenks split unavailable (%s); using fixed replica threshold %.2f",
                       exc, FALLBACK_THRESHOLD)
        return FALLBACK_THRESHOLD, None, True
    return jb.breaks[-1], jb.gvf, False


def attribute(corpus: Corpus, edges: Sequence[Edge], k: int = 2,
              epsilon: float = DEFAULT_EPSILON) -> AttributionResult:
    threshold, gvf, fallback = choose_threshold([e.score for e in edges], k)
    by_id = {p.id: p for p in corpus.posts}
    circadians = build_circadians(corpus)
    clusters = []
    for cid, members in enumerate(cluster_replicas(edges, threshold, by_id)):
        posts = [by_id[pid] for pid in members]
        opost, oacc = assign_originator(posts, circadians, epsilon)
        clusters.append(ReplicaCluster(cid, tuple(members), opost, oacc))
    return AttributionResult(tuple(clusters), threshold, gvf, fallback)
