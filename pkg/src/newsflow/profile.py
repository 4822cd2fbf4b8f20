"""Character n-gram profiles and profile-intersection similarity."""

from __future__ import annotations

import csv
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import NamedTuple, Sequence

import numpy as np

from . import _backend
from .corpus import Corpus, Post

DEFAULT_N = 3
DEFAULT_L = 500
_CHUNK_ROWS = 64


class ProfileError(ValueError):
    pass


@dataclass(frozen=True)
class NgramProfile:
    n: int
    L: int
    grams: tuple[tuple[str, int], ...]

    @property
    def gram_set(self) -> frozenset[str]:
        return frozenset(g for g, _ in self.grams)

    def __len__(self) -> int:
        return len(self.grams)


class Edge(NamedTuple):
    post_a: str
    post_b: str
    score: float


def build_profile(text: str, n: int = DEFAULT_N, L: int = DEFAULT_L) -> NgramProfile:
    """Top-``L`` overlapping character ``n``-grams of the lowercased text.

    Ordered by descending frequency, ties broken by the gram string.
    """
    if n < 1 or L < 1:
        raise ProfileError(f"n and L must be >= 1 (got n={n}, L={L})")
    text = text.lower()
    if len(text) < n:
        raise ProfileError(f"text of length {len(text)} is shorter than n={n}")
    counts = Counter(text[i:i + n] for i in range(len(text) - n + 1))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return NgramProfile(n, L, tuple(ranked[:L]))


def similarity(a: NgramProfile, b: NgramProfile) -> float:
    """Shared gram count over the smaller profile size; frequencies are ignored."""
    if a.n != b.n:
        raise ProfileError(f"profiles built with different n ({a.n} vs {b.n})")
    shared = len(a.gram_set & b.gram_set)
    return shared / min(len(a), len(b))


class ProfileIndex:
    """Integer-encoded profiles of a corpus in id order, ready for the kernel.

    Posts are sorted by id so that index order equals id order, which makes
    ``i < j`` pairs come out already in ``(post_a, post_b)`` order.
    """

    def __init__(self, posts: Sequence[Post], n: int = DEFAULT_N, L: int = DEFAULT_L):
        self.n, self.L = n, L
        self.posts = sorted(posts, key=lambda p: p.id)
        self.post_ids = [p.id for p in self.posts]
        self.profiles = [build_profile(p.text, n, L) for p in self.posts]

        vocab: dict[str, int] = {}
        rows = []
        for prof in self.profiles:
            rows.append(sorted(vocab.setdefault(g, len(vocab)) for g, _ in prof.grams))
        sizes = np.array([len(r) for r in rows], dtype=np.int32)
        indptr = np.zeros(len(rows) + 1, dtype=np.int32)
        np.cumsum(sizes, out=indptr[1:])
        ids = np.fromiter((g for r in rows for g in r), dtype=np.int32, count=int(indptr[-1]))
        self.sizes = sizes
        self.gram_indptr = indptr
        self.gram_ids = ids

        # transpose: gram -> ascending post indices (stable sort keeps row order)
        owners = np.repeat(np.arange(len(rows), dtype=np.int32), sizes)
        order = np.argsort(ids, kind="stable")
        self.post_of_gram = owners[order]
        gram_counts = np.bincount(ids, minlength=len(vocab)).astype(np.int32)
        self.post_indptr = np.zeros(len(vocab) + 1, dtype=np.int32)
        np.cumsum(gram_counts, out=self.post_indptr[1:])

    def __len__(self) -> int:
        return len(self.posts)

    def score_block(self, start: int, stop: int, floor: float, kernel=None):
        kernel = kernel or _backend.score_rows
        return kernel(self.gram_indptr, self.gram_ids, self.sizes,
                      self.post_indptr, self.post_of_gram, start, stop, float(floor))


def pairwise_similarities(corpus: Corpus | ProfileIndex, floor: float = 0.5, *,
                          n: int = DEFAULT_N, L: int = DEFAULT_L, workers: int = 1,
                          kernel=None) -> list[Edge]:
    """All post pairs with similarity >= ``floor``, ordered by ``(post_a, post_b)``.

    Rows are scored in fixed-size blocks; blocks may run on a thread pool
    (the compiled kernel releases the GIL) and are concatenated in block
    order, so the output does not depend on ``workers``.
    """
    index = corpus if isinstance(corpus, ProfileIndex) else ProfileIndex(corpus.posts, n, L)
    total = len(index)
    blocks = [(s, min(s + _CHUNK_ROWS, total)) for s in range(0, total, _CHUNK_ROWS)]

    def run(block):
        return index.score_block(block[0], block[1], floor, kernel)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, blocks))
    else:
        results = [run(b) for b in blocks]

    ids = index.post_ids
    edges = []
    for ia, ja, sa in results:
        edges.extend(Edge(ids[i], ids[j], float(s)) for i, j, s in zip(ia.tolist(), ja.tolist(), sa.tolist()))
    return edges


def brute_force_similarities(posts: Sequence[Post], floor: float, n: int = DEFAULT_N,
                             L: int = DEFAULT_L) -> list[Edge]:
    """Dense O(N^2) reference over :func:`similarity`; for tests and small inputs."""
    ordered = sorted(posts, key=lambda p: p.id)
    profiles = [build_profile(p.text, n, L) for p in ordered]
    out = []
    for (pa, fa), (pb, fb) in combinations(zip(ordered, profiles), 2):
        score = similarity(fa, fb)
        if score >= floor:
            out.append(Edge(pa.id, pb.id, score))
    return out


def avg_account_similarity(corpus: Corpus, account_id: str, n: int = DEFAULT_N,
                           L: int = DEFAULT_L) -> float:
    posts = [p for p in corpus.posts if p.account_id == account_id]
    if len(posts) < 2:
        raise ProfileError(f"account {account_id!r} has {len(posts)} posts; need at least 2")
    profiles = [build_profile(p.text, n, L) for p in posts]
    scores = [similarity(a, b) for a, b in combinations(profiles, 2)]
    return sum(scores) / len(scores)


def write_edges_csv(edges: Sequence[Edge], handle) -> None:
    writer = csv.writer(handle, lineterminator="\n")
    writer.writerow(["post_a", "post_b", "score"])
    for e in edges:
        writer.writerow([e.post_a, e.post_b, f"{e.score:.6f}"])
