"""Synthetic corpora with planted replicas, and scoring of attribution output.

All randomness is drawn as integers from a seeded PCG64 stream, so a seed
reproduces the same corpus on every platform.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Mapping

import numpy as np

from .attribution import AttributionResult
from .corpus import Corpus, MediaAccount, Platform, Post, ReactionCounts, preprocess

ARCHETYPES = ("producer", "provider", "consumer")
# relative chance that a slot of this archetype is a replica / an original of it gets copied
_REPLICA_WEIGHT = {"producer": 1, "provider": 2, "consumer": 12}
_SOURCE_WEIGHT = {"producer": 2, "provider": 10, "consumer": 1}
_START = 1_546_300_800  # 2019-01-01T00:00:00Z
_SPAN_DAYS = 60
_SUCCESSORS = 12


class SynthError(ValueError):
    pass


@lru_cache(maxsize=1)
def word_list() -> tuple[str, ...]:
    text = resources.files("newsflow").joinpath("data/words.txt").read_text(encoding="utf-8")
    return tuple(w for w in text.split() if w)


@dataclass(frozen=True)
class SynthConfig:
    accounts: int = 48
    posts_per_account: int = 200
    replica_rate: float = 0.3
    mutation_rate: float = 0.1
    copy_delay: tuple[int, int] = (60, 14_400)
    archetype_mix: tuple[float, float, float] = (0.2, 0.2, 0.6)
    seed: int = 0

    def __post_init__(self):
        if self.accounts < 1 or self.posts_per_account < 1:
            raise SynthError("accounts and posts_per_account must be >= 1")
        for name in ("replica_rate", "mutation_rate"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise SynthError(f"{name} must be in [0, 1]")
        if any(not 0.0 <= f <= 1.0 for f in self.archetype_mix) or len(self.archetype_mix) != 3:
            raise SynthError("archetype_mix must be three fractions in [0, 1]")
        lo, hi = self.copy_delay
        if lo < 0 or lo > hi:
            raise SynthError("copy_delay must satisfy 0 <= min <= max")
        if self.replica_rate > 0 and self.accounts < 2:
            raise SynthError("replicas need at least 2 accounts")


@dataclass(frozen=True)
class GroundTruth:
    cluster_of: Mapping[str, int]
    originator: Mapping[str, bool] = field(default_factory=dict)

    def clusters(self) -> dict[int, list[str]]:
        out: dict[int, list[str]] = {}
        for pid in sorted(self.cluster_of):
            out.setdefault(self.cluster_of[pid], []).append(pid)
        return out


def replica_count(config: SynthConfig) -> int:
    """``floor(replica_rate * total posts)``, with the rate read as the decimal it was written as."""
    return math.floor(Fraction(repr(config.replica_rate)) * config.accounts * config.posts_per_account)


def _zipf_weight(rank: int) -> int:
    """``2**30 / rank**0.75`` in integer arithmetic."""
    return (1 << 40) // math.isqrt(math.isqrt(rank ** 3 << 40))


class _TokenModel:
    """Markov chain over the word list with Zipf-shaped integer weights."""

    def __init__(self, rng: np.random.Generator):
        self.words = word_list()
        v = len(self.words)
        zipf = np.array([_zipf_weight(r) for r in range(1, v + 1)], dtype=np.int64)
        self.rank_to_word = rng.permutation(v)
        self.cum = np.cumsum(zipf)
        self.succ = self._draw_ranks(rng, (v, _SUCCESSORS))
        self.succ_cum = np.cumsum(np.arange(_SUCCESSORS, 0, -1, dtype=np.int64))
        self.rng = rng

    def _draw_ranks(self, rng, size):
        return np.searchsorted(self.cum, rng.integers(0, self.cum[-1], size=size), side="right")

    def sentence(self, length: int) -> list[str]:
        rng = self.rng
        rank = int(self._draw_ranks(rng, None))
        out = []
        for _ in range(length):
            out.append(self.words[self.rank_to_word[rank]])
            if rng.integers(4) == 0:
                rank = int(self._draw_ranks(rng, None))
            else:
                k = int(np.searchsorted(self.succ_cum, rng.integers(0, self.succ_cum[-1]), side="right"))
                rank = int(self.succ[rank, k])
        return out

    def random_word(self) -> str:
        return self.words[self.rank_to_word[int(self._draw_ranks(self.rng, None))]]


def _weighted_pick(rng, weights: np.ndarray) -> int:
    cum = np.cumsum(weights)
    return int(np.searchsorted(cum, rng.integers(0, cum[-1]), side="right"))


def _mutate(tokens: list[str], rate: float, model: _TokenModel, rng) -> list[str]:
    n_edit = int(rate * len(tokens))
    if n_edit == 0:
        return list(tokens)
    positions = set(rng.permutation(len(tokens))[:n_edit].tolist())
    out = []
    for i, tok in enumerate(tokens):
        if i not in positions:
            out.append(tok)
        elif rng.integers(2) == 0:
            out.append(model.random_word())
        # else: deleted
    return out


def _short_url(rng) -> str:
    alphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789"
    return "https://t.co/" + "".join(alphabet[i] for i in rng.integers(0, len(alphabet), size=8))


def generate_corpus(config: SynthConfig) -> tuple[Corpus, GroundTruth]:
    rng = np.random.default_rng(config.seed)
    model = _TokenModel(rng)
    n_acc, per = config.accounts, config.posts_per_account
    total = n_acc * per
    n_rep = replica_count(config)

    # accounts and archetypes
    counts = [int(f * n_acc) for f in config.archetype_mix[:2]]
    counts.append(max(n_acc - sum(counts), 0))
    archetypes = [a for a, c in zip(ARCHETYPES, counts) for _ in range(c)][:n_acc]
    archetypes = [archetypes[i] for i in rng.permutation(n_acc)]
    accounts: dict[str, MediaAccount] = {}
    peak = rng.integers(0, 24, size=n_acc)
    for a in range(n_acc):
        aid = f"acct{a:03d}"
        platform = "twitter" if a % 2 == 0 else "facebook"
        followers = int(10 ** (3 + rng.integers(0, 4001) / 1000))
        accounts[aid] = MediaAccount(aid, f"Outlet {a}", Platform(platform), followers)
    acc_ids = list(accounts)

    # which slots are replicas
    slot_account = np.repeat(np.arange(n_acc), per)
    slot_weight = np.array([_REPLICA_WEIGHT[archetypes[a]] for a in slot_account], dtype=np.int64)
    is_replica = np.zeros(total, dtype=bool)
    for _ in range(n_rep):
        s = _weighted_pick(rng, np.where(is_replica, 0, slot_weight))
        is_replica[s] = True
    if n_rep and is_replica.all():
        raise SynthError("replica_rate leaves no originals")

    # originals
    texts: list[list[str] | None] = [None] * total
    stamps = np.zeros(total, dtype=np.int64)
    original_slots = np.flatnonzero(~is_replica)
    for s in original_slots:
        a = slot_account[s]
        texts[s] = model.sentence(int(rng.integers(8, 31)))
        hour = (int(peak[a]) + int(rng.integers(-2, 3))) % 24
        day = int(rng.integers(0, _SPAN_DAYS))
        stamps[s] = _START + day * 86_400 + hour * 3600 + int(rng.integers(0, 3600))

    # replicas copy an original from another account
    source_of = np.full(total, -1, dtype=np.int64)
    src_weight = np.array([_SOURCE_WEIGHT[archetypes[slot_account[s]]] for s in original_slots], dtype=np.int64)
    lo, hi = config.copy_delay
    for s in np.flatnonzero(is_replica):
        a = slot_account[s]
        w = np.where(slot_account[original_slots] == a, 0, src_weight)
        src = int(original_slots[_weighted_pick(rng, w)])
        source_of[s] = src
        texts[s] = _mutate(texts[src], config.mutation_rate, model, rng)
        stamps[s] = stamps[src] + int(rng.integers(lo, hi + 1))

    # shuffle ids so id order carries no ground truth
    order = rng.permutation(total)
    width = len(str(total))
    post_id = [""] * total
    for rank, s in enumerate(order.tolist()):
        post_id[s] = f"p{rank:0{width}d}"

    posts = []
    cluster_of: dict[str, int] = {}
    originator: dict[str, bool] = {}
    for s in range(total):
        a = slot_account[s]
        words = list(texts[s])
        if rng.integers(10) < 3:
            words.append(_short_url(rng))
        text = preprocess(" ".join(words))
        assert text is not None
        posts.append(Post(post_id[s], acc_ids[a], text, int(stamps[s]),
                          _reactions(rng, accounts[acc_ids[a]], archetypes[a])))
        root = s if source_of[s] < 0 else int(source_of[s])
        cluster_of[post_id[s]] = root
        originator[post_id[s]] = source_of[s] < 0

    # renumber clusters by smallest member id
    first: dict[int, str] = {}
    for pid in sorted(cluster_of):
        first.setdefault(cluster_of[pid], pid)
    renum = {root: i for i, root in enumerate(sorted(first, key=first.get))}
    cluster_of = {pid: renum[c] for pid, c in cluster_of.items()}

    posts.sort(key=lambda p: p.id)
    return Corpus(accounts, tuple(posts), 0), GroundTruth(cluster_of, originator)


def _reactions(rng, account: MediaAccount, archetype: str) -> ReactionCounts:
    scale = max(account.followers // 2_000, 1) * (3 if archetype != "consumer" else 1)
    draws = rng.integers(0, scale + 1, size=5)
    if account.platform.name == "twitter":
        return ReactionCounts(retweets=int(draws[0]), favorites=int(draws[1]))
    return ReactionCounts(likes=int(draws[2]) * 4, shares=int(draws[3]), comments=int(draws[4]) // 2)


def write_corpus(corpus: Corpus, truth: GroundTruth | None, out_dir) -> dict[str, Path]:
    """Write ``posts.jsonl``, ``accounts.jsonl`` and optionally ``truth.jsonl``."""
    from ._io import atomic_write_lines

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"accounts": out / "accounts.jsonl", "posts": out / "posts.jsonl"}
    atomic_write_lines(paths["accounts"], (
        json.dumps({"id": a.id, "display_name": a.display_name, "platform": a.platform.name,
                    "followers": a.followers}, ensure_ascii=False)
        for a in (corpus.accounts[k] for k in sorted(corpus.accounts))))
    atomic_write_lines(paths["posts"], (
        json.dumps({"id": p.id, "account_id": p.account_id, "text": p.text,
                    "timestamp": p.timestamp,
                    "reactions": {k: v for k, v in p.reactions.as_dict().items() if v}},
                   ensure_ascii=False)
        for p in corpus.posts))
    if truth is not None:
        paths["truth"] = out / "truth.jsonl"
        atomic_write_lines(paths["truth"], (
            json.dumps({"post_id": pid, "cluster_id": truth.cluster_of[pid],
                        "is_originator": bool(truth.originator.get(pid, False))})
            for pid in sorted(truth.cluster_of)))
    return paths


def read_truth(path) -> GroundTruth:
    cluster_of, originator = {}, {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                rec = json.loads(line)
                cluster_of[rec["post_id"]] = rec["cluster_id"]
                originator[rec["post_id"]] = bool(rec["is_originator"])
    return GroundTruth(cluster_of, originator)


def truth_from_attribution(result: AttributionResult) -> GroundTruth:
    cluster_of, originator = {}, {}
    for c in result.clusters:
        for pid in c.post_ids:
            cluster_of[pid] = c.cluster_id
            originator[pid] = pid == c.originator_post
    return GroundTruth(cluster_of, originator)


@dataclass(frozen=True)
class EvalReport:
    precision: float
    recall: float
    f1: float
    originator_accuracy: float
    predicted_pairs: int
    true_pairs: int
    vacuous_precision: bool

    def lines(self) -> list[str]:
        return [
            f"precision={self.precision:.6f}",
            f"recall={self.recall:.6f}",
            f"f1={self.f1:.6f}",
            f"originator_accuracy={self.originator_accuracy:.6f}",
            f"predicted_pairs={self.predicted_pairs}",
            f"true_pairs={self.true_pairs}",
            f"vacuous_precision={str(self.vacuous_precision).lower()}",
        ]


def _pair_count(sizes) -> int:
    return sum(c * (c - 1) // 2 for c in sizes)


def evaluate(predicted: AttributionResult | GroundTruth, truth: GroundTruth) -> EvalReport:
    """Pairwise same-cluster precision/recall/F1 and originator accuracy.

    With no predicted pairs precision is reported as 1.0 and flagged via
    ``vacuous_precision``; likewise recall is 1.0 when truth has no pairs.
    """
    pred = truth_from_attribution(predicted) if isinstance(predicted, AttributionResult) else predicted
    if set(pred.cluster_of) != set(truth.cluster_of):
        raise SynthError("predicted and true post universes differ")

    # pair counts from the contingency table, never materialising the pairs
    cells = Counter((pred.cluster_of[pid], truth.cluster_of[pid]) for pid in truth.cluster_of)
    hits = _pair_count(cells.values())
    p_pairs = _pair_count(Counter(pred.cluster_of.values()).values())
    t_pairs = _pair_count(Counter(truth.cluster_of.values()).values())
    vacuous = p_pairs == 0
    precision = 1.0 if vacuous else hits / p_pairs
    recall = 1.0 if t_pairs == 0 else hits / t_pairs
    f1 = 0.0 if precision + recall == 0 else 2 * precision * recall / (precision + recall)

    pred_origin = {}
    for pid, c in pred.cluster_of.items():
        if pred.originator.get(pid):
            pred_origin[c] = pid
    multi = [m for m in truth.clusters().values() if len(m) > 1]
    correct = 0
    for members in multi:
        overlap: dict[int, int] = {}
        for pid in members:
            c = pred.cluster_of[pid]
            overlap[c] = overlap.get(c, 0) + 1
        best = min(overlap, key=lambda c: (-overlap[c], c))
        true_origin = next(pid for pid in members if truth.originator.get(pid))
        correct += pred_origin.get(best) == true_origin
    accuracy = correct / len(multi) if multi else 1.0
    return EvalReport(precision, recall, f1, accuracy, p_pairs, t_pairs, vacuous)
