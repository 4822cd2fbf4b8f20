"""Account-to-account content-flow graph, interaction weights and roles."""

from __future__ import annotations

import csv
import io
import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Mapping

from ._io import atomic_write_lines, atomic_write_text
from .attribution import AttributionResult
from .corpus import Corpus

logger = logging.getLogger(__name__)

SELF_ORIGINATOR = "SelfOriginator"
PROVIDER = "Provider"
CONSUMER = "Consumer"
DEFAULT_THRESHOLDS = {"self": 0.80, "dispersed": 0.70, "acquired": 0.70}


@dataclass(frozen=True)
class InteractionProfile:
    account_id: str
    self_count: int = 0
    dispersed: Mapping[str, int] = field(default_factory=dict)
    acquired: Mapping[str, int] = field(default_factory=dict)

    @property
    def dispersed_total(self) -> int:
        return sum(self.dispersed.values())

    @property
    def acquired_total(self) -> int:
        return sum(self.acquired.values())

    @property
    def in_total(self) -> int:
        return self.self_count + self.dispersed_total + self.acquired_total

    def _share(self, count: int) -> float:
        total = self.in_total
        return count / total if total else 0.0

    @property
    def w_self(self) -> float:
        return self._share(self.self_count)

    @property
    def w_dispersed(self) -> float:
        return self._share(self.dispersed_total)

    @property
    def w_acquired(self) -> float:
        return self._share(self.acquired_total)

    @property
    def partners(self) -> int:
        """Distinct accounts this one exchanged content with, in either direction."""
        return len(set(self.dispersed) | set(self.acquired))


@dataclass(frozen=True)
class FlowEdge:
    origin: str
    consumer: str
    count: int


@dataclass(frozen=True)
class InteractionGraph:
    profiles: Mapping[str, InteractionProfile]
    edges: tuple[FlowEdge, ...]
    n_clusters: int
    # non-originator posts published by the originator's own account (folded into self)
    n_self_replicas: int

    @property
    def nodes(self) -> list[str]:
        return sorted(self.profiles)


def build_interaction_graph(attribution: AttributionResult, corpus: Corpus) -> InteractionGraph:
    account_of = {p.id: p.account_id for p in corpus.posts}
    self_count: dict[str, int] = defaultdict(int)
    dispersed: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    acquired: dict[str, dict[str, int]] = defaultdict(lambda: defaultdict(int))
    same_account = 0
    for cluster in attribution.clusters:
        origin = cluster.originator_account
        self_count[origin] += 1
        for pid in cluster.post_ids:
            if pid == cluster.originator_post:
                continue
            consumer = account_of[pid]
            if consumer == origin:
                self_count[origin] += 1
                same_account += 1
            else:
                dispersed[origin][consumer] += 1
                acquired[consumer][origin] += 1

    profiles = {
        aid: InteractionProfile(aid, self_count.get(aid, 0),
                                dict(sorted(dispersed.get(aid, {}).items())),
                                dict(sorted(acquired.get(aid, {}).items())))
        for aid in sorted(corpus.accounts)
    }
    edges = tuple(FlowEdge(o, c, n)
                  for o in sorted(dispersed) for c, n in sorted(dispersed[o].items()))
    return InteractionGraph(profiles, edges, len(attribution.clusters), same_account)


def classify_roles(profile: InteractionProfile, thresholds: Mapping[str, float] | None = None) -> frozenset[str]:
    """Role set from strict weight thresholds; empty (with a warning) when ``In`` is 0."""
    th = {**DEFAULT_THRESHOLDS, **(thresholds or {})}
    if profile.in_total == 0:
        logger.warning("account %s has no interactions; no role assigned", profile.account_id)
        return frozenset()
    return classify_weights(profile.w_self, profile.w_dispersed, profile.w_acquired, th)


def classify_weights(w_self: float, w_dispersed: float, w_acquired: float,
                     thresholds: Mapping[str, float] | None = None) -> frozenset[str]:
    th = {**DEFAULT_THRESHOLDS, **(thresholds or {})}
    roles = set()
    if w_self > th["self"]:
        roles.add(SELF_ORIGINATOR)
    if w_dispersed > th["dispersed"]:
        roles.add(PROVIDER)
    if w_acquired > th["acquired"]:
        roles.add(CONSUMER)
    return frozenset(roles)


@dataclass(frozen=True)
class EdgeShare:
    origin: str
    consumer: str
    count: int
    consumer_share: float

    def describe(self) -> str:
        return f"{self.origin}->{self.consumer}: edge share {self.consumer_share:.0%} of consumer In"


def top_interactions(graph: InteractionGraph, k: int) -> tuple[list[InteractionProfile], list[EdgeShare]]:
    """The ``k`` accounts with the largest ``In`` and the ``k`` heaviest flow edges."""
    if k < 1:
        raise ValueError("k must be >= 1")
    accounts = sorted(graph.profiles.values(), key=lambda p: (-p.in_total, p.account_id))[:k]
    edges = sorted(graph.edges, key=lambda e: (-e.count, e.origin, e.consumer))[:k]
    shares = [EdgeShare(e.origin, e.consumer, e.count,
                        e.count / graph.profiles[e.consumer].in_total) for e in edges]
    return accounts, shares


def chord_records(graph: InteractionGraph) -> list[dict]:
    records: list[dict] = [{"origin": e.origin, "consumer": e.consumer, "count": e.count}
                           for e in graph.edges]
    for aid in graph.nodes:
        p = graph.profiles[aid]
        records.append({"account": aid, "in_total": p.in_total, "w_self": p.w_self,
                        "w_dispersed": p.w_dispersed, "w_acquired": p.w_acquired})
    return records


def export_chord(graph: InteractionGraph, path) -> None:
    """Edge then node records, one JSON object per line, sorted by account id."""
    atomic_write_lines(path, (json.dumps(r, sort_keys=True) for r in chord_records(graph)))


def export_interactions(graph: InteractionGraph, path) -> None:
    atomic_write_lines(path, (
        json.dumps({"account": p.account_id, "self_count": p.self_count,
                    "dispersed": p.dispersed, "acquired": p.acquired,
                    "in_total": p.in_total}, sort_keys=True)
        for p in (graph.profiles[a] for a in graph.nodes)))


def role_rows(graph: InteractionGraph, thresholds: Mapping[str, float] | None = None) -> list[dict]:
    rows = []
    for aid in graph.nodes:
        p = graph.profiles[aid]
        roles = classify_roles(p, thresholds)
        rows.append({"account": aid, "w_self": p.w_self, "w_dispersed": p.w_dispersed,
                     "w_acquired": p.w_acquired, "in_total": p.in_total,
                     "roles": sorted(roles), "partners": p.partners})
    return rows


def export_roles(graph: InteractionGraph, csv_path, jsonl_path=None,
                 thresholds: Mapping[str, float] | None = None, partners: bool = False) -> None:
    rows = role_rows(graph, thresholds)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["account", "w_self", "w_dispersed", "w_acquired", "in_total", "roles"]
    writer.writerow(header + (["partners"] if partners else []))
    for r in rows:
        line = [r["account"], f"{r['w_self']:.6f}", f"{r['w_dispersed']:.6f}",
                f"{r['w_acquired']:.6f}", r["in_total"], ";".join(r["roles"])]
        writer.writerow(line + ([r["partners"]] if partners else []))
    atomic_write_text(csv_path, buf.getvalue())
    if jsonl_path is not None:
        atomic_write_lines(jsonl_path, (json.dumps(r, sort_keys=True) for r in rows))
