"""Command-line front end: ``newsflow analyze | fit | predict | synth | eval | stats``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from ._backend import BACKEND
from ._io import atomic_write_lines, atomic_write_text, sha256_file
from .attribution import DEFAULT_EPSILON, attribute
from .corpus import CorpusError, corpus_stats, format_account_row, load_corpus
from .graph import export_chord, export_interactions, export_roles, build_interaction_graph
from .profile import DEFAULT_L, DEFAULT_N, ProfileError, ProfileIndex, pairwise_similarities, write_edges_csv
from .stats import (RESPONSES, AttributeTable, RegressionFit, StatsError, build_attribute_table,
                    correlation_matrix, fit_records, ols_fit, predict, render_fit)
from .synth import SynthConfig, SynthError, evaluate, generate_corpus, read_truth, write_corpus

logger = logging.getLogger("newsflow")

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2

ARTIFACTS = {
    "attribution": "attribution.jsonl",
    "interactions": "interactions.jsonl",
    "chord": "chord.jsonl",
    "roles_csv": "roles.csv",
    "roles": "roles.jsonl",
    "attributes": "attributes.csv",
    "correlation": "correlation.csv",
}


class ValidationError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    posts: str
    accounts: str
    out: str
    ngram: int = DEFAULT_N
    profile_len: int = DEFAULT_L
    floor: float = 0.5
    jenks_k: int = 2
    epsilon: float = DEFAULT_EPSILON
    self_th: float = 0.80
    dispersed_th: float = 0.70
    acquired_th: float = 0.70
    workers: int = 1
    seed: int = 0

    def validate(self) -> None:
        if self.ngram < 1 or self.profile_len < 1:
            raise ValidationError("--ngram and --profile-len must be >= 1")
        if not 0.0 <= self.floor <= 1.0:
            raise ValidationError("--floor must be in [0, 1]")
        if self.jenks_k < 2:
            raise ValidationError("--jenks-k must be >= 2")
        if self.epsilon < 0:
            raise ValidationError("--epsilon must be >= 0")
        for name in ("self_th", "dispersed_th", "acquired_th"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"--{name.replace('_', '-')} must be in [0, 1]")
        if self.workers < 1:
            raise ValidationError("--workers must be >= 1")

    @property
    def thresholds(self) -> dict[str, float]:
        return {"self": self.self_th, "dispersed": self.dispersed_th, "acquired": self.acquired_th}

    def to_argv(self) -> list[str]:
        argv = []
        for f in fields(self):
            argv += [f"--{f.name.replace('_', '-')}", str(getattr(self, f.name))]
        return argv

    @classmethod
    def from_namespace(cls, ns: argparse.Namespace) -> "RunConfig":
        return cls(**{f.name: getattr(ns, f.name) for f in fields(cls)})


def _add_run_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--posts", required=True)
    p.add_argument("--accounts", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--ngram", type=int, default=DEFAULT_N)
    p.add_argument("--profile-len", type=int, default=DEFAULT_L)
    p.add_argument("--floor", type=float, default=0.5)
    p.add_argument("--jenks-k", type=int, default=2)
    p.add_argument("--epsilon", type=float, default=float(DEFAULT_EPSILON))
    p.add_argument("--self-th", type=float, default=0.80)
    p.add_argument("--dispersed-th", type=float, default=0.70)
    p.add_argument("--acquired-th", type=float, default=0.70)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="newsflow", description=__doc__, allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="attribute originators and build the content-flow graph",
                       allow_abbrev=False)
    _add_run_flags(p)
    p.add_argument("--dump-edges", action="store_true", help="also write edges.csv")

    p = sub.add_parser("stats", help="per-account corpus summary", allow_abbrev=False)
    p.add_argument("--posts", required=True)
    p.add_argument("--accounts", required=True)

    p = sub.add_parser("fit", help="regress a reaction column on posts, followers and In",
                       allow_abbrev=False)
    p.add_argument("--table", required=True, help="attributes.csv written by analyze")
    p.add_argument("--response", required=True)
    p.add_argument("--predictors", default="posts,followers,in_total")
    p.add_argument("--fit-out", help="write the fit as JSON")

    p = sub.add_parser("predict", help="predict a reaction count from a saved fit", allow_abbrev=False)
    p.add_argument("--fit", required=True)
    p.add_argument("--features", required=True, help="name=value pairs, comma separated")

    p = sub.add_parser("synth", help="generate a synthetic corpus with ground truth", allow_abbrev=False)
    p.add_argument("--out", required=True)
    p.add_argument("--accounts", type=int, default=48)
    p.add_argument("--posts-per-account", type=int, default=200)
    p.add_argument("--replica-rate", type=float, default=0.3)
    p.add_argument("--mutation-rate", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("eval", help="score attribution.jsonl against truth.jsonl", allow_abbrev=False)
    p.add_argument("--pred", required=True)
    p.add_argument("--truth", required=True)
    return parser


def cmd_analyze(config: RunConfig, dump_edges: bool = False) -> dict:
    config.validate()
    corpus = load_corpus(config.posts, config.accounts)
    if not corpus.posts:
        raise ValidationError("empty corpus")
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)

    index = ProfileIndex(corpus.posts, config.ngram, config.profile_len)
    edges = pairwise_similarities(index, config.floor, workers=config.workers)
    result = attribute(corpus, edges, k=config.jenks_k, epsilon=config.epsilon)
    graph = build_interaction_graph(result, corpus)
    table = build_attribute_table(corpus, graph)

    account_of = {p.id: p.account_id for p in corpus.posts}
    atomic_write_lines(out / ARTIFACTS["attribution"], (
        json.dumps({"cluster_id": c.cluster_id, "post_id": pid, "account_id": account_of[pid],
                    "is_originator": pid == c.originator_post}, sort_keys=True)
        for c in result.clusters for pid in c.post_ids))
    export_interactions(graph, out / ARTIFACTS["interactions"])
    export_chord(graph, out / ARTIFACTS["chord"])
    export_roles(graph, out / ARTIFACTS["roles_csv"], out / ARTIFACTS["roles"],
                 thresholds=config.thresholds, partners=True)
    atomic_write_text(out / ARTIFACTS["attributes"], table.to_csv())
    if len(table) >= 3:
        atomic_write_text(out / ARTIFACTS["correlation"], correlation_matrix(table).to_csv())
    written = [name for name in ARTIFACTS.values() if (out / name).exists()]
    if dump_edges:
        import io
        buf = io.StringIO()
        write_edges_csv(edges, buf)
        atomic_write_text(out / "edges.csv", buf.getvalue())
        written.append("edges.csv")

    manifest = {
        "created": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "version": __version__,
        "backend": BACKEND,
        "config": asdict(config),
        "argv": ["analyze"] + config.to_argv(),
        "inputs": {"posts": sha256_file(config.posts), "accounts": sha256_file(config.accounts)},
        "posts_accepted": len(corpus.posts),
        "posts_rejected": corpus.rejected,
        "edges": len(edges),
        "replica_threshold": result.replica_threshold,
        "gvf": result.gvf,
        "threshold_fallback": result.used_fallback,
        "clusters": len(result.clusters),
        "artifacts": {name: sha256_file(out / name) for name in sorted(written)},
    }
    atomic_write_text(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return manifest


def cmd_fit(table_path, response: str, predictors=("posts", "followers", "in_total"), fit_out=None) -> str:
    table = AttributeTable.from_csv(table_path)
    if response not in table.columns:
        raise ValidationError(f"unknown response column {response!r} (choose from {', '.join(RESPONSES)})")
    if not table.has_data(response):
        raise ValidationError(f"response column {response!r} has no data in this corpus")
    for p in predictors:
        if p not in table.columns:
            raise ValidationError(f"unknown predictor column {p!r}")
    fit = ols_fit(table, response, predictors)
    if fit_out:
        atomic_write_text(fit_out, fit.to_json() + "\n")
        atomic_write_lines(Path(fit_out).with_suffix(".records.jsonl"),
                           (json.dumps(r, sort_keys=True) for r in fit_records(fit)))
    return render_fit(fit)


def _parse_features(text: str) -> dict[str, float]:
    out = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        name, sep, value = item.partition("=")
        if not sep:
            raise ValidationError(f"feature {item!r} is not name=value")
        try:
            out[name.strip()] = float(value)
        except ValueError:
            raise ValidationError(f"feature {name!r} has non-numeric value {value!r}") from None
    return out


def cmd_predict(fit_path, features: dict[str, float]) -> float:
    fit = RegressionFit.from_json(Path(fit_path).read_text(encoding="utf-8"))
    return predict(fit, features)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "analyze":
            manifest = cmd_analyze(RunConfig.from_namespace(args), args.dump_edges)
            print(f"threshold={manifest['replica_threshold']:.6f} gvf={manifest['gvf']} "
                  f"clusters={manifest['clusters']} out={args.out}")
        elif args.command == "stats":
            stats = corpus_stats(load_corpus(args.posts, args.accounts))
            for row in stats.accounts:
                print(format_account_row(row))
            for name, q in stats.quantiles.items():
                print(f"{name}: " + " ".join(f"{label}={v:.3f}" for label, v in
                                             zip(("min", "p25", "median", "p75", "max"), q)))
        elif args.command == "fit":
            predictors = [p.strip() for p in args.predictors.split(",") if p.strip()]
            sys.stdout.write(cmd_fit(args.table, args.response, predictors, args.fit_out))
        elif args.command == "predict":
            print(f"{cmd_predict(args.fit, _parse_features(args.features)):.1f}")
        elif args.command == "synth":
            config = SynthConfig(args.accounts, args.posts_per_account, args.replica_rate,
                                 args.mutation_rate, seed=args.seed)
            corpus, truth = generate_corpus(config)
            for path in write_corpus(corpus, truth, args.out).values():
                print(path)
        elif args.command == "eval":
            pred, truth = read_truth(args.pred), read_truth(args.truth)
            print("\n".join(evaluate(pred, truth).lines()))
    except (ValidationError, CorpusError, ProfileError, StatsError, SynthError) as exc:
        print(f"newsflow: error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001
        logger.debug("runtime failure", exc_info=True)
        print(f"newsflow: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
