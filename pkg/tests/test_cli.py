import json

import numpy as np
import pytest

from newsflow.cli import ARTIFACTS, RunConfig, build_parser, main
from newsflow.stats import AttributeTable


@pytest.fixture(scope="module")
def small_synth(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out", str(out), "--accounts", "8", "--posts-per-account", "40", "--seed", "7"]) == 0
    return out


def analyze(src, out, *extra):
    return main(["analyze", "--posts", str(src / "posts.jsonl"), "--accounts", str(src / "accounts.jsonl"),
                 "--out", str(out), *extra])


def test_synth_twice_identical(tmp_path, small_synth):
    assert main(["synth", "--out", str(tmp_path), "--accounts", "8", "--posts-per-account", "40",
                 "--seed", "7"]) == 0
    for name in ("posts.jsonl", "accounts.jsonl", "truth.jsonl"):
        assert (tmp_path / name).read_bytes() == (small_synth / name).read_bytes()


def test_analyze_writes_artifacts_and_manifest(tmp_path, small_synth, capsys):
    assert analyze(small_synth, tmp_path, "--dump-edges") == 0
    for name in ("attribution.jsonl", "interactions.jsonl", "chord.jsonl", "roles.csv", "manifest.json"):
        assert (tmp_path / name).exists(), name
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert set(manifest["inputs"]) == {"posts", "accounts"}
    assert 0 < manifest["replica_threshold"] <= 1
    assert "T" in manifest["created"]
    assert (tmp_path / "edges.csv").read_text().startswith("post_a,post_b,score\n")
    assert "threshold=" in capsys.readouterr().out


def test_rerun_identical_digests(tmp_path, small_synth):
    assert analyze(small_synth, tmp_path / "one") == 0
    assert analyze(small_synth, tmp_path / "two") == 0
    m1 = json.loads((tmp_path / "one" / "manifest.json").read_text())
    m2 = json.loads((tmp_path / "two" / "manifest.json").read_text())
    assert m1["inputs"] == m2["inputs"] and m1["artifacts"] == m2["artifacts"]


def test_analyze_does_not_touch_inputs(tmp_path, small_synth):
    before = (small_synth / "posts.jsonl").read_bytes()
    analyze(small_synth, tmp_path)
    assert (small_synth / "posts.jsonl").read_bytes() == before


def test_empty_posts_file(tmp_path, small_synth, capsys):
    (tmp_path / "posts.jsonl").write_text("")
    code = main(["analyze", "--posts", str(tmp_path / "posts.jsonl"),
                 "--accounts", str(small_synth / "accounts.jsonl"), "--out", str(tmp_path / "o")])
    assert code == 1
    assert "empty corpus" in capsys.readouterr().err


def test_invalid_flag_value(tmp_path, small_synth):
    assert analyze(small_synth, tmp_path, "--floor", "1.5") == 1


def test_manifest_flag_round_trip(tmp_path, small_synth):
    analyze(small_synth, tmp_path, "--ngram", "4", "--epsilon", "120", "--self-th", "0.75")
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    args = build_parser().parse_args(manifest["argv"])
    again = RunConfig.from_namespace(args)
    assert again == RunConfig(**manifest["config"])
    assert again.to_argv() == manifest["argv"][1:]


def test_eval_identity(small_synth, capsys):
    truth = str(small_synth / "truth.jsonl")
    assert main(["eval", "--pred", truth, "--truth", truth]) == 0
    assert "f1=1.000000" in capsys.readouterr().out.splitlines()


def test_stats_command(small_synth, capsys):
    assert main(["stats", "--posts", str(small_synth / "posts.jsonl"),
                 "--accounts", str(small_synth / "accounts.jsonl")]) == 0
    out = capsys.readouterr().out
    assert "posts: min=40.000" in out and "#likes (avg-" in out


def planted_table(path, seed=0, n=48):
    rng = np.random.default_rng(seed)
    cols = {"posts": rng.integers(100, 10_000, n).astype(float),
            "followers": rng.integers(10_000, 5_000_000, n).astype(float),
            "in_total": rng.integers(0, 20_000, n).astype(float)}
    cols["retweets"] = (30 - 0.01 * cols["posts"] + 0.001 * cols["followers"]
                        + 0.012 * cols["in_total"] + rng.normal(0, 40, n))
    cols["favorites"] = np.zeros(n)
    path.write_text(AttributeTable([f"a{i}" for i in range(n)], cols).to_csv())
    return path


def test_fit_report_within_two_se(tmp_path, capsys):
    table = planted_table(tmp_path / "attributes.csv")
    fit_path = tmp_path / "fit.json"
    assert main(["fit", "--table", str(table), "--response", "retweets", "--fit-out", str(fit_path)]) == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "Model retweets"
    assert "Signif. codes" in out
    fit = json.loads(fit_path.read_text())
    truth = {"(Intercept)": 30, "posts": -0.01, "followers": 0.001, "in_total": 0.012}
    for c in fit["coefficients"]:
        assert abs(c["estimate"] - truth[c["name"]]) <= 2 * c["std_error"], c


def test_predict_zero_features_prints_intercept(tmp_path, capsys):
    table = planted_table(tmp_path / "attributes.csv")
    fit_path = tmp_path / "fit.json"
    main(["fit", "--table", str(table), "--response", "retweets", "--fit-out", str(fit_path)])
    capsys.readouterr()
    assert main(["predict", "--fit", str(fit_path), "--features", "posts=0,followers=0,in_total=0"]) == 0
    intercept = json.loads(fit_path.read_text())["coefficients"][0]["estimate"]
    assert capsys.readouterr().out.strip() == f"{intercept:.1f}"


def test_fit_response_without_data(tmp_path, capsys):
    table = planted_table(tmp_path / "attributes.csv")
    assert main(["fit", "--table", str(table), "--response", "favorites"]) == 1
    assert "favorites" in capsys.readouterr().err
    assert main(["fit", "--table", str(table), "--response", "nonsense"]) == 1


def test_full_loop_on_analyze_output(tmp_path, small_synth, capsys):
    analyze(small_synth, tmp_path)
    capsys.readouterr()
    assert main(["eval", "--pred", str(tmp_path / "attribution.jsonl"),
                 "--truth", str(small_synth / "truth.jsonl")]) == 0
    metrics = dict(line.split("=") for line in capsys.readouterr().out.splitlines())
    assert float(metrics["f1"]) >= 0.9
    table = tmp_path / ARTIFACTS["attributes"]
    assert main(["fit", "--table", str(table), "--response", "retweets",
                 "--predictors", "followers,in_total"]) == 0


def test_runtime_error_exit_code(tmp_path, small_synth, monkeypatch):
    import newsflow.cli as cli

    def boom(*a, **k):
        raise RuntimeError("disk on fire")
    monkeypatch.setattr(cli, "attribute", boom)
    assert analyze(small_synth, tmp_path) == 2
