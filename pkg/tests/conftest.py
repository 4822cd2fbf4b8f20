import json

import pytest

from newsflow.corpus import Corpus, MediaAccount, Platform, Post, ReactionCounts

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_corpus(posts, accounts=None):
    """posts: iterable of (id, account, text, timestamp[, reactions dict])."""
    built = []
    for rec in posts:
        pid, aid, text, ts, *rest = rec
        built.append(Post(pid, aid, text, ts, ReactionCounts(**(rest[0] if rest else {}))))
    if accounts is None:
        accounts = {p.account_id: 100 for p in built}
    accs = {aid: MediaAccount(aid, aid.upper(), Platform("twitter"), followers)
            for aid, followers in accounts.items()}
    return Corpus(accs, tuple(built), 0)


@pytest.fixture
def write_jsonl(tmp_path):
    def _write(name, records):
        path = tmp_path / name
        with open(path, "w", encoding="utf-8") as fh:
            for r in records:
                fh.write(r if isinstance(r, str) else json.dumps(r))
                fh.write("\n")
        return path
    return _write
