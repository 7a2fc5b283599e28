from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

import pytest

from bugaug.corpus import NegativeSampler, ProjectCorpus
from bugaug.extract import PatternDictionary
from bugaug.model import BugReport, Changeset, Hunk, LinkRecord, Token
from bugaug.nl_ops import SubstituteDictionary

EPOCH = datetime(2021, 3, 1, tzinfo=timezone.utc)


def make_bug(bug_id: str, day: int = 0, summary: str = "Widget does not close", description: str = "",
             status: str = "fixed") -> BugReport:
    return BugReport(
        id=bug_id,
        project="demo",
        summary=summary,
        description=description,
        opened_at=EPOCH + timedelta(days=day),
        status=status,
    )


def make_changeset(cs_id: str, day: int = 0, log_message: str = "tidy up") -> Changeset:
    return Changeset(
        id=cs_id,
        author="dev",
        committed_at=EPOCH + timedelta(days=day),
        log_message=log_message,
    )


def make_hunk(hunk_id: str, changeset_id: str, class_name: str,
              lines: tuple = (("added", "int x = 1;"),)) -> Hunk:
    n_removed = sum(1 for m, _ in lines if m == "removed")
    n_added = sum(1 for m, _ in lines if m == "added")
    n_context = sum(1 for m, _ in lines if m == "context")
    return Hunk(
        id=hunk_id,
        changeset_id=changeset_id,
        file_path=f"src/{class_name}.java",
        class_name=class_name,
        old_start=1,
        old_len=n_context + n_removed,
        new_start=1,
        new_len=n_context + n_added,
        lines=tuple(lines),
    )


def build_corpus(spec: dict[str, dict]) -> ProjectCorpus:
    """spec: bug_id -> {"inducing": {cs_id: [classes]}, "fixing": {cs_id: [classes]},
    "day": int}. Extra unlinked hunks may ride along under key "_extra"."""
    bugs = {}
    changesets = {}
    hunks_by_changeset: dict[str, list[Hunk]] = {}
    links = {}
    counter = 0
    for bug_id, cfg in spec.items():
        if bug_id == "_extra":
            for cs_id, classes in cfg.items():
                changesets[cs_id] = make_changeset(cs_id)
                for cls in classes:
                    counter += 1
                    hunks_by_changeset.setdefault(cs_id, []).append(
                        make_hunk(f"{cs_id}#h{counter}", cs_id, cls)
                    )
            continue
        bugs[bug_id] = make_bug(bug_id, day=cfg.get("day", 0))
        for group in ("inducing", "fixing"):
            for cs_id, classes in cfg.get(group, {}).items():
                if cs_id not in changesets:
                    changesets[cs_id] = make_changeset(cs_id)
                    hunks_by_changeset.setdefault(cs_id, [])
                for cls in classes:
                    counter += 1
                    hunks_by_changeset[cs_id].append(make_hunk(f"{cs_id}#h{counter}", cs_id, cls))
        links[bug_id] = LinkRecord(
            bug_id=bug_id,
            inducing_changeset_ids=tuple(cfg.get("inducing", {})),
            fixing_changeset_ids=tuple(cfg.get("fixing", {})),
        )
    return ProjectCorpus(
        bugs=bugs, changesets=changesets, hunks_by_changeset=hunks_by_changeset, links=links
    )


def sampler_for(corpus: ProjectCorpus) -> NegativeSampler:
    excluded = {bug_id: corpus.inducing_classes(bug_id) for bug_id in corpus.links}
    return NegativeSampler(corpus.all_hunks(), excluded)


_WORDS = (
    "the queue request never returns data after restart and every worker "
    "thread stays busy while the parser keeps old buffers around for days"
).split()
_CODE_WORDS = ["AsyncContext", "NioChannel.flush()", "check_word_missing_letter", "HttpParser.parse", "byteBuffer"]


def random_tokens(rng: random.Random, n: int, code_ratio: float = 0.25) -> list[Token]:
    out = []
    for _ in range(n):
        if rng.random() < code_ratio:
            out.append(Token(rng.choice(_CODE_WORDS), is_code=True))
        else:
            out.append(Token(rng.choice(_WORDS), is_code=False))
    return out


@pytest.fixture(scope="session")
def patterns() -> PatternDictionary:
    return PatternDictionary.default()


@pytest.fixture(scope="session")
def substitutes() -> SubstituteDictionary:
    return SubstituteDictionary.default()
