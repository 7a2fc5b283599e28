"""Domain types shared across the pipeline, plus JSON-lines (de)serialization.

All record types are plain dataclasses with a fixed field order so that
serialized artifacts are byte-stable across runs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Iterator

BUG_STATUSES = ("fixed", "wont_fix", "not_a_bug", "other")
LINE_MARKERS = ("context", "added", "removed")
LABELS = ("positive", "negative")

SAMPLE_KINDS = ("OB", "EB", "S2R", "StackTrace", "CodeSnippet", "Other")
NL_KINDS = ("OB", "EB", "S2R")
FRAME_KINDS = ("exception_header", "caused_by", "app", "library", "bottom")


class CorpusError(ValueError):
    """Raised when an input record violates a corpus invariant."""


@dataclass(frozen=True)
class BugReport:
    id: str
    project: str
    summary: str
    description: str
    opened_at: datetime
    status: str = "fixed"

    def __post_init__(self):
        if not self.summary:
            raise CorpusError(f"bug {self.id!r}: summary must be non-empty")
        if self.status not in BUG_STATUSES:
            raise CorpusError(f"bug {self.id!r}: unknown status {self.status!r}")

    @property
    def text(self) -> str:
        return self.summary + "\n\n" + self.description if self.description else self.summary


@dataclass(frozen=True)
class Changeset:
    id: str
    author: str
    committed_at: datetime
    log_message: str


@dataclass(frozen=True)
class Hunk:
    id: str
    changeset_id: str
    file_path: str
    class_name: str
    old_start: int
    old_len: int
    new_start: int
    new_len: int
    lines: tuple[tuple[str, str], ...]

    def __post_init__(self):
        for marker, _ in self.lines:
            if marker not in LINE_MARKERS:
                raise CorpusError(f"hunk {self.id!r}: bad line marker {marker!r}")

    def changed_texts(self) -> list[str]:
        return [text for marker, text in self.lines if marker != "context"]

    def all_texts(self) -> list[str]:
        return [text for _, text in self.lines]


@dataclass(frozen=True)
class LinkRecord:
    bug_id: str
    inducing_changeset_ids: tuple[str, ...]
    fixing_changeset_ids: tuple[str, ...]

    @property
    def usable(self) -> bool:
        return bool(self.inducing_changeset_ids) and bool(self.fixing_changeset_ids)


@dataclass(frozen=True)
class TrainingSample:
    bug_ref: str
    origin_bug_id: str
    hunk_id: str
    class_name: str
    label: str

    def __post_init__(self):
        if self.label not in LABELS:
            raise CorpusError(f"sample {self.bug_ref!r}: bad label {self.label!r}")


@dataclass
class Dataset:
    name: str
    samples: list[TrainingSample]

    def positives(self) -> list[TrainingSample]:
        return [s for s in self.samples if s.label == "positive"]

    def negatives(self) -> list[TrainingSample]:
        return [s for s in self.samples if s.label == "negative"]

    def positive_counts_by_bug(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for s in self.positives():
            counts[s.origin_bug_id] = counts.get(s.origin_bug_id, 0) + 1
        return counts

    def positive_counts_by_class(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for s in self.positives():
            counts[s.class_name] = counts.get(s.class_name, 0) + 1
        return counts

    def __len__(self) -> int:
        return len(self.samples)


@dataclass(frozen=True)
class Token:
    text: str
    is_code: bool = False

    def __post_init__(self):
        if not self.text or any(c.isspace() for c in self.text):
            raise ValueError(f"bad token text {self.text!r}")


@dataclass
class Sample:
    kind: str
    tokens: list[Token]
    source_span: tuple[int, int] = (0, 0)
    # per-token stack-trace line index; only set for StackTrace samples
    line_indices: list[int] | None = None

    def __post_init__(self):
        if self.kind not in SAMPLE_KINDS:
            raise ValueError(f"unknown sample kind {self.kind!r}")
        if self.line_indices is not None and len(self.line_indices) != len(self.tokens):
            raise ValueError("line_indices must align with tokens")

    def text(self) -> str:
        return " ".join(t.text for t in self.tokens)

    def code_token_count(self) -> int:
        return sum(1 for t in self.tokens if t.is_code)


@dataclass
class StructuredBugReport:
    bug_id: str
    samples: list[Sample]


@dataclass(frozen=True)
class StackFrame:
    raw: str
    kind: str
    class_ref: str | None = None

    def __post_init__(self):
        if self.kind not in FRAME_KINDS:
            raise ValueError(f"unknown frame kind {self.kind!r}")


@dataclass
class SampleProvenance:
    sample_index: int
    applied_ops: list[str]
    dropped: bool


@dataclass
class AugmentedBugReport:
    id: str
    origin_bug_id: str
    samples: list[Sample]
    provenance: list[SampleProvenance]
    permutation: list[int]

    def text(self) -> str:
        return "\n\n".join(s.text() for s in self.samples)


# --- timestamps ---------------------------------------------------------


def parse_timestamp(value: str) -> datetime:
    """Parse an RFC 3339 timestamp into an aware UTC datetime."""
    raw = value.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    dt = datetime.fromisoformat(raw)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


# --- JSON-lines codecs --------------------------------------------------


def read_jsonl(path: str | Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                yield json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{path}:{lineno}: invalid JSON ({exc})") from exc


def write_jsonl(path: str | Path, records: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def bug_to_dict(bug: BugReport) -> dict:
    return {
        "id": bug.id,
        "project": bug.project,
        "summary": bug.summary,
        "description": bug.description,
        "opened_at": format_timestamp(bug.opened_at),
        "status": bug.status,
    }


def bug_from_dict(d: dict) -> BugReport:
    return BugReport(
        id=str(d["id"]),
        project=str(d.get("project", "")),
        summary=str(d["summary"]),
        description=str(d.get("description", "")),
        opened_at=parse_timestamp(str(d["opened_at"])),
        status=str(d.get("status", "fixed")),
    )


def changeset_to_dict(cs: Changeset) -> dict:
    return {
        "id": cs.id,
        "author": cs.author,
        "committed_at": format_timestamp(cs.committed_at),
        "log_message": cs.log_message,
    }


def changeset_from_dict(d: dict) -> Changeset:
    return Changeset(
        id=str(d["id"]),
        author=str(d.get("author", "")),
        committed_at=parse_timestamp(str(d["committed_at"])),
        log_message=str(d.get("log_message", "")),
    )


def hunk_to_dict(hunk: Hunk) -> dict:
    return {
        "id": hunk.id,
        "changeset_id": hunk.changeset_id,
        "file_path": hunk.file_path,
        "class_name": hunk.class_name,
        "old_start": hunk.old_start,
        "old_len": hunk.old_len,
        "new_start": hunk.new_start,
        "new_len": hunk.new_len,
        "lines": [[marker, text] for marker, text in hunk.lines],
    }


def hunk_from_dict(d: dict) -> Hunk:
    return Hunk(
        id=str(d["id"]),
        changeset_id=str(d["changeset_id"]),
        file_path=str(d["file_path"]),
        class_name=str(d["class_name"]),
        old_start=int(d["old_start"]),
        old_len=int(d["old_len"]),
        new_start=int(d["new_start"]),
        new_len=int(d["new_len"]),
        lines=tuple((str(m), str(t)) for m, t in d["lines"]),
    )


def link_to_dict(link: LinkRecord) -> dict:
    return {
        "bug_id": link.bug_id,
        "inducing_changeset_ids": list(link.inducing_changeset_ids),
        "fixing_changeset_ids": list(link.fixing_changeset_ids),
    }


def link_from_dict(d: dict) -> LinkRecord:
    return LinkRecord(
        bug_id=str(d["bug_id"]),
        inducing_changeset_ids=tuple(str(x) for x in d.get("inducing_changeset_ids", [])),
        fixing_changeset_ids=tuple(str(x) for x in d.get("fixing_changeset_ids", [])),
    )


def sample_to_dict(sample: TrainingSample) -> dict:
    return {
        "bug_ref": sample.bug_ref,
        "origin_bug_id": sample.origin_bug_id,
        "hunk_id": sample.hunk_id,
        "class_name": sample.class_name,
        "label": sample.label,
    }


def sample_from_dict(d: dict) -> TrainingSample:
    return TrainingSample(
        bug_ref=str(d["bug_ref"]),
        origin_bug_id=str(d["origin_bug_id"]),
        hunk_id=str(d["hunk_id"]),
        class_name=str(d["class_name"]),
        label=str(d["label"]),
    )


def structured_to_dict(report: StructuredBugReport) -> dict:
    return {
        "bug_id": report.bug_id,
        "samples": [
            {
                "kind": s.kind,
                "tokens": [{"text": t.text, "is_code": t.is_code} for t in s.tokens],
                "source_span": list(s.source_span),
                "line_indices": s.line_indices,
            }
            for s in report.samples
        ],
    }


def structured_from_dict(d: dict) -> StructuredBugReport:
    samples = []
    for s in d["samples"]:
        samples.append(
            Sample(
                kind=str(s["kind"]),
                tokens=[Token(str(t["text"]), bool(t["is_code"])) for t in s["tokens"]],
                source_span=tuple(s.get("source_span", (0, 0))),
                line_indices=list(s["line_indices"]) if s.get("line_indices") is not None else None,
            )
        )
    return StructuredBugReport(bug_id=str(d["bug_id"]), samples=samples)


def augmented_report_to_dict(report: AugmentedBugReport) -> dict:
    return {
        "id": report.id,
        "origin_bug_id": report.origin_bug_id,
        "samples": [
            {
                "kind": s.kind,
                "tokens": [{"text": t.text, "is_code": t.is_code} for t in s.tokens],
                "line_indices": s.line_indices,
            }
            for s in report.samples
        ],
        "provenance": [
            {"sample_index": p.sample_index, "applied_ops": p.applied_ops, "dropped": p.dropped}
            for p in report.provenance
        ],
        "permutation": report.permutation,
    }
