"""Bug-report structure extraction.

Decomposes raw bug-report text into stack traces, code snippets, and
natural-language paragraphs labeled OB (observed behavior), EB (expected
behavior), or S2R (steps to reproduce), with noise reduction for traces and
punctuation filtering for snippets.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .model import BugReport, Sample, StackFrame, StructuredBugReport, Token

DEFAULT_LIBRARY_PREFIXES = ("java.", "javax.", "sun.", "jdk.")

# punctuation filtered from code snippets; underscore is an identifier character
PUNCTUATION_CHARS = "".join(c for c in string.punctuation if c != "_")
_PUNCT_SET = frozenset(PUNCTUATION_CHARS)

_CODE_LINE_KEYWORDS = frozenset(
    """public private protected class interface enum void int long double float
    boolean char byte short return if else for while do try catch finally throw
    throws import package static final new switch case break continue this super
    synchronized abstract var def""".split()
)

_EXC_CLASS = r"(?:[A-Za-z_$][\w$]*\.)*[A-Za-z_$][\w$]*?(?:Exception|Error)"
_HEADER_RE = re.compile(
    r"^\s*(?:Exception in thread \"[^\"]*\"\s*:?\s*)?(?P<cls>" + _EXC_CLASS + r")\b"
)
_CAUSED_BY_RE = re.compile(r"^\s*Caused by:\s+(?P<cls>" + _EXC_CLASS + r")\b")
_AT_FRAME_RE = re.compile(r"^\s*at\s+(?P<loc>[\w$.<>/]+)\s*\((?P<src>[^)]*)\)")
_ELLIPSIS_RE = re.compile(r"^\s*\.\.\.\s*\d+\s+more\s*$")

_CAMEL_RE = re.compile(r"[a-z][A-Z]")
_SNAKE_RE = re.compile(r"^[A-Za-z0-9]+(?:_[A-Za-z0-9]+)+$")
_DOTTED_RE = re.compile(r"[A-Za-z_$][\w$]*\.[A-Za-z_$]")
_NUMBERED_STEP_RE = re.compile(r"^\d+[.)]$")


# --- tokens -------------------------------------------------------------


def tokenize(text: str) -> list[str]:
    return text.split()


def word_core(token: str) -> str:
    """Token text with surrounding punctuation stripped ('context.' -> 'context')."""
    return token.strip(PUNCTUATION_CHARS)


def is_code_token(text: str, identifiers: Iterable[str] = ()) -> bool:
    core = word_core(text)
    if text in identifiers or core in identifiers:
        return True
    if _CAMEL_RE.search(text):
        return True
    if core and _SNAKE_RE.match(core):
        return True
    if _DOTTED_RE.search(text):
        return True
    if text.rstrip(".,;:!?'\"").endswith("()"):
        return True
    return False


def detect_code_tokens(tokens: Sequence[str | Token], identifiers: Iterable[str] = ()) -> list[Token]:
    """Mark code tokens: camelCase, snake_case, dotted paths, calls, or known identifiers."""
    ident_set = frozenset(identifiers)
    out: list[Token] = []
    for tok in tokens:
        text = tok.text if isinstance(tok, Token) else tok
        out.append(Token(text=text, is_code=is_code_token(text, ident_set)))
    return out


def strip_punctuation(snippet_tokens: Sequence[Token]) -> list[Token]:
    """Drop punctuation-only tokens and split identifiers on punctuation.

    'a.b.c()' becomes three tokens a b c; fragments keep the parent's code flag.
    """
    out: list[Token] = []
    for tok in snippet_tokens:
        for fragment in re.split("[" + re.escape(PUNCTUATION_CHARS) + "]+", tok.text):
            if fragment:
                out.append(Token(text=fragment, is_code=tok.is_code))
    return out


# --- pattern dictionary -------------------------------------------------


@dataclass(frozen=True)
class PatternDictionary:
    """Keyword lists that decide whether a paragraph reads as OB, EB, or S2R."""

    negative_verbs: frozenset[str]
    negations: frozenset[str]
    eb: frozenset[str]
    s2r: frozenset[str]

    @classmethod
    def from_dict(cls, data: dict) -> "PatternDictionary":
        ob = data.get("OB", {})
        return cls(
            negative_verbs=frozenset(w.lower() for w in ob.get("negative_verbs", [])),
            negations=frozenset(w.lower() for w in ob.get("negations", [])),
            eb=frozenset(w.lower() for w in data.get("EB", [])),
            s2r=frozenset(w.lower() for w in data.get("S2R", [])),
        )

    @classmethod
    def load(cls, path: str | Path) -> "PatternDictionary":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    @classmethod
    def default(cls) -> "PatternDictionary":
        data = resources.files("bugaug").joinpath("data/patterns.json").read_text("utf-8")
        return cls.from_dict(json.loads(data))


def classify_tokens(tokens: Sequence[Token], patterns: PatternDictionary) -> str:
    """Label a token sequence OB/EB/S2R/Other; priority S2R > EB > OB."""
    cores = [word_core(t.text).lower() for t in tokens if not t.is_code]
    raws = [t.text for t in tokens if not t.is_code]
    numbered = sum(1 for r in raws if _NUMBERED_STEP_RE.match(r))
    if numbered >= 2 or any(c in patterns.s2r for c in cores):
        return "S2R"
    if any(c in patterns.eb for c in cores):
        return "EB"
    if any(c in patterns.negations or c in patterns.negative_verbs for c in cores):
        return "OB"
    return "Other"


def classify_paragraphs(remainder_text: str, pattern_dict: PatternDictionary) -> list[Sample]:
    """Split text into blank-line-delimited blocks and label each one."""
    samples: list[Sample] = []
    for start, end, block in _paragraph_blocks(remainder_text):
        tokens = detect_code_tokens(tokenize(block))
        if not tokens:
            continue
        kind = classify_tokens(tokens, pattern_dict)
        samples.append(Sample(kind=kind, tokens=tokens, source_span=(start, end)))
    return samples


def _paragraph_blocks(text: str) -> list[tuple[int, int, str]]:
    blocks: list[tuple[int, int, str]] = []
    span_start = None
    span_end = 0
    for line_start, line_end, line in _lines_with_offsets(text):
        if line.strip():
            if span_start is None:
                span_start = line_start
            span_end = line_end
        elif span_start is not None:
            blocks.append((span_start, span_end, text[span_start:span_end]))
            span_start = None
    if span_start is not None:
        blocks.append((span_start, span_end, text[span_start:span_end]))
    return blocks


def _lines_with_offsets(text: str) -> list[tuple[int, int, str]]:
    out = []
    pos = 0
    for raw in text.splitlines(keepends=True):
        line = raw.rstrip("\r\n")
        out.append((pos, pos + len(line), line))
        pos += len(raw)
    return out


# --- stack traces -------------------------------------------------------


def _frame_from_line(line: str, is_last: bool, library_prefixes: Sequence[str]) -> StackFrame | None:
    caused = _CAUSED_BY_RE.match(line)
    if caused:
        return StackFrame(raw=line, kind="caused_by", class_ref=caused.group("cls"))
    at = _AT_FRAME_RE.match(line)
    if at:
        loc = at.group("loc").rsplit("/", 1)[-1]  # drop Java 9+ module prefix
        class_ref = loc.rsplit(".", 1)[0] if "." in loc else loc
        if is_last:
            return StackFrame(raw=line, kind="bottom", class_ref=class_ref)
        kind = "library" if class_ref.startswith(tuple(library_prefixes)) else "app"
        return StackFrame(raw=line, kind=kind, class_ref=class_ref)
    if _ELLIPSIS_RE.match(line):
        return StackFrame(raw=line, kind="bottom" if is_last else "library", class_ref=None)
    return None


def _find_traces(
    lines: Sequence[str], library_prefixes: Sequence[str] = DEFAULT_LIBRARY_PREFIXES
) -> list[tuple[int, int, list[StackFrame]]]:
    """Locate traces as (start_line, end_line_exclusive, frames) triples.

    A trace starts at an exception-header line immediately followed by at least
    one 'at ...' frame; 'Caused by:' chains and '... N more' lines attach.
    """
    found: list[tuple[int, int, list[StackFrame]]] = []
    i = 0
    while i < len(lines):
        header = _HEADER_RE.match(lines[i])
        if not (header and not _CAUSED_BY_RE.match(lines[i])) or i + 1 >= len(lines):
            i += 1
            continue
        if not _AT_FRAME_RE.match(lines[i + 1]):
            i += 1
            continue
        start = i
        j = i + 1
        while j < len(lines):
            if _AT_FRAME_RE.match(lines[j]) or _ELLIPSIS_RE.match(lines[j]):
                j += 1
            elif (
                _CAUSED_BY_RE.match(lines[j])
                and j + 1 < len(lines)
                and _AT_FRAME_RE.match(lines[j + 1])
            ):
                j += 1
            else:
                break
        frames = [
            StackFrame(
                raw=lines[start],
                kind="exception_header",
                class_ref=_HEADER_RE.match(lines[start]).group("cls"),
            )
        ]
        for k in range(start + 1, j):
            frame = _frame_from_line(lines[k], is_last=(k == j - 1), library_prefixes=library_prefixes)
            assert frame is not None
            frames.append(frame)
        found.append((start, j, frames))
        i = j
    return found


def extract_stack_traces(text: str) -> tuple[list[list[StackFrame]], str]:
    lines = [line for _, _, line in _lines_with_offsets(text)]
    found = _find_traces(lines)
    traces = [frames for _, _, frames in found]
    covered = set()
    for start, end, _ in found:
        covered.update(range(start, end))
    remainder = "\n".join(line for idx, line in enumerate(lines) if idx not in covered)
    return traces, remainder


def reduce_stack_trace(
    trace: Sequence[StackFrame], library_prefixes: Sequence[str] = DEFAULT_LIBRARY_PREFIXES
) -> list[StackFrame]:
    """Keep the header, the first three application frames, and the last frame."""
    if not trace:
        raise ValueError("trace must be non-empty")
    prefixes = tuple(library_prefixes)
    app_indices = [
        i
        for i, f in enumerate(trace)
        if 0 < i < len(trace) - 1
        and f.kind in ("app", "library")
        and f.class_ref is not None
        and not f.class_ref.startswith(prefixes)
    ]
    keep: list[int] = [0]
    for idx in app_indices[:3]:
        if idx not in keep:
            keep.append(idx)
    if (len(trace) - 1) not in keep:
        keep.append(len(trace) - 1)
    out = []
    for idx in keep:
        frame = trace[idx]
        if frame.kind in ("app", "library") and frame.class_ref is not None:
            kind = "library" if frame.class_ref.startswith(prefixes) else "app"
            if kind != frame.kind:
                frame = replace(frame, kind=kind)
        out.append(frame)
    return out


# --- code snippets ------------------------------------------------------


def _is_code_line(line: str) -> bool:
    stripped = line.strip()
    if not stripped:
        return False
    if stripped.endswith(("{", "}", ";")):
        return True
    if stripped.startswith("@"):
        return True
    first = stripped.split(None, 1)[0]
    return first in _CODE_LINE_KEYWORDS


def _find_snippet_runs(indexed_lines: Sequence[tuple[int, str]]) -> list[list[int]]:
    """Group >=2 consecutive code-looking lines (consecutive in original numbering)."""
    runs: list[list[int]] = []
    current: list[int] = []
    for idx, line in indexed_lines:
        if _is_code_line(line) and (not current or idx == current[-1] + 1):
            current.append(idx)
        else:
            if len(current) >= 2:
                runs.append(current)
            current = [idx] if _is_code_line(line) else []
    if len(current) >= 2:
        runs.append(current)
    return runs


def extract_code_snippets(text: str, identifiers: Iterable[str] = ()) -> tuple[list[Sample], str]:
    offsets = _lines_with_offsets(text)
    runs = _find_snippet_runs([(i, line) for i, (_, _, line) in enumerate(offsets)])
    snippets = []
    covered = set()
    for run in runs:
        covered.update(run)
        span = (offsets[run[0]][0], offsets[run[-1]][1])
        snippets.append(_snippet_sample(" ".join(offsets[i][2] for i in run), span, identifiers))
    remainder = "\n".join(line for i, (_, _, line) in enumerate(offsets) if i not in covered)
    return snippets, remainder


def _snippet_sample(block_text: str, span: tuple[int, int], identifiers: Iterable[str]) -> Sample:
    tokens = strip_punctuation(detect_code_tokens(tokenize(block_text), identifiers))
    if not tokens:
        # nothing but punctuation; keep raw tokens so the span stays accounted for
        return Sample(kind="Other", tokens=detect_code_tokens(tokenize(block_text)), source_span=span)
    return Sample(kind="CodeSnippet", tokens=tokens, source_span=span)


# --- whole-report structuring -------------------------------------------


def structure_bug_report(
    bug: BugReport,
    patterns: PatternDictionary,
    library_prefixes: Sequence[str] = DEFAULT_LIBRARY_PREFIXES,
    identifiers: Iterable[str] = (),
) -> StructuredBugReport:
    """Decompose a bug report into ordered stack-trace/snippet/paragraph samples."""
    text = bug.text
    offsets = _lines_with_offsets(text)
    lines = [line for _, _, line in offsets]
    ident_set = frozenset(identifiers)

    samples: list[Sample] = []
    claimed: set[int] = set()

    for start, end, frames in _find_traces(lines, library_prefixes):
        claimed.update(range(start, end))
        reduced = reduce_stack_trace(frames, library_prefixes)
        tokens: list[Token] = []
        line_indices: list[int] = []
        for li, frame in enumerate(reduced):
            frame_tokens = detect_code_tokens(tokenize(frame.raw), ident_set)
            tokens.extend(frame_tokens)
            line_indices.extend([li] * len(frame_tokens))
        samples.append(
            Sample(
                kind="StackTrace",
                tokens=tokens,
                source_span=(offsets[start][0], offsets[end - 1][1]),
                line_indices=line_indices,
            )
        )

    leftover = [(i, lines[i]) for i in range(len(lines)) if i not in claimed]
    for run in _find_snippet_runs(leftover):
        claimed.update(run)
        span = (offsets[run[0]][0], offsets[run[-1]][1])
        samples.append(_snippet_sample(" ".join(lines[i] for i in run), span, ident_set))

    # remaining lines form paragraphs; blank lines and already-claimed lines split blocks
    block: list[int] = []
    blocks: list[list[int]] = []
    for i in range(len(lines)):
        if i not in claimed and lines[i].strip():
            if block and i != block[-1] + 1:
                blocks.append(block)
                block = []
            block.append(i)
        else:
            if block:
                blocks.append(block)
            block = []
    if block:
        blocks.append(block)

    for run in blocks:
        block_text = " ".join(lines[i] for i in run)
        tokens = detect_code_tokens(tokenize(block_text), ident_set)
        if not tokens:
            continue
        kind = classify_tokens(tokens, patterns)
        samples.append(Sample(kind=kind, tokens=tokens, source_span=(offsets[run[0]][0], offsets[run[-1]][1])))

    samples.sort(key=lambda s: s.source_span)
    return StructuredBugReport(bug_id=bug.id, samples=samples)
