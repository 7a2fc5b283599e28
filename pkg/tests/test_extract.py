from __future__ import annotations

import random

from bugaug.extract import (
    DEFAULT_LIBRARY_PREFIXES,
    classify_paragraphs,
    classify_tokens,
    detect_code_tokens,
    extract_code_snippets,
    extract_stack_traces,
    reduce_stack_trace,
    strip_punctuation,
    structure_bug_report,
    tokenize,
)
from bugaug.model import StackFrame, Token

from conftest import make_bug

NPE_TRACE = """\
java.lang.NullPointerException: boom
    at org.apache.catalina.AsyncContext.timeout(AsyncContext.java:312)
    at org.apache.coyote.AbstractProcessor.process(AbstractProcessor.java:59)
    at java.util.concurrent.ThreadPoolExecutor.runWorker(ThreadPoolExecutor.java:1149)
    at java.lang.Thread.run(Thread.java:748)
"""

CAUSED_BY_TRACE = """\
org.demo.WrapperException: request failed
    at org.demo.Api.call(Api.java:10)
    at org.demo.Client.send(Client.java:20)
    at java.util.Timer.run(Timer.java:30)
    at java.lang.Thread.run(Thread.java:40)
Caused by: java.io.IOError: disk gone
    at org.demo.Disk.read(Disk.java:5)
    at org.demo.Disk.open(Disk.java:9)
"""


def test_npe_trace_has_five_frames():
    text = "Some prose before.\n\n" + NPE_TRACE + "\nAnd after."
    traces, remainder = extract_stack_traces(text)
    assert len(traces) == 1
    assert len(traces[0]) == 5
    assert traces[0][0].kind == "exception_header"
    assert "Some prose before." in remainder and "And after." in remainder
    assert "NullPointerException" not in remainder


def test_plain_prose_has_no_traces():
    prose = "The connector never times out.\nIt just waits."
    traces, remainder = extract_stack_traces(prose)
    assert traces == []
    assert remainder == prose


def test_caused_by_chain_attaches_to_same_trace():
    # 5 header+frame lines plus 3 caused-by lines -> one trace with 8 frames
    traces, _ = extract_stack_traces(CAUSED_BY_TRACE)
    assert len(traces) == 1
    assert len(traces[0]) == 8
    kinds = [f.kind for f in traces[0]]
    assert kinds.count("caused_by") == 1


def test_header_requires_following_frame():
    text = "We saw a NullPointerException: boom\nbut no trace followed."
    traces, remainder = extract_stack_traces(text)
    assert traces == []
    assert remainder == text


def _frame(i: int, app: bool) -> str:
    pkg = "org.demo.Worker" if app else "java.util.Lib"
    return f"    at {pkg}.m{i}({'Worker' if app else 'Lib'}.java:{i})"


def test_reduce_twenty_frame_trace():
    # frames indexed 0..19: header, 4 library, app at 5..8, library to 18, last 19
    lines = ["org.demo.BoomException: x"]
    for i in range(1, 19):
        lines.append(_frame(i, app=5 <= i <= 8))
    lines.append("    at java.lang.Thread.run(Thread.java:748)")
    traces, _ = extract_stack_traces("\n".join(lines))
    trace = traces[0]
    assert len(trace) == 20
    reduced = reduce_stack_trace(trace, DEFAULT_LIBRARY_PREFIXES)
    assert [f.raw for f in reduced] == [lines[0], lines[5], lines[6], lines[7], lines[19]]
    assert len(reduced) == 5


def test_reduce_two_frame_trace_keeps_both():
    trace = [
        StackFrame(raw="org.X.BoomError: x", kind="exception_header", class_ref="org.X.BoomError"),
        StackFrame(raw="    at org.X.A.m(A.java:1)", kind="bottom", class_ref="org.X.A"),
    ]
    reduced = reduce_stack_trace(trace)
    assert [f.raw for f in reduced] == [trace[0].raw, trace[1].raw]


def test_reduce_trace_without_app_frames_keeps_header_and_bottom():
    lines = ["java.lang.OutOfMemoryError: heap"] + [_frame(i, app=False) for i in range(1, 6)]
    traces, _ = extract_stack_traces("\n".join(lines))
    reduced = reduce_stack_trace(traces[0])
    assert [f.raw for f in reduced] == [lines[0], lines[5]]


def test_reduce_always_keeps_first_and_last_frames():
    rng = random.Random(4)
    for _ in range(100):
        n = rng.randint(1, 12)
        lines = ["org.demo.RandomException: x"] + [_frame(i, rng.random() < 0.4) for i in range(1, n)]
        text = "\n".join(lines)
        traces, _ = extract_stack_traces(text)
        if not traces:
            continue
        reduced = reduce_stack_trace(traces[0])
        raws = [f.raw for f in reduced]
        assert raws[0] == traces[0][0].raw
        assert raws[-1] == traces[0][-1].raw
        assert len(reduced) <= 5


def test_three_line_method_body_is_one_snippet():
    text = "public int add(int a, int b) {\n    return a + b;\n}"
    snippets, remainder = extract_code_snippets(text)
    assert len(snippets) == 1
    assert snippets[0].kind == "CodeSnippet"
    assert remainder.strip() == ""


def test_inline_identifier_is_not_a_snippet():
    text = "Calling AsyncContext.dispatch() hangs the worker."
    snippets, remainder = extract_code_snippets(text)
    assert snippets == []
    assert remainder == text


def test_two_blocks_give_two_snippets():
    text = (
        "int a = 1;\nint b = 2;\n"
        "\nplain prose in between explains the issue\n\n"
        "foo.close();\nbar.flush();\n"
    )
    snippets, _ = extract_code_snippets(text)
    assert len(snippets) == 2


def _tokens(*texts: str, code=()) -> list[Token]:
    return [Token(t, is_code=t in code) for t in texts]


def test_strip_punctuation_drops_pure_punctuation():
    tokens = _tokens("foo", "(", "bar", ")", ";")
    assert [t.text for t in strip_punctuation(tokens)] == ["foo", "bar"]


def test_strip_punctuation_splits_identifiers():
    tokens = [Token("a.b.c()", is_code=True)]
    out = strip_punctuation(tokens)
    assert [t.text for t in out] == ["a", "b", "c"]
    assert all(t.is_code for t in out)


def test_strip_punctuation_can_empty_out():
    assert strip_punctuation(_tokens("{", "}")) == []


def test_classify_table_sentence_as_ob(patterns):
    samples = classify_paragraphs(
        "Async connector does not timeout with HTTP NIO context.", patterns
    )
    assert [s.kind for s in samples] == ["OB"]


def test_classify_should_sentence_as_eb(patterns):
    samples = classify_paragraphs("The request should return 200.", patterns)
    assert [s.kind for s in samples] == ["EB"]


def test_classify_numbered_steps_as_s2r(patterns):
    samples = classify_paragraphs("1. open app 2. click save", patterns)
    assert [s.kind for s in samples] == ["S2R"]


def test_classify_priority_s2r_over_eb_over_ob(patterns):
    text = "Steps: 1. it should fail 2. it does not work"
    (sample,) = classify_paragraphs(text, patterns)
    assert sample.kind == "S2R"


def test_classify_is_deterministic_and_idempotent(patterns):
    text = "The valve leaks memory.\n\nIt should not."
    first = classify_paragraphs(text, patterns)
    second = classify_paragraphs(text, patterns)
    assert [(s.kind, s.source_span) for s in first] == [(s.kind, s.source_span) for s in second]
    for sample in first:
        assert classify_tokens(sample.tokens, patterns) == sample.kind


def test_detect_code_tokens_rules():
    tokens = detect_code_tokens(["AsyncContext", "timeout", "check_word_missing_letter"])
    assert [t.is_code for t in tokens] == [True, False, True]


def test_detect_code_tokens_dotted_call_and_identifiers():
    tokens = detect_code_tokens(
        ["org.apache.Foo", "close()", "Async", "plain"], identifiers=("Async",)
    )
    assert [t.is_code for t in tokens] == [True, True, True, False]


def test_structure_covers_input_with_spans(patterns):
    bug = make_bug(
        "b1",
        summary="JarScanner does not close cached jars",
        description=(
            "The scanner keeps file handles open and the build fails.\n"
            "\n"
            "Expected: handles should be released.\n"
            "\n" + NPE_TRACE + "\n"
            "public void close() {\n    handle.release();\n}\n"
        ),
    )
    structured = structure_bug_report(bug, patterns, identifiers=("JarScanner",))
    text = bug.text
    spans = [s.source_span for s in structured.samples]
    assert spans == sorted(spans)
    # non-overlapping, and every gap between spans is whitespace-only
    cursor = 0
    for start, end in spans:
        assert start >= cursor
        assert text[cursor:start].strip() == ""
        cursor = end
    assert text[cursor:].strip() == ""
    kinds = [s.kind for s in structured.samples]
    assert kinds[0] == "OB"  # summary paragraph
    assert "StackTrace" in kinds and "CodeSnippet" in kinds and "EB" in kinds


def test_structure_stack_trace_tokens_carry_line_indices(patterns):
    bug = make_bug("b2", summary="Worker hangs", description=NPE_TRACE)
    structured = structure_bug_report(bug, patterns)
    trace_samples = [s for s in structured.samples if s.kind == "StackTrace"]
    assert len(trace_samples) == 1
    sample = trace_samples[0]
    assert sample.line_indices is not None
    assert len(sample.line_indices) == len(sample.tokens)
    assert sample.line_indices == sorted(sample.line_indices)
    # reduced trace: header + 2 app frames + bottom = 4 lines
    assert sample.line_indices[-1] == 3


def test_structure_is_deterministic(patterns):
    bug = make_bug("b3", summary="CacheRegistry leaks entries", description="It should not.\n\nint x = 1;\nint y = 2;")
    a = structure_bug_report(bug, patterns)
    b = structure_bug_report(bug, patterns)
    assert [(s.kind, [t.text for t in s.tokens]) for s in a.samples] == [
        (s.kind, [t.text for t in s.tokens]) for s in b.samples
    ]


def test_tokenize_never_yields_whitespace():
    for token in tokenize("  a\tb\nc  d "):
        assert token and not any(c.isspace() for c in token)
