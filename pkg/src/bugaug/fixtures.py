"""Deterministic synthetic corpus generator for demos and end-to-end tests.

Emits the three ingest inputs (bugs.jsonl, links.jsonl, diffs/) for a made-up
Java project. Bug descriptions carry realistic structure: OB/EB/S2R
paragraphs, stack traces, and code snippets referencing the classes touched
by the linked changesets.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path

from .diffs import serialize_hunks
from .model import (
    BugReport,
    Changeset,
    Hunk,
    LinkRecord,
    bug_to_dict,
    changeset_to_dict,
    link_to_dict,
    write_jsonl,
)
from .rng import derive_rng

CLASSES = [
    ("org.demo.core", "AsyncDispatcher"),
    ("org.demo.core", "RequestContext"),
    ("org.demo.core", "TimerQueue"),
    ("org.demo.net", "NioChannel"),
    ("org.demo.net", "HttpParser"),
    ("org.demo.net", "WebSocketFrame"),
    ("org.demo.net", "ConnectionPool"),
    ("org.demo.util", "SessionManager"),
    ("org.demo.util", "ByteBufferPool"),
    ("org.demo.util", "ConfigLoader"),
    ("org.demo.util", "CacheRegistry"),
    ("org.demo.util", "LogValve"),
    ("org.demo.util", "JarScanner"),
    ("org.demo.util", "ErrorReporter"),
]

_OB_TEMPLATES = [
    "The {cls} does not release the worker thread and the request hangs.",
    "{cls} fails with a timeout when the queue is full.",
    "After restart the {cls} never closes the open channel.",
    "The {cls} crashes when the payload is empty.",
]
_EB_TEMPLATES = [
    "The call should return immediately and the session should stay valid.",
    "The {cls} is expected to reject oversized frames.",
    "Shutdown should stop all timers and release the buffers properly.",
]
_S2R_TEMPLATES = [
    "Steps to reproduce: 1. start the server 2. open a connection 3. stop the worker",
    "To reproduce the problem follow these steps: 1. load the config 2. send a request",
]

_EPOCH = datetime(2020, 1, 1, 12, 0, 0, tzinfo=timezone.utc)


def _class_path(package: str, name: str) -> str:
    return package.replace(".", "/") + f"/{name}.java"


def _make_hunk(package: str, name: str, rng) -> Hunk:
    method = rng.choice(["init", "release", "flush", "handle", "reset"]) + name
    old_value = rng.randint(1, 5)
    lines = (
        ("context", f"public class {name} {{"),
        ("removed", f"    private int retries = {old_value};"),
        ("added", f"    private int retries = {old_value + rng.randint(1, 4)};"),
        ("added", f"    // tuned while reworking {method}()"),
        ("context", f"    void {method}() {{"),
        ("context", "    }"),
    )
    old_start = rng.randint(1, 200)
    return Hunk(
        id="",
        changeset_id="",
        file_path=_class_path(package, name),
        class_name=name,
        old_start=old_start,
        old_len=4,
        new_start=old_start,
        new_len=5,
        lines=lines,
    )


def _stack_trace(classes: list[tuple[str, str]], rng) -> str:
    package, name = rng.choice(classes)
    other_package, other_name = rng.choice(classes)
    return "\n".join(
        [
            "org.demo.AsyncTimeoutException: dispatch stalled",
            f"    at {package}.{name}.handle({name}.java:{rng.randint(10, 200)})",
            f"    at {other_package}.{other_name}.flush({other_name}.java:{rng.randint(10, 200)})",
            f"    at java.util.TimerThread.mainLoop(Timer.java:{rng.randint(100, 600)})",
            f"    at java.lang.Thread.run(Thread.java:{rng.randint(100, 900)})",
        ]
    )


def _code_snippet(name: str, rng) -> str:
    return "\n".join(
        [
            f"public void handle{name}(Request req) {{",
            f"    channel.write(req.payload(), {rng.randint(1, 9)});",
            "    timer.cancel();",
            "}",
        ]
    )


def _description(classes: list[tuple[str, str]], rng) -> str:
    cls = rng.choice(classes)[1]
    blocks = [
        rng.choice(_OB_TEMPLATES).format(cls=cls),
        rng.choice(_EB_TEMPLATES).format(cls=cls),
        rng.choice(_S2R_TEMPLATES),
    ]
    if rng.random() < 0.5:
        blocks.append(_stack_trace(classes, rng))
    if rng.random() < 0.4:
        blocks.append(_code_snippet(cls, rng))
    rng.shuffle(blocks)
    return "\n\n".join(blocks)


def generate_corpus(out_dir: str | Path, n_bugs: int = 50, seed: int = 7) -> Path:
    """Write bugs.jsonl, links.jsonl, and diffs/ under out_dir; returns out_dir."""
    out_dir = Path(out_dir)
    diffs_dir = out_dir / "diffs"
    diffs_dir.mkdir(parents=True, exist_ok=True)

    bugs: list[BugReport] = []
    links: list[LinkRecord] = []
    changesets: list[Changeset] = []

    for i in range(n_bugs):
        rng = derive_rng(seed, "bug", i)
        bug_id = f"BUG-{i + 1:04d}"
        touched = rng.sample(CLASSES, rng.randint(1, 3))
        inducing_id = f"cs{i + 1:04d}a"
        fixing_id = f"cs{i + 1:04d}f"
        opened = _EPOCH + timedelta(days=2 * i, hours=rng.randint(0, 20))

        inducing_hunks = []
        for package, name in touched:
            for _ in range(rng.randint(1, 2)):
                inducing_hunks.append(_make_hunk(package, name, rng))
        # most fixes touch every inducing class; some skip one to exercise the
        # class filter on positives
        fixed_classes = list(touched)
        if len(fixed_classes) > 1 and rng.random() < 0.25:
            fixed_classes.pop(rng.randrange(len(fixed_classes)))
        fixing_hunks = [_make_hunk(package, name, rng) for package, name in fixed_classes]

        changesets.append(
            Changeset(
                id=inducing_id,
                author=f"dev{rng.randint(1, 6)}",
                committed_at=opened - timedelta(days=rng.randint(5, 40)),
                log_message=f"rework {' and '.join(name for _, name in touched)} handling",
            )
        )
        changesets.append(
            Changeset(
                id=fixing_id,
                author=f"dev{rng.randint(1, 6)}",
                committed_at=opened + timedelta(days=rng.randint(1, 15)),
                log_message=f"fix {bug_id}: guard {fixed_classes[0][1]} against stalled requests",
            )
        )
        (diffs_dir / f"{inducing_id}.diff").write_text(serialize_hunks(inducing_hunks), "utf-8")
        (diffs_dir / f"{fixing_id}.diff").write_text(serialize_hunks(fixing_hunks), "utf-8")

        summary_cls = touched[0][1]
        bugs.append(
            BugReport(
                id=bug_id,
                project="demo",
                summary=f"{summary_cls} does not timeout with pending async requests",
                description=_description(touched, rng),
                opened_at=opened,
                status="fixed",
            )
        )
        links.append(
            LinkRecord(
                bug_id=bug_id,
                inducing_changeset_ids=(inducing_id,),
                fixing_changeset_ids=(fixing_id,),
            )
        )

    # a few reports that were closed without a fix; ingestion drops them
    for j, status in enumerate(("wont_fix", "not_a_bug", "wont_fix")):
        rng = derive_rng(seed, "dropped", j)
        bugs.append(
            BugReport(
                id=f"BUG-X{j + 1:03d}",
                project="demo",
                summary="Request for different default configuration",
                description="Please change the defaults.",
                opened_at=_EPOCH + timedelta(days=3 * j + 1),
                status=status,
            )
        )

    # unlinked changesets fattening the negative hunk pool
    for j in range(6):
        rng = derive_rng(seed, "noise", j)
        cs_id = f"cs9{j:03d}n"
        package, name = rng.choice(CLASSES)
        changesets.append(
            Changeset(
                id=cs_id,
                author=f"dev{rng.randint(1, 6)}",
                committed_at=_EPOCH + timedelta(days=rng.randint(0, 90)),
                log_message=f"refactor {name} internals",
            )
        )
        (diffs_dir / f"{cs_id}.diff").write_text(
            serialize_hunks([_make_hunk(package, name, rng)]), "utf-8"
        )

    write_jsonl(out_dir / "bugs.jsonl", (bug_to_dict(b) for b in bugs))
    write_jsonl(out_dir / "links.jsonl", (link_to_dict(l) for l in links))
    write_jsonl(diffs_dir / "changesets.jsonl", (changeset_to_dict(c) for c in changesets))
    return out_dir
