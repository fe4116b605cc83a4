from __future__ import annotations

import hashlib
from pathlib import Path

from parem.ingest import Event, TokenUsage


def make_event(
    role: str = "user",
    source: str = "sessions/a.jsonl",
    line: int = 1,
    **kwargs,
) -> Event:
    return Event(role=role, source_path=source, line_number=line, **kwargs)


def make_completion(
    ts: int | None,
    route: str | None = "route-a",
    model: str | None = "model-a",
    tokens: tuple[int, int, int, int] = (10, 5, 100, 2),
    source: str = "trajectories/a.jsonl",
    line: int = 1,
) -> Event:
    return Event(
        role="model_completed",
        source_path=source,
        line_number=line,
        timestamp_ms=ts,
        provider_route=route,
        model=model,
        tokens=TokenUsage(*tokens),
    )


def hash_tree(root: Path) -> str:
    """Digest of every file's relative path and bytes, in sorted order."""
    digest = hashlib.sha256()
    for path in sorted(p for p in Path(root).rglob("*") if p.is_file()):
        digest.update(path.relative_to(root).as_posix().encode())
        digest.update(b"\x00")
        digest.update(path.read_bytes())
        digest.update(b"\x01")
    return digest.hexdigest()
