"""Deterministic JSON / JSONL readers and writers.

Every file this package writes is byte-reproducible: object keys are
sorted, floats use their shortest repr, and records never embed wall-clock
values.  Readers report the offending file and line number on bad input.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Iterable, Iterator

__all__ = ["JsonlError", "dumps_canonical", "read_jsonl", "iter_jsonl", "write_jsonl"]


class JsonlError(ValueError):
    """Raised when a JSONL file has a malformed or non-object line."""


def dumps_canonical(obj: Any) -> str:
    """Serialize with sorted keys and no trailing whitespace."""
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(", ", ": "))


def iter_jsonl(path: str | Path) -> Iterator[tuple[int, dict]]:
    """Yield (line_number, record) pairs; blank lines are skipped."""
    path = Path(path)
    with path.open("r", encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise JsonlError(f"{path}:{lineno}: malformed JSON ({exc.msg})") from None
            if not isinstance(record, dict):
                raise JsonlError(f"{path}:{lineno}: expected a JSON object")
            yield lineno, record


def read_jsonl(path: str | Path) -> list[dict]:
    """Read a whole JSONL file into a list of records."""
    return [record for _, record in iter_jsonl(path)]


def write_jsonl(path: str | Path, rows: Iterable[dict]) -> None:
    """Write records one canonical JSON object per line."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(dumps_canonical(row))
            handle.write("\n")
