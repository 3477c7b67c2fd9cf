"""Sparse JSON operator documents.

A document lists the nonzero heredity coefficients with 1-based indices and
i <= j; every unlisted coefficient is zero. ``serialize_document`` writes one
entry per line, sorted by (i, j, k), so golden files stay diffable.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from lvolterra.core.tensor import HeredityTensor
from lvolterra.errors import DocumentParseError

logger = logging.getLogger(__name__)

FORMAT_VERSION = "1"
SUFFIX = ".op.json"

Entry = tuple[int, int, int, float]


@dataclass
class OperatorDocument:
    """Parsed operator file. ``ell`` is advisory; classification recomputes it."""

    m: int
    entries: list[Entry]
    ell: int | None = None
    metadata: dict[str, Any] = field(default_factory=dict)
    format_version: str = FORMAT_VERSION

    @property
    def name(self) -> str | None:
        return self.metadata.get("name")

    def tensor(self) -> HeredityTensor:
        """The dense operator; indices shifted to 0-based."""
        return HeredityTensor.from_entries(
            self.m, [(i - 1, j - 1, k - 1, value) for i, j, k, value in self.entries]
        )

    @classmethod
    def from_tensor(
        cls,
        P: HeredityTensor,
        ell: int | None = None,
        metadata: dict[str, Any] | None = None,
    ) -> OperatorDocument:
        entries = [(i + 1, j + 1, k + 1, v) for i, j, k, v in P.nonzero_entries()]
        return cls(m=P.m, entries=entries, ell=ell, metadata=dict(metadata or {}))


def _entry_line(text: str, position: int) -> int | None:
    """Line number of the ``position``-th entry object, assuming one entry per line."""
    seen = -1
    for number, line in enumerate(text.splitlines(), start=1):
        if '"i"' in line:
            seen += 1
            if seen == position:
                return number
    return None


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def parse_document(text: str) -> OperatorDocument:
    """Parse the text of an operator document.

    Raises:
        DocumentParseError: With the line and field of the first problem found.
    """
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentParseError(e.msg, line=e.lineno) from e
    if not isinstance(raw, dict):
        raise DocumentParseError("the document must be a JSON object", line=1)

    version = raw.get("format_version")
    if version != FORMAT_VERSION:
        raise DocumentParseError(
            f"unsupported format version {version!r}", field="format_version"
        )
    m = raw.get("m")
    if not _is_int(m) or m < 2:
        raise DocumentParseError(f"m must be an integer >= 2, got {m!r}", field="m")
    ell = raw.get("ell")
    if ell is not None and (not _is_int(ell) or not 0 <= ell <= m):
        raise DocumentParseError(f"ell must be an integer in 0..{m}, got {ell!r}", field="ell")
    metadata = raw.get("metadata", {})
    if not isinstance(metadata, dict):
        raise DocumentParseError("metadata must be an object", field="metadata")
    items = raw.get("entries")
    if not isinstance(items, list):
        raise DocumentParseError("entries must be a list", field="entries")

    entries: list[Entry] = []
    seen: set[tuple[int, int, int]] = set()
    for n, item in enumerate(items):
        line = _entry_line(text, n)
        where = f"entries[{n}]"
        if not isinstance(item, dict) or set(item) != {"i", "j", "k", "value"}:
            raise DocumentParseError(
                "an entry needs exactly the keys i, j, k, value", line=line, field=where
            )
        for key in ("i", "j", "k"):
            index = item[key]
            if not _is_int(index) or not 1 <= index <= m:
                raise DocumentParseError(
                    f"index must be an integer in 1..{m}, got {index!r}",
                    line=line,
                    field=f"{where}.{key}",
                )
        i, j, k = item["i"], item["j"], item["k"]
        if i > j:
            raise DocumentParseError(
                f"entries are written with i <= j, got i={i}, j={j}", line=line, field=where
            )
        value = item["value"]
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise DocumentParseError("value must be a number", line=line, field=f"{where}.value")
        if not math.isfinite(value):
            raise DocumentParseError("value must be finite", line=line, field=f"{where}.value")
        if (i, j, k) in seen:
            raise DocumentParseError(f"duplicate entry ({i},{j},{k})", line=line, field=where)
        seen.add((i, j, k))
        entries.append((i, j, k, float(value)))

    return OperatorDocument(
        m=m, entries=entries, ell=ell, metadata=metadata, format_version=version
    )


def serialize_document(doc: OperatorDocument) -> str:
    """Render a document in the canonical layout, ending with a newline."""
    lines = [
        "{",
        f'  "format_version": {json.dumps(doc.format_version)},',
        f'  "m": {doc.m},',
    ]
    if doc.ell is not None:
        lines.append(f'  "ell": {doc.ell},')
    lines.append(f'  "metadata": {json.dumps(doc.metadata, sort_keys=True, ensure_ascii=False)},')
    ordered = sorted(doc.entries, key=lambda e: e[:3])
    if not ordered:
        lines.append('  "entries": []')
    else:
        lines.append('  "entries": [')
        rows = [
            f'    {{"i": {i}, "j": {j}, "k": {k}, "value": {json.dumps(float(v))}}}'
            for i, j, k, v in ordered
        ]
        lines.append(",\n".join(rows))
        lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def load_operator(path: Path) -> OperatorDocument:
    """Read and parse an operator file.

    Raises:
        DocumentParseError: If the file does not parse.
        OSError: If the file cannot be read.
    """
    doc = parse_document(Path(path).read_text(encoding="utf-8"))
    logger.debug("Loaded %s: m=%d, %d entries", path, doc.m, len(doc.entries))
    return doc


def save_operator(doc: OperatorDocument, path: Path) -> None:
    """Write a document in the canonical layout."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_document(doc), encoding="utf-8")
    logger.debug("Wrote %s", path)
