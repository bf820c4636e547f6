"""Text record ingestion.

One JSON object per line:

    {"id": "a1", "label": 0, "domain": "medical", "text": "..."}

``label`` is 0 for machine-generated and 1 for human-written text and is
required; ``domain`` is an optional tag copied through to the output.
Records whose text trims to nothing are not an error: they are returned
separately so the pipeline can skip them with a warning.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ParseError, ValidationError


@dataclass(frozen=True)
class TextRecord:
    id: str
    label: int
    text: str
    domain: str = ""


def _validate(obj, line_no: int) -> TextRecord:
    if not isinstance(obj, dict):
        raise ValidationError(f"line {line_no}: record must be a JSON object")
    rid = obj.get("id")
    if not isinstance(rid, str) or not rid:
        raise ValidationError(f"line {line_no}: 'id' must be a non-empty string")
    label = obj.get("label")
    if isinstance(label, bool) or label not in (0, 1):
        raise ValidationError(
            f"line {line_no}: 'label' must be 0 or 1, got {label!r}")
    domain = obj.get("domain", "")
    if not isinstance(domain, str):
        raise ValidationError(f"line {line_no}: 'domain' must be a string")
    text = obj.get("text")
    if not isinstance(text, str):
        raise ValidationError(f"line {line_no}: 'text' must be a string")
    return TextRecord(id=rid, label=int(label), text=text, domain=domain)


def load_text_jsonl(path) -> tuple[list[TextRecord], list[TextRecord]]:
    """Parse a text JSONL file into (embeddable records, empty-text records).

    Blank lines are ignored.  Structural problems (bad JSON, wrong field
    types, duplicate ids) fail the load with a 1-based line number; a text
    field that trims to nothing only moves the record to the second list.
    """
    keep: list[TextRecord] = []
    empty: list[TextRecord] = []
    seen: set[str] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line_no) from exc
            rec = _validate(obj, line_no)
            if rec.id in seen:
                raise ValidationError(
                    f"line {line_no}: duplicate id {rec.id!r}")
            seen.add(rec.id)
            (keep if rec.text.strip() else empty).append(rec)
    return keep, empty
