"""JSONL dataset ingestion and stratified train/test splitting.

One record per line:

    {"id": "a1", "label": 0, "domain": "medical", "embedding": [0.1, ...]}

``label`` is 0 for machine-generated and 1 for human-written text; it may
be omitted for classification-only inputs.  ``domain`` is an optional tag
carried through to per-domain metric breakdowns.  Embedding length must be
uniform across a file.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    ParseError,
    ShapeError,
    ValidationError,
)


@dataclass(frozen=True)
class EmbeddingRecord:
    id: str
    embedding: np.ndarray
    label: int | None = None
    domain: str = ""

    def to_json(self) -> str:
        obj = {"id": self.id}
        if self.label is not None:
            obj["label"] = self.label
        if self.domain:
            obj["domain"] = self.domain
        obj["embedding"] = [float(v) for v in self.embedding]
        return json.dumps(obj, separators=(",", ":"))


@dataclass(frozen=True)
class DatasetSplit:
    train: list[EmbeddingRecord]
    test: list[EmbeddingRecord]
    seed: int
    ratio: float


def _validate_record(obj, line_no: int, require_label: bool) -> EmbeddingRecord:
    if not isinstance(obj, dict):
        raise ValidationError(f"line {line_no}: record must be a JSON object")
    rid = obj.get("id")
    if not isinstance(rid, str) or not rid:
        raise ValidationError(f"line {line_no}: 'id' must be a non-empty string")
    label = obj.get("label")
    if label is None:
        if require_label:
            raise ValidationError(f"line {line_no}: missing 'label'")
    elif isinstance(label, bool) or label not in (0, 1):
        raise ValidationError(
            f"line {line_no}: 'label' must be 0 or 1, got {label!r}")
    domain = obj.get("domain", "")
    if not isinstance(domain, str):
        raise ValidationError(f"line {line_no}: 'domain' must be a string")
    emb = obj.get("embedding")
    if not isinstance(emb, list) or not emb:
        raise ValidationError(
            f"line {line_no}: 'embedding' must be a non-empty array")
    try:
        vec = np.asarray(emb, dtype=np.float64)
    except (TypeError, ValueError):
        raise ValidationError(
            f"line {line_no}: 'embedding' contains non-numeric entries")
    if vec.ndim != 1:
        raise ValidationError(f"line {line_no}: 'embedding' must be flat")
    if not np.all(np.isfinite(vec)):
        raise ValidationError(
            f"line {line_no}: 'embedding' contains non-finite values")
    vec.setflags(write=False)
    return EmbeddingRecord(id=rid, embedding=vec,
                           label=None if label is None else int(label),
                           domain=domain)


def load_jsonl(path, require_labels: bool = True) -> list[EmbeddingRecord]:
    """Parse and validate a whole JSONL file.

    Empty and whitespace-only lines are ignored; any malformed line fails
    the load with its 1-based line number.  Embedding length and id
    uniqueness are enforced across the file.  With ``require_labels=False``
    records may omit the label (classification input).
    """
    records: list[EmbeddingRecord] = []
    seen_ids: set[str] = set()
    dim: int | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", line_no) from exc
            rec = _validate_record(obj, line_no, require_labels)
            if rec.id in seen_ids:
                raise ValidationError(f"line {line_no}: duplicate id {rec.id!r}")
            seen_ids.add(rec.id)
            if dim is None:
                dim = rec.embedding.shape[0]
            elif rec.embedding.shape[0] != dim:
                raise ShapeError(
                    f"line {line_no}: embedding length "
                    f"{rec.embedding.shape[0]} differs from {dim} seen earlier")
            records.append(rec)
    return records


def dump_jsonl(records, path) -> int:
    """Serialize records one JSON object per line; returns the count."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(rec.to_json())
            fh.write("\n")
            n += 1
    return n


def to_arrays(records) -> tuple[np.ndarray, np.ndarray, list[str], list[str]]:
    """(embeddings (N, d), labels (N,), ids, domains) from labeled records."""
    recs = list(records)
    if not recs:
        raise ConfigurationError("no records")
    if any(r.label is None for r in recs):
        raise ValidationError("every record needs a label for this operation")
    X = np.stack([r.embedding for r in recs])
    y = np.array([r.label for r in recs], dtype=np.int64)
    return X, y, [r.id for r in recs], [r.domain for r in recs]


def stratified_split(records, ratio: float, seed: int) -> DatasetSplit:
    """Seeded per-label split preserving label proportions.

    Each label's records are shuffled and cut at round(ratio * n), clamped
    so that whenever a label has at least two records both sides receive
    at least one.  Output preserves the input order within each side.
    """
    recs = list(records)
    if not 0.0 < ratio < 1.0:
        raise ConfigurationError(f"ratio must be in (0,1), got {ratio}")
    labels = {r.label for r in recs}
    if None in labels:
        raise ValidationError("cannot split records lacking labels")
    if len(labels) < 2:
        raise ConfigurationError(
            "stratified split requires both labels present")
    rng = np.random.default_rng(seed)
    train_idx: list[int] = []
    test_idx: list[int] = []
    for lab in sorted(labels):
        idx = np.array([i for i, r in enumerate(recs) if r.label == lab])
        rng.shuffle(idx)
        n = idx.size
        n_train = int(round(ratio * n))
        if n >= 2:
            n_train = min(max(n_train, 1), n - 1)
        train_idx.extend(idx[:n_train].tolist())
        test_idx.extend(idx[n_train:].tolist())
    train_idx.sort()
    test_idx.sort()
    return DatasetSplit(train=[recs[i] for i in train_idx],
                        test=[recs[i] for i in test_idx],
                        seed=int(seed), ratio=float(ratio))
