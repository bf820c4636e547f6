"""Text to embedding-record conversion.

Reads labeled text JSONL, encodes the texts in batches, and writes one
embedding record per line in the detector's input format:

    {"id": "a1", "label": 0, "domain": "medical", "embedding": [0.1, ...]}

``domain`` is omitted when empty.  Records whose text is empty after
trimming are skipped and counted, not failed, so one bad row cannot sink
a large corpus.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .encode import DEFAULT_MODEL, SentenceTransformerEncoder, read_lock, write_lock
from .errors import ValidationError
from .records import load_text_jsonl


@dataclass(frozen=True)
class EmbedSummary:
    written: int
    skipped: int
    model: str
    revision: str | None
    dimension: int


def _record_line(rec, vector) -> str:
    obj = {"id": rec.id, "label": rec.label}
    if rec.domain:
        obj["domain"] = rec.domain
    obj["embedding"] = [float(v) for v in vector]
    return json.dumps(obj, separators=(",", ":"))


def embed_file(in_path, out_path, model_name: str = DEFAULT_MODEL,
               batch: int = 32, encoder=None, lock_path=None) -> EmbedSummary:
    """Encode every non-empty text record from ``in_path`` into ``out_path``.

    The model revision is pinned through a JSON lock file (default:
    ``out_path`` plus a ``.lock`` suffix).  A name already present in the
    lock is loaded at exactly that revision; a new name is recorded at
    whatever revision the first successful load resolves.  Passing a
    prebuilt ``encoder`` skips model loading and the lock entirely.
    """
    if batch < 1:
        raise ValidationError(f"batch size must be positive, got {batch}")
    keep, empty = load_text_jsonl(in_path)

    lock = None
    if encoder is None:
        if lock_path is None:
            lock_path = f"{out_path}.lock"
        lock = read_lock(lock_path)
        encoder = SentenceTransformerEncoder(model_name,
                                             revision=lock.get(model_name))

    written = 0
    with open(out_path, "w", encoding="utf-8") as fh:
        for start in range(0, len(keep), batch):
            chunk = keep[start:start + batch]
            vecs = encoder.encode([r.text for r in chunk], batch_size=batch)
            if vecs.shape != (len(chunk), encoder.dimension):
                raise ValidationError(
                    f"encoder returned shape {vecs.shape}, expected "
                    f"({len(chunk)}, {encoder.dimension})")
            for rec, vec in zip(chunk, vecs):
                fh.write(_record_line(rec, vec))
                fh.write("\n")
                written += 1

    if lock is not None and encoder.revision and model_name not in lock:
        lock[model_name] = encoder.revision
        write_lock(lock_path, lock)

    return EmbedSummary(written=written, skipped=len(empty),
                        model=getattr(encoder, "name", model_name),
                        revision=encoder.revision,
                        dimension=int(encoder.dimension))
