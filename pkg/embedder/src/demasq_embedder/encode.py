"""Embedding model loading with a revision lock for reproducibility.

The lock file is a small JSON mapping of model name to hub revision.  The
first successful load of an unpinned model records the revision it
resolved to; later runs pass that revision back to the hub, so the same
lock file always yields the same weights.
"""

from __future__ import annotations

import json

import numpy as np

from .errors import EncoderLoadError, ValidationError

DEFAULT_MODEL = "msmarco-distilbert-base-tas-b"


def read_lock(path) -> dict[str, str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except FileNotFoundError:
        return {}
    except json.JSONDecodeError as exc:
        raise ValidationError(f"lock file {path}: invalid JSON: {exc.msg}")
    if (not isinstance(data, dict)
            or not all(isinstance(k, str) and isinstance(v, str)
                       for k, v in data.items())):
        raise ValidationError(
            f"lock file {path}: expected an object of name: revision pairs")
    return data


def write_lock(path, mapping: dict[str, str]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(dict(sorted(mapping.items())), fh, indent=2)
        fh.write("\n")


class SentenceTransformerEncoder:
    """Thin wrapper putting the sentence-transformers model behind the
    small surface the pipeline needs: name, revision, dimension, encode."""

    def __init__(self, model_name: str = DEFAULT_MODEL,
                 revision: str | None = None):
        try:
            from sentence_transformers import SentenceTransformer
        except ImportError as exc:
            raise EncoderLoadError(
                f"sentence-transformers is not installed: {exc}") from exc
        try:
            self._model = SentenceTransformer(model_name, revision=revision)
        except Exception as exc:
            raise EncoderLoadError(
                f"cannot load model {model_name!r}"
                + (f" at revision {revision!r}" if revision else "")
                + f": {exc}") from exc
        self.name = model_name
        self.revision = revision or self._resolved_revision()
        dim = self._model.get_sentence_embedding_dimension()
        if not dim:
            raise EncoderLoadError(
                f"model {model_name!r} does not report an embedding dimension")
        self.dimension = int(dim)

    def _resolved_revision(self) -> str | None:
        try:
            return self._model._first_module().auto_model.config._commit_hash
        except Exception:
            return None

    def encode(self, texts, batch_size: int) -> np.ndarray:
        vecs = self._model.encode(list(texts), batch_size=batch_size,
                                  convert_to_numpy=True,
                                  show_progress_bar=False)
        return np.asarray(vecs, dtype=np.float64)
