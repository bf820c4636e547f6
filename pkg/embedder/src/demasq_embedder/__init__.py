"""Text-to-embedding front end for the energy-based detector.

Reads labeled text JSONL, encodes each text with a sentence-transformers
model pinned through a revision lock file, and writes embedding records
in the exact JSONL format the detector's train/evaluate/classify commands
consume.
"""

from .encode import DEFAULT_MODEL, SentenceTransformerEncoder, read_lock, write_lock
from .errors import EmbedderError, EncoderLoadError, ParseError, ValidationError
from .pipeline import EmbedSummary, embed_file
from .records import TextRecord, load_text_jsonl

__all__ = [
    "DEFAULT_MODEL",
    "EmbedderError",
    "EmbedSummary",
    "EncoderLoadError",
    "ParseError",
    "SentenceTransformerEncoder",
    "TextRecord",
    "ValidationError",
    "embed_file",
    "load_text_jsonl",
    "read_lock",
    "write_lock",
]

__version__ = "1.0.0"
