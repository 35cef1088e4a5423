"""Frozen word-embedding and sentence-embedding stores.

Word embeddings load from whitespace-separated text (token then D reals per
line) and are never updated by training. Sentence embeddings load from the
binary SEB1 format (see docs/formats.md): magic "SEB1", little-endian u32
record count, then per record a u16-length UTF-8 identifier, u32 dimension,
and dimension float32 values.
"""

from __future__ import annotations

import hashlib
import logging
import re
import struct
from dataclasses import dataclass, field

import numpy as np

from .text import TokenSeq, Vocabulary

log = logging.getLogger(__name__)

SEB_MAGIC = b"SEB1"

_SENTENCE_SPLIT_RE = re.compile(r"(?<=[.!?])\s+")


@dataclass
class WordEmbeddingTable:
    """Immutable token -> vector table with one shared dimension."""

    vectors: dict[str, np.ndarray]
    dimension: int

    def __contains__(self, token: str) -> bool:
        return token in self.vectors

    def __getitem__(self, token: str) -> np.ndarray:
        return self.vectors[token]

    def __len__(self) -> int:
        return len(self.vectors)

    def content_hash(self) -> str:
        """SHA-256 over sorted tokens and vector bytes; used to assert the
        table stays frozen across training runs."""
        digest = hashlib.sha256()
        for token in sorted(self.vectors):
            digest.update(token.encode("utf-8"))
            digest.update(b"\x00")
            digest.update(np.ascontiguousarray(self.vectors[token], dtype="<f8").tobytes())
        return digest.hexdigest()


@dataclass
class SentenceEmbeddingStore:
    """Immutable sentence identifier -> vector store, uniform dimension."""

    vectors: dict[str, np.ndarray] = field(default_factory=dict)
    dimension: int = 0

    def __contains__(self, identifier: str) -> bool:
        return identifier in self.vectors

    def __getitem__(self, identifier: str) -> np.ndarray:
        return self.vectors[identifier]

    def __len__(self) -> int:
        return len(self.vectors)


def load_word_embeddings(path) -> WordEmbeddingTable:
    """Parse a text embedding file. Raises on inconsistent dimensions or
    unparseable values; a duplicate token keeps the last entry and logs a
    warning."""
    vectors: dict[str, np.ndarray] = {}
    dimension = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n").split()
            if not parts:
                continue
            token, values = parts[0], parts[1:]
            try:
                vec = np.array([float(v) for v in values], dtype=np.float64)
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: unparseable value ({exc})") from exc
            if dimension is None:
                if len(vec) == 0:
                    raise ValueError(f"{path}:{lineno}: no values on first line")
                dimension = len(vec)
            elif len(vec) != dimension:
                raise ValueError(
                    f"{path}:{lineno}: dimension {len(vec)} inconsistent with {dimension}"
                )
            if token in vectors:
                log.warning("duplicate token %r at %s:%d, keeping last", token, path, lineno)
            vectors[token] = vec
    if dimension is None:
        raise ValueError(f"{path}: empty embedding file")
    return WordEmbeddingTable(vectors, dimension)


def write_sentence_embeddings(path, vectors: dict[str, np.ndarray]) -> None:
    """Write an SEB1 file. Values are stored as little-endian float32."""
    with open(path, "wb") as fh:
        fh.write(SEB_MAGIC)
        fh.write(struct.pack("<I", len(vectors)))
        for identifier, vec in vectors.items():
            ident = identifier.encode("utf-8")
            if len(ident) > 0xFFFF:
                raise ValueError(f"identifier too long: {identifier!r}")
            arr = np.ascontiguousarray(vec, dtype="<f4")
            fh.write(struct.pack("<H", len(ident)))
            fh.write(ident)
            fh.write(struct.pack("<I", arr.size))
            fh.write(arr.tobytes())


def load_sentence_embeddings(path) -> SentenceEmbeddingStore:
    """Read an SEB1 file. Raises on bad magic, truncation, duplicate
    identifiers, or mixed dimensions."""

    def read_exact(fh, n):
        data = fh.read(n)
        if len(data) != n:
            raise ValueError(f"{path}: truncated sentence-embedding file")
        return data

    vectors: dict[str, np.ndarray] = {}
    dimension = 0
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != SEB_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected {SEB_MAGIC!r}")
        (count,) = struct.unpack("<I", read_exact(fh, 4))
        for _ in range(count):
            (ident_len,) = struct.unpack("<H", read_exact(fh, 2))
            identifier = read_exact(fh, ident_len).decode("utf-8")
            (dim,) = struct.unpack("<I", read_exact(fh, 4))
            vec = np.frombuffer(read_exact(fh, 4 * dim), dtype="<f4").astype(np.float32)
            if identifier in vectors:
                raise ValueError(f"{path}: duplicate identifier {identifier!r}")
            if dimension == 0:
                dimension = dim
            elif dim != dimension:
                raise ValueError(
                    f"{path}: dimension {dim} for {identifier!r} inconsistent with {dimension}"
                )
            vectors[identifier] = vec
        if fh.read(1):
            raise ValueError(f"{path}: trailing bytes after {count} records")
    return SentenceEmbeddingStore(vectors, dimension)


def split_sentences(text: str) -> list[str]:
    """Split on sentence-final punctuation (., !, ?) followed by whitespace."""
    return [s for s in _SENTENCE_SPLIT_RE.split(text) if s.strip()]


@dataclass
class Resources:
    """Everything a ranker may need at scoring time, loaded once and
    read-only thereafter."""

    word_table: WordEmbeddingTable | None = None
    vocab: Vocabulary | None = None
    sentence_store: SentenceEmbeddingStore | None = None


def compose_paragraph_embedding(sentence_vectors) -> np.ndarray:
    """Elementwise sum of the sentence vectors, accumulated sequentially at
    double precision."""
    sentence_vectors = list(sentence_vectors)
    if not sentence_vectors:
        raise ValueError("cannot compose an empty sequence of sentence vectors")
    first = np.asarray(sentence_vectors[0], dtype=np.float64)
    total = first.copy()
    for vec in sentence_vectors[1:]:
        vec = np.asarray(vec, dtype=np.float64)
        if vec.shape != first.shape:
            raise ValueError(f"dimension mismatch: {vec.shape} vs {first.shape}")
        total += vec
    return total


def embed_tokens(
    table: WordEmbeddingTable,
    tokens: TokenSeq,
    vocab: Vocabulary | None = None,
) -> np.ndarray:
    """Stack the embeddings of the tokens present in both the vocabulary and
    the table, preserving order; missing tokens are skipped. Returns a
    (kept, dimension) matrix, possibly with zero rows."""
    rows = [
        table[tok]
        for tok in tokens
        if (vocab is None or tok in vocab) and tok in table
    ]
    if not rows:
        return np.zeros((0, table.dimension), dtype=np.float64)
    return np.stack(rows).astype(np.float64)
