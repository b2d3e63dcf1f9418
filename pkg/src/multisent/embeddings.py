"""Monolingual embedding tables and out-of-vocabulary resolution.

Tables load from word2vec text format (header "vocab_size dim", then one
"word v1 ... vk" line per word). Out-of-vocabulary tokens get seeded
random vectors: the vector is a pure function of (seed, lang, token), so
the same token resolves identically within a run and across runs.

All tables used together must share one dimensionality; that is checked
when tables are combined, never mid-training.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ArgumentError, ConfigurationError, ParseError
from .preprocess import TokenizedTweet
from .rng import SplitMix64, derive_stream


def default_oov_scale(dim: int) -> float:
    """Per-component bound for OOV vectors; small relative to unit vectors."""
    return 0.5 / dim


@dataclass
class EmbeddingTable:
    """One language's word vectors plus optional corpus frequency ranks."""

    lang: str
    dim: int
    entries: dict[str, np.ndarray]
    frequency_rank: dict[str, int] | None = None
    duplicate_count: int = 0
    _oov_cache: dict[tuple[int, float, str], np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.dim <= 0:
            raise ArgumentError(f"embedding dim must be positive, got {self.dim}")
        for word, vec in self.entries.items():
            if vec.shape != (self.dim,):
                raise ArgumentError(
                    f"vector for {word!r} has shape {vec.shape}, expected ({self.dim},)"
                )

    def __contains__(self, word: str) -> bool:
        return word in self.entries

    def lookup(self, token: str, oov_seed: int, oov_scale: float | None = None) -> np.ndarray:
        """Vector for token; OOV tokens get a cached seeded random vector."""
        vec = self.entries.get(token)
        if vec is not None:
            return vec
        scale = default_oov_scale(self.dim) if oov_scale is None else oov_scale
        key = (oov_seed, scale, token)
        cached = self._oov_cache.get(key)
        if cached is None:
            cached = oov_vector(oov_seed, self.lang, token, self.dim, scale)
            self._oov_cache[key] = cached
        return cached

    def fingerprint(self) -> str:
        """Content hash covering language, dim, and every entry."""
        h = hashlib.sha256()
        h.update(f"{self.lang}\x1f{self.dim}".encode())
        for word in sorted(self.entries):
            h.update(b"\x1e" + word.encode() + b"\x1f")
            h.update(np.ascontiguousarray(self.entries[word], dtype=np.float64).tobytes())
        return h.hexdigest()


@dataclass
class VocabularyMatrix:
    """Stacked vectors for a corpus vocabulary, rows in lexicographic word order."""

    lang: str
    words: list[str]
    Z: np.ndarray

    def __post_init__(self):
        if self.Z.shape[0] != len(self.words):
            raise ArgumentError(
                f"matrix has {self.Z.shape[0]} rows for {len(self.words)} words"
            )

    @property
    def dim(self) -> int:
        return self.Z.shape[1]


def load_embedding_table(path: str | Path, lang: str) -> EmbeddingTable:
    """Parse a word2vec text file.

    Duplicate words keep the last occurrence; the table records how many
    were overwritten. Malformed lines raise ParseError with the 1-based
    line number.
    """
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise ParseError("empty embedding file", line=1)
    header = lines[0].split()
    if len(header) != 2:
        raise ParseError(f"header must be 'vocab_size dim', got {lines[0]!r}", line=1)
    try:
        vocab_size, dim = int(header[0]), int(header[1])
    except ValueError:
        raise ParseError(f"header must be two integers, got {lines[0]!r}", line=1) from None
    if dim <= 0 or vocab_size < 0:
        raise ParseError(f"invalid header values {vocab_size} {dim}", line=1)

    body = [(i + 2, ln) for i, ln in enumerate(lines[1:]) if ln.strip()]
    if len(body) != vocab_size:
        lineno = body[-1][0] if body else 1
        raise ParseError(
            f"header promises {vocab_size} rows, file has {len(body)}", line=lineno
        )

    entries: dict[str, np.ndarray] = {}
    duplicates = 0
    for lineno, ln in body:
        parts = ln.rstrip().split(" ")
        if len(parts) != dim + 1:
            raise ParseError(
                f"expected a word and {dim} values, got {len(parts)} fields", line=lineno
            )
        word = parts[0]
        try:
            vec = np.array([float(v) for v in parts[1:]], dtype=np.float64)
        except ValueError:
            raise ParseError(f"non-numeric vector component in {ln!r}", line=lineno) from None
        if word in entries:
            duplicates += 1
        entries[word] = vec
    return EmbeddingTable(lang=lang, dim=dim, entries=entries, duplicate_count=duplicates)


def save_embedding_table(table: EmbeddingTable, path: str | Path) -> None:
    """Write a table in word2vec text format (word order is lexicographic)."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"{len(table.entries)} {table.dim}\n")
        for word in sorted(table.entries):
            values = " ".join(f"{v:.17g}" for v in table.entries[word])
            fh.write(f"{word} {values}\n")


def oov_vector(seed: int, lang: str, token: str, dim: int, scale: float) -> np.ndarray:
    """Deterministic random vector in [-scale, +scale]^dim for an unknown token."""
    rng = SplitMix64(derive_stream(seed, "oov", lang, token))
    return rng.uniform_array(dim, -scale, scale)


def embed_tokens(
    tweet: TokenizedTweet,
    table: EmbeddingTable,
    oov_seed: int,
    oov_scale: float | None = None,
) -> np.ndarray:
    """Stack per-token vectors for one tweet; row t corresponds to token t."""
    if table.lang != tweet.lang:
        raise ArgumentError(
            f"tweet language {tweet.lang!r} does not match table language {table.lang!r}"
        )
    rows = [table.lookup(tok, oov_seed, oov_scale) for tok in tweet.tokens]
    return np.stack(rows).astype(np.float64)


def build_vocabulary_matrix(
    tweets: list[TokenizedTweet],
    table: EmbeddingTable,
    oov_seed: int,
    oov_scale: float | None = None,
) -> VocabularyMatrix:
    """Matrix over the union vocabulary of tweets in the table's language.

    Row order is lexicographic by word so the matrix is reproducible
    regardless of corpus order.
    """
    vocab: set[str] = set()
    for tw in tweets:
        if tw.lang != table.lang:
            raise ArgumentError(
                f"tweet {tw.id!r} has language {tw.lang!r}, table is {table.lang!r}"
            )
        vocab.update(tw.tokens)
    words = sorted(vocab)
    if not words:
        return VocabularyMatrix(lang=table.lang, words=[], Z=np.zeros((0, table.dim)))
    Z = np.stack([table.lookup(w, oov_seed, oov_scale) for w in words]).astype(np.float64)
    return VocabularyMatrix(lang=table.lang, words=words, Z=Z)


def count_tokens(tweets: list[TokenizedTweet], lang: str | None = None) -> dict[str, int]:
    """Token occurrence counts, optionally restricted to one language."""
    counts: Counter[str] = Counter()
    for tw in tweets:
        if lang is None or tw.lang == lang:
            counts.update(tw.tokens)
    return dict(counts)


def ranks_from_counts(counts: dict[str, int]) -> dict[str, int]:
    """1-based frequency ranks, most frequent first; ties break lexicographically."""
    ordered = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    return {word: i + 1 for i, (word, _) in enumerate(ordered)}


def load_frequency_counts(path: str | Path) -> dict[str, int]:
    """Read a sidecar frequency TSV: "word<TAB>count" per line."""
    counts: dict[str, int] = {}
    for i, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not raw.strip() or raw.startswith("#"):
            continue
        parts = raw.split("\t")
        if len(parts) != 2:
            raise ParseError(f"expected 'word<TAB>count', got {raw!r}", line=i)
        try:
            counts[parts[0]] = int(parts[1])
        except ValueError:
            raise ParseError(f"count must be an integer, got {parts[1]!r}", line=i) from None
    return counts


def check_dim_uniformity(tables: list[EmbeddingTable]) -> int:
    """Assert all tables share one dim; returns it. Raised at load time."""
    if not tables:
        raise ArgumentError("no embedding tables given")
    dims = {t.dim for t in tables}
    if len(dims) != 1:
        detail = ", ".join(f"{t.lang}={t.dim}" for t in tables)
        raise ConfigurationError(f"embedding dims differ across tables: {detail}")
    return dims.pop()
