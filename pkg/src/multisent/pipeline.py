"""Embedding context: the bridge from tokenized tweets to input matrices.

An EmbeddingContext bundles the per-language embedding tables, optional
translation matrices mapping each language into the shared target
space, the OOV policy, and the corpus maximum length used for padding.
Its fingerprint ties a trained model to exactly these inputs so stale
model/context pairings fail loudly instead of predicting garbage.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from .align import TranslationMatrix
from .embeddings import EmbeddingTable, check_dim_uniformity, embed_tokens
from .errors import ArgumentError, ConfigurationError
from .preprocess import TokenizedTweet


def corpus_max_len(tweets: list[TokenizedTweet]) -> int:
    """Maximum token count over the corpus (the padding target)."""
    if not tweets:
        raise ArgumentError("empty corpus has no maximum length")
    return max(tw.length for tw in tweets)


@dataclass
class EmbeddingContext:
    """Effective embeddings per language, after optional alignment."""

    tables: dict[str, EmbeddingTable]
    translations: dict[str, TranslationMatrix] = field(default_factory=dict)
    oov_seed: int = 0
    oov_scale: float | None = None
    max_len: int = 1
    rules_version: str = "-"

    def __post_init__(self):
        if not self.tables:
            raise ArgumentError("context needs at least one embedding table")
        self.dim = check_dim_uniformity(list(self.tables.values()))
        for lang, tm in self.translations.items():
            if lang not in self.tables:
                raise ConfigurationError(f"translation for unknown language {lang!r}")
            if tm.src_lang != lang:
                raise ConfigurationError(
                    f"translation stored under {lang!r} maps from {tm.src_lang!r}"
                )
            if tm.dim != self.dim:
                raise ConfigurationError(
                    f"translation for {lang!r} has dim {tm.dim}, tables have {self.dim}"
                )
        if self.max_len < 1:
            raise ArgumentError(f"max_len must be >= 1, got {self.max_len}")

    def embed(self, tweet: TokenizedTweet) -> np.ndarray:
        """Embed one tweet into the shared space: lookup then optional map."""
        table = self.tables.get(tweet.lang)
        if table is None:
            raise ConfigurationError(f"no embedding table for language {tweet.lang!r}")
        X = embed_tokens(tweet, table, self.oov_seed, self.oov_scale)
        tm = self.translations.get(tweet.lang)
        if tm is not None:
            X = X @ tm.W
        return X

    def fingerprint(self) -> dict[str, str]:
        """Stable hashes of everything that shapes model inputs."""
        out: dict[str, str] = {
            "rules": self.rules_version,
            "oov": f"{self.oov_seed}:{self.oov_scale}",
            "max_len": str(self.max_len),
        }
        for lang in sorted(self.tables):
            out[f"embeddings:{lang}"] = self.tables[lang].fingerprint()
        for lang in sorted(self.tables):
            tm = self.translations.get(lang)
            if tm is None:
                out[f"alignment:{lang}"] = "none"
            else:
                h = hashlib.sha256()
                h.update(f"{tm.src_lang}->{tm.tgt_lang}\x1f".encode())
                h.update(np.ascontiguousarray(tm.W, dtype=np.float64).tobytes())
                out[f"alignment:{lang}"] = h.hexdigest()
        return out
