"""Shared builders for the test suite."""

import numpy as np
import pytest

from multisent.corpus import Polarity, TweetRecord
from multisent.embeddings import EmbeddingTable
from multisent.pipeline import EmbeddingContext
from multisent.preprocess import TokenizedTweet
from multisent.rng import SplitMix64, derive_stream


def seeded_table(lang: str, words: list[str], dim: int, seed: int = 0) -> EmbeddingTable:
    """Embedding table with deterministic uniform vectors per word."""
    entries = {}
    for word in words:
        rng = SplitMix64(derive_stream(seed, "tbl", lang, word))
        entries[word] = rng.uniform_array(dim, -1.0, 1.0)
    return EmbeddingTable(lang=lang, dim=dim, entries=entries)


def marker_tweets(n: int, lang: str = "en", tokens_per_tweet: int = 5) -> list[TokenizedTweet]:
    """Single-language toy corpus: one class-marker token per tweet."""
    tweets = []
    rng = SplitMix64(derive_stream(99, "marker-corpus", lang, n))
    for i in range(n):
        label = Polarity(i % 3)
        toks = [f"pad{rng.next_below(6)}" for _ in range(tokens_per_tweet)]
        toks[rng.next_below(tokens_per_tweet)] = f"mark{int(label)}"
        tweets.append(TokenizedTweet(id=f"m{i:03d}", lang=lang, label=label, tokens=toks))
    return tweets


def toy_context(tweets: list[TokenizedTweet], dim: int = 6, seed: int = 0) -> EmbeddingContext:
    """Context whose table covers every token in the tweets."""
    langs = sorted({tw.lang for tw in tweets})
    vocab = {lang: sorted({t for tw in tweets if tw.lang == lang for t in tw.tokens})
             for lang in langs}
    tables = {lang: seeded_table(lang, words, dim, seed) for lang, words in vocab.items()}
    max_len = max(tw.length for tw in tweets)
    return EmbeddingContext(tables=tables, translations={}, max_len=max_len)


@pytest.fixture
def tiny_records() -> list[TweetRecord]:
    return [
        TweetRecord(id="a1", lang="en", text="good stuff here", label=Polarity.POSITIVE),
        TweetRecord(id="a2", lang="en", text="bad stuff here", label=Polarity.NEGATIVE),
        TweetRecord(id="a3", lang="en", text="plain stuff here", label=Polarity.NEUTRAL),
    ]


def finite_difference(f, params: dict[str, np.ndarray], step: float = 1e-5) -> dict[str, np.ndarray]:
    """Central-difference gradient of scalar f() w.r.t. every tensor entry."""
    grads = {}
    for name, tensor in params.items():
        g = np.zeros_like(tensor)
        flat = tensor.reshape(-1)
        gflat = g.reshape(-1)
        for i in range(flat.shape[0]):
            orig = flat[i]
            flat[i] = orig + step
            fp = f()
            flat[i] = orig - step
            fm = f()
            flat[i] = orig
            gflat[i] = (fp - fm) / (2.0 * step)
        grads[name] = g
    return grads


def rel_err(a: np.ndarray, b: np.ndarray) -> float:
    """max_i |a_i - b_i| / max(1, |a_i|, |b_i|)."""
    denom = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / denom)) if a.size else 0.0
