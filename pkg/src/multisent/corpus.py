"""Corpus ingestion, label schema, and deterministic cross-validation splits."""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ArgumentError, ParseError, SchemaError
from .rng import SplitMix64, derive_stream


class Polarity(enum.IntEnum):
    """Three-way tweet sentiment with stable integer codes."""

    POSITIVE = 0
    NEUTRAL = 1
    NEGATIVE = 2


# Accepted label spellings, case-insensitive. Integer codes "0"/"1"/"2"
# are accepted as well.
LABEL_ALIASES = {
    "positive": Polarity.POSITIVE,
    "pos": Polarity.POSITIVE,
    "neutral": Polarity.NEUTRAL,
    "neu": Polarity.NEUTRAL,
    "negative": Polarity.NEGATIVE,
    "neg": Polarity.NEGATIVE,
}


def parse_label(raw: str | int, line: int | None = None) -> Polarity:
    """Map a label string (or integer code) to a Polarity."""
    if isinstance(raw, int) and not isinstance(raw, bool):
        try:
            return Polarity(raw)
        except ValueError:
            raise SchemaError(f"unknown label code {raw!r}", line) from None
    text = str(raw).strip().lower()
    if text in LABEL_ALIASES:
        return LABEL_ALIASES[text]
    if text in {"0", "1", "2"}:
        return Polarity(int(text))
    raise SchemaError(f"unknown label {raw!r}", line)


@dataclass
class TweetRecord:
    """One labeled example: id, language, raw text and/or tokens, label."""

    id: str
    lang: str
    text: str
    label: Polarity
    tokens: list[str] | None = None

    def __post_init__(self):
        if not self.text and not self.tokens:
            raise SchemaError(f"record {self.id!r}: both text and tokens are empty")


def validate_langs(records: Iterable[TweetRecord], languages: Sequence[str]) -> None:
    """Check every record's language against a closed set."""
    allowed = set(languages)
    for rec in records:
        if rec.lang not in allowed:
            raise SchemaError(f"record {rec.id!r}: lang {rec.lang!r} not in configured set {sorted(allowed)}")


def _record_from_json(obj: dict, line: int) -> TweetRecord:
    for key in ("id", "lang", "label"):
        if key not in obj:
            raise SchemaError(f"missing field {key!r}", line)
    tokens = obj.get("tokens")
    if tokens is not None:
        if not isinstance(tokens, list) or not all(isinstance(t, str) for t in tokens):
            raise SchemaError("tokens must be a list of strings", line)
    text = obj.get("text", "")
    if not isinstance(text, str):
        raise SchemaError("text must be a string", line)
    try:
        return TweetRecord(
            id=str(obj["id"]),
            lang=str(obj["lang"]),
            text=text,
            label=parse_label(obj["label"], line),
            tokens=tokens,
        )
    except SchemaError as err:
        if err.line is None:
            raise SchemaError(str(err), line) from None
        raise


def load_corpus(path: str | Path, format: str = "jsonl") -> list[TweetRecord]:
    """Load a labeled corpus from JSONL or TSV, in file order.

    JSONL lines carry {id, lang, text, tokens?, label}; unknown fields are
    ignored. TSV rows carry the columns id, lang, label, text. Labels are
    validated against the three-way set; errors name the offending line.
    """
    path = Path(path)
    if format not in ("jsonl", "tsv"):
        raise ArgumentError(f"unknown corpus format {format!r}")
    records: list[TweetRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip():
                continue
            if format == "jsonl":
                try:
                    obj = json.loads(line)
                except json.JSONDecodeError as err:
                    raise ParseError(f"invalid JSON: {err.msg}", lineno) from None
                if not isinstance(obj, dict):
                    raise ParseError("line is not a JSON object", lineno)
                records.append(_record_from_json(obj, lineno))
            else:
                parts = line.split("\t", 3)
                if len(parts) != 4:
                    raise ParseError(f"expected 4 tab-separated columns, got {len(parts)}", lineno)
                rec_id, lang, label, text = parts
                records.append(
                    TweetRecord(id=rec_id, lang=lang, text=text, label=parse_label(label, lineno))
                )
    return records


def save_corpus(records: Iterable[TweetRecord], path: str | Path) -> None:
    """Write records as JSONL (inverse of load_corpus for the jsonl format)."""
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            obj = {"id": rec.id, "lang": rec.lang, "text": rec.text, "label": int(rec.label)}
            if rec.tokens is not None:
                obj["tokens"] = rec.tokens
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


@dataclass
class FoldPlan:
    """Deterministic assignment of record ids to k folds."""

    k: int
    assignments: dict[str, int] = field(default_factory=dict)
    seed: int = 0

    def fold_ids(self, fold: int) -> list[str]:
        """Ids assigned to one fold, in assignment-map order."""
        return [rid for rid, f in self.assignments.items() if f == fold]

    def to_json(self) -> str:
        """Canonical serialization; identical plans give identical bytes."""
        payload = {
            "k": self.k,
            "seed": self.seed,
            "assignments": {rid: self.assignments[rid] for rid in sorted(self.assignments)},
        }
        return json.dumps(payload, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "FoldPlan":
        obj = json.loads(text)
        return cls(k=obj["k"], assignments=dict(obj["assignments"]), seed=obj["seed"])


def make_folds(
    records: Sequence[TweetRecord],
    k: int,
    seed: int,
    stratify: bool = True,
) -> FoldPlan:
    """Partition records into k folds whose sizes differ by at most one.

    With stratify=True (the default) each label's members are dealt
    separately so per-fold label counts stay within one of the ideal
    proportional share. The deal position is continuous across labels,
    which keeps overall fold sizes balanced too. A pure function of
    (records, k, seed, stratify).
    """
    if k <= 0:
        raise ArgumentError("k must be positive")
    if k > len(records):
        raise ArgumentError(f"k={k} exceeds record count {len(records)}")
    ids = [rec.id for rec in records]
    if len(set(ids)) != len(ids):
        raise ArgumentError("duplicate record ids; fold assignment requires unique ids")

    rng = SplitMix64(derive_stream(seed, "folds", k, stratify))
    assignments: dict[str, int] = {}
    position = 0
    if stratify:
        groups = [
            [rec.id for rec in records if rec.label == label] for label in sorted(Polarity)
        ]
    else:
        groups = [list(ids)]
    for group in groups:
        rng.shuffle(group)
        for rid in group:
            assignments[rid] = position % k
            position += 1
    # Restore corpus order for a stable, input-independent map layout.
    ordered = {rid: assignments[rid] for rid in ids}
    return FoldPlan(k=k, assignments=ordered, seed=seed)


def split_dev(
    train_ids: Sequence[str],
    fraction: float,
    seed: int,
) -> tuple[list[str], list[str]]:
    """Split ids into (train, dev) with dev size round(fraction * n).

    Rounding is half-up. Selection is a seeded shuffle; both outputs keep
    the relative order of the input. Deterministic under the seed.
    """
    if not train_ids:
        raise ArgumentError("cannot split an empty id list")
    if not 0.0 < fraction < 1.0:
        raise ArgumentError("fraction must lie in (0, 1)")
    n = len(train_ids)
    if fraction * n < 1.0:
        raise ArgumentError(f"fraction {fraction} of {n} ids rounds below one dev example")
    dev_n = int(fraction * n + 0.5)
    if dev_n >= n:
        raise ArgumentError("dev split would consume the whole training set")
    order = list(range(n))
    SplitMix64(derive_stream(seed, "dev-split", n)).shuffle(order)
    dev_idx = set(order[:dev_n])
    train_out = [train_ids[i] for i in range(n) if i not in dev_idx]
    dev_out = [train_ids[i] for i in range(n) if i in dev_idx]
    return train_out, dev_out
