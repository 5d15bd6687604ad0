"""Normalize raw abstract text into token sequences.

The normalization order matters and is fixed: protected multi-word phrases
(curated cluster keywords, country names) are fused into single ``a_b_c``
tokens first, then stopwords are dropped and the remaining words stemmed.
Fused and non-alphabetic tokens are never stemmed, so a fused keyword
survives re-normalization unchanged.
"""

from __future__ import annotations

import csv
import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from .stemming import stable_stem

_WORD_SPLIT = re.compile(r"[^a-z0-9_]+")
_ALPHA = re.compile(r"[a-z]+\Z")


def default_stopwords() -> frozenset[str]:
    """The English stopword list shipped with the package."""
    text = resources.files("litmap.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w for w in text.split() if w)


def load_stopwords(path: str | Path) -> frozenset[str]:
    """Read a stopword file, one lowercase word per line."""
    words = Path(path).read_text("utf-8").split()
    return frozenset(w for w in words if w)


def split_words(text: str) -> list[str]:
    """Lowercase and split on anything outside [a-z0-9_]; hyphens become spaces.

    Accented characters fold to their ASCII base so "façade" and "facade"
    normalize to the same token.
    """
    folded = unicodedata.normalize("NFKD", text).encode("ascii", "ignore").decode("ascii")
    return [w for w in _WORD_SPLIT.split(folded.lower()) if w]


def phrase_token(phrase: str) -> str:
    """Canonical single-token form of a (possibly multi-word) phrase."""
    return "_".join(split_words(phrase))


@dataclass(frozen=True)
class PrepConfig:
    """Knobs for normalization and collocation detection."""

    stopword_list: frozenset[str] = field(default_factory=default_stopwords)
    stemmer: str = "porter"  # "porter" or "none"
    min_token_len: int = 2
    collocation_min_count: int = 5
    collocation_score_threshold: float = 3.0

    def __post_init__(self) -> None:
        if self.stemmer not in ("porter", "none"):
            raise ValueError(f"unknown stemmer {self.stemmer!r}")
        if self.min_token_len < 1:
            raise ValueError("min_token_len must be >= 1")
        if self.collocation_min_count < 2:
            raise ValueError("collocation_min_count must be >= 2")
        if self.collocation_score_threshold <= 0:
            raise ValueError("collocation_score_threshold must be > 0")
        bad = [w for w in self.stopword_list if w != w.lower()]
        if bad:
            raise ValueError(f"stopword list entries must be lowercase: {bad[:5]}")


@dataclass(frozen=True)
class TokenSeq:
    """Normalized token sequence for one document."""

    tokens: tuple[str, ...]
    doc_id: str = ""

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass(frozen=True)
class CollocationEntry:
    fused: str
    count: int
    score: float


class CollocationTable:
    """Adjacent word pairs worth fusing into single tokens."""

    def __init__(self, entries: dict[tuple[str, str], CollocationEntry] | None = None):
        self.entries: dict[tuple[str, str], CollocationEntry] = dict(entries or {})

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, pair: tuple[str, str]) -> bool:
        return pair in self.entries

    def without(self, tokens: Iterable[str]) -> "CollocationTable":
        """Copy with every pair touching one of ``tokens`` removed.

        Used to keep protected (already fused) keywords from being swallowed
        into larger bigrams.
        """
        drop = set(tokens)
        return CollocationTable(
            {p: e for p, e in self.entries.items() if p[0] not in drop and p[1] not in drop}
        )

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["token_a", "token_b", "count", "score"])
            for (a, b), entry in sorted(self.entries.items()):
                writer.writerow([a, b, entry.count, repr(entry.score)])

    @classmethod
    def from_csv(cls, path: str | Path) -> "CollocationTable":
        entries = {}
        with open(path, newline="", encoding="utf-8") as fh:
            for row in csv.DictReader(fh):
                a, b = row["token_a"], row["token_b"]
                entries[(a, b)] = CollocationEntry(f"{a}_{b}", int(row["count"]), float(row["score"]))
        return cls(entries)


def _phrase_index(protected: Sequence[str]) -> dict[str, list[tuple[tuple[str, ...], str]]]:
    """First word -> [(word tuple, fused token)], longest phrases first."""
    index: dict[str, list[tuple[tuple[str, ...], str]]] = {}
    for phrase in protected:
        words = tuple(split_words(phrase))
        if not words:
            continue
        index.setdefault(words[0], []).append((words, "_".join(words)))
    for options in index.values():
        options.sort(key=lambda item: len(item[0]), reverse=True)
    return index


def tokenize_normalize(
    text: str,
    cfg: PrepConfig,
    protected: Sequence[str] = (),
    doc_id: str = "",
) -> TokenSeq:
    """Normalize raw text to tokens.

    Protected phrases are fused before any filtering, so they survive intact
    even when made of stopwords.  Everything else is stopword-filtered and
    stemmed; stems are re-checked against the stopword list and the length
    floor so that normalizing emitted tokens is a no-op.
    """
    words = split_words(text)
    index = _phrase_index(protected)
    out: list[str] = []
    i = 0
    n = len(words)
    while i < n:
        word = words[i]
        fused = None
        for phrase_words, phrase_fused in index.get(word, ()):
            if tuple(words[i : i + len(phrase_words)]) == phrase_words:
                fused = phrase_fused
                i += len(phrase_words)
                break
        if fused is not None:
            out.append(fused)
            continue
        i += 1
        if word in cfg.stopword_list or len(word) < cfg.min_token_len:
            continue
        if cfg.stemmer == "porter" and _ALPHA.match(word):
            word = stable_stem(word)
            if word in cfg.stopword_list or len(word) < cfg.min_token_len:
                continue
        out.append(word)
    return TokenSeq(tuple(out), doc_id=doc_id)


def detect_collocations(corpus: Iterable[TokenSeq], cfg: PrepConfig) -> CollocationTable:
    """Score adjacent token pairs by pointwise mutual information.

    PMI(a, b) = log2( p(a, b) / (p(a) * p(b)) ) where the joint probability is
    over adjacent positions and the marginals over all tokens.  Pairs must
    clear both the count floor and the score threshold.
    """
    unigrams: Counter[str] = Counter()
    pairs: Counter[tuple[str, str]] = Counter()
    total_tokens = 0
    total_pairs = 0
    for seq in corpus:
        toks = seq.tokens
        unigrams.update(toks)
        total_tokens += len(toks)
        for a, b in zip(toks, toks[1:]):
            pairs[(a, b)] += 1
        total_pairs += max(0, len(toks) - 1)
    if total_tokens == 0 or total_pairs == 0:
        return CollocationTable()
    entries = {}
    for (a, b), count in pairs.items():
        if count < cfg.collocation_min_count:
            continue
        p_joint = count / total_pairs
        p_a = unigrams[a] / total_tokens
        p_b = unigrams[b] / total_tokens
        score = math.log2(p_joint / (p_a * p_b))
        if score >= cfg.collocation_score_threshold:
            entries[(a, b)] = CollocationEntry(f"{a}_{b}", count, score)
    return CollocationTable(entries)


def apply_collocations(seq: TokenSeq, table: CollocationTable) -> TokenSeq:
    """Fuse tabled pairs in one greedy left-to-right pass.

    A fused pair consumes both tokens, so a freshly fused token cannot be
    fused again within the same pass.
    """
    toks = seq.tokens
    out: list[str] = []
    i = 0
    while i < len(toks):
        if i + 1 < len(toks) and (toks[i], toks[i + 1]) in table.entries:
            out.append(table.entries[(toks[i], toks[i + 1])].fused)
            i += 2
        else:
            out.append(toks[i])
            i += 1
    return TokenSeq(tuple(out), doc_id=seq.doc_id)
