"""Curated keyword clusters and the term-suggestion loop around them.

A lexicon is an ordered list of named clusters; each keyword belongs to at
most one cluster because every cluster is contracted to a single network
node.  Edits never mutate: they produce a new lexicon with a bumped
version, giving the curation loop an audit trail.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from importlib import resources
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .network import WordNetwork
from .stemming import stable_stem
from .textprep import phrase_token

RELATIONS = ("synonym", "hyponym", "hypernym", "related")


class LexiconError(Exception):
    """Duplicate cluster names, keyword collisions, or invalid edits."""


@dataclass(frozen=True)
class ClusterDef:
    name: str
    keywords: tuple[str, ...]
    description: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise LexiconError("cluster name must be non-empty")
        if not self.keywords:
            raise LexiconError(f"cluster {self.name!r} has no keywords")

    def tokens(self) -> frozenset[str]:
        """Keyword phrases in network-vocabulary form."""
        return frozenset(phrase_token(k) for k in self.keywords)


@dataclass(frozen=True)
class Lexicon:
    clusters: tuple[ClusterDef, ...] = ()
    version: int = 1
    notes: str = ""

    def __post_init__(self) -> None:
        names = [c.name for c in self.clusters]
        if len(names) != len(set(names)):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise LexiconError(f"duplicate cluster names: {dupes}")
        owner: dict[str, tuple[str, str]] = {}
        for cluster in self.clusters:
            for keyword in cluster.keywords:
                token = phrase_token(keyword)
                if token in owner:
                    other_cluster, other_kw = owner[token]
                    if other_cluster != cluster.name:
                        raise LexiconError(
                            f"keyword {keyword!r} (token {token!r}) in cluster "
                            f"{cluster.name!r} collides with {other_kw!r} in {other_cluster!r}"
                        )
                else:
                    owner[token] = (cluster.name, keyword)

    def cluster(self, name: str) -> ClusterDef:
        for c in self.clusters:
            if c.name == name:
                return c
        raise LexiconError(f"unknown cluster {name!r}")

    def cluster_names(self) -> list[str]:
        return [c.name for c in self.clusters]

    def protected_phrases(self) -> list[str]:
        return [k for c in self.clusters for k in c.keywords]

    def all_tokens(self) -> frozenset[str]:
        return frozenset(t for c in self.clusters for t in c.tokens())

    def canonical(self) -> "Lexicon":
        """Sorted keywords within each cluster; cluster order preserved."""
        return replace(
            self,
            clusters=tuple(
                replace(c, keywords=tuple(sorted(c.keywords))) for c in self.clusters
            ),
        )

    def to_json(self) -> dict:
        return {
            "version": self.version,
            "notes": self.notes,
            "clusters": [
                {"name": c.name, "description": c.description, "keywords": list(c.keywords)}
                for c in self.clusters
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "Lexicon":
        return cls(
            clusters=tuple(
                ClusterDef(
                    name=c["name"],
                    keywords=tuple(c.get("keywords", ())),
                    description=c.get("description", ""),
                )
                for c in data.get("clusters", ())
            ),
            version=int(data.get("version", 1)),
            notes=data.get("notes", ""),
        )


def load_lexicon(path: str | Path) -> Lexicon:
    with open(path, encoding="utf-8") as fh:
        return Lexicon.from_json(json.load(fh))


def save_lexicon(lex: Lexicon, path: str | Path) -> None:
    """Write the canonical form: keywords sorted, cluster order preserved."""
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(lex.canonical().to_json(), fh, indent=2, ensure_ascii=False)
        fh.write("\n")


def example_lexicon() -> Lexicon:
    """The seven-cluster starter lexicon shipped with the package."""
    text = resources.files("litmap.data").joinpath("example_lexicon.json").read_text("utf-8")
    return Lexicon.from_json(json.loads(text))


def edit_cluster(
    lex: Lexicon,
    name: str,
    add: Sequence[str] = (),
    remove: Sequence[str] = (),
) -> Lexicon:
    """Return a new lexicon version with keywords added/removed on one cluster."""
    target = lex.cluster(name)
    removed_tokens = {phrase_token(k) for k in remove}
    kept = tuple(k for k in target.keywords if phrase_token(k) not in removed_tokens)
    new_tokens = {phrase_token(k): k for k in add}
    for other in lex.clusters:
        if other.name == name:
            continue
        collisions = other.tokens() & set(new_tokens)
        if collisions:
            keyword = new_tokens[sorted(collisions)[0]]
            raise LexiconError(f"keyword {keyword!r} already claimed by cluster {other.name!r}")
    merged = kept + tuple(k for k in add if phrase_token(k) not in {phrase_token(x) for x in kept})
    if not merged:
        raise LexiconError(f"cluster {name!r} may not be emptied")
    clusters = tuple(
        replace(c, keywords=merged) if c.name == name else c for c in lex.clusters
    )
    return Lexicon(clusters=clusters, version=lex.version + 1, notes=lex.notes)


@dataclass(frozen=True)
class Suggestion:
    term: str
    relation: str
    score: float
    provider: str

    def __post_init__(self) -> None:
        if self.relation not in RELATIONS:
            raise ValueError(f"unknown relation {self.relation!r}")
        if not math.isfinite(self.score):
            raise ValueError("suggestion score must be finite")


class SuggestionProvider(Protocol):
    """Anything that can propose related terms: lexical databases, embeddings."""

    name: str

    def suggest(self, term: str, k: int) -> list[Suggestion]: ...


class FixtureLexicalProvider:
    """Replayable provider backed by a recorded suggestion file.

    Stands in for live lexical-database or embedding lookups so the engine
    and tests never need the network.
    """

    name = "external"

    def __init__(self, path: str | Path | None = None):
        if path is None:
            text = resources.files("litmap.data").joinpath("suggestions.json").read_text("utf-8")
            self._data = json.loads(text)
        else:
            self._data = json.loads(Path(path).read_text("utf-8"))

    def suggest(self, term: str, k: int) -> list[Suggestion]:
        rows = self._data.get(term.lower(), [])
        out = [
            Suggestion(r["term"], r["relation"], float(r.get("score", 1.0)), self.name)
            for r in rows
        ]
        out.sort(key=lambda s: (-s.score, s.term))
        return out[:k]


class PmiCooccurrenceProvider:
    """Rank corpus terms by pointwise mutual information with the query.

    Probabilities come from the co-occurrence network: the joint from the
    edge weight, the marginals from node strengths.
    """

    name = "cooccurrence-pmi"

    def __init__(self, net: WordNetwork):
        self._net = net

    def _resolve(self, term: str) -> str | None:
        token = phrase_token(term)
        if token in self._net:
            return token
        if "_" not in token:
            stemmed = stable_stem(token)
            if stemmed in self._net:
                return stemmed
        return None

    def suggest(self, term: str, k: int) -> list[Suggestion]:
        token = self._resolve(term)
        if token is None:
            return []
        net = self._net
        total = float(net.total_edge_weight())
        if total == 0:
            return []
        neighbors = net.adjacency()[token]
        s_a = net.strength(token)
        scored = []
        for other, w in neighbors.items():
            pmi = math.log2((w / total) / ((s_a / (2 * total)) * (net.strength(other) / (2 * total))))
            scored.append(Suggestion(other, "related", pmi, self.name))
        scored.sort(key=lambda s: (-s.score, s.term))
        return scored[:k]


def suggest_terms(
    term: str,
    corpus_stats: WordNetwork | None,
    provider: str | SuggestionProvider = "cooccurrence-pmi",
    k: int = 10,
    exclude: Lexicon | None = None,
) -> list[Suggestion]:
    """Propose terms related to ``term``, skipping anything already curated."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if isinstance(provider, str):
        if provider == "cooccurrence-pmi":
            if corpus_stats is None:
                raise ValueError("the cooccurrence-pmi provider needs corpus statistics")
            provider = PmiCooccurrenceProvider(corpus_stats)
        elif provider == "external":
            provider = FixtureLexicalProvider()
        else:
            raise ValueError(f"unknown provider {provider!r}")
    taken = exclude.all_tokens() if exclude is not None else frozenset()
    taken = taken | {phrase_token(term)}
    out = [s for s in provider.suggest(term, k + len(taken)) if phrase_token(s.term) not in taken]
    return out[:k]
