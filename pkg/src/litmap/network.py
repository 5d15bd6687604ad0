"""Weighted undirected word co-occurrence networks, one per time slice.

Edges count window co-occurrences; node labels carry their corpus token
frequency.  Curated keyword clusters can be contracted into single nodes,
summing parallel edge weights and dropping intra-cluster edges.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING, Iterable, Mapping

import numpy as np

from .corpus import DocumentSet
from .textprep import TokenSeq, phrase_token

if TYPE_CHECKING:
    from .lexicon import Lexicon


@dataclass(frozen=True)
class SliceSpec:
    """How to cut the corpus into periods and build each network."""

    granularity: str = "yearly"  # "yearly" or "range-list"
    ranges: tuple[tuple[int, int], ...] = ()
    window: int = 5
    min_edge_weight: int = 1
    min_node_freq: int = 1

    def __post_init__(self) -> None:
        if self.granularity not in ("yearly", "range-list"):
            raise ValueError(f"unknown granularity {self.granularity!r}")
        if self.granularity == "range-list" and not self.ranges:
            raise ValueError("range-list granularity requires ranges")
        if self.window < 1:
            raise ValueError("window must be >= 1")
        if self.min_edge_weight < 1 or self.min_node_freq < 1:
            raise ValueError("pruning floors must be >= 1")
        for lo, hi in self.ranges:
            if lo > hi:
                raise ValueError(f"bad range [{lo}, {hi}]")

    def to_json(self) -> dict:
        return {
            "granularity": self.granularity,
            "ranges": [list(r) for r in self.ranges],
            "window": self.window,
            "min_edge_weight": self.min_edge_weight,
            "min_node_freq": self.min_node_freq,
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "SliceSpec":
        return cls(
            granularity=data.get("granularity", "yearly"),
            ranges=tuple(tuple(r) for r in data.get("ranges", ())),
            window=int(data.get("window", 5)),
            min_edge_weight=int(data.get("min_edge_weight", 1)),
            min_node_freq=int(data.get("min_node_freq", 1)),
        )


class WordNetwork:
    """Weighted undirected word network; treat instances as immutable.

    Edge keys are sorted label pairs, weights are positive co-occurrence
    counts; self-loops are never stored.  ``doc_freq`` tracks how many
    documents mention each token (None for nodes synthesized by
    contraction, whose document counts are not derivable from the graph).
    """

    def __init__(
        self,
        node_freq: Mapping[str, int],
        edges: Mapping[tuple[str, str], int],
        period: str = "",
        doc_freq: Mapping[str, int | None] | None = None,
    ):
        self.node_freq: dict[str, int] = dict(sorted(node_freq.items()))
        self.edges: dict[tuple[str, str], int] = {}
        for (a, b), w in edges.items():
            if a == b:
                raise ValueError(f"self-loop on {a!r}")
            if w < 1:
                raise ValueError(f"edge weight {w} < 1 on ({a!r}, {b!r})")
            if a not in self.node_freq or b not in self.node_freq:
                raise ValueError(f"edge endpoint missing from nodes: ({a!r}, {b!r})")
            key = (a, b) if a < b else (b, a)
            self.edges[key] = self.edges.get(key, 0) + w
        self.edges = dict(sorted(self.edges.items()))
        self.period = period
        self.doc_freq: dict[str, int | None] = (
            dict(doc_freq) if doc_freq is not None else {label: None for label in self.node_freq}
        )
        self._adj: dict[str, dict[str, int]] | None = None
        self._csr = None

    @property
    def n(self) -> int:
        return len(self.node_freq)

    def __contains__(self, label: str) -> bool:
        return label in self.node_freq

    def frequency(self, label: str) -> int:
        if label not in self.node_freq:
            raise KeyError(f"unknown node {label!r}")
        return self.node_freq[label]

    def adjacency(self) -> dict[str, dict[str, int]]:
        if self._adj is None:
            adj: dict[str, dict[str, int]] = {label: {} for label in self.node_freq}
            for (a, b), w in self.edges.items():
                adj[a][b] = w
                adj[b][a] = w
            self._adj = adj
        return self._adj

    def degree(self, label: str) -> int:
        return len(self.adjacency()[label])

    def strength(self, label: str) -> float:
        return float(sum(self.adjacency()[label].values()))

    def total_edge_weight(self) -> int:
        return sum(self.edges.values())

    def csr(self):
        """(labels, indptr, indices, weights) in sorted-label order."""
        if self._csr is None:
            labels = list(self.node_freq)
            index = {label: i for i, label in enumerate(labels)}
            deg = np.zeros(len(labels) + 1, dtype=np.int64)
            for a, b in self.edges:
                deg[index[a] + 1] += 1
                deg[index[b] + 1] += 1
            indptr = np.cumsum(deg)
            indices = np.empty(indptr[-1], dtype=np.int64)
            weights = np.empty(indptr[-1], dtype=np.float64)
            cursor = indptr[:-1].copy()
            for (a, b), w in self.edges.items():
                ia, ib = index[a], index[b]
                indices[cursor[ia]] = ib
                weights[cursor[ia]] = w
                cursor[ia] += 1
                indices[cursor[ib]] = ia
                weights[cursor[ib]] = w
                cursor[ib] += 1
            self._csr = (labels, indptr, indices, weights)
        return self._csr

    def to_csv(self, edges_path: str | Path, nodes_path: str | Path) -> None:
        with open(edges_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["source", "target", "weight"])
            for (a, b), w in self.edges.items():
                writer.writerow([a, b, w])
        with open(nodes_path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["label", "frequency"])
            for label, freq in self.node_freq.items():
                writer.writerow([label, freq])


def slice_by_period(docs: DocumentSet, spec: SliceSpec) -> dict[str, DocumentSet]:
    """Partition documents into period-labelled sets.

    Yearly slices cover every year of the corpus span, including empty
    years, so downstream time series have no holes.  Range slices must
    cover every document.
    """
    if spec.granularity == "yearly":
        span = docs.year_span()
        if span is None:
            return {}
        buckets: dict[str, list] = {str(y): [] for y in range(span[0], span[1] + 1)}
        for doc in docs:
            buckets[str(doc.year)].append(doc)
    else:
        buckets = {f"{lo}-{hi}": [] for lo, hi in spec.ranges}
        uncovered = 0
        for doc in docs:
            for lo, hi in spec.ranges:
                if lo <= doc.year <= hi:
                    buckets[f"{lo}-{hi}"].append(doc)
                    break
            else:
                uncovered += 1
        if uncovered:
            raise ValueError(f"{uncovered} documents fall outside every range")
    return {
        period: DocumentSet(tuple(bucket), provenance=f"{docs.provenance}; slice {period}")
        for period, bucket in buckets.items()
    }


def build_cooccurrence(seqs: Iterable[TokenSeq], spec: SliceSpec, period: str = "") -> WordNetwork:
    """Count unordered token co-occurrences within the window, per document.

    Every position pair (p, p+d) with d in [1, window] increments the pair
    weight; equal tokens are skipped (no self-loops).  Windows never cross
    document boundaries.  After counting, nodes below the frequency floor
    and edges below the weight floor are dropped; dangling nodes survive.
    """
    freq: dict[str, int] = {}
    doc_freq: dict[str, int] = {}
    weights: dict[tuple[str, str], int] = {}
    window = spec.window
    for seq in seqs:
        toks = seq.tokens
        for tok in toks:
            freq[tok] = freq.get(tok, 0) + 1
        for tok in set(toks):
            doc_freq[tok] = doc_freq.get(tok, 0) + 1
        for p, a in enumerate(toks):
            for q in range(p + 1, min(p + window + 1, len(toks))):
                b = toks[q]
                if a == b:
                    continue
                key = (a, b) if a < b else (b, a)
                weights[key] = weights.get(key, 0) + 1
    if spec.min_node_freq > 1:
        freq = {t: c for t, c in freq.items() if c >= spec.min_node_freq}
        weights = {(a, b): w for (a, b), w in weights.items() if a in freq and b in freq}
    if spec.min_edge_weight > 1:
        weights = {k: w for k, w in weights.items() if w >= spec.min_edge_weight}
    doc_freq = {t: doc_freq[t] for t in freq}
    return WordNetwork(freq, weights, period=period, doc_freq=doc_freq)


def _cluster_members(clusters) -> dict[str, tuple[str, ...]]:
    from .lexicon import Lexicon  # local import to avoid a cycle

    if isinstance(clusters, Lexicon):
        return {c.name: tuple(sorted({phrase_token(k) for k in c.keywords})) for c in clusters.clusters}
    return {name: tuple(sorted({phrase_token(k) for k in kws})) for name, kws in clusters.items()}


def contract_clusters(net: WordNetwork, clusters) -> WordNetwork:
    """Merge each cluster's member nodes into one node named by the cluster.

    Parallel edges sum, intra-cluster edges disappear, and a cluster with no
    member present still yields an isolated zero-frequency node so time
    series stay rectangular.  ``clusters`` is a Lexicon or a mapping of
    cluster name to keyword phrases.
    """
    members = _cluster_members(clusters)
    owner: dict[str, str] = {}
    for name, tokens in members.items():
        for tok in tokens:
            if tok in owner:
                raise ValueError(f"token {tok!r} claimed by clusters {owner[tok]!r} and {name!r}")
            owner[tok] = name

    relabel = {tok: name for tok, name in owner.items() if tok in net.node_freq}
    node_freq: dict[str, int] = {}
    doc_freq: dict[str, int | None] = {}
    for label, freq in net.node_freq.items():
        if label in relabel:
            continue
        if label in members:
            raise ValueError(f"cluster name {label!r} collides with an existing node")
        node_freq[label] = freq
        doc_freq[label] = net.doc_freq.get(label)
    for name, tokens in members.items():
        node_freq[name] = sum(net.node_freq.get(tok, 0) for tok in tokens)
        doc_freq[name] = None
    edges: dict[tuple[str, str], int] = {}
    for (a, b), w in net.edges.items():
        a2 = relabel.get(a, a)
        b2 = relabel.get(b, b)
        if a2 == b2:
            continue
        key = (a2, b2) if a2 < b2 else (b2, a2)
        edges[key] = edges.get(key, 0) + w
    return WordNetwork(node_freq, edges, period=net.period, doc_freq=doc_freq)
