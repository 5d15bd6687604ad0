"""Keyword seeding by TF-IDF and topic extraction by Louvain communities."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .network import WordNetwork
from .textprep import TokenSeq


@dataclass(frozen=True)
class TermScore:
    term: str
    score: float
    doc_freq: int


@dataclass
class TopicPartition:
    """Louvain communities over a word network with ranked member words."""

    communities: dict[str, int]
    modularity: float
    ranked_words: dict[int, list[tuple[str, float]]] = field(default_factory=dict)

    @property
    def community_ids(self) -> list[int]:
        return sorted(set(self.communities.values()))


def tfidf_keywords(
    docs: Iterable[TokenSeq],
    top_k: int,
    aggregate: str = "max",
) -> list[TermScore]:
    """Rank terms by tf-idf with idf = log10(N / df).

    The per-document tf * idf values are combined across documents with
    ``aggregate`` ("max" by default, so a term dominating a few abstracts
    still surfaces; "sum" and "mean" weigh breadth more).  Ties break
    lexicographically.
    """
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    if aggregate not in ("max", "sum", "mean"):
        raise ValueError(f"unknown aggregate {aggregate!r}")
    docs = list(docs)
    if not docs:
        raise ValueError("empty document collection")
    n_docs = len(docs)
    df: dict[str, int] = {}
    for seq in docs:
        for term in set(seq.tokens):
            df[term] = df.get(term, 0) + 1
    combined: dict[str, float] = {}
    counts_per_doc: list[dict[str, int]] = []
    for seq in docs:
        counts: dict[str, int] = {}
        for tok in seq.tokens:
            counts[tok] = counts.get(tok, 0) + 1
        counts_per_doc.append(counts)
    for counts in counts_per_doc:
        for term, tf in counts.items():
            value = tf * math.log10(n_docs / df[term])
            if aggregate == "max":
                combined[term] = max(combined.get(term, 0.0), value)
            else:
                combined[term] = combined.get(term, 0.0) + value
    if aggregate == "mean":
        combined = {t: v / df[t] for t, v in combined.items()}
    ranked = sorted(combined.items(), key=lambda item: (-item[1], item[0]))
    return [TermScore(term, score, df[term]) for term, score in ranked[:top_k]]


def partition_modularity(
    net: WordNetwork,
    communities: Mapping[str, int],
    resolution: float = 1.0,
) -> float:
    """Weighted modularity of a partition, recomputed from the definition."""
    m = float(net.total_edge_weight())
    if m == 0:
        return 0.0
    two_m = 2.0 * m
    internal: dict[int, float] = {}
    strength_sum: dict[int, float] = {}
    for label in net.node_freq:
        c = communities[label]
        strength_sum[c] = strength_sum.get(c, 0.0) + net.strength(label)
    for (a, b), w in net.edges.items():
        if communities[a] == communities[b]:
            internal[communities[a]] = internal.get(communities[a], 0.0) + w
    q = 0.0
    for c, tot in strength_sum.items():
        q += 2.0 * internal.get(c, 0.0) / two_m - resolution * (tot / two_m) ** 2
    return q


class _LevelGraph:
    """Mutable aggregated graph used inside the Louvain loop."""

    def __init__(self, adj: list[dict[int, float]], self_w: list[float]):
        self.adj = adj
        self.self_w = self_w
        self.k = [sum(nbrs.values()) + 2.0 * self_w[i] for i, nbrs in enumerate(adj)]
        self.two_m = sum(self.k)

    @classmethod
    def from_network(cls, net: WordNetwork, labels: list[str]) -> "_LevelGraph":
        index = {label: i for i, label in enumerate(labels)}
        adj: list[dict[int, float]] = [{} for _ in labels]
        for (a, b), w in net.edges.items():
            adj[index[a]][index[b]] = float(w)
            adj[index[b]][index[a]] = float(w)
        return cls(adj, [0.0] * len(labels))


def _local_move(graph: _LevelGraph, comm: list[int], rng: random.Random, resolution: float) -> bool:
    """One Louvain phase: greedily move nodes until no move improves.

    The gain of inserting node i into community c (after removing it from
    its own) is proportional to links(i, c) - resolution * sigma_tot(c) * k_i / 2m.
    """
    n = len(graph.adj)
    two_m = graph.two_m
    if two_m == 0:
        return False
    sigma_tot = [0.0] * n
    for i, c in enumerate(comm):
        sigma_tot[c] += graph.k[i]
    order = list(range(n))
    rng.shuffle(order)
    moved_any = False
    improved = True
    sweeps = 0
    while improved and sweeps < 100:
        improved = False
        sweeps += 1
        for i in order:
            c_old = comm[i]
            k_i = graph.k[i]
            sigma_tot[c_old] -= k_i
            links: dict[int, float] = {}
            for j, w in graph.adj[i].items():
                links[comm[j]] = links.get(comm[j], 0.0) + w
            best_c = c_old
            best_gain = links.get(c_old, 0.0) - resolution * sigma_tot[c_old] * k_i / two_m
            for c in sorted(links):
                if c == c_old:
                    continue
                gain = links[c] - resolution * sigma_tot[c] * k_i / two_m
                if gain > best_gain + 1e-12 or (abs(gain - best_gain) <= 1e-12 and c < best_c):
                    best_c = c
                    best_gain = gain
            sigma_tot[best_c] += k_i
            if best_c != c_old:
                comm[i] = best_c
                improved = True
                moved_any = True
    return moved_any


def _aggregate(graph: _LevelGraph, comm: list[int]) -> tuple[_LevelGraph, dict[int, int]]:
    ids = sorted(set(comm))
    remap = {c: i for i, c in enumerate(ids)}
    adj: list[dict[int, float]] = [{} for _ in ids]
    self_w = [0.0] * len(ids)
    for i, c in enumerate(comm):
        self_w[remap[c]] += graph.self_w[i]
    seen: set[tuple[int, int]] = set()
    for i, nbrs in enumerate(graph.adj):
        ci = remap[comm[i]]
        for j, w in nbrs.items():
            if (j, i) in seen:
                continue
            seen.add((i, j))
            cj = remap[comm[j]]
            if ci == cj:
                self_w[ci] += w
            else:
                adj[ci][cj] = adj[ci].get(cj, 0.0) + w
                adj[cj][ci] = adj[cj].get(ci, 0.0) + w
    return _LevelGraph(adj, self_w), remap


def louvain(net: WordNetwork, seed: int = 0, resolution: float = 1.0) -> TopicPartition:
    """Greedy modularity optimization: local moves plus graph aggregation.

    Deterministic for a fixed (network, seed, resolution): all randomness is
    the seeded visit-order shuffle.  The gain function uses the resolution
    parameter, so larger values yield more, smaller communities.
    """
    if net.n == 0:
        raise ValueError("network has no nodes")
    if resolution <= 0:
        raise ValueError("resolution must be > 0")
    labels = list(net.node_freq)
    rng = random.Random(seed)
    graph = _LevelGraph.from_network(net, labels)
    membership = list(range(len(labels)))  # original node -> current level node
    while True:
        comm = list(range(len(graph.adj)))
        moved = _local_move(graph, comm, rng, resolution)
        if not moved:
            break
        graph, remap = _aggregate(graph, comm)
        membership = [remap[comm[node]] for node in membership]
        if len(graph.adj) == 1:
            break
    first_seen: dict[int, int] = {}
    communities: dict[str, int] = {}
    for label, node in zip(labels, membership):
        if node not in first_seen:
            first_seen[node] = len(first_seen)
        communities[label] = first_seen[node]
    part = TopicPartition(
        communities=communities,
        modularity=partition_modularity(net, communities, resolution),
    )
    for cid in part.community_ids:
        part.ranked_words[cid] = rank_topic_words(net, part, cid)
    return part


def rank_topic_words(
    net: WordNetwork,
    part: TopicPartition,
    community: int,
    top_k: int | None = None,
    beta: float = 1.0,
) -> list[tuple[str, float]]:
    """Rank a community's words by weighted degree scaled by internal share.

    score = weighted_degree * (internal_weight / weighted_degree) ** beta;
    beta = 1 reduces to the internal edge weight.  Isolated words score 0.
    """
    members = [v for v, c in part.communities.items() if c == community]
    if not members:
        raise KeyError(f"unknown community {community!r}")
    adj = net.adjacency()
    scored = []
    for word in members:
        wd = float(sum(adj[word].values()))
        if wd == 0.0:
            scored.append((word, 0.0))
            continue
        internal = float(
            sum(w for u, w in adj[word].items() if part.communities[u] == community)
        )
        scored.append((word, wd * (internal / wd) ** beta))
    scored.sort(key=lambda item: (-item[1], item[0]))
    return scored if top_k is None else scored[:top_k]
