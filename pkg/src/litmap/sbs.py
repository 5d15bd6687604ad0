"""Prevalence, diversity, connectivity, and their standardized composite.

Prevalence is corpus frequency; diversity is distinctiveness centrality
(neighbors weighted by log10((n-1)/degree)); connectivity is weighted
betweenness with edge distances 1/w.  The composite score is the sum of
the three dimensions' z-scores over a standardization population.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping

from .brandes import weighted_betweenness
from .network import WordNetwork

POPULATIONS = ("all-nodes", "targets-only")
DIMENSIONS = ("prevalence", "diversity", "connectivity")


@dataclass(frozen=True)
class SbsEntry:
    prevalence: float
    diversity: float
    connectivity: float
    sbs: float


@dataclass(frozen=True)
class SbsScores:
    """Per-target scores for one period plus the standardization statistics."""

    entries: dict[str, SbsEntry]
    population_stats: dict[str, tuple[float, float]]  # dimension -> (mean, std)
    period: str = ""
    population: str = "all-nodes"

    def zscore_sum(self, prevalence: float, diversity: float, connectivity: float) -> float:
        total = 0.0
        for dim, value in zip(DIMENSIONS, (prevalence, diversity, connectivity)):
            mean, std = self.population_stats[dim]
            if std > 0:
                total += (value - mean) / std
        return total

    def to_csv(self, path: str | Path | io.TextIOBase) -> None:
        own = isinstance(path, (str, Path))
        fh = open(path, "w", newline="", encoding="utf-8") if own else path
        try:
            writer = csv.writer(fh)
            writer.writerow(["period", "target", "prevalence", "diversity", "connectivity", "sbs"])
            for target in sorted(self.entries):
                e = self.entries[target]
                writer.writerow(
                    [self.period, target, repr(e.prevalence), repr(e.diversity), repr(e.connectivity), repr(e.sbs)]
                )
        finally:
            if own:
                fh.close()


def _doc_frequency(net: WordNetwork, label: str, override: Mapping[str, float] | None) -> float:
    if override is not None and label in override:
        return float(override[label])
    value = net.doc_freq.get(label)
    if value is None:
        raise ValueError(
            f"document frequency unknown for {label!r}; contracted nodes need an explicit override"
        )
    return float(value)


def prevalence(
    net: WordNetwork,
    target: str,
    mode: str = "tokens",
    doc_freq_override: Mapping[str, float] | None = None,
) -> float:
    """Corpus frequency of the node (token occurrences, or documents)."""
    if target not in net:
        raise KeyError(f"unknown node {target!r}")
    if mode == "tokens":
        return float(net.node_freq[target])
    if mode == "documents":
        return _doc_frequency(net, target, doc_freq_override)
    raise ValueError(f"unknown prevalence mode {mode!r}")


def distinctiveness(net: WordNetwork, target: str) -> float:
    """Sum over neighbors j of log10((n-1) / degree(j)); 0 when isolated."""
    if target not in net:
        raise KeyError(f"unknown node {target!r}")
    neighbors = net.adjacency()[target]
    if not neighbors:
        return 0.0
    n = net.n
    return math.fsum(math.log10((n - 1) / net.degree(j)) for j in neighbors)


def distinctiveness_all(net: WordNetwork) -> dict[str, float]:
    """Distinctiveness of every node in one sweep over the edges."""
    n = net.n
    adj = net.adjacency()
    out = {}
    for label in net.node_freq:
        neighbors = adj[label]
        out[label] = (
            math.fsum(math.log10((n - 1) / len(adj[j])) for j in neighbors) if neighbors else 0.0
        )
    return out


def connectivity(
    net: WordNetwork,
    targets: Iterable[str] | None = None,
    transform: str = "inverse",
) -> dict[str, float]:
    """Weighted betweenness of the requested nodes (all by default).

    A single all-sources Brandes pass prices every node, so requesting all
    nodes costs the same as requesting one.
    """
    labels, indptr, indices, weights = net.csr()
    values = weighted_betweenness(indptr, indices, weights, transform=transform)
    scores = dict(zip(labels, values.tolist()))
    if targets is None:
        return scores
    missing = [t for t in targets if t not in scores]
    if missing:
        raise KeyError(f"unknown nodes {missing}")
    return {t: scores[t] for t in targets}


def _mean_std(values: list[float]) -> tuple[float, float]:
    n = len(values)
    mean = math.fsum(values) / n
    var = math.fsum((v - mean) ** 2 for v in values) / n
    return mean, math.sqrt(var)


def sbs_scores(
    net: WordNetwork,
    targets: Iterable[str],
    population: str = "all-nodes",
    transform: str = "inverse",
    prevalence_mode: str = "tokens",
    doc_freq_override: Mapping[str, float] | None = None,
) -> SbsScores:
    """Composite scores: sum of z-scored prevalence, diversity, connectivity.

    Dimensions are standardized against the chosen population (every node of
    the network, or the targets alone) using the population standard
    deviation; a zero-variance dimension contributes exactly 0.
    """
    if population not in POPULATIONS:
        raise ValueError(f"unknown population {population!r}; expected one of {POPULATIONS}")
    targets = list(targets)
    for t in targets:
        if t not in net:
            raise KeyError(f"unknown node {t!r}")
    pop_nodes = sorted(net.node_freq) if population == "all-nodes" else sorted(set(targets))
    if not pop_nodes:
        raise ValueError("empty standardization population")

    pr = {
        v: prevalence(net, v, mode=prevalence_mode, doc_freq_override=doc_freq_override)
        for v in pop_nodes
    }
    di_all = distinctiveness_all(net)
    co_all = connectivity(net, transform=transform)
    values = {
        "prevalence": pr,
        "diversity": {v: di_all[v] for v in pop_nodes},
        "connectivity": {v: co_all[v] for v in pop_nodes},
    }
    stats = {dim: _mean_std([vals[v] for v in pop_nodes]) for dim, vals in values.items()}

    scores = SbsScores(entries={}, population_stats=stats, period=net.period, population=population)
    for t in targets:
        p = values["prevalence"][t]
        d = di_all[t]
        c = co_all[t]
        scores.entries[t] = SbsEntry(p, d, c, scores.zscore_sum(p, d, c))
    return scores
