"""End-to-end pipeline orchestration: time series, topics, geo, and exports.

A run composes: slice corpus by period -> tokenize with curated keywords
protected -> fuse collocations -> build the co-occurrence network ->
contract clusters -> score.  Everything is deterministic for a fixed
(corpus, lexicon version, config, seed), so export bundles are
byte-reproducible.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

from .corpus import DocumentSet, count_by_year
from .geo import country_counts, load_gazetteer
from .lexicon import Lexicon
from .network import SliceSpec, WordNetwork, build_cooccurrence, contract_clusters, slice_by_period
from .sbs import SbsEntry, SbsScores, sbs_scores
from .textprep import PrepConfig, TokenSeq, apply_collocations, detect_collocations, phrase_token, tokenize_normalize
from .topics import TopicPartition, louvain


@dataclass(frozen=True)
class SbsTimeSeries:
    """Per-cluster score trajectories across periods, plus the stats needed
    to recompute every composite from its raw dimensions."""

    series: dict[str, list[tuple[str, SbsEntry]]]
    population_stats: dict[str, dict[str, tuple[float, float]]]  # period -> dim -> (mean, std)
    periods: list[str]
    empty_periods: list[str]
    config_fingerprint: str

    def to_csv(self, path: str | Path | io.TextIOBase) -> None:
        own = isinstance(path, (str, Path))
        fh = open(path, "w", newline="", encoding="utf-8") if own else path
        try:
            writer = csv.writer(fh)
            writer.writerow(["period", "cluster", "prevalence", "diversity", "connectivity", "sbs"])
            for cluster in sorted(self.series):
                for period, e in self.series[cluster]:
                    writer.writerow(
                        [period, cluster, repr(e.prevalence), repr(e.diversity), repr(e.connectivity), repr(e.sbs)]
                    )
        finally:
            if own:
                fh.close()


def config_fingerprint(parameters: Mapping) -> str:
    """Stable hash over the full parameter set; any change changes it."""
    return hashlib.sha256(json.dumps(parameters, sort_keys=True).encode()).hexdigest()


def _lexicon_hash(lex: Lexicon) -> str:
    return hashlib.sha256(json.dumps(lex.canonical().to_json(), sort_keys=True).encode()).hexdigest()


def _stopwords_hash(cfg: PrepConfig) -> str:
    return hashlib.sha256("\n".join(sorted(cfg.stopword_list)).encode()).hexdigest()


def run_parameters(
    lex: Lexicon,
    spec: SliceSpec,
    population: str,
    seed: int,
    prep: PrepConfig,
    transform: str,
    prevalence_mode: str,
    resolution: float,
    collocation_stats: str,
) -> dict:
    """The complete, echoable configuration of a run."""
    return {
        "slice": spec.to_json(),
        "population": population,
        "seed": seed,
        "weight_transform": transform,
        "prevalence_mode": prevalence_mode,
        "resolution": resolution,
        "collocation_stats": collocation_stats,
        "prep": {
            "stemmer": prep.stemmer,
            "min_token_len": prep.min_token_len,
            "collocation_min_count": prep.collocation_min_count,
            "collocation_score_threshold": prep.collocation_score_threshold,
            "stopwords_sha256": _stopwords_hash(prep),
        },
        "lexicon_version": lex.version,
        "lexicon_sha256": _lexicon_hash(lex),
    }


def _doc_text(doc) -> str:
    return doc.title + "\n" + doc.abstract


def _prepare_slice(
    docs: DocumentSet,
    protected: list[str],
    protected_tokens: frozenset[str],
    prep: PrepConfig,
    table=None,
) -> list[TokenSeq]:
    seqs = [tokenize_normalize(_doc_text(d), prep, protected, doc_id=d.id) for d in docs]
    if table is None:
        table = detect_collocations(seqs, prep).without(protected_tokens) if seqs else None
    if table is not None:
        seqs = [apply_collocations(s, table) for s in seqs]
    return seqs


def _contracted_network(
    seqs: list[TokenSeq],
    lex: Lexicon,
    spec: SliceSpec,
    period: str,
) -> WordNetwork:
    net = build_cooccurrence(seqs, spec, period=period)
    return contract_clusters(net, lex)


def _cluster_doc_counts(seqs: list[TokenSeq], lex: Lexicon) -> dict[str, float]:
    counts = {}
    for cluster in lex.clusters:
        members = cluster.tokens()
        counts[cluster.name] = float(sum(1 for s in seqs if members & set(s.tokens)))
    return counts


def run_sbs_timeseries(
    docs: DocumentSet,
    lex: Lexicon,
    spec: SliceSpec,
    population: str = "all-nodes",
    seed: int = 0,
    prep: PrepConfig | None = None,
    transform: str = "inverse",
    prevalence_mode: str = "tokens",
    resolution: float = 1.0,
    collocation_stats: str = "per-slice",
    targets: list[str] | None = None,
) -> SbsTimeSeries:
    """Score clusters in every period (all of them unless ``targets`` narrows it).

    Narrowing ``targets`` keeps the network identical — the full lexicon
    still drives phrase protection and contraction — so raw dimensions of
    the remaining clusters are unchanged and only targets-only
    standardization can shift their composite scores.

    Collocation statistics are computed per slice by default, keeping each
    yearly network self-contained; "global" pools them across the corpus
    for cross-period comparability.  Empty periods yield all-zero rows and
    are flagged rather than omitted.
    """
    if collocation_stats not in ("per-slice", "global"):
        raise ValueError(f"unknown collocation_stats {collocation_stats!r}")
    prep = prep or PrepConfig()
    protected = lex.protected_phrases()
    protected_tokens = frozenset(phrase_token(p) for p in protected)
    slices = slice_by_period(docs, spec)
    if targets is None:
        targets = lex.cluster_names()
    else:
        unknown = set(targets) - set(lex.cluster_names())
        if unknown:
            raise ValueError(f"targets not in lexicon: {sorted(unknown)}")

    global_table = None
    if collocation_stats == "global":
        all_seqs = [tokenize_normalize(_doc_text(d), prep, protected, doc_id=d.id) for d in docs]
        global_table = detect_collocations(all_seqs, prep).without(protected_tokens)

    series: dict[str, list[tuple[str, SbsEntry]]] = {name: [] for name in targets}
    stats: dict[str, dict[str, tuple[float, float]]] = {}
    empty_periods: list[str] = []
    for period, slice_docs in slices.items():
        try:
            seqs = _prepare_slice(slice_docs, protected, protected_tokens, prep, table=global_table)
            net = _contracted_network(seqs, lex, spec, period)
            override = _cluster_doc_counts(seqs, lex) if prevalence_mode == "documents" else None
            scores = sbs_scores(
                net,
                targets,
                population=population,
                transform=transform,
                prevalence_mode=prevalence_mode,
                doc_freq_override=override,
            )
        except Exception as exc:
            raise RuntimeError(f"period {period!r}: {exc}") from exc
        if len(slice_docs) == 0:
            empty_periods.append(period)
        stats[period] = scores.population_stats
        for name in targets:
            series[name].append((period, scores.entries[name]))

    params = run_parameters(
        lex, spec, population, seed, prep, transform, prevalence_mode, resolution, collocation_stats
    )
    return SbsTimeSeries(
        series=series,
        population_stats=stats,
        periods=list(slices),
        empty_periods=empty_periods,
        config_fingerprint=config_fingerprint(params),
    )


def term_mention_trend(
    docs: DocumentSet,
    term: str,
    prep: PrepConfig | None = None,
) -> dict[int, int]:
    """Documents per year whose normalized abstract contains the phrase."""
    prep = prep or PrepConfig()
    token = phrase_token(term)
    span = docs.year_span()
    if span is None:
        return {}
    counts = {year: 0 for year in range(span[0], span[1] + 1)}
    for doc in docs:
        seq = tokenize_normalize(doc.abstract, prep, protected=[term], doc_id=doc.id)
        if token in seq.tokens:
            counts[doc.year] += 1
    return counts


@dataclass(frozen=True)
class RunResult:
    """Everything a finished analysis exposes."""

    counts_by_year: dict[int, int]
    timeseries: SbsTimeSeries
    topics: TopicPartition
    geo_counts: dict[str, int]
    parameters: dict
    fingerprint: str


class AnalysisRun:
    """Lifecycle record of one analysis; status only moves forward."""

    TRANSITIONS = {"pending": ("running", "failed"), "running": ("done", "failed"), "done": (), "failed": ()}

    def __init__(self, run_id: str, corpus_ref: str, parameters: dict):
        self.id = run_id
        self.corpus_ref = corpus_ref
        self.parameters = parameters
        self.status = "pending"
        self.error: str | None = None
        self.manifest: dict | None = None

    def advance(self, status: str, error: str | None = None, manifest: dict | None = None) -> None:
        if status not in self.TRANSITIONS[self.status]:
            raise ValueError(f"illegal status transition {self.status} -> {status}")
        self.status = status
        self.error = error
        if manifest is not None:
            self.manifest = manifest


def execute_run(
    docs: DocumentSet,
    lex: Lexicon,
    spec: SliceSpec,
    population: str = "all-nodes",
    seed: int = 0,
    prep: PrepConfig | None = None,
    transform: str = "inverse",
    prevalence_mode: str = "tokens",
    resolution: float = 1.0,
    collocation_stats: str = "per-slice",
    corpus_label: str = "",
) -> RunResult:
    """Run the full pipeline: counts, SBS series, topics, country counts."""
    prep = prep or PrepConfig()
    ts = run_sbs_timeseries(
        docs, lex, spec, population, seed, prep, transform, prevalence_mode, resolution, collocation_stats
    )
    protected = lex.protected_phrases()
    protected_tokens = frozenset(phrase_token(p) for p in protected)
    seqs = _prepare_slice(docs, protected, protected_tokens, prep)
    full_net = _contracted_network(seqs, lex, spec, period="all")
    topics = louvain(full_net, seed=seed, resolution=resolution)
    params = run_parameters(
        lex, spec, population, seed, prep, transform, prevalence_mode, resolution, collocation_stats
    )
    params["corpus_label"] = corpus_label
    return RunResult(
        counts_by_year=count_by_year(docs),
        timeseries=ts,
        topics=topics,
        geo_counts=country_counts(docs, load_gazetteer()),
        parameters=params,
        fingerprint=ts.config_fingerprint,
    )


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def export_bundle(result: RunResult, out_dir: str | Path) -> dict:
    """Write the figure-analog artifacts plus a hashed manifest.

    Identical configurations produce byte-identical bundles: artifact rows
    are fully ordered and floats serialized with repr.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "counts_by_year.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["year", "count"])
        for year in sorted(result.counts_by_year):
            writer.writerow([year, result.counts_by_year[year]])

    result.timeseries.to_csv(out / "sbs_timeseries.csv")

    topics_payload = {
        "modularity": result.topics.modularity,
        "communities": {node: cid for node, cid in sorted(result.topics.communities.items())},
        "ranked_words": {
            str(cid): [[w, s] for w, s in words] for cid, words in sorted(result.topics.ranked_words.items())
        },
    }
    (out / "topics.json").write_text(
        json.dumps(topics_payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )

    with open(out / "geo_counts.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["country", "dataset", "count"])
        for country, count in result.geo_counts.items():
            writer.writerow([country, result.parameters.get("corpus_label", ""), count])

    artifacts = ["counts_by_year.csv", "sbs_timeseries.csv", "topics.json", "geo_counts.csv"]
    manifest = {
        "files": {name: _sha256_file(out / name) for name in artifacts},
        "fingerprint": result.fingerprint,
        "parameters": result.parameters,
        "population_stats": {
            period: {dim: list(ms) for dim, ms in dims.items()}
            for period, dims in result.timeseries.population_stats.items()
        },
        "empty_periods": result.timeseries.empty_periods,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    return manifest
