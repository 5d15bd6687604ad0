"""Command-line entry point covering the full pipeline.

Exit codes: 0 success, 1 usage error, 2 data error.  Machine-readable
output goes to files or stdout; diagnostics go to stderr.  Parameters
resolve as defaults < config file < flags and the effective configuration
is echoed into every export manifest.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import analytics
from .corpus import CorpusError, KeywordQuery, count_by_year, filter_query, ingest, load_corpus, save_corpus
from .geo import counts_to_csv, country_counts, load_gazetteer
from .lexicon import LexiconError, load_lexicon, suggest_terms
from .network import SliceSpec
from .textprep import PrepConfig, load_stopwords

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2

CONFIG_KEYS = (
    "window",
    "min_edge_weight",
    "min_node_freq",
    "granularity",
    "ranges",
    "population",
    "seed",
    "weight_transform",
    "prevalence_mode",
    "resolution",
    "collocation_stats",
    "stemmer",
    "min_token_len",
    "collocation_min_count",
    "collocation_score_threshold",
    "stopwords",
    "threads",
)


class _Parser(argparse.ArgumentParser):
    """argparse that exits 1 (not 2) on usage errors, per the CLI contract."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; flags override it")
    p.add_argument("--window", type=int)
    p.add_argument("--min-edge-weight", type=int, dest="min_edge_weight")
    p.add_argument("--min-node-freq", type=int, dest="min_node_freq")
    p.add_argument("--yearly", action="store_true", help="one slice per year (default)")
    p.add_argument("--ranges", help='range slices, e.g. "1996-2006,2007-2013"')
    p.add_argument("--population", choices=["all-nodes", "targets-only"])
    p.add_argument("--seed", type=int)
    p.add_argument("--weight-transform", choices=["inverse", "unit"], dest="weight_transform")
    p.add_argument("--prevalence-mode", choices=["tokens", "documents"], dest="prevalence_mode")
    p.add_argument("--resolution", type=float)
    p.add_argument("--collocation-stats", choices=["per-slice", "global"], dest="collocation_stats")
    p.add_argument("--stemmer", choices=["porter", "none"])
    p.add_argument("--min-token-len", type=int, dest="min_token_len")
    p.add_argument("--collocation-min-count", type=int, dest="collocation_min_count")
    p.add_argument("--collocation-score-threshold", type=float, dest="collocation_score_threshold")
    p.add_argument("--stopwords", help="stopword file, one word per line")
    p.add_argument("--threads", type=int, help="cap worker threads for the numeric core")


_DEFAULTS = {
    "window": 5,
    "min_edge_weight": 1,
    "min_node_freq": 1,
    "granularity": "yearly",
    "ranges": None,
    "population": "all-nodes",
    "seed": 0,
    "weight_transform": "inverse",
    "prevalence_mode": "tokens",
    "resolution": 1.0,
    "collocation_stats": "per-slice",
    "stemmer": "porter",
    "min_token_len": 2,
    "collocation_min_count": 5,
    "collocation_score_threshold": 3.0,
    "stopwords": None,
    "threads": None,
}


def _resolve_config(args: argparse.Namespace) -> dict:
    merged = dict(_DEFAULTS)
    config_path = getattr(args, "config", None)
    if config_path:
        loaded = json.loads(Path(config_path).read_text("utf-8"))
        unknown = set(loaded) - set(CONFIG_KEYS)
        if unknown:
            raise CorpusError(f"unknown config keys: {sorted(unknown)}")
        merged.update(loaded)
    for key in CONFIG_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if getattr(args, "ranges", None):
        merged["granularity"] = "range-list"
        merged["ranges"] = args.ranges
    if getattr(args, "yearly", False):
        merged["granularity"] = "yearly"
        merged["ranges"] = None
    return merged


def _parse_ranges(text) -> tuple[tuple[int, int], ...]:
    if isinstance(text, (list, tuple)):
        return tuple(tuple(r) for r in text)
    out = []
    for part in text.split(","):
        lo, hi = part.strip().split("-")
        out.append((int(lo), int(hi)))
    return tuple(out)


def _slice_spec(cfg: dict) -> SliceSpec:
    return SliceSpec(
        granularity=cfg["granularity"],
        ranges=_parse_ranges(cfg["ranges"]) if cfg["ranges"] else (),
        window=cfg["window"],
        min_edge_weight=cfg["min_edge_weight"],
        min_node_freq=cfg["min_node_freq"],
    )


def _prep_config(cfg: dict) -> PrepConfig:
    kwargs = dict(
        stemmer=cfg["stemmer"],
        min_token_len=cfg["min_token_len"],
        collocation_min_count=cfg["collocation_min_count"],
        collocation_score_threshold=cfg["collocation_score_threshold"],
    )
    if cfg["stopwords"]:
        kwargs["stopword_list"] = load_stopwords(cfg["stopwords"])
    return PrepConfig(**kwargs)


def _apply_threads(cfg: dict) -> None:
    if cfg.get("threads"):
        import numba

        numba.set_num_threads(max(1, int(cfg["threads"])))


def _write_counts_csv(counts: dict, out, key_header: str) -> None:
    writer = csv.writer(out)
    writer.writerow([key_header, "count"])
    for key, count in counts.items():
        writer.writerow([key, count])


def _cmd_ingest(args) -> int:
    docs = ingest(args.infile, args.profile)
    save_corpus(docs, args.out)
    print(f"ingested {len(docs)} documents ({docs.rejected} rejected) -> {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_filter(args) -> int:
    docs = load_corpus(args.corpus)
    query = KeywordQuery.from_json(json.loads(Path(args.query).read_text("utf-8")))
    kept = filter_query(docs, query)
    save_corpus(kept, args.out)
    print(f"kept {len(kept)} of {len(docs)} documents -> {args.out}", file=sys.stderr)
    return EXIT_OK


def _cmd_counts(args) -> int:
    docs = load_corpus(args.corpus)
    counts = count_by_year(docs)
    if args.out:
        with open(args.out, "w", newline="", encoding="utf-8") as fh:
            _write_counts_csv(counts, fh, "year")
    else:
        _write_counts_csv(counts, sys.stdout, "year")
    return EXIT_OK


def _cmd_lexicon_validate(args) -> int:
    lex = load_lexicon(args.lexicon)
    print(f"ok: {len(lex.clusters)} clusters, version {lex.version}", file=sys.stderr)
    return EXIT_OK


def _cmd_lexicon_suggest(args) -> int:
    net = None
    if args.provider == "cooccurrence-pmi":
        if not args.corpus:
            raise CorpusError("--corpus is required for the cooccurrence-pmi provider")
        docs = load_corpus(args.corpus)
        cfg = _resolve_config(args)
        prep = _prep_config(cfg)
        from .textprep import apply_collocations, detect_collocations, tokenize_normalize
        from .network import build_cooccurrence

        seqs = [tokenize_normalize(d.title + "\n" + d.abstract, prep, doc_id=d.id) for d in docs]
        table = detect_collocations(seqs, prep)
        seqs = [apply_collocations(s, table) for s in seqs]
        net = build_cooccurrence(seqs, _slice_spec(cfg), period="all")
    exclude = load_lexicon(args.lexicon) if args.lexicon else None
    suggestions = suggest_terms(args.term, net, provider=args.provider, k=args.k, exclude=exclude)
    writer = csv.writer(sys.stdout)
    writer.writerow(["term", "relation", "score", "provider"])
    for s in suggestions:
        writer.writerow([s.term, s.relation, repr(s.score), s.provider])
    return EXIT_OK


def _cmd_run_bundle(args) -> int:
    cfg = _resolve_config(args)
    _apply_threads(cfg)
    docs = load_corpus(args.corpus)
    lex = load_lexicon(args.lexicon)
    result = analytics.execute_run(
        docs,
        lex,
        _slice_spec(cfg),
        population=cfg["population"],
        seed=cfg["seed"],
        prep=_prep_config(cfg),
        transform=cfg["weight_transform"],
        prevalence_mode=cfg["prevalence_mode"],
        resolution=cfg["resolution"],
        collocation_stats=cfg["collocation_stats"],
        corpus_label=args.corpus_label if getattr(args, "corpus_label", None) else "",
    )
    manifest = analytics.export_bundle(result, args.out)
    print(f"bundle written to {args.out} (fingerprint {manifest['fingerprint'][:12]})", file=sys.stderr)
    return EXIT_OK


def _cmd_topics(args) -> int:
    cfg = _resolve_config(args)
    docs = load_corpus(args.corpus)
    lex = load_lexicon(args.lexicon) if args.lexicon else None
    prep = _prep_config(cfg)
    from .network import build_cooccurrence, contract_clusters
    from .textprep import apply_collocations, detect_collocations, phrase_token, tokenize_normalize
    from .topics import louvain

    protected = lex.protected_phrases() if lex else []
    seqs = [tokenize_normalize(d.title + "\n" + d.abstract, prep, protected, doc_id=d.id) for d in docs]
    table = detect_collocations(seqs, prep).without(frozenset(phrase_token(p) for p in protected))
    seqs = [apply_collocations(s, table) for s in seqs]
    net = build_cooccurrence(seqs, _slice_spec(cfg), period="all")
    if lex:
        net = contract_clusters(net, lex)
    part = louvain(net, seed=cfg["seed"], resolution=cfg["resolution"])
    payload = {
        "modularity": part.modularity,
        "communities": dict(sorted(part.communities.items())),
        "ranked_words": {str(c): [[w, s] for w, s in ws] for c, ws in sorted(part.ranked_words.items())},
    }
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _cmd_geo(args) -> int:
    docs = load_corpus(args.corpus)
    gaz = load_gazetteer(args.gazetteer) if args.gazetteer else load_gazetteer()
    counts = country_counts(docs, gaz)
    if args.out:
        counts_to_csv(counts, args.out, dataset=args.dataset)
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(["country", "dataset", "count"])
        for country, count in counts.items():
            writer.writerow([country, args.dataset, count])
    return EXIT_OK


def _cmd_trend(args) -> int:
    docs = load_corpus(args.corpus)
    cfg = _resolve_config(args)
    counts = analytics.term_mention_trend(docs, args.term, prep=_prep_config(cfg))
    _write_counts_csv(counts, sys.stdout, "year")
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .service import serve

    serve(args.data_dir, host=args.host, port=args.port, workers=args.workers)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="litmap", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="read a bibliographic export into a corpus file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--profile", required=True, choices=["scopus-csv", "generic-jsonl"])
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("filter", help="apply a keyword query to a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--query", required=True, help="query JSON file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("counts", help="documents per year")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_counts)

    p = sub.add_parser("lexicon", help="lexicon utilities")
    lex_sub = p.add_subparsers(dest="lexicon_command", required=True)
    v = lex_sub.add_parser("validate", help="check cluster names and keyword disjointness")
    v.add_argument("--lexicon", required=True)
    v.set_defaults(func=_cmd_lexicon_validate)
    s = lex_sub.add_parser("suggest", help="propose related terms for a keyword")
    s.add_argument("--term", required=True)
    s.add_argument("--provider", default="external", choices=["external", "cooccurrence-pmi"])
    s.add_argument("--corpus")
    s.add_argument("--lexicon")
    s.add_argument("-k", type=int, default=10)
    _add_pipeline_flags(s)
    s.set_defaults(func=_cmd_lexicon_suggest)

    for name, help_text in (
        ("sbs", "full pipeline: cluster score time series bundle"),
        ("report", "full pipeline bundle (alias of sbs)"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--corpus", required=True)
        p.add_argument("--lexicon", required=True)
        p.add_argument("--out", required=True, help="bundle output directory")
        p.add_argument("--corpus-label", dest="corpus_label", help="dataset label for geo_counts.csv")
        _add_pipeline_flags(p)
        p.set_defaults(func=_cmd_run_bundle)

    p = sub.add_parser("topics", help="Louvain topics over the full-corpus network")
    p.add_argument("--corpus", required=True)
    p.add_argument("--lexicon")
    p.add_argument("--out")
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_topics)

    p = sub.add_parser("geo", help="country mention counts")
    p.add_argument("--corpus", required=True)
    p.add_argument("--gazetteer")
    p.add_argument("--dataset", default="")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_geo)

    p = sub.add_parser("trend", help="per-year document counts mentioning a phrase")
    p.add_argument("--corpus", required=True)
    p.add_argument("--term", required=True)
    _add_pipeline_flags(p)
    p.set_defaults(func=_cmd_trend)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--data-dir", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--workers", type=int, default=2)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except (CorpusError, LexiconError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
