"""litmap: map a bibliographic corpus into word networks, importance scores and trends.

The package is organized around the pipeline stages:

- :mod:`litmap.corpus` — ingest bibliographic exports and filter them with keyword queries
- :mod:`litmap.textprep` — normalize abstracts into token sequences (stopwords, stems, bigrams)
- :mod:`litmap.network` — per-period word co-occurrence networks and cluster contraction
- :mod:`litmap.sbs` — prevalence / diversity / connectivity and the composite score
- :mod:`litmap.topics` — TF-IDF keyword seeding and Louvain topic extraction
- :mod:`litmap.lexicon` — curated keyword clusters and term suggestion providers
- :mod:`litmap.geo` — country-mention tagging and per-country counts
- :mod:`litmap.analytics` — orchestration into time series and export bundles
- :mod:`litmap.service` — HTTP facade for the workbench
- :mod:`litmap.cli` — scriptable entry point
"""

__version__ = "0.1.0"
