"""Ingest bibliographic exports and filter them into analysis datasets.

Two file profiles are supported: ``scopus-csv`` (the column layout of a
Scopus list export) and ``generic-jsonl`` (one JSON object per line).
Malformed rows are skipped and counted rather than aborting the ingest.
"""

from __future__ import annotations

import csv
import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, Mapping

YEAR_MIN = 1900
YEAR_MAX = 2100

PROFILES = ("scopus-csv", "generic-jsonl")

KEYWORD_FIELDS = ("author_keywords", "index_keywords")
TEXT_FIELDS = ("title", "abstract")
SEARCH_FIELDS = KEYWORD_FIELDS + TEXT_FIELDS


class CorpusError(Exception):
    """Raised for unreadable inputs, unknown profiles, or empty results."""


@dataclass(frozen=True)
class Document:
    """One bibliographic record."""

    id: str
    title: str
    abstract: str
    year: int
    author_keywords: tuple[str, ...] = ()
    index_keywords: tuple[str, ...] = ()
    language: str = ""
    doc_type: str = ""
    venue: str = ""

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("document id must be non-empty")
        if not self.title.strip() or not self.abstract.strip():
            raise ValueError("title and abstract must be non-empty")
        if not (YEAR_MIN <= self.year <= YEAR_MAX):
            raise ValueError(f"year {self.year} outside [{YEAR_MIN}, {YEAR_MAX}]")

    @property
    def keywords(self) -> tuple[str, ...]:
        return self.author_keywords + self.index_keywords


@dataclass(frozen=True)
class DocumentSet:
    """Immutable ordered collection of documents plus its provenance."""

    documents: tuple[Document, ...]
    provenance: str = ""
    rejected: int = 0

    def __post_init__(self) -> None:
        seen = set()
        for doc in self.documents:
            if doc.id in seen:
                raise ValueError(f"duplicate document id {doc.id!r}")
            seen.add(doc.id)

    def __len__(self) -> int:
        return len(self.documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self.documents)

    def year_span(self) -> tuple[int, int] | None:
        if not self.documents:
            return None
        years = [d.year for d in self.documents]
        return min(years), max(years)


@dataclass(frozen=True)
class KeywordQuery:
    """Conjunction of term groups, each group a disjunction of substrings.

    Terms match case-insensitively as substrings of the selected fields.
    The default field set mirrors a keyword-based database search: author
    and index keyword phrases only.
    """

    required_terms: tuple[tuple[str, ...], ...]
    year_range: tuple[int, int] = (YEAR_MIN, YEAR_MAX)
    language: str | None = None
    doc_types: frozenset[str] | None = None
    search_fields: tuple[str, ...] = KEYWORD_FIELDS

    def __post_init__(self) -> None:
        if not self.required_terms or any(not g for g in self.required_terms):
            raise ValueError("at least one non-empty term group is required")
        if self.year_range[0] > self.year_range[1]:
            raise ValueError("year_range.min must be <= year_range.max")
        unknown = set(self.search_fields) - set(SEARCH_FIELDS)
        if unknown:
            raise ValueError(f"unknown search fields: {sorted(unknown)}")

    def matches(self, doc: Document) -> bool:
        if not (self.year_range[0] <= doc.year <= self.year_range[1]):
            return False
        if self.language is not None and doc.language.lower() != self.language.lower():
            return False
        if self.doc_types is not None:
            allowed = {t.lower() for t in self.doc_types}
            if doc.doc_type.lower() not in allowed:
                return False
        haystacks = []
        for fname in self.search_fields:
            value = getattr(doc, fname)
            if isinstance(value, tuple):
                haystacks.extend(v.lower() for v in value)
            else:
                haystacks.append(value.lower())
        for group in self.required_terms:
            if not any(term.lower() in hay for term in group for hay in haystacks):
                return False
        return True

    def to_json(self) -> dict:
        return {
            "required_terms": [list(g) for g in self.required_terms],
            "year_range": list(self.year_range),
            "language": self.language,
            "doc_types": sorted(self.doc_types) if self.doc_types is not None else None,
            "search_fields": list(self.search_fields),
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "KeywordQuery":
        return cls(
            required_terms=tuple(tuple(g) for g in data["required_terms"]),
            year_range=tuple(data.get("year_range", (YEAR_MIN, YEAR_MAX))),
            language=data.get("language"),
            doc_types=frozenset(data["doc_types"]) if data.get("doc_types") else None,
            search_fields=tuple(data.get("search_fields", KEYWORD_FIELDS)),
        )


def _normalize_title(title: str) -> str:
    return re.sub(r"[^a-z0-9]+", " ", title.lower()).strip()


def _fallback_id(title: str, year: int) -> str:
    digest = hashlib.sha1(f"{_normalize_title(title)}|{year}".encode()).hexdigest()
    return f"doc-{digest[:12]}"


def _split_keywords(raw: str) -> tuple[str, ...]:
    return tuple(k.strip() for k in raw.split(";") if k.strip())


def _coerce_year(raw) -> int | None:
    try:
        year = int(str(raw).strip())
    except (TypeError, ValueError):
        return None
    return year if YEAR_MIN <= year <= YEAR_MAX else None


def _rows_scopus_csv(path: Path) -> Iterator[dict]:
    with open(path, newline="", encoding="utf-8-sig") as fh:
        for row in csv.DictReader(fh):
            yield {
                "id": (row.get("EID") or "").strip(),
                "title": (row.get("Title") or "").strip(),
                "abstract": (row.get("Abstract") or "").strip(),
                "year": row.get("Year"),
                "author_keywords": _split_keywords(row.get("Author Keywords") or ""),
                "index_keywords": _split_keywords(row.get("Index Keywords") or ""),
                "language": (row.get("Language of Original Document") or "").strip(),
                "doc_type": (row.get("Document Type") or "").strip(),
                "venue": (row.get("Source title") or "").strip(),
            }


def _rows_generic_jsonl(path: Path) -> Iterator[dict]:
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError:
                yield {"_malformed": True}
                continue
            yield {
                "id": str(row.get("id") or "").strip(),
                "title": str(row.get("title") or "").strip(),
                "abstract": str(row.get("abstract") or "").strip(),
                "year": row.get("year"),
                "author_keywords": tuple(row.get("author_keywords") or ()),
                "index_keywords": tuple(row.get("index_keywords") or ()),
                "language": str(row.get("language") or "").strip(),
                "doc_type": str(row.get("doc_type") or "").strip(),
                "venue": str(row.get("venue") or "").strip(),
            }


def ingest(path: str | Path, profile: str) -> DocumentSet:
    """Read a bibliographic export into a DocumentSet.

    Rows without a usable title, abstract, or year are rejected and counted.
    Records sharing an id (or a normalized title + year when the id is
    missing) collapse to the first occurrence.
    """
    if profile not in PROFILES:
        raise CorpusError(f"unknown profile {profile!r}; expected one of {PROFILES}")
    path = Path(path)
    if not path.is_file():
        raise CorpusError(f"cannot read {path}")
    rows = _rows_scopus_csv(path) if profile == "scopus-csv" else _rows_generic_jsonl(path)

    docs: list[Document] = []
    seen_ids: set[str] = set()
    rejected = 0
    for row in rows:
        if row.get("_malformed"):
            rejected += 1
            continue
        year = _coerce_year(row["year"])
        if year is None or not row["title"] or not row["abstract"]:
            rejected += 1
            continue
        doc_id = row["id"] or _fallback_id(row["title"], year)
        if doc_id in seen_ids:
            continue
        seen_ids.add(doc_id)
        docs.append(
            Document(
                id=doc_id,
                title=row["title"],
                abstract=row["abstract"],
                year=year,
                author_keywords=tuple(row["author_keywords"]),
                index_keywords=tuple(row["index_keywords"]),
                language=row["language"],
                doc_type=row["doc_type"],
                venue=row["venue"],
            )
        )
    if not docs:
        raise CorpusError(f"zero valid records in {path}")
    provenance = f"ingest {path.name} profile={profile} rejected={rejected}"
    return DocumentSet(tuple(docs), provenance=provenance, rejected=rejected)


def filter_query(docs: DocumentSet, query: KeywordQuery) -> DocumentSet:
    """Keep exactly the documents satisfying every constraint of the query."""
    kept = tuple(d for d in docs if query.matches(d))
    provenance = f"{docs.provenance}; filter {json.dumps(query.to_json(), sort_keys=True)}"
    return DocumentSet(kept, provenance=provenance)


def count_by_year(docs: DocumentSet) -> dict[int, int]:
    """Documents per year, zero-filled across the corpus year span."""
    span = docs.year_span()
    if span is None:
        return {}
    counts = {year: 0 for year in range(span[0], span[1] + 1)}
    for doc in docs:
        counts[doc.year] += 1
    return counts


def corpus_to_jsonl(docs: DocumentSet) -> str:
    """Serialize a DocumentSet as generic-jsonl (the canonical on-disk form)."""
    lines = []
    for d in docs:
        lines.append(
            json.dumps(
                {
                    "id": d.id,
                    "title": d.title,
                    "abstract": d.abstract,
                    "year": d.year,
                    "author_keywords": list(d.author_keywords),
                    "index_keywords": list(d.index_keywords),
                    "language": d.language,
                    "doc_type": d.doc_type,
                    "venue": d.venue,
                },
                sort_keys=True,
            )
        )
    return "\n".join(lines) + ("\n" if lines else "")


def save_corpus(docs: DocumentSet, path: str | Path) -> None:
    Path(path).write_text(corpus_to_jsonl(docs), encoding="utf-8")


def load_corpus(path: str | Path) -> DocumentSet:
    return ingest(path, "generic-jsonl")
