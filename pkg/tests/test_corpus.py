import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from litmap.corpus import (
    CorpusError,
    Document,
    DocumentSet,
    KeywordQuery,
    count_by_year,
    filter_query,
    ingest,
    load_corpus,
    save_corpus,
)


def _doc(i, year=2020, akw=(), ikw=(), lang="English", dtype="Article"):
    return Document(
        id=f"d{i}",
        title=f"Title {i}",
        abstract=f"Abstract {i}",
        year=year,
        author_keywords=tuple(akw),
        index_keywords=tuple(ikw),
        language=lang,
        doc_type=dtype,
    )


class TestIngest:
    def test_scopus_csv_clean(self, scopus_csv):
        docs = ingest(scopus_csv, "scopus-csv")
        assert len(docs) == 3
        assert docs.rejected == 0
        first = docs.documents[0]
        assert first.id == "2-s2.0-1"
        assert first.author_keywords == ("building", "sustainability")
        assert first.venue == "Energy Journal"

    def test_missing_abstract_rejected(self, tmp_path):
        rows = [
            '"Title","Abstract","Year","Author Keywords","Index Keywords","Language of Original Document","Document Type","Source title","EID"',
            '"Ok","Has abstract.","2020","kw","","English","Article","J","e1"',
            '"Bad","","2020","kw","","English","Article","J","e2"',
            '"Ok2","Another abstract.","2021","kw","","English","Article","J","e3"',
        ]
        path = tmp_path / "x.csv"
        path.write_text("\n".join(rows), encoding="utf-8")
        docs = ingest(path, "scopus-csv")
        assert len(docs) == 2
        assert docs.rejected == 1

    def test_empty_file_errors(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(CorpusError, match="zero valid"):
            ingest(path, "scopus-csv")

    def test_unknown_profile(self, tmp_path):
        path = tmp_path / "x.csv"
        path.write_text("a", encoding="utf-8")
        with pytest.raises(CorpusError, match="unknown profile"):
            ingest(path, "wos-txt")

    def test_unreadable_file(self, tmp_path):
        with pytest.raises(CorpusError, match="cannot read"):
            ingest(tmp_path / "nope.csv", "scopus-csv")

    def test_jsonl(self, jsonl_corpus):
        docs = ingest(jsonl_corpus, "generic-jsonl")
        assert len(docs) == 3
        assert [d.year for d in docs] == [2019, 2020, 2021]

    def test_jsonl_malformed_line_counted(self, tmp_path):
        path = tmp_path / "c.jsonl"
        good = json.dumps({"id": "a", "title": "T", "abstract": "A", "year": 2020})
        path.write_text(good + "\nnot-json\n", encoding="utf-8")
        docs = ingest(path, "generic-jsonl")
        assert len(docs) == 1 and docs.rejected == 1

    def test_duplicate_ids_collapse(self, tmp_path):
        row = {"id": "same", "title": "T", "abstract": "A", "year": 2020}
        path = tmp_path / "c.jsonl"
        path.write_text(json.dumps(row) + "\n" + json.dumps(row | {"title": "Other"}) + "\n")
        docs = ingest(path, "generic-jsonl")
        assert len(docs) == 1
        assert docs.documents[0].title == "T"

    def test_missing_id_dedup_by_title_year(self, tmp_path):
        rows = [
            {"title": "Same Title!", "abstract": "A", "year": 2020},
            {"title": "same title", "abstract": "B", "year": 2020},
            {"title": "same title", "abstract": "C", "year": 2021},
        ]
        path = tmp_path / "c.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in rows))
        docs = ingest(path, "generic-jsonl")
        assert len(docs) == 2

    def test_year_bounds(self, tmp_path):
        rows = [
            {"id": "a", "title": "T", "abstract": "A", "year": 1899},
            {"id": "b", "title": "T", "abstract": "A", "year": 2020},
        ]
        path = tmp_path / "c.jsonl"
        path.write_text("\n".join(json.dumps(r) for r in rows))
        docs = ingest(path, "generic-jsonl")
        assert len(docs) == 1 and docs.rejected == 1

    def test_round_trip(self, tmp_path, scopus_csv):
        docs = ingest(scopus_csv, "scopus-csv")
        out = tmp_path / "canonical.jsonl"
        save_corpus(docs, out)
        again = load_corpus(out)
        assert [d.id for d in again] == [d.id for d in docs]
        assert [d.abstract for d in again] == [d.abstract for d in docs]


class TestFilterQuery:
    def test_conjunctive_groups(self):
        docs = DocumentSet(
            tuple(
                [_doc(0, akw=["green building", "sustainability report"])]
                + [_doc(1, akw=["building code"])]
                + [_doc(2, ikw=["sustainability"], akw=["buildings"])]
                + [_doc(3, akw=["bridges"])]
            )
        )
        q = KeywordQuery(required_terms=(("building",), ("sustainability",)))
        kept = filter_query(docs, q)
        assert [d.id for d in kept] == ["d0", "d2"]

    def test_synthetic_ten_doc_fixture(self):
        docs = []
        for i in range(10):
            akw = ["building"] if i % 2 == 0 else ["bridge"]
            if i in (0, 2, 4, 6):
                akw.append("sustainability")
            docs.append(_doc(i, akw=akw))
        result = filter_query(DocumentSet(tuple(docs)), KeywordQuery((("building",), ("sustainability",))))
        assert len(result) == 4

    def test_disjunction_within_group(self):
        docs = DocumentSet((_doc(0, akw=["life cycle assessment"]), _doc(1, akw=["LCA tools"]), _doc(2, akw=["other"])))
        q = KeywordQuery(required_terms=(("life cycle assessment", "lca"),))
        assert len(filter_query(docs, q)) == 2

    def test_year_language_doctype(self):
        docs = DocumentSet(
            (
                _doc(0, year=1995, akw=["x"]),
                _doc(1, year=2000, akw=["x"]),
                _doc(2, year=2000, akw=["x"], lang="German"),
                _doc(3, year=2000, akw=["x"], dtype="Conference Paper"),
            )
        )
        q = KeywordQuery(
            required_terms=(("x",),),
            year_range=(1996, 2022),
            language="english",
            doc_types=frozenset({"Article"}),
        )
        assert [d.id for d in filter_query(docs, q)] == ["d1"]

    def test_search_fields_extension(self):
        doc = _doc(0)
        base = KeywordQuery(required_terms=(("abstract 0",),))
        assert len(filter_query(DocumentSet((doc,)), base)) == 0
        wide = KeywordQuery(required_terms=(("abstract 0",),), search_fields=("abstract",))
        assert len(filter_query(DocumentSet((doc,)), wide)) == 1

    def test_idempotent(self):
        docs = DocumentSet(tuple(_doc(i, akw=["building"] if i < 3 else ["x"]) for i in range(6)))
        q = KeywordQuery((("building",),))
        once = filter_query(docs, q)
        twice = filter_query(once, q)
        assert [d.id for d in once] == [d.id for d in twice]

    def test_monotone(self):
        docs = DocumentSet(tuple(_doc(i, akw=["building", "solar"] if i % 2 else ["building"]) for i in range(8)))
        q1 = KeywordQuery((("building",),))
        q2 = KeywordQuery((("building",), ("solar",)))
        assert len(filter_query(docs, q2)) <= len(filter_query(docs, q1))

    def test_query_validation(self):
        with pytest.raises(ValueError):
            KeywordQuery(required_terms=())
        with pytest.raises(ValueError):
            KeywordQuery(required_terms=(("a",),), year_range=(2022, 1996))
        with pytest.raises(ValueError):
            KeywordQuery(required_terms=(("a",),), search_fields=("body",))

    def test_query_json_round_trip(self):
        q = KeywordQuery(
            required_terms=(("building",), ("sustainability", "sustainable")),
            year_range=(1996, 2022),
            language="English",
            doc_types=frozenset({"Article"}),
        )
        assert KeywordQuery.from_json(q.to_json()) == q


class TestCountByYear:
    def test_zero_filled_span(self):
        docs = DocumentSet((_doc(0, year=1996), _doc(1, year=1996), _doc(2, year=2000)))
        counts = count_by_year(docs)
        assert counts == {1996: 2, 1997: 0, 1998: 0, 1999: 0, 2000: 1}

    def test_empty(self):
        assert count_by_year(DocumentSet(())) == {}

    @given(st.lists(st.integers(min_value=1990, max_value=2030), min_size=1, max_size=40))
    @settings(max_examples=100, deadline=None)
    def test_counts_sum_to_size(self, years):
        docs = DocumentSet(tuple(_doc(i, year=y) for i, y in enumerate(years)))
        assert sum(count_by_year(docs).values()) == len(docs)


def test_document_invariants():
    with pytest.raises(ValueError):
        Document(id="", title="T", abstract="A", year=2020)
    with pytest.raises(ValueError):
        Document(id="x", title=" ", abstract="A", year=2020)
    with pytest.raises(ValueError):
        Document(id="x", title="T", abstract="A", year=2101)
    with pytest.raises(ValueError):
        DocumentSet((_doc(0), _doc(0)))
