import json

import pytest

from litmap.corpus import Document, DocumentSet
from litmap.geo import Gazetteer, country_counts, counts_to_csv, load_gazetteer, tag_countries

GAZ = load_gazetteer()


def _doc(i, title="T", abstract="A"):
    return Document(id=f"g{i}", title=title, abstract=abstract, year=2020)


class TestTagCountries:
    def test_adjective_maps_to_country(self):
        doc = _doc(0, title="An Italian case study of school retrofits")
        assert tag_countries(doc, GAZ) == {"Italy"}

    def test_demonym_plural(self):
        doc = _doc(0, abstract="Italians adopted the standard early.")
        assert tag_countries(doc, GAZ) == {"Italy"}

    def test_no_mention(self):
        assert tag_countries(_doc(0, abstract="Purely methodological work."), GAZ) == set()

    def test_multiword_surface_form(self):
        doc = _doc(0, abstract="We compare buildings in China and the United States of note.")
        assert tag_countries(doc, GAZ) == {"China", "United States"}

    def test_case_sensitive(self):
        doc = _doc(0, abstract="We roast a turkey and plant china dolls.")
        assert tag_countries(doc, GAZ) == set()

    def test_ambiguous_needs_mid_sentence_capital(self):
        start = _doc(0, abstract="Turkey has many new buildings.")
        assert tag_countries(start, GAZ) == set()
        mid = _doc(1, abstract="Buildings in Turkey improved.")
        assert tag_countries(mid, GAZ) == {"Turkey"}

    def test_ambiguous_in_mid_sentence_quotes_matches(self):
        # the rule is "not at sentence start"; mid-sentence quoting counts
        doc = _doc(0, abstract='Results ("Georgia case") were positive.')
        assert tag_countries(doc, GAZ) == {"Georgia"}

    def test_ambiguous_quoted_at_sentence_start_skipped(self):
        doc = _doc(0, abstract='"Georgia case" results were positive.')
        assert tag_countries(doc, GAZ) == set()

    def test_title_also_searched(self):
        doc = _doc(0, title="Energy use in Sweden", abstract="No mention here.")
        assert tag_countries(doc, GAZ) == {"Sweden"}

    def test_containment_suppression(self):
        doc = _doc(0, abstract="The Papua New Guinea building stock grows.")
        assert tag_countries(doc, GAZ) == {"Papua New Guinea"}

    def test_word_boundaries(self):
        doc = _doc(0, abstract="The Chinaware industry differs from manufacturing in China.")
        assert tag_countries(doc, GAZ) == {"China"}


class TestCountryCounts:
    def test_document_counts(self):
        docs = DocumentSet(
            (
                _doc(0, abstract="Study in Italy."),
                _doc(1, abstract="Another Italian city case."),
                _doc(2, abstract="Data from China."),
            )
        )
        assert country_counts(docs, GAZ) == {"Italy": 2, "China": 1}

    def test_empty(self):
        assert country_counts(DocumentSet(()), GAZ) == {}

    def test_document_level_dedup(self):
        docs = DocumentSet((_doc(0, abstract="Italy and Italy again; many Italian cities."),))
        assert country_counts(docs, GAZ) == {"Italy": 1}

    def test_count_bounds(self):
        docs = DocumentSet(
            tuple(_doc(i, abstract="Italy and China are compared here.") for i in range(4))
        )
        counts = country_counts(docs, GAZ)
        for value in counts.values():
            assert value <= len(docs)

    def test_csv_export(self, tmp_path):
        path = tmp_path / "geo.csv"
        counts_to_csv({"Italy": 2, "China": 1}, path, dataset="lca")
        assert path.read_text().splitlines() == [
            "country,dataset,count", "Italy,lca,2", "China,lca,1"
        ]


class TestGazetteer:
    def test_bundled_coverage(self):
        assert len(GAZ.entries) >= 190
        assert "Italian" in GAZ.entries["Italy"]
        assert "Turkey" in GAZ.ambiguous

    def test_unflagged_duplicate_rejected(self):
        with pytest.raises(ValueError, match="Borderland"):
            Gazetteer(
                entries={"A": ("Borderland",), "B": ("Borderland",)},
                ambiguous=frozenset(),
            )

    def test_flagged_duplicate_allowed(self):
        gaz = Gazetteer(
            entries={"A": ("Borderland",), "B": ("Borderland",)},
            ambiguous=frozenset({"Borderland"}),
        )
        assert gaz.entries["A"] == ("Borderland",)

    def test_load_custom_file(self, tmp_path):
        path = tmp_path / "gaz.json"
        path.write_text(json.dumps({"Atlantis": ["Atlantis", "Atlantean"], "ambiguous": []}))
        gaz = load_gazetteer(path)
        doc = _doc(0, abstract="The Atlantean grid is efficient.")
        assert tag_countries(doc, gaz) == {"Atlantis"}
