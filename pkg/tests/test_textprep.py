import math
import re

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from litmap.textprep import (
    CollocationTable,
    PrepConfig,
    TokenSeq,
    apply_collocations,
    default_stopwords,
    detect_collocations,
    phrase_token,
    tokenize_normalize,
)

CFG = PrepConfig()


class TestTokenizeNormalize:
    def test_protected_phrase_with_stemming(self):
        seq = tokenize_normalize(
            "Life cycle assessment of buildings.", CFG, protected=["life cycle assessment"]
        )
        assert seq.tokens == ("life_cycle_assessment", "build")

    def test_empty_text(self):
        assert tokenize_normalize("", CFG).tokens == ()

    def test_all_stopwords(self):
        assert tokenize_normalize("The THE the", CFG).tokens == ()

    def test_protected_phrase_spanning_stopwords(self):
        # "state of the art" is protected even though "of"/"the" are stopwords
        seq = tokenize_normalize("A state of the art method.", CFG, protected=["state of the art"])
        assert "state_of_the_art" in seq.tokens

    def test_hyphens_split_words(self):
        seq = tokenize_normalize("cradle-to-grave analysis", CFG)
        assert seq.tokens == ("cradl", "grave", "analysi")

    def test_hyphen_insensitive_protected_match(self):
        seq = tokenize_normalize("A cradle-to-grave study.", CFG, protected=["cradle to grave"])
        assert "cradle_to_grave" in seq.tokens

    def test_numerals_kept(self):
        seq = tokenize_normalize("CO2 emissions in 2020", CFG)
        assert "co2" in seq.tokens and "2020" in seq.tokens

    def test_accent_folding(self):
        seq = tokenize_normalize("The façade performs well.", CFG, protected=["facade"])
        assert "facade" in seq.tokens

    def test_no_stemmer(self):
        cfg = PrepConfig(stemmer="none")
        seq = tokenize_normalize("buildings materials", cfg)
        assert seq.tokens == ("buildings", "materials")

    def test_doc_id_carried(self):
        assert tokenize_normalize("solar", CFG, doc_id="x").doc_id == "x"


@given(st.text(max_size=300))
@settings(max_examples=200, deadline=None)
def test_output_charset(text):
    seq = tokenize_normalize(text, CFG)
    for tok in seq.tokens:
        assert re.fullmatch(r"[a-z0-9_]+", tok), tok


@given(st.text(max_size=300))
@settings(max_examples=200, deadline=None)
def test_idempotent_on_own_output(text):
    once = tokenize_normalize(text, CFG)
    twice = tokenize_normalize(" ".join(once.tokens), CFG)
    assert twice.tokens == once.tokens


@given(st.text(max_size=200))
@settings(max_examples=100, deadline=None)
def test_deterministic(text):
    a = tokenize_normalize(text, CFG, protected=["life cycle assessment"])
    b = tokenize_normalize(text, CFG, protected=["life cycle assessment"])
    assert a.tokens == b.tokens


class TestDetectCollocations:
    def test_pmi_matches_brute_force(self):
        # one 100-token document where green+roof are always adjacent, 5 times
        filler = [f"w{i}" for i in range(90)]
        tokens = []
        for i in range(5):
            tokens.extend(filler[i * 18 : (i + 1) * 18])
            tokens.extend(["green", "roof"])
        assert len(tokens) == 100
        cfg = PrepConfig(collocation_min_count=2, collocation_score_threshold=0.5)
        table = detect_collocations([TokenSeq(tuple(tokens))], cfg)
        expected = math.log2((5 / 99) / ((5 / 100) * (5 / 100)))
        entry = table.entries[("green", "roof")]
        assert entry.count == 5
        assert abs(entry.score - expected) < 1e-12

    def test_below_min_count_absent(self):
        cfg = PrepConfig(collocation_min_count=2, collocation_score_threshold=0.1)
        table = detect_collocations([TokenSeq(("rare", "pair", "x", "y"))], cfg)
        assert ("rare", "pair") not in table

    def test_single_token_docs(self):
        cfg = PrepConfig(collocation_min_count=2, collocation_score_threshold=0.1)
        table = detect_collocations([TokenSeq(("a",)), TokenSeq(("b",))], cfg)
        assert len(table) == 0

    def test_csv_round_trip(self, tmp_path):
        cfg = PrepConfig(collocation_min_count=2, collocation_score_threshold=0.5)
        seq = TokenSeq(tuple(["green", "roof"] * 5))
        table = detect_collocations([seq], cfg)
        path = tmp_path / "colloc.csv"
        table.to_csv(path)
        loaded = CollocationTable.from_csv(path)
        assert set(loaded.entries) == set(table.entries)
        for pair in table.entries:
            assert abs(loaded.entries[pair].score - table.entries[pair].score) < 1e-15


class TestApplyCollocations:
    TABLE = CollocationTable(
        {
            ("green", "roof"): type("E", (), {"fused": "green_roof"})(),
        }
    )

    def test_basic_fusion(self):
        table = detect_collocations(
            [TokenSeq(tuple(["green", "roof"] * 5))],
            PrepConfig(collocation_min_count=2, collocation_score_threshold=0.1),
        )
        seq = apply_collocations(TokenSeq(("green", "roof", "design")), table)
        assert seq.tokens == ("green_roof", "design")

    def test_left_greedy(self):
        cfg = PrepConfig(collocation_min_count=2, collocation_score_threshold=0.1)
        docs = [TokenSeq(("a", "b")), TokenSeq(("a", "b")), TokenSeq(("b", "c")), TokenSeq(("b", "c"))]
        table = detect_collocations(docs, cfg)
        assert ("a", "b") in table and ("b", "c") in table
        seq = apply_collocations(TokenSeq(("a", "b", "c")), table)
        assert seq.tokens == ("a_b", "c")

    def test_empty(self):
        table = CollocationTable()
        assert apply_collocations(TokenSeq(()), table).tokens == ()


@given(st.lists(st.sampled_from(["a", "b", "c", "d"]), max_size=30))
@settings(max_examples=200, deadline=None)
def test_apply_never_lengthens(tokens):
    cfg = PrepConfig(collocation_min_count=2, collocation_score_threshold=0.01)
    docs = [TokenSeq(tuple(tokens))] * 3
    table = detect_collocations(docs, cfg)
    fused = apply_collocations(TokenSeq(tuple(tokens)), table)
    assert len(fused.tokens) <= len(tokens)


def test_default_stopwords_contains_basics():
    stops = default_stopwords()
    assert {"the", "of", "and", "is"} <= stops
    assert len(stops) > 150


def test_phrase_token():
    assert phrase_token("Life Cycle Assessment") == "life_cycle_assessment"
    assert phrase_token("micro-wind") == "micro_wind"
    assert phrase_token("façade") == "facade"


def test_config_validation():
    with pytest.raises(ValueError):
        PrepConfig(stemmer="snowball")
    with pytest.raises(ValueError):
        PrepConfig(min_token_len=0)
    with pytest.raises(ValueError):
        PrepConfig(collocation_min_count=1)
    with pytest.raises(ValueError):
        PrepConfig(stopword_list=frozenset({"The"}))
