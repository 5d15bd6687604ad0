"""Country-mention tagging over raw titles and abstracts.

Matching is case-sensitive and on the raw text: stemming and lowercasing
would destroy the "Turkey" / "turkey" distinction and demonym surface
forms.  Each country groups its name with qualifying adjectives and
demonyms ("Italy" also matches "Italian" and "Italians").
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .corpus import Document, DocumentSet

_SENTENCE_END = ".!?\n"


@dataclass(frozen=True)
class Gazetteer:
    """Country name -> surface forms, plus forms needing extra care.

    Ambiguous forms ("Turkey", "Georgia", "Jordan", ...) collide with
    common nouns or person names; they only count when they appear
    capitalized away from a sentence start, where capitalization is
    informative.
    """

    entries: dict[str, tuple[str, ...]]
    ambiguous: frozenset[str]

    def __post_init__(self) -> None:
        owner: dict[str, str] = {}
        for country, forms in self.entries.items():
            for form in forms:
                if form in owner and form not in self.ambiguous:
                    raise ValueError(
                        f"surface form {form!r} claimed by {owner[form]!r} and {country!r} "
                        "but not flagged ambiguous"
                    )
                owner[form] = country


def load_gazetteer(path: str | Path | None = None) -> Gazetteer:
    """Load a gazetteer file; None loads the bundled UN-member list."""
    if path is None:
        text = resources.files("litmap.data").joinpath("gazetteer.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    data = json.loads(text)
    ambiguous = frozenset(data.pop("ambiguous", ()))
    entries = {country: tuple(forms) for country, forms in data.items()}
    return Gazetteer(entries=entries, ambiguous=ambiguous)


def _at_sentence_start(text: str, pos: int) -> bool:
    i = pos - 1
    while i >= 0 and text[i] in " \t\"'([":
        i -= 1
    return i < 0 or text[i] in _SENTENCE_END


def _find_matches(text: str, gaz: Gazetteer) -> list[tuple[int, int, str]]:
    matches: list[tuple[int, int, str]] = []
    for country, forms in gaz.entries.items():
        for form in forms:
            pattern = re.compile(rf"(?<![A-Za-z0-9]){re.escape(form)}(?![A-Za-z0-9])")
            for m in pattern.finditer(text):
                if form in gaz.ambiguous and _at_sentence_start(text, m.start()):
                    continue
                matches.append((m.start(), m.end(), country))
    return matches


def tag_countries(doc: Document, gaz: Gazetteer) -> set[str]:
    """Countries mentioned in the document's title or abstract.

    Whole-word, case-sensitive matching; when one match sits inside a
    longer one ("Korean" inside "North Korean") only the longer counts.
    """
    text = doc.title + "\n" + doc.abstract
    matches = _find_matches(text, gaz)
    tagged: set[str] = set()
    for start, end, country in matches:
        contained = any(
            (s <= start and end <= e and (s, e) != (start, end))
            for s, e, _ in matches
        )
        if not contained:
            tagged.add(country)
    return tagged


def country_counts(docs: DocumentSet, gaz: Gazetteer) -> dict[str, int]:
    """Documents per country; a document counts once per country it mentions."""
    counts: dict[str, int] = {}
    for doc in docs:
        for country in tag_countries(doc, gaz):
            counts[country] = counts.get(country, 0) + 1
    return dict(sorted(counts.items(), key=lambda item: (-item[1], item[0])))


def counts_to_csv(counts: dict[str, int], path: str | Path, dataset: str = "") -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["country", "dataset", "count"])
        for country, count in counts.items():
            writer.writerow([country, dataset, count])
