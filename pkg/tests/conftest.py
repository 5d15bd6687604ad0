from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from litmap.brandes import warmup
from litmap.corpus import Document, DocumentSet
from litmap.lexicon import ClusterDef, Lexicon
from litmap.network import WordNetwork


@pytest.fixture(scope="session", autouse=True)
def _warm_numba():
    warmup()


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    failed = [
        report.nodeid.split("::")[-1]
        for report in terminalreporter.stats.get("failed", [])
        if "test_acceptance" in report.nodeid
    ]
    if not ACCEPTANCE_LINES and not failed:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"PASS {line}")
    for name in failed:
        terminalreporter.write_line(f"FAIL {name}")


@pytest.fixture
def small_corpus() -> DocumentSet:
    texts = [
        (2020, "Solar energy retrofit improves efficiency in Italian residential buildings."),
        (2020, "Life cycle assessment of brick and steel materials for construction."),
        (2021, "Energy efficiency and retrofit of building envelopes using insulation."),
        (2021, "A green roof case study: solar energy and photovoltaic integration in China."),
        (2022, "Payback time and investment analysis of renewable energy in buildings."),
        (2022, "Life cycle assessment of wood and glass building materials."),
    ]
    docs = tuple(
        Document(
            id=f"d{i}",
            title=f"Study {i}",
            abstract=abstract,
            year=year,
            author_keywords=("building", "sustainability"),
            language="English",
            doc_type="Article",
        )
        for i, (year, abstract) in enumerate(texts)
    )
    return DocumentSet(docs, provenance="fixture")


@pytest.fixture
def small_lexicon() -> Lexicon:
    return Lexicon(
        clusters=(
            ClusterDef("Renewables", ("renewable energy", "solar energy")),
            ClusterDef("Efficiency", ("energy efficiency", "retrofit")),
            ClusterDef("LCA", ("life cycle assessment",)),
        )
    )


def network_from_edges(edges: dict[tuple[int, int], int], n: int | None = None) -> WordNetwork:
    """Integer-indexed helper network with unit node frequencies."""
    if n is None:
        n = max((max(i, j) for i, j in edges), default=-1) + 1
    labels = [f"n{i:03d}" for i in range(n)]
    return WordNetwork(
        {label: 1 for label in labels},
        {(labels[i], labels[j]): w for (i, j), w in edges.items()},
    )


@pytest.fixture
def scopus_csv(tmp_path: Path) -> Path:
    rows = [
        '"Title","Abstract","Year","Author Keywords","Index Keywords","Language of Original Document","Document Type","Source title","EID"',
        '"Solar retrofit","We study solar retrofit.","2020","building; sustainability","solar energy","English","Article","Energy Journal","2-s2.0-1"',
        '"LCA of cement","Life cycle assessment of cement.","2021","LCA; building","cement","English","Article","Cleaner Prod","2-s2.0-2"',
        '"Green roofs","Green roof benefits, with ""quoted"" text.","2022","green roof","roof","English","Review","Build Env","2-s2.0-3"',
    ]
    path = tmp_path / "export.csv"
    path.write_text("\n".join(rows) + "\n", encoding="utf-8")
    return path


@pytest.fixture
def jsonl_corpus(tmp_path: Path) -> Path:
    rows = [
        {
            "id": f"j{i}",
            "title": f"Paper {i}",
            "abstract": f"Abstract number {i} about buildings.",
            "year": 2019 + i,
            "author_keywords": ["building"],
            "index_keywords": [],
            "language": "English",
            "doc_type": "Article",
            "venue": "J",
        }
        for i in range(3)
    ]
    path = tmp_path / "corpus.jsonl"
    path.write_text("\n".join(json.dumps(r) for r in rows) + "\n", encoding="utf-8")
    return path
