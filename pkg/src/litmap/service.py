"""HTTP facade over corpora, lexicons, suggestions, and analysis runs.

All state lives under one data directory as plain files, so the service is
restart-safe and the artifacts it serves are the same bytes the CLI writes.
Mutating endpoints accept a client-supplied ``request_id`` and replay the
original response on retry.
"""

from __future__ import annotations

import hashlib
import io
import json
import tempfile
import threading
import zipfile
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from . import analytics
from . import corpus as corpus_mod
from .corpus import CorpusError, DocumentSet, KeywordQuery
from .lexicon import Lexicon, LexiconError, suggest_terms
from .network import SliceSpec, build_cooccurrence
from .textprep import PrepConfig, apply_collocations, detect_collocations, tokenize_normalize
from .topics import tfidf_keywords

ARTIFACTS = ("counts_by_year.csv", "sbs_timeseries.csv", "topics.json", "geo_counts.csv", "manifest.json")

ERROR_CODES = (
    "bad-request",
    "corpus-not-found",
    "lexicon-not-found",
    "lexicon-invalid",
    "run-not-found",
    "artifact-missing",
    "version-conflict",
    "invalid-profile",
    "zero-valid-records",
)


class ServiceError(Exception):
    def __init__(self, status: int, code: str, message: str, details: dict | None = None):
        assert code in ERROR_CODES
        self.status = status
        self.code = code
        self.message = message
        self.details = details or {}


class CorpusUpload(BaseModel):
    profile: str
    content: str
    request_id: str | None = None


class FilterRequest(BaseModel):
    query: dict
    request_id: str | None = None


class LexiconPut(BaseModel):
    base_version: int
    clusters: list[dict]
    notes: str = ""
    request_id: str | None = None


class RunRequest(BaseModel):
    corpus: str
    lexicon: str
    lexicon_version: int
    slice: dict = {}
    population: str = "all-nodes"
    seed: int = 0
    weight_transform: str = "inverse"
    prevalence_mode: str = "tokens"
    resolution: float = 1.0
    collocation_stats: str = "per-slice"
    prep: dict = {}
    request_id: str | None = None


def _prep_from_json(data: dict) -> PrepConfig:
    kwargs = {}
    for key in ("stemmer", "min_token_len", "collocation_min_count", "collocation_score_threshold"):
        if key in data:
            kwargs[key] = data[key]
    return PrepConfig(**kwargs)


def _atomic_write(path: Path, text: str) -> None:
    # concurrent readers must never see a half-written file
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(text, "utf-8")
    tmp.replace(path)


class Store:
    """File-backed state: corpora, lexicon versions, runs, request replay."""

    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir)
        for sub in ("corpora", "lexicons", "runs"):
            (self.root / sub).mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._lexicon_locks: dict[str, threading.Lock] = {}
        self._requests_path = self.root / "requests.json"
        self._net_cache: dict[str, object] = {}

    # -- request replay --------------------------------------------------
    def replay(self, request_id: str | None):
        if not request_id:
            return None
        with self._lock:
            if self._requests_path.exists():
                cache = json.loads(self._requests_path.read_text("utf-8"))
                return cache.get(request_id)
        return None

    def record(self, request_id: str | None, status: int, payload: dict) -> None:
        if not request_id:
            return
        with self._lock:
            cache = (
                json.loads(self._requests_path.read_text("utf-8"))
                if self._requests_path.exists()
                else {}
            )
            cache[request_id] = {"status": status, "payload": payload}
            _atomic_write(self._requests_path, json.dumps(cache, sort_keys=True))

    # -- corpora ----------------------------------------------------------
    def corpus_path(self, corpus_id: str) -> Path:
        return self.root / "corpora" / f"{corpus_id}.jsonl"

    def save_corpus(self, docs: DocumentSet) -> str:
        content = corpus_mod.corpus_to_jsonl(docs).encode("utf-8")
        corpus_id = hashlib.sha256(content).hexdigest()[:12]
        path = self.corpus_path(corpus_id)
        if not path.exists():
            path.write_bytes(content)
            meta = {"provenance": docs.provenance, "documents": len(docs), "rejected": docs.rejected}
            path.with_suffix(".meta.json").write_text(json.dumps(meta, sort_keys=True), "utf-8")
        return corpus_id

    def load_corpus(self, corpus_id: str) -> DocumentSet:
        path = self.corpus_path(corpus_id)
        if not path.exists():
            raise ServiceError(404, "corpus-not-found", f"no corpus {corpus_id!r}")
        return corpus_mod.load_corpus(path)

    def corpus_meta(self, corpus_id: str) -> dict:
        path = self.corpus_path(corpus_id).with_suffix(".meta.json")
        if not path.exists():
            raise ServiceError(404, "corpus-not-found", f"no corpus {corpus_id!r}")
        return json.loads(path.read_text("utf-8"))

    def _token_seqs(self, corpus_id: str):
        docs = self.load_corpus(corpus_id)
        prep = PrepConfig()
        seqs = [tokenize_normalize(d.title + "\n" + d.abstract, prep, doc_id=d.id) for d in docs]
        table = detect_collocations(seqs, prep)
        return [apply_collocations(s, table) for s in seqs]

    def cooccurrence_network(self, corpus_id: str):
        if corpus_id not in self._net_cache:
            self._net_cache[corpus_id] = build_cooccurrence(
                self._token_seqs(corpus_id), SliceSpec(), period="all"
            )
        return self._net_cache[corpus_id]

    def tfidf_terms(self, corpus_id: str, k: int):
        return tfidf_keywords(self._token_seqs(corpus_id), top_k=k)

    # -- lexicons ----------------------------------------------------------
    def _lexicon_dir(self, lexicon_id: str) -> Path:
        return self.root / "lexicons" / lexicon_id

    def lexicon_lock(self, lexicon_id: str) -> threading.Lock:
        with self._lock:
            return self._lexicon_locks.setdefault(lexicon_id, threading.Lock())

    def lexicon_versions(self, lexicon_id: str) -> list[int]:
        directory = self._lexicon_dir(lexicon_id)
        if not directory.is_dir():
            return []
        return sorted(int(p.stem[1:]) for p in directory.glob("v*.json"))

    def load_lexicon(self, lexicon_id: str, version: int | None = None) -> Lexicon:
        versions = self.lexicon_versions(lexicon_id)
        if not versions:
            raise ServiceError(404, "lexicon-not-found", f"no lexicon {lexicon_id!r}")
        if version is None:
            version = versions[-1]
        if version not in versions:
            raise ServiceError(
                409,
                "version-conflict",
                f"lexicon {lexicon_id!r} has no version {version}",
                {"known_versions": versions},
            )
        path = self._lexicon_dir(lexicon_id) / f"v{version}.json"
        return Lexicon.from_json(json.loads(path.read_text("utf-8")))

    def save_lexicon(self, lexicon_id: str, lex: Lexicon) -> None:
        directory = self._lexicon_dir(lexicon_id)
        directory.mkdir(parents=True, exist_ok=True)
        path = directory / f"v{lex.version}.json"
        path.write_text(
            json.dumps(lex.canonical().to_json(), indent=2, ensure_ascii=False, sort_keys=True) + "\n",
            "utf-8",
        )

    # -- runs ----------------------------------------------------------
    def run_dir(self, run_id: str) -> Path:
        return self.root / "runs" / run_id

    def run_status(self, run_id: str) -> dict:
        path = self.run_dir(run_id) / "status.json"
        if not path.exists():
            raise ServiceError(404, "run-not-found", f"no run {run_id!r}")
        return json.loads(path.read_text("utf-8"))

    def set_run_status(self, run_id: str, status: dict) -> None:
        _atomic_write(self.run_dir(run_id) / "status.json", json.dumps(status, sort_keys=True))

    def unfinished_runs(self) -> list[str]:
        out = []
        for status_path in (self.root / "runs").glob("*/status.json"):
            status = json.loads(status_path.read_text("utf-8"))
            if status.get("status") in ("pending", "running"):
                out.append(status_path.parent.name)
        return sorted(out)


def _execute_run(store: Store, run_id: str) -> None:
    run_dir = store.run_dir(run_id)
    config = json.loads((run_dir / "config.json").read_text("utf-8"))
    store.set_run_status(run_id, {"id": run_id, "status": "running"})
    try:
        docs = store.load_corpus(config["corpus"])
        lex = store.load_lexicon(config["lexicon"], config["lexicon_version"])
        result = analytics.execute_run(
            docs,
            lex,
            SliceSpec.from_json(config.get("slice", {})),
            population=config.get("population", "all-nodes"),
            seed=config.get("seed", 0),
            prep=_prep_from_json(config.get("prep", {})),
            transform=config.get("weight_transform", "inverse"),
            prevalence_mode=config.get("prevalence_mode", "tokens"),
            resolution=config.get("resolution", 1.0),
            collocation_stats=config.get("collocation_stats", "per-slice"),
            corpus_label=config["corpus"],
        )
        tmp = run_dir / "artifacts.tmp"
        manifest = analytics.export_bundle(result, tmp)
        tmp.rename(run_dir / "artifacts")
        store.set_run_status(run_id, {"id": run_id, "status": "done", "manifest": manifest})
    except Exception as exc:  # runs must fail visibly, never hang in "running"
        store.set_run_status(run_id, {"id": run_id, "status": "failed", "error": str(exc)})


def create_app(data_dir: str | Path, workers: int = 2) -> FastAPI:
    """Build the service around a data directory."""
    store = Store(data_dir)
    executor = ThreadPoolExecutor(max_workers=workers)

    @asynccontextmanager
    async def _lifespan(_app: FastAPI):
        # runs interrupted by a restart are re-executed from their on-disk config
        for run_id in store.unfinished_runs():
            executor.submit(_execute_run, store, run_id)
        yield
        executor.shutdown(wait=False)

    app = FastAPI(title="litmap service", lifespan=_lifespan)
    app.state.store = store
    app.state.executor = executor

    @app.exception_handler(ServiceError)
    async def _service_error(_req: Request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "details": exc.details},
        )

    @app.post("/corpora", status_code=201)
    def upload_corpus(body: CorpusUpload):
        cached = store.replay(body.request_id)
        if cached:
            return JSONResponse(status_code=cached["status"], content=cached["payload"])
        if body.profile not in corpus_mod.PROFILES:
            raise ServiceError(400, "invalid-profile", f"unknown profile {body.profile!r}")
        suffix = ".csv" if body.profile == "scopus-csv" else ".jsonl"
        with tempfile.NamedTemporaryFile("w", suffix=suffix, delete=False, encoding="utf-8") as tmp:
            tmp.write(body.content)
            tmp_path = Path(tmp.name)
        try:
            docs = corpus_mod.ingest(tmp_path, body.profile)
        except CorpusError as exc:
            code = "zero-valid-records" if "zero valid" in str(exc) else "bad-request"
            raise ServiceError(400, code, str(exc)) from exc
        finally:
            tmp_path.unlink()
        corpus_id = store.save_corpus(docs)
        payload = {"id": corpus_id, "documents": len(docs), "rejected": docs.rejected}
        store.record(body.request_id, 201, payload)
        return payload

    @app.get("/corpora/{corpus_id}/stats")
    def corpus_stats(corpus_id: str):
        meta = store.corpus_meta(corpus_id)
        docs = store.load_corpus(corpus_id)
        return {
            "id": corpus_id,
            "documents": len(docs),
            "rejected": meta.get("rejected", 0),
            "years": {str(y): c for y, c in corpus_mod.count_by_year(docs).items()},
            "provenance": meta.get("provenance", ""),
        }

    @app.get("/corpora/{corpus_id}/keywords")
    def corpus_keywords(corpus_id: str, k: int = 30):
        terms = store.tfidf_terms(corpus_id, k)
        return {
            "id": corpus_id,
            "terms": [
                {"term": t.term, "score": t.score, "doc_freq": t.doc_freq} for t in terms
            ],
        }

    @app.post("/corpora/{corpus_id}/filter", status_code=201)
    def filter_corpus(corpus_id: str, body: FilterRequest):
        cached = store.replay(body.request_id)
        if cached:
            return JSONResponse(status_code=cached["status"], content=cached["payload"])
        docs = store.load_corpus(corpus_id)
        try:
            query = KeywordQuery.from_json(body.query)
        except (KeyError, ValueError) as exc:
            raise ServiceError(400, "bad-request", f"bad query: {exc}") from exc
        filtered = corpus_mod.filter_query(docs, query)
        new_id = store.save_corpus(filtered)
        payload = {"id": new_id, "documents": len(filtered), "source": corpus_id}
        store.record(body.request_id, 201, payload)
        return payload

    @app.get("/lexicons/{lexicon_id}")
    def get_lexicon(lexicon_id: str, version: int | None = None):
        lex = store.load_lexicon(lexicon_id, version)
        return {"id": lexicon_id, **lex.canonical().to_json()}

    @app.put("/lexicons/{lexicon_id}")
    def put_lexicon(lexicon_id: str, body: LexiconPut):
        cached = store.replay(body.request_id)
        if cached:
            return JSONResponse(status_code=cached["status"], content=cached["payload"])
        with store.lexicon_lock(lexicon_id):
            versions = store.lexicon_versions(lexicon_id)
            current = versions[-1] if versions else 0
            if body.base_version != current:
                raise ServiceError(
                    409,
                    "version-conflict",
                    f"base_version {body.base_version} is stale; current is {current}",
                    {"current_version": current},
                )
            try:
                lex = Lexicon.from_json(
                    {"version": current + 1, "notes": body.notes, "clusters": body.clusters}
                )
            except LexiconError as exc:
                raise ServiceError(422, "lexicon-invalid", str(exc)) from exc
            store.save_lexicon(lexicon_id, lex)
        payload = {"id": lexicon_id, "version": lex.version}
        store.record(body.request_id, 200, payload)
        return payload

    @app.get("/suggest")
    def suggest(term: str, provider: str = "external", k: int = 10, corpus: str | None = None, lexicon: str | None = None):
        exclude = None
        if lexicon is not None:
            exclude = store.load_lexicon(lexicon)
        net = None
        if provider == "cooccurrence-pmi":
            if corpus is None:
                raise ServiceError(400, "bad-request", "the cooccurrence-pmi provider needs ?corpus=")
            net = store.cooccurrence_network(corpus)
        try:
            suggestions = suggest_terms(term, net, provider=provider, k=k, exclude=exclude)
        except ValueError as exc:
            raise ServiceError(400, "bad-request", str(exc)) from exc
        return {
            "term": term,
            "provider": provider,
            "suggestions": [
                {"term": s.term, "relation": s.relation, "score": s.score, "provider": s.provider}
                for s in suggestions
            ],
        }

    @app.post("/runs", status_code=202)
    def post_run(body: RunRequest):
        cached = store.replay(body.request_id)
        if cached:
            return JSONResponse(status_code=cached["status"], content=cached["payload"])
        store.load_corpus(body.corpus)  # 404 early
        store.load_lexicon(body.lexicon, body.lexicon_version)  # 409 on bad version
        config = body.model_dump(exclude={"request_id"})
        run_id = hashlib.sha256(json.dumps(config, sort_keys=True).encode()).hexdigest()[:16]
        run_dir = store.run_dir(run_id)
        fresh = not run_dir.exists()
        if fresh:
            run_dir.mkdir(parents=True)
            (run_dir / "config.json").write_text(json.dumps(config, indent=2, sort_keys=True), "utf-8")
            store.set_run_status(run_id, {"id": run_id, "status": "pending"})
            executor.submit(_execute_run, store, run_id)
        payload = {"id": run_id, "status": store.run_status(run_id)["status"]}
        store.record(body.request_id, 202, payload)
        return payload

    @app.get("/runs/{run_id}")
    def get_run(run_id: str):
        return store.run_status(run_id)

    @app.get("/runs/{run_id}/results/{artifact}")
    def get_artifact(run_id: str, artifact: str):
        status = store.run_status(run_id)
        path = store.run_dir(run_id) / "artifacts" / artifact
        if status["status"] != "done" or artifact not in ARTIFACTS or not path.exists():
            raise ServiceError(
                404,
                "artifact-missing",
                f"artifact {artifact!r} not available for run {run_id!r}",
                {"status": status["status"]},
            )
        media = "application/json" if artifact.endswith(".json") else "text/csv"
        return Response(content=path.read_bytes(), media_type=media)

    @app.get("/runs/{run_id}/bundle")
    def get_bundle(run_id: str):
        status = store.run_status(run_id)
        if status["status"] != "done":
            raise ServiceError(404, "artifact-missing", f"run {run_id!r} is {status['status']}")
        buf = io.BytesIO()
        with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as zf:
            for name in ARTIFACTS:
                path = store.run_dir(run_id) / "artifacts" / name
                info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
                info.compress_type = zipfile.ZIP_DEFLATED
                zf.writestr(info, path.read_bytes())
        return Response(content=buf.getvalue(), media_type="application/zip")

    return app


def serve(data_dir: str | Path, host: str = "127.0.0.1", port: int = 8765, workers: int = 2) -> None:
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(data_dir, workers=workers), host=host, port=port, log_level="info")
