"""Journaled HTTP review service around the active-learning engine.

A session lives in its own directory: a corpus snapshot, a meta file, and
an append-only label journal.  Every selection is a pure function of the
session seed and the labels coded so far, so replaying the journal after a
crash reproduces status, curve, and the next batch exactly.  Batches of
ten studies follow the reviewer workflow: random until the first relevant
code, least-certain until thirty, then most-certain to the finish.
"""

from __future__ import annotations

import io
import json
import secrets
import shutil
import threading
from datetime import datetime, timezone
from itertools import groupby
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse, Response
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from . import active
from . import corpus as cp
from . import features
from .features import FeatureMatrix

BATCH_SIZE = 10

META_FILE = "meta.json"
CORPUS_FILE = "corpus.csv"
JOURNAL_FILE = "journal.jsonl"


class UnknownSessionError(Exception):
    """No session with that id exists on this workspace."""


class UnknownDatasetError(Exception):
    """No such CSV under the workspace data directory."""


class InvalidSubmissionError(Exception):
    """A submitted label refers to an unknown or unserved study."""


def _utc_now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _query_rng(seed: int, labeled_count: int) -> np.random.Generator:
    """Random-phase generator for the batch served at this coded count.

    Keyed separately from the training seed stream so queries and training
    never share draws.
    """
    return np.random.default_rng(np.random.SeedSequence([seed, labeled_count, 1]))


class Session:
    """One review in progress; all public methods are thread-safe."""

    def __init__(
        self,
        directory: Path,
        corpus: cp.Corpus,
        code: active.TreatmentCode = active.FASTREAD,
        config: active.TreatmentConfig = active.DEFAULT_CONFIG,
        seed: int = 0,
    ):
        self.directory = Path(directory)
        self.id = self.directory.name
        self.corpus = corpus
        self.code = code
        self.config = config
        self.seed = seed
        self.lock = threading.RLock()
        self._features: FeatureMatrix | None = None
        self.state = active.ReviewState.create(len(corpus), seed=seed)
        self.curve: list[tuple[int, int]] = []
        self._batch_no = 0
        self._served: tuple[str, list[int]] | None = None

    @property
    def journal_path(self) -> Path:
        return self.directory / JOURNAL_FILE

    @property
    def feature_matrix(self) -> FeatureMatrix | None:
        if self.code.linear:
            return None
        if self._features is None:
            self._features = features.featurize(self.corpus)
        return self._features

    # -- selection ---------------------------------------------------------

    def _train_seed(self) -> int:
        return active.derive_train_seed(self.seed, self.state.labeled_count)

    def _select(self, k: int) -> tuple[str, list[int]]:
        active.train_if_due(
            self.code, self.state, self.feature_matrix, self._train_seed(), self.config
        )
        phase = active.current_phase(self.code, self.state, self.config)
        self.state.rng = _query_rng(self.seed, self.state.labeled_count)
        ids = active.query_next(
            self.code, self.state, self.feature_matrix, batch=k, config=self.config
        )
        return phase, [int(i) for i in ids]

    def phase(self) -> str:
        """Strategy the next batch will use, without training yet."""
        with self.lock:
            state = self.state
            can_train = (
                not self.code.linear
                and state.relevant_count >= active.enough(self.code, self.config)
                and state.relevant_count >= 1
                and state.irrelevant_count >= 1
            )
            if state.model is None and not can_train:
                return active.PHASE_RANDOM
            if self.code.query == "U" and active.not_stable(state, self.config):
                return active.PHASE_UNCERTAINTY
            return active.PHASE_CERTAINTY

    def next_batch(self, k: int = BATCH_SIZE) -> tuple[str, list[int]]:
        """Serve (phase, study ids); stable until the next submit."""
        with self.lock:
            if self.state.labeled_count == self.n_total:
                return self.phase(), []
            if self._served is None:
                self._served = self._select(k)
            return self._served

    # -- coding ------------------------------------------------------------

    @property
    def n_total(self) -> int:
        return len(self.corpus)

    def submit(self, labels: dict[int, str]) -> None:
        """Apply and journal a batch of codes.

        Uncoded ids must belong to the currently served batch; already
        coded ids may be re-coded from anywhere.  Validation happens before
        any state or journal change, so a rejected submit leaves nothing
        behind.
        """
        with self.lock:
            clean: list[tuple[int, str]] = []
            for sid, code in labels.items():
                sid = int(sid)
                if not 0 <= sid < self.n_total:
                    raise InvalidSubmissionError(f"study {sid} does not exist")
                if code not in ("yes", "no"):
                    raise InvalidSubmissionError(
                        f"label for study {sid} must be 'yes' or 'no', got {code!r}"
                    )
                clean.append((sid, code))
            new_ids = [sid for sid, _ in clean if not self.state.is_labeled(sid)]
            if new_ids:
                served = set(self.next_batch()[1])
                for sid in new_ids:
                    if sid not in served:
                        raise InvalidSubmissionError(
                            f"study {sid} is not in the current batch"
                        )
            if not clean:
                return
            self._batch_no += 1
            stamp = _utc_now()
            with self.journal_path.open("a", encoding="utf-8") as handle:
                for sid, code in clean:
                    handle.write(
                        json.dumps(
                            {
                                "study": sid,
                                "code": code,
                                "batch": self._batch_no,
                                "ts": stamp,
                            },
                            separators=(",", ":"),
                        )
                        + "\n"
                    )
            self._apply(clean)
            self.curve.append((self.state.labeled_count, self.state.relevant_count))
            self._served = None

    def _apply(self, labels: list[tuple[int, str]]) -> None:
        for sid, code in labels:
            if self.state.is_labeled(sid):
                active.recode(self.state, sid, code)
            else:
                active.record_label(self.state, sid, code)

    def restart(self) -> None:
        """Discard all codes: truncate the journal, reset the state."""
        with self.lock:
            self.journal_path.write_text("", encoding="utf-8")
            self.state = active.ReviewState.create(self.n_total, seed=self.seed)
            self.curve = []
            self._batch_no = 0
            self._served = None

    # -- reporting ---------------------------------------------------------

    def status(self) -> dict:
        with self.lock:
            found = self.state.relevant_count
            coded = self.state.labeled_count
            total = self.n_total
            return {
                "status": f"Documents Coded: {found} / {coded} ({total})",
                "found": found,
                "coded": coded,
                "total": total,
                "phase": self.phase(),
                "treatment": str(self.code),
                "name": self.corpus.name,
            }

    def curve_points(self) -> list[tuple[int, int]]:
        with self.lock:
            return list(self.curve)

    def coded_corpus(self) -> cp.Corpus:
        with self.lock:
            codes = {
                sid: ("yes" if rel else "no") for sid, rel in self.state.labels.items()
            }
        return self.corpus.with_codes(codes)

    def export_text(self) -> str:
        buffer = io.StringIO()
        cp.write_csv(self.coded_corpus(), buffer)
        return buffer.getvalue()

    # -- persistence -------------------------------------------------------

    def replay_journal(self) -> None:
        """Rebuild state and curve from the journal, batch by batch.

        Training runs at the same coded counts with the same derived seeds
        as the original serving, so frozen models and later selections come
        out identical.
        """
        with self.lock:
            if not self.journal_path.exists():
                return
            events = []
            with self.journal_path.open(encoding="utf-8") as handle:
                for line in handle:
                    if line.strip():
                        events.append(json.loads(line))
            for batch_no, group in groupby(events, key=lambda e: e["batch"]):
                active.train_if_due(
                    self.code,
                    self.state,
                    self.feature_matrix,
                    self._train_seed(),
                    self.config,
                )
                self._apply([(int(e["study"]), e["code"]) for e in group])
                self.curve.append(
                    (self.state.labeled_count, self.state.relevant_count)
                )
                self._batch_no = batch_no


class SessionStore:
    """Registry of sessions persisted under <workspace>/sessions/<id>/."""

    def __init__(self, workspace: str | Path):
        self.root = Path(workspace)
        self.sessions_dir = self.root / "sessions"
        self.data_dir = self.root / "data"
        self.coded_dir = self.root / "coded"
        for directory in (self.sessions_dir, self.data_dir, self.coded_dir):
            directory.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def _register(
        self,
        corpus: cp.Corpus,
        treatment: active.TreatmentCode,
        seed: int | None,
        session_id: str | None,
    ) -> Session:
        session_id = session_id or secrets.token_hex(6)
        seed = secrets.randbits(32) if seed is None else int(seed)
        directory = self.sessions_dir / session_id
        if directory.exists():
            raise ValueError(f"session id {session_id!r} already exists")
        directory.mkdir(parents=True)
        try:
            cp.export_csv(corpus, directory / CORPUS_FILE)
            (directory / META_FILE).write_text(
                json.dumps(
                    {
                        "name": corpus.name,
                        "treatment": str(treatment),
                        "seed": seed,
                        "created": _utc_now(),
                    },
                    indent=2,
                )
                + "\n",
                encoding="utf-8",
            )
            (directory / JOURNAL_FILE).touch()
        except Exception:
            shutil.rmtree(directory, ignore_errors=True)
            raise
        session = Session(directory, corpus, code=treatment, seed=seed)
        with self._lock:
            self._sessions[session_id] = session
        return session

    def create_from_text(
        self,
        csv_text: str,
        name: str = "upload",
        treatment: active.TreatmentCode = active.FASTREAD,
        seed: int | None = None,
        session_id: str | None = None,
    ) -> Session:
        scratch = self.sessions_dir / f".upload-{secrets.token_hex(4)}.csv"
        scratch.write_text(csv_text, encoding="utf-8")
        try:
            corpus = cp.load_csv(scratch, name=name)
        finally:
            scratch.unlink(missing_ok=True)
        return self._register(corpus, treatment, seed, session_id)

    def create_from_dataset(
        self,
        dataset: str,
        treatment: active.TreatmentCode = active.FASTREAD,
        seed: int | None = None,
        session_id: str | None = None,
    ) -> Session:
        path = self.data_dir / f"{dataset}.csv"
        if not path.exists():
            raise UnknownDatasetError(
                f"no dataset {dataset!r} under {self.data_dir}"
            )
        corpus = cp.load_csv(path, name=dataset)
        return self._register(corpus, treatment, seed, session_id)

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is not None:
            return session
        return self._recover(session_id)

    def _recover(self, session_id: str) -> Session:
        directory = self.sessions_dir / session_id
        meta_path = directory / META_FILE
        if not meta_path.exists():
            raise UnknownSessionError(f"no session {session_id!r}")
        meta = json.loads(meta_path.read_text(encoding="utf-8"))
        corpus = cp.load_csv(directory / CORPUS_FILE, name=meta["name"])
        session = Session(
            directory,
            corpus,
            code=active.TreatmentCode.parse(meta["treatment"]),
            seed=int(meta["seed"]),
        )
        session.replay_journal()
        with self._lock:
            return self._sessions.setdefault(session_id, session)

    def export_to_coded(self, session: Session) -> Path:
        """Drop the session's coded CSV into <workspace>/coded/."""
        path = self.coded_dir / f"{session.corpus.name}_{session.id}.csv"
        path.write_text(session.export_text(), encoding="utf-8")
        return path


class CreateSessionBody(BaseModel):
    csv: str | None = None
    dataset: str | None = None
    name: str = "upload"
    treatment: str = str(active.FASTREAD)
    seed: int | None = None


class SubmitBody(BaseModel):
    labels: dict[str, str] = {}


def create_app(workspace: str | Path, static_dir: str | Path | None = None) -> FastAPI:
    """FastAPI application over a SessionStore."""
    store = SessionStore(workspace)
    app = FastAPI(title="review service")
    app.state.store = store

    def error_handler(status_code: int, error: str):
        def handler(request: Request, exc: Exception) -> JSONResponse:
            return JSONResponse(
                status_code=status_code,
                content={"error": error, "detail": str(exc)},
            )

        return handler

    app.add_exception_handler(UnknownSessionError, error_handler(404, "unknown session"))
    app.add_exception_handler(UnknownDatasetError, error_handler(404, "unknown dataset"))
    app.add_exception_handler(
        InvalidSubmissionError, error_handler(400, "invalid submission")
    )
    app.add_exception_handler(cp.CorpusError, error_handler(400, "invalid corpus"))

    def batch_payload(session: Session) -> dict:
        phase, ids = session.next_batch()
        studies = []
        for sid in ids:
            study = session.corpus[sid]
            studies.append(
                {
                    "id": study.id,
                    "title": study.title,
                    "abstract": study.abstract,
                    "year": study.year_text,
                    "pdf_link": study.pdf_link,
                }
            )
        return {"phase": phase, "studies": studies, "exhausted": not studies}

    @app.post("/sessions", status_code=201)
    def create_session(body: CreateSessionBody) -> dict:
        if (body.csv is None) == (body.dataset is None):
            raise InvalidSubmissionError("provide exactly one of 'csv' or 'dataset'")
        try:
            treatment = active.TreatmentCode.parse(body.treatment)
        except ValueError as exc:
            raise InvalidSubmissionError(str(exc)) from exc
        if body.csv is not None:
            session = store.create_from_text(
                body.csv, name=body.name, treatment=treatment, seed=body.seed
            )
        else:
            session = store.create_from_dataset(
                body.dataset, treatment=treatment, seed=body.seed
            )
        return {"session": session.id, "seed": session.seed, **session.status()}

    @app.get("/sessions/{sid}/batch")
    def get_batch(sid: str) -> dict:
        return batch_payload(store.get(sid))

    @app.post("/sessions/{sid}/labels")
    def post_labels(sid: str, body: SubmitBody) -> dict:
        session = store.get(sid)
        try:
            labels = {int(key): value for key, value in body.labels.items()}
        except ValueError as exc:
            raise InvalidSubmissionError(f"study ids must be integers: {exc}") from exc
        session.submit(labels)
        return session.status()

    @app.get("/sessions/{sid}/status")
    def get_status(sid: str) -> dict:
        return store.get(sid).status()

    @app.get("/sessions/{sid}/curve")
    def get_curve(sid: str) -> dict:
        return {"points": [list(point) for point in store.get(sid).curve_points()]}

    @app.get("/sessions/{sid}/export")
    def get_export(sid: str) -> Response:
        session = store.get(sid)
        store.export_to_coded(session)
        return Response(
            content=session.export_text(),
            media_type="text/csv",
            headers={
                "Content-Disposition": (
                    f'attachment; filename="{session.corpus.name}_coded.csv"'
                )
            },
        )

    @app.post("/sessions/{sid}/restart")
    def post_restart(sid: str) -> dict:
        session = store.get(sid)
        session.restart()
        return session.status()

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True), name="static")

    return app
