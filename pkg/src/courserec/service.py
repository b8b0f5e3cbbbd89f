"""JSON-over-HTTP service exposing recommendation, similarity, keywords,
and projection over an immutable model snapshot."""

from __future__ import annotations

from typing import Any

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import lstm, projection, query
from .data import EntryType, Semester, SemesterSlice, StudentHistory
from .snapshot import ModelSnapshot


class FilterBody(BaseModel):
    offered: bool = False
    not_taken: bool = False
    no_credit_restriction: bool = False
    department: str | None = None
    requirement_list: str | None = None
    open_seats: bool = False
    registrar_list: bool = False

    def to_spec(self) -> query.FilterSpec:
        return query.FilterSpec(**self.model_dump())


class RecommendRequest(BaseModel):
    student_id: str | None = None
    # explicit history: one list of "SUBJ NUM" labels per semester
    history: list[list[str]] | None = None
    major: str | None = None
    use_collaborative: bool = False
    interest: str | None = None
    disinterest: str | None = None
    collaborative_weight: float = Field(default=1.0, ge=0.0)
    filters: FilterBody = Field(default_factory=FilterBody)
    k: int = Field(default=10, ge=1)


def _resolve_course(snap: ModelSnapshot, label: str) -> int:
    parts = label.replace("-", " ").split()
    if len(parts) == 2 and (parts[0], parts[1]) in snap.vocab:
        return snap.vocab[(parts[0], parts[1])]
    raise HTTPException(status_code=404, detail=f"unknown course {label!r}")


def _resolve_history(snap: ModelSnapshot, req: RecommendRequest) -> tuple[StudentHistory, str | None]:
    if (req.student_id is None) == (req.history is None):
        raise HTTPException(status_code=400,
                            detail="exactly one of student_id / history required")
    if req.student_id is not None:
        hist = snap.histories.get(req.student_id)
        if hist is None:
            raise HTTPException(status_code=404, detail=f"unknown student {req.student_id!r}")
        return hist, req.major or (hist.slices[-1].major if hist.slices else None)
    slices = []
    for i, sem_courses in enumerate(req.history):
        courses = {_resolve_course(snap, label) for label in sem_courses}
        slices.append(SemesterSlice(Semester(2000 + i, 2), courses, req.major or "", None))
    return StudentHistory("(explicit)", EntryType.NEW_FRESHMAN, slices), req.major


def _course_payload(snap: ModelSnapshot, sc: query.ScoredCourse, rank: int) -> dict[str, Any]:
    e = snap.catalog[sc.course]
    return {
        "rank": rank,
        "subject": e.subject,
        "course_number": e.course_number,
        "title": e.title,
        "description": e.description,
        "score": round(sc.score, 9),
        "components": {
            "interest": round(sc.interest_term, 9),
            "disinterest": round(sc.disinterest_term, 9),
            "collaborative": round(sc.collaborative_term, 9),
        },
    }


def create_app(snap: ModelSnapshot) -> FastAPI:
    app = FastAPI(title="courserec")
    holder = {"snap": snap}  # swapped atomically on retrain

    def current() -> ModelSnapshot:
        return holder["snap"]

    app.state.holder = holder

    @app.get("/v1/health")
    def health():
        return {"status": "ok", "model_version": current().version}

    @app.get("/v1/catalog")
    def catalog():
        snap = current()
        majors = sorted({sl.major for h in snap.histories.values() for sl in h.slices})
        return {
            "model_version": snap.version,
            "majors": majors,
            "subjects": sorted({e.subject for e in snap.catalog.values()}),
            "departments": sorted({e.department for e in snap.catalog.values()}),
            "requirement_lists": sorted(snap.requirement_lists),
            "courses": [
                {"subject": s, "course_number": n, "title": snap.catalog[i].title}
                for i, (s, n) in enumerate(snap.course_keys)
            ],
        }

    def _recommend(req: RecommendRequest) -> dict:
        snap = current()
        hist, major = _resolve_history(snap, req)
        taken = {c for sl in hist.slices for c in sl.courses}
        ctx = snap.query_context(taken)
        spec = query.QuerySpec(
            interest=req.interest, disinterest=req.disinterest,
            use_collaborative=req.use_collaborative,
            collaborative_weight=req.collaborative_weight,
            filters=req.filters.to_spec(),
        )
        try:
            filtered = query.apply_filters(list(range(len(snap.course_keys))),
                                           spec.filters, ctx)
            if (spec.interest or spec.disinterest) and snap.space is None:
                raise query.QueryError("no embedding space loaded")
            rnn_dist = None
            if spec.use_collaborative:
                if snap.lstm_model is None:
                    raise query.QueryError("no collaborative model loaded")
                if filtered:
                    rnn_dist = lstm.predict_next(snap.lstm_model, hist,
                                                 set(filtered), major_hint=major)
            scored = query.rank_courses(filtered, spec, ctx, space=snap.space,
                                        rnn_distribution=rnn_dist)
        except query.QueryError as e:
            raise HTTPException(status_code=400, detail=str(e)) from None
        return {
            "model_version": snap.version,
            "applied_filters": req.filters.model_dump(),
            "results": [_course_payload(snap, sc, i + 1)
                        for i, sc in enumerate(scored[:req.k])],
        }

    @app.post("/v1/recommend")
    def recommend(req: RecommendRequest):
        return _recommend(req)

    @app.post("/v1/query")
    def run_query(req: RecommendRequest):
        # preference/filter queries without a stored student are the common
        # case here, but the body is the same shape as /v1/recommend
        if req.student_id is None and req.history is None:
            req = req.model_copy(update={"history": []})
        return _recommend(req)

    @app.get("/v1/similar/{course_id}")
    def similar(course_id: str, k: int = 10):
        snap = current()
        if snap.space is None:
            raise HTTPException(status_code=400, detail="no embedding space loaded")
        idx = _resolve_course(snap, course_id)
        neighbors = snap.space.nearest_neighbors(idx, k)
        return {
            "model_version": snap.version,
            "course": snap.course_label(idx),
            "neighbors": [
                {"subject": snap.course_keys[i][0],
                 "course_number": snap.course_keys[i][1],
                 "title": snap.catalog[i].title,
                 "similarity": round(sim, 9)}
                for i, sim in neighbors
            ],
        }

    @app.get("/v1/keywords/{student_id}")
    def keywords(student_id: str, k: int = 5):
        snap = current()
        model = snap.lstm_model
        if model is None or not model.has_aux:
            raise HTTPException(status_code=400, detail="no keyword-capable model loaded")
        hist = snap.histories.get(student_id)
        if hist is None:
            raise HTTPException(status_code=404, detail=f"unknown student {student_id!r}")
        words = lstm.top_keywords(model, hist, k)
        labels = ["start"] + [str(sl.semester) for sl in hist.slices]
        return {
            "model_version": snap.version,
            "student_id": student_id,
            "semesters": [{"label": lab, "keywords": kw}
                          for lab, kw in zip(labels, words)],
        }

    @app.get("/v1/projection")
    def project(method: str = "pca", limit: int = 200, seed: int = 0):
        snap = current()
        if snap.lstm_model is None:
            raise HTTPException(status_code=400, detail="no sequence model loaded")
        sids = sorted(snap.histories)[:limit]
        sids = [s for s in sids if snap.histories[s].slices]
        if len(sids) < 3:
            raise HTTPException(status_code=400, detail="not enough students to project")
        states = np.stack([lstm.extract_hidden_state(snap.lstm_model, snap.histories[s])
                           for s in sids])
        try:
            pts = projection.project_2d(states, method=method, seed=seed)
        except projection.ProjectionError as e:
            raise HTTPException(status_code=400, detail=str(e)) from None
        return {
            "model_version": snap.version,
            "method": method,
            "points": [{"student_id": s,
                        "major": snap.histories[s].slices[-1].major,
                        "x": round(float(x), 6), "y": round(float(y), 6)}
                       for s, (x, y) in zip(sids, pts)],
        }

    return app
