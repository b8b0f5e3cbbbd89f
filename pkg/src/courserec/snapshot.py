"""Immutable model snapshot backing the CLI and the HTTP service.

A snapshot is loaded from an artifacts directory and never mutated;
retraining produces a new directory and a new snapshot object that callers
swap in atomically.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from . import data, evaluation, lstm, modelio, query
from .data import EnrollmentTable, StudentHistory
from .embedding import EmbeddingSpace, SkipGramModel


class SnapshotError(Exception):
    pass


@dataclass
class ModelSnapshot:
    version: str
    table: EnrollmentTable
    course_keys: list[tuple[str, str]]
    catalog: dict[int, query.CatalogEntry]
    histories: dict[str, StudentHistory]
    offered: set[int]
    space: EmbeddingSpace | None = None
    skipgram: SkipGramModel | None = None
    lstm_model: lstm.LstmModel | None = None
    equivalency_pairs: set[frozenset[int]] = field(default_factory=set)
    requirement_lists: dict[str, set[int]] = field(default_factory=dict)
    registrar_list: set[int] = field(default_factory=set)
    college_of_major: dict[str, str] = field(default_factory=dict)

    @property
    def vocab(self) -> dict[tuple[str, str], int]:
        return self.table.vocab

    def course_label(self, idx: int) -> str:
        s, n = self.course_keys[idx]
        return f"{s} {n}"

    def query_context(self, taken: set[int] | None = None) -> query.QueryContext:
        counts: dict[int, int] = {}
        last = max((r.semester for r in self.table.records), default=None)
        if last is not None:
            for r in self.table.records:
                if r.semester == last:
                    idx = self.vocab[r.course_key]
                    counts[idx] = counts.get(idx, 0) + 1
        return query.QueryContext(
            catalog=self.catalog,
            taken=taken or set(),
            equivalency_pairs=self.equivalency_pairs,
            requirement_lists=self.requirement_lists,
            registrar_list=self.registrar_list,
            offered=self.offered,
            enrollment_counts=counts,
        )


def _dir_version(directory: Path, names: list[str]) -> str:
    h = hashlib.sha256()
    for name in sorted(names):
        p = directory / name
        if p.exists():
            h.update(name.encode())
            h.update(p.read_bytes())
    return h.hexdigest()[:16]


def load_snapshot(directory) -> ModelSnapshot:
    """Load whatever artifacts exist in the directory.

    Requires `enrollments.csv`; catalog, equivalency list, registrar list,
    requirement lists, and trained models are optional.
    """
    directory = Path(directory)
    enroll = directory / "enrollments.csv"
    if not enroll.exists():
        raise SnapshotError(f"no enrollments.csv under {directory}")
    table = data.parse_enrollments(enroll)
    course_keys = table.vocab_list
    vocab = table.vocab

    catalog: dict[int, query.CatalogEntry] = {}
    cat_path = directory / "catalog.csv"
    if cat_path.exists():
        for entry in query.load_catalog(cat_path):
            key = (entry.subject, entry.course_number)
            if key in vocab:
                catalog[vocab[key]] = entry
    for i, (s, n) in enumerate(course_keys):
        catalog.setdefault(i, query.CatalogEntry(s, n, f"{s} {n}", "", s, "", "", 0))

    histories = {h.student_id: h for h in data.student_histories(table)}
    last = table.semesters()[-1]
    offered = evaluation.offered_courses(table, last)

    space = skipgram = lstm_model = None
    sg_path = directory / "skipgram.zip"
    if sg_path.exists():
        skipgram, sg_courses = modelio.load_skipgram(sg_path)
        if sg_courses != course_keys:
            raise SnapshotError("skipgram vocabulary does not match the enrollment table")
        space = EmbeddingSpace(skipgram.W, course_keys, [s for s, _ in course_keys])
    lstm_path = directory / "lstm.zip"
    if lstm_path.exists():
        lstm_model, lstm_courses = modelio.load_lstm(lstm_path)
        if lstm_courses != course_keys:
            raise SnapshotError("lstm vocabulary does not match the enrollment table")

    equiv = set()
    eq_path = directory / "equivalency.csv"
    if eq_path.exists():
        equiv = query.load_equivalencies(eq_path, vocab)
    registrar = set()
    reg_path = directory / "registrar_list.csv"
    if reg_path.exists():
        registrar = query.load_course_list(reg_path, vocab)
    reqs: dict[str, set[int]] = {}
    req_dir = directory / "requirements"
    if req_dir.is_dir():
        for p in sorted(req_dir.glob("*.csv")):
            reqs[p.stem] = query.load_course_list(p, vocab)

    college_of_major: dict[str, str] = {}
    gt_path = directory / "ground_truth.json"
    if gt_path.exists():
        from .synth import GroundTruth
        college_of_major = GroundTruth.from_json(gt_path.read_text()).college_of_major

    names = ["enrollments.csv", "catalog.csv", "equivalency.csv",
             "registrar_list.csv", "skipgram.zip", "lstm.zip"]
    return ModelSnapshot(
        version=_dir_version(directory, names),
        table=table, course_keys=course_keys, catalog=catalog,
        histories=histories, offered=offered, space=space, skipgram=skipgram,
        lstm_model=lstm_model, equivalency_pairs=equiv,
        requirement_lists=reqs, registrar_list=registrar,
        college_of_major=college_of_major,
    )
