"""Masked next-semester evaluation: Recall@k and MRR@k with breakdowns.

Any predictor exposing `predict(context, offered) -> distribution` can be
evaluated; wrappers for the LSTM and the baselines live at the bottom.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from dataclasses import dataclass

import numpy as np

from . import baselines, lstm
from .data import EnrollmentTable, EntryType, Semester, StudentHistory, student_histories


class EvalError(Exception):
    pass


def recall_at_k(predicted_topk: list[int], actual: set[int], k: int) -> float:
    """|actual ∩ top-k| / |actual|."""
    if not actual:
        raise EvalError("actual course set is empty")
    if len(predicted_topk) > k:
        raise EvalError("more than k predictions supplied")
    return len(actual & set(predicted_topk)) / len(actual)


def mrr_at_k(predicted_ranked: list[int], actual: set[int], k: int) -> float:
    """1/rank of the first hit within the top k; 0 if no hit that high."""
    if not actual:
        raise EvalError("actual course set is empty")
    for rank, course in enumerate(predicted_ranked[:k], start=1):
        if course in actual:
            return 1.0 / rank
    return 0.0


@dataclass
class StudentContext:
    student_id: str
    entry_type: EntryType
    history: StudentHistory  # may have zero slices (new student)
    major: str  # declared major at the target semester

    @property
    def prior_semesters(self) -> int:
        return len(self.history.slices)


@dataclass
class StudentResult:
    student_id: str
    recall: float
    rr: float
    prior_semesters: int
    major: str
    college: str


@dataclass
class EvalReport:
    per_student: list[StudentResult]
    k: int
    excluded_no_vocab: int  # target students with zero in-vocabulary actuals

    @property
    def mean_recall(self) -> float:
        return float(np.mean([r.recall for r in self.per_student]))

    @property
    def mrr(self) -> float:
        return float(np.mean([r.rr for r in self.per_student]))

    def breakdown(self, dimension: str) -> dict[str, tuple[int, float, float]]:
        """Group -> (count, mean recall, mean reciprocal rank)."""
        keyfns = {
            "prior_semesters": lambda r: str(r.prior_semesters),
            "college": lambda r: r.college or "unknown",
            "major": lambda r: r.major or "unknown",
        }
        if dimension not in keyfns:
            raise EvalError(f"unknown breakdown dimension {dimension!r}")
        groups: dict[str, list[StudentResult]] = defaultdict(list)
        for r in self.per_student:
            groups[keyfns[dimension](r)].append(r)
        return {g: (len(rs),
                    float(np.mean([r.recall for r in rs])),
                    float(np.mean([r.rr for r in rs])))
                for g, rs in sorted(groups.items())}

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["student_id", "recall", "rr", "prior_semesters", "major", "college"])
            for r in self.per_student:
                w.writerow([r.student_id, f"{r.recall:.6f}", f"{r.rr:.6f}",
                            r.prior_semesters, r.major, r.college])

    def aggregate_dict(self) -> dict:
        return {
            "k": self.k,
            "students": len(self.per_student),
            "mean_recall": self.mean_recall,
            "mrr": self.mrr,
            "excluded_no_vocab": self.excluded_no_vocab,
        }


def offered_courses(table: EnrollmentTable, semester: Semester) -> set[int]:
    """Courses with at least one enrollment in the semester (the observed
    stand-in for a schedule file)."""
    vocab = table.vocab
    return {vocab[r.course_key] for r in table.records if r.semester == semester}


def evaluate(predictor, table: EnrollmentTable, target: Semester, k: int = 10,
             offered: set[int] | None = None,
             college_of_major: dict[str, str] | None = None) -> EvalReport:
    """Predict the target semester for every student enrolled in it.

    Histories are built from records strictly before the target. New
    students (no prior records) are included with an empty history.
    Students whose target enrollments are all out of vocabulary are
    excluded and counted.
    """
    vocab = table.vocab
    target_recs = [r for r in table.records if r.semester == target]
    if not target_recs:
        raise EvalError(f"no records in target semester {target}")
    if offered is None:
        offered = offered_courses(table, target)

    actuals: dict[str, set[int]] = defaultdict(set)
    meta: dict[str, tuple[str, EntryType]] = {}
    for r in target_recs:
        actuals[r.student_id].add(vocab[r.course_key])
        meta[r.student_id] = (r.major, r.entry_type)

    prior_table = EnrollmentTable([r for r in table.records if r.semester < target])
    prior_table._vocab = vocab  # share indices with the full table
    histories = {h.student_id: h for h in student_histories(prior_table)}

    results = []
    excluded = 0
    for sid in sorted(actuals):
        actual = actuals[sid]
        if not actual:
            excluded += 1
            continue
        major, entry = meta[sid]
        hist = histories.get(sid, StudentHistory(sid, entry, []))
        ctx = StudentContext(sid, entry, hist, major)
        dist = predictor.predict(ctx, offered)
        topk = lstm.top_k(dist, k)
        results.append(StudentResult(
            student_id=sid,
            recall=recall_at_k(topk, actual, k),
            rr=mrr_at_k(topk, actual, k),
            prior_semesters=ctx.prior_semesters,
            major=major,
            college=(college_of_major or {}).get(major, "unknown"),
        ))
    return EvalReport(results, k, excluded)


class LstmPredictor:
    def __init__(self, model: lstm.LstmModel):
        self.model = model

    def predict(self, ctx: StudentContext, offered: set[int]) -> np.ndarray:
        return lstm.predict_next(self.model, ctx.history, offered, major_hint=ctx.major)


class NgramPredictor:
    def __init__(self, table: baselines.NgramTable, shuffle_seeds=(0, 1, 2, 3, 4)):
        self.table = table
        self.seeds = tuple(shuffle_seeds)

    def predict(self, ctx: StudentContext, offered: set[int]) -> np.ndarray:
        sems = [sl.courses for sl in ctx.history.slices]
        return baselines.ngram_predict_semesters(self.table, sems, offered, self.seeds)


class PopularityPredictor:
    def __init__(self, model: baselines.PopularityModel):
        self.model = model

    def predict(self, ctx: StudentContext, offered: set[int]) -> np.ndarray:
        return baselines.popularity_predict(self.model, offered, major=ctx.major)
