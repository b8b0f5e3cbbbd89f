"""Interactive course ranking: filters, subject preference scoring, and
blending with the collaborative (LSTM) distribution."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .embedding import EmbeddingSpace


class QueryError(Exception):
    pass


@dataclass
class CatalogEntry:
    subject: str
    course_number: str
    title: str
    description: str
    department: str
    division: str
    college: str
    capacity: int


CATALOG_HEADER = ["subject", "course_number", "title", "description",
                  "department", "division", "college", "capacity"]


def load_catalog(path) -> list[CatalogEntry]:
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames != CATALOG_HEADER:
            raise QueryError(f"bad catalog header: {reader.fieldnames}")
        return [CatalogEntry(
            subject=row["subject"], course_number=row["course_number"],
            title=row["title"], description=row["description"],
            department=row["department"], division=row["division"],
            college=row["college"], capacity=int(row["capacity"]),
        ) for row in reader]


@dataclass
class FilterSpec:
    offered: bool = False
    not_taken: bool = False
    no_credit_restriction: bool = False
    department: str | None = None
    requirement_list: str | None = None
    open_seats: bool = False
    registrar_list: bool = False


@dataclass
class QuerySpec:
    interest: str | None = None
    disinterest: str | None = None
    use_collaborative: bool = False
    collaborative_weight: float = 1.0
    filters: FilterSpec = field(default_factory=FilterSpec)

    @property
    def has_sort(self) -> bool:
        return bool(self.interest or self.disinterest or self.use_collaborative)


@dataclass
class QueryContext:
    """Everything filters need: catalog metadata per course index, the
    student's taken set, registrar lists, and live-ish enrollment counts."""

    catalog: dict[int, CatalogEntry]
    taken: set[int] = field(default_factory=set)
    equivalency_pairs: set[frozenset[int]] = field(default_factory=set)
    requirement_lists: dict[str, set[int]] = field(default_factory=dict)
    registrar_list: set[int] = field(default_factory=set)
    offered: set[int] = field(default_factory=set)
    enrollment_counts: dict[int, int] = field(default_factory=dict)


@dataclass
class ScoredCourse:
    course: int
    score: float
    interest_term: float  # the (negated) normalized distance to the interest centroid
    disinterest_term: float
    collaborative_term: float


def _restricted(course: int, ctx: QueryContext) -> bool:
    """Credit-restricted: equivalency-paired (symmetric, non-transitive)
    with any already-taken course."""
    return any(frozenset((course, taken)) in ctx.equivalency_pairs
               for taken in ctx.taken)


def apply_filters(candidates: list[int], spec: FilterSpec, ctx: QueryContext) -> list[int]:
    """Conjunctive filtering; output order follows the candidate order."""
    out = list(candidates)
    if spec.offered:
        out = [c for c in out if c in ctx.offered]
    if spec.not_taken:
        out = [c for c in out if c not in ctx.taken]
    if spec.no_credit_restriction:
        out = [c for c in out if not _restricted(c, ctx)]
    if spec.department is not None:
        valid = sorted({e.department for e in ctx.catalog.values()})
        if spec.department not in valid:
            raise QueryError(f"unknown department {spec.department!r}; valid: {valid}")
        out = [c for c in out if ctx.catalog[c].department == spec.department]
    if spec.requirement_list is not None:
        if spec.requirement_list not in ctx.requirement_lists:
            raise QueryError(f"unknown requirement list {spec.requirement_list!r}; "
                             f"valid: {sorted(ctx.requirement_lists)}")
        wanted = ctx.requirement_lists[spec.requirement_list]
        out = [c for c in out if c in wanted]
    if spec.registrar_list:
        out = [c for c in out if c in ctx.registrar_list]
    if spec.open_seats:
        out = [c for c in out
               if ctx.catalog[c].capacity > ctx.enrollment_counts.get(c, 0)]
    return out


def _minmax(values: np.ndarray) -> np.ndarray:
    if values.size == 0:
        return np.zeros_like(values)
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def preference_scores(space: EmbeddingSpace, candidates: list[int],
                      centroid_a: np.ndarray | None,
                      centroid_b: np.ndarray | None) -> np.ndarray:
    """s_i = -d'(v_i, v_a) + d'(v_i, v_b) over the candidate set.

    d' is the Euclidean distance min-max normalized across the candidates
    (per term); a missing centroid contributes 0.
    """
    if not candidates:
        raise QueryError("empty candidate set")
    vecs = space.vectors[candidates]
    scores = np.zeros(len(candidates))
    if centroid_a is not None:
        scores -= _minmax(np.linalg.norm(vecs - centroid_a, axis=1))
    if centroid_b is not None:
        scores += _minmax(np.linalg.norm(vecs - centroid_b, axis=1))
    return scores


def preference_score(space: EmbeddingSpace, course: int,
                     centroid_a: np.ndarray | None, centroid_b: np.ndarray | None,
                     candidates: list[int]) -> float:
    if course not in candidates:
        raise QueryError("course must be one of the candidates")
    scores = preference_scores(space, candidates, centroid_a, centroid_b)
    return float(scores[candidates.index(course)])


def alphabetical_order(candidates: list[int], ctx: QueryContext) -> list[int]:
    def key(c):
        e = ctx.catalog[c]
        num = int(e.course_number) if e.course_number.isdigit() else e.course_number
        return (e.department, e.subject, (0, num) if isinstance(num, int) else (1, num), c)
    return sorted(candidates, key=key)


def rank_courses(filtered: list[int], spec: QuerySpec, ctx: QueryContext,
                 space: EmbeddingSpace | None = None,
                 rnn_distribution: np.ndarray | None = None) -> list[ScoredCourse]:
    """Score and sort the filtered candidates.

    Total score = preference score + w_r * minmax(RNN probability over the
    filtered set). With no sort criteria at all the list is alphabetical by
    department then course number. Ties break by course index.
    """
    if not filtered:
        return []
    if not spec.has_sort:
        return [ScoredCourse(c, 0.0, 0.0, 0.0, 0.0)
                for c in alphabetical_order(filtered, ctx)]

    interest_term = np.zeros(len(filtered))
    disinterest_term = np.zeros(len(filtered))
    if spec.interest or spec.disinterest:
        if space is None:
            raise QueryError("subject preference requires an embedding space")
        ca = space.subject_centroid(spec.interest) if spec.interest else None
        cb = space.subject_centroid(spec.disinterest) if spec.disinterest else None
        vecs = space.vectors[filtered]
        if ca is not None:
            interest_term = -_minmax(np.linalg.norm(vecs - ca, axis=1))
        if cb is not None:
            disinterest_term = _minmax(np.linalg.norm(vecs - cb, axis=1))

    collab_term = np.zeros(len(filtered))
    if spec.use_collaborative:
        if rnn_distribution is None:
            raise QueryError("collaborative ranking requires an RNN distribution")
        collab_term = spec.collaborative_weight * _minmax(rnn_distribution[filtered])

    totals = interest_term + disinterest_term + collab_term
    order = sorted(range(len(filtered)), key=lambda j: (-totals[j], filtered[j]))
    return [ScoredCourse(filtered[j], float(totals[j]), float(interest_term[j]),
                         float(disinterest_term[j]), float(collab_term[j]))
            for j in order]


def load_course_list(path, vocab: dict[tuple[str, str], int]) -> set[int]:
    """One `subject,course_number` per row; unknown courses are skipped."""
    out = set()
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.reader(f):
            if not row or row[0].lower() == "subject":
                continue
            key = (row[0].strip(), row[1].strip())
            if key in vocab:
                out.add(vocab[key])
    return out


def load_equivalencies(path, vocab: dict[tuple[str, str], int]) -> set[frozenset[int]]:
    """Unordered `subject_a,number_a,subject_b,number_b` rows."""
    pairs = set()
    with open(path, newline="", encoding="utf-8") as f:
        for row in csv.reader(f):
            if not row or row[0].lower() == "subject_a":
                continue
            a = (row[0].strip(), row[1].strip())
            b = (row[2].strip(), row[3].strip())
            if a in vocab and b in vocab and a != b:
                pairs.add(frozenset((vocab[a], vocab[b])))
    return pairs
