"""Enrollment corpus ingestion, filtering, ordering, and serialization."""

from __future__ import annotations

import csv
import io
import zlib
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

TERMS = ("Spring", "Summer", "Fall")
TERM_ORDER = {t: i for i, t in enumerate(TERMS)}

# Letter grades mapped to points; anything else (P/NP, W, blank...) is missing.
DEFAULT_GRADE_POINTS = {
    "A+": 4.0, "A": 4.0, "A-": 3.7,
    "B+": 3.3, "B": 3.0, "B-": 2.7,
    "C+": 2.3, "C": 2.0, "C-": 1.7,
    "D+": 1.0, "D": 1.0, "D-": 1.0,
    "F": 0.0,
}

ENROLLMENT_HEADER = ["semester", "student_id", "major", "entry_type", "subject", "course_number", "grade"]


class DataError(Exception):
    """Malformed input data."""


class EntryType(IntEnum):
    NEW_FRESHMAN = 0
    TRANSFER = 1


_ENTRY_ALIASES = {
    "new freshman": EntryType.NEW_FRESHMAN,
    "newfreshman": EntryType.NEW_FRESHMAN,
    "freshman": EntryType.NEW_FRESHMAN,
    "transfer": EntryType.TRANSFER,
    "transfer student": EntryType.TRANSFER,
}


@dataclass(frozen=True, order=True)
class Semester:
    """An academic term, totally ordered as (year, Spring < Summer < Fall)."""

    year: int
    term_index: int  # index into TERMS

    @property
    def term(self) -> str:
        return TERMS[self.term_index]

    @classmethod
    def parse(cls, text: str) -> "Semester":
        parts = text.strip().split()
        if len(parts) != 2 or parts[0] not in TERM_ORDER:
            raise DataError(f"bad semester {text!r}; expected '<Term> <YYYY>' with term in {TERMS}")
        try:
            year = int(parts[1])
        except ValueError:
            raise DataError(f"bad semester year in {text!r}") from None
        return cls(year, TERM_ORDER[parts[0]])

    def __str__(self) -> str:
        return f"{self.term} {self.year}"


@dataclass(frozen=True)
class EnrollmentRecord:
    semester: Semester
    student_id: str
    major: str
    entry_type: EntryType
    subject: str
    course_number: str
    grade: str | None  # letter grade or None

    @property
    def course_key(self) -> tuple[str, str]:
        return (self.subject, self.course_number)


@dataclass
class EnrollmentTable:
    """Immutable-by-convention list of records plus a course vocabulary.

    The vocabulary maps (subject, course_number) pairs to dense indices,
    assigned in first-seen order over the record list.
    """

    records: list[EnrollmentRecord]
    duplicates_dropped: int = 0

    _vocab: dict[tuple[str, str], int] | None = field(default=None, repr=False)

    @property
    def vocab(self) -> dict[tuple[str, str], int]:
        if self._vocab is None:
            vocab: dict[tuple[str, str], int] = {}
            for r in self.records:
                vocab.setdefault(r.course_key, len(vocab))
            self._vocab = vocab
        return self._vocab

    @property
    def vocab_list(self) -> list[tuple[str, str]]:
        ordered = sorted(self.vocab.items(), key=lambda kv: kv[1])
        return [k for k, _ in ordered]

    def course_index(self, subject: str, number: str) -> int:
        return self.vocab[(subject, number)]

    def semesters(self) -> list[Semester]:
        return sorted({r.semester for r in self.records})

    def students(self) -> list[str]:
        return sorted({r.student_id for r in self.records})

    def __len__(self) -> int:
        return len(self.records)


@dataclass
class SemesterSlice:
    semester: Semester
    courses: set[int]  # vocabulary indices
    major: str
    gpa: float | None


@dataclass
class StudentHistory:
    student_id: str
    entry_type: EntryType
    slices: list[SemesterSlice]  # strictly increasing semesters


@dataclass
class SerializedSequence:
    student_id: str
    tokens: list[int]
    semester_of: list[int]  # per-token index into the student's semester list


@dataclass
class DatasetSplit:
    training: EnrollmentTable  # everything strictly before `validation`
    validation: Semester
    test: Semester
    table: EnrollmentTable  # the full table the split was made from

    def records_before(self, semester: Semester) -> list[EnrollmentRecord]:
        return [r for r in self.table.records if r.semester < semester]

    def records_in(self, semester: Semester) -> list[EnrollmentRecord]:
        return [r for r in self.table.records if r.semester == semester]

    def full_training_table(self) -> EnrollmentTable:
        """Everything strictly before the test semester (the refit corpus)."""
        return EnrollmentTable(self.records_before(self.test))


def _parse_grade(text: str) -> str | None:
    g = text.strip().upper()
    return g if g in DEFAULT_GRADE_POINTS else None


def _parse_entry(text: str) -> EntryType:
    key = text.strip().lower()
    if key not in _ENTRY_ALIASES:
        raise DataError(f"unknown entry type {text!r}")
    return _ENTRY_ALIASES[key]


def parse_enrollments(source) -> EnrollmentTable:
    """Parse the enrollment CSV into an EnrollmentTable.

    `source` may be a path, a text-mode file object, or bytes. Duplicate
    (student, semester, course) rows are dropped, with the count recorded
    on the returned table.
    """
    if isinstance(source, (bytes, bytearray)):
        stream = io.StringIO(source.decode("utf-8"))
    elif isinstance(source, str) or hasattr(source, "__fspath__"):
        stream = open(source, newline="", encoding="utf-8")
    else:
        stream = source
    reader = csv.reader(stream)
    try:
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ENROLLMENT_HEADER:
            raise DataError(f"bad header: expected {ENROLLMENT_HEADER}, got {header}")
        records: list[EnrollmentRecord] = []
        seen: set[tuple[str, Semester, tuple[str, str]]] = set()
        dropped = 0
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(ENROLLMENT_HEADER):
                raise DataError(f"line {lineno}: expected {len(ENROLLMENT_HEADER)} fields, got {len(row)}")
            try:
                semester = Semester.parse(row[0])
                entry = _parse_entry(row[3])
            except DataError as e:
                raise DataError(f"line {lineno}: {e}") from None
            student = row[1].strip()
            if not student:
                raise DataError(f"line {lineno}: empty student id")
            rec = EnrollmentRecord(
                semester=semester,
                student_id=student,
                major=row[2].strip(),
                entry_type=entry,
                subject=row[4].strip(),
                course_number=row[5].strip(),
                grade=_parse_grade(row[6]),
            )
            key = (rec.student_id, rec.semester, rec.course_key)
            if key in seen:
                dropped += 1
                continue
            seen.add(key)
            records.append(rec)
    finally:
        if stream is not source:
            stream.close()
    return EnrollmentTable(records, duplicates_dropped=dropped)


def write_enrollments(table: EnrollmentTable, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(ENROLLMENT_HEADER)
        for r in table.records:
            w.writerow([
                str(r.semester), r.student_id, r.major,
                "New Freshman" if r.entry_type == EntryType.NEW_FRESHMAN else "Transfer Student",
                r.subject, r.course_number, r.grade or "",
            ])


def filter_courses(table: EnrollmentTable, min_enrollments: int = 10) -> EnrollmentTable:
    """Drop courses with fewer than `min_enrollments` total enrollments."""
    if min_enrollments < 1:
        raise ValueError("min_enrollments must be >= 1")
    counts = Counter(r.course_key for r in table.records)
    kept = [r for r in table.records if counts[r.course_key] >= min_enrollments]
    return EnrollmentTable(kept)


def filter_students(table: EnrollmentTable, min_semesters: int = 2, max_semesters: int = 12) -> EnrollmentTable:
    """Keep students whose active-semester count is within [min, max]."""
    if not (1 <= min_semesters <= max_semesters):
        raise ValueError("need 1 <= min_semesters <= max_semesters")
    sems: dict[str, set[Semester]] = defaultdict(set)
    for r in table.records:
        sems[r.student_id].add(r.semester)
    kept = [r for r in table.records
            if min_semesters <= len(sems[r.student_id]) <= max_semesters]
    return EnrollmentTable(kept)


def student_histories(table: EnrollmentTable,
                      grade_points: dict[str, float] | None = None) -> list[StudentHistory]:
    """Group a table into per-student semester slices, in student-id order.

    Course sets hold vocabulary indices from `table.vocab`. The per-slice GPA
    is the unweighted mean of that semester's letter grades, or None.
    """
    pts = grade_points or DEFAULT_GRADE_POINTS
    vocab = table.vocab
    by_student: dict[str, list[EnrollmentRecord]] = defaultdict(list)
    for r in table.records:
        by_student[r.student_id].append(r)
    out = []
    for sid in sorted(by_student):
        recs = by_student[sid]
        by_sem: dict[Semester, list[EnrollmentRecord]] = defaultdict(list)
        for r in recs:
            by_sem[r.semester].append(r)
        slices = []
        for sem in sorted(by_sem):
            rs = by_sem[sem]
            grades = [pts[r.grade] for r in rs if r.grade is not None]
            gpa = float(np.mean(grades)) if grades else None
            slices.append(SemesterSlice(
                semester=sem,
                courses={vocab[r.course_key] for r in rs},
                major=rs[0].major,
                gpa=gpa,
            ))
        out.append(StudentHistory(sid, recs[0].entry_type, slices))
    return out


def compute_gpa(history: StudentHistory, semester: Semester,
                grade_points: dict[str, float] | None = None) -> float | None:
    """GPA of one semester of a history (already aggregated on the slice)."""
    for sl in history.slices:
        if sl.semester == semester:
            return sl.gpa
    return None


def serialize_sequences(table: EnrollmentTable, seed: int) -> list[SerializedSequence]:
    """Flatten each student's history: sort by semester, shuffle within it.

    Deterministic given `seed`; the shuffle stream is keyed per student so
    output does not depend on student iteration order.
    """
    if not table.records:
        raise DataError("cannot serialize an empty table")
    out = []
    for hist in student_histories(table):
        rng = np.random.default_rng([seed, zlib.crc32(hist.student_id.encode())])
        tokens: list[int] = []
        sem_of: list[int] = []
        for si, sl in enumerate(hist.slices):
            courses = sorted(sl.courses)
            rng.shuffle(courses)
            tokens.extend(int(c) for c in courses)
            sem_of.extend([si] * len(courses))
        out.append(SerializedSequence(hist.student_id, tokens, sem_of))
    return out


def split_by_semester(table: EnrollmentTable, validation: Semester, test: Semester) -> DatasetSplit:
    """Split records at the validation/test semesters.

    `training` holds records strictly before `validation`; records up to but
    excluding `test` are available via `full_training_table()` for the refit
    phase.
    """
    if not validation < test:
        raise DataError(f"validation semester {validation} must precede test {test}")
    before = [r for r in table.records if r.semester < validation]
    if not before:
        raise DataError("no records precede the validation semester")
    return DatasetSplit(EnrollmentTable(before), validation, test, table)


@dataclass
class DatasetStats:
    n_records: int
    n_students: int
    n_courses: int
    enrollments_per_course: dict[tuple[str, str], int]
    active_students_per_semester: dict[str, int]
    duplicates_dropped: int


def dataset_stats(table: EnrollmentTable) -> DatasetStats:
    per_course = Counter(r.course_key for r in table.records)
    active: dict[Semester, set[str]] = defaultdict(set)
    for r in table.records:
        active[r.semester].add(r.student_id)
    return DatasetStats(
        n_records=len(table.records),
        n_students=len({r.student_id for r in table.records}),
        n_courses=len(per_course),
        enrollments_per_course=dict(per_course),
        active_students_per_semester={str(s): len(active[s]) for s in sorted(active)},
        duplicates_dropped=table.duplicates_dropped,
    )
