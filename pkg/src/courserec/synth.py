"""Synthetic enrollment corpus with planted structure.

The generator builds a small university: majors own leveled curriculum
blocks (a temporal signal a sequence model can exploit), all majors share a
general-education pool with per-major taste weights (so popularity-by-major
beats global popularity), selected courses have planted equivalent twins
(substituted into half their occurrences, giving near-identical contexts),
and each major's block forms a subject cluster for preference queries.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .data import (EnrollmentRecord, EnrollmentTable, EntryType, Semester,
                   TERM_ORDER)

LETTER_GRADES = ["A", "A-", "B+", "B", "B-", "C+", "C", "C-", "D", "F"]
GRADE_WEIGHTS = [0.18, 0.14, 0.14, 0.16, 0.10, 0.08, 0.08, 0.05, 0.04, 0.03]

# word pools for synthetic catalog descriptions, one theme per major block
_THEME_WORDS = [
    ["molecule", "reaction", "organic", "kinetics", "thermodynamics", "synthesis",
     "spectroscopy", "bonding", "catalysis", "equilibrium", "polymer", "crystal"],
    ["algorithm", "computation", "program", "complexity", "database", "compiler",
     "network", "software", "automata", "graph", "machine", "intelligence"],
    ["market", "price", "trade", "inflation", "capital", "labor", "supply",
     "demand", "fiscal", "monetary", "welfare", "growth"],
    ["cell", "gene", "protein", "evolution", "organism", "ecology", "physiology",
     "neuron", "enzyme", "genome", "species", "membrane"],
    ["poem", "novel", "narrative", "rhetoric", "literary", "criticism", "prose",
     "translation", "metaphor", "authorship", "genre", "modernism"],
    ["policy", "government", "election", "institution", "democracy", "justice",
     "legislation", "diplomacy", "citizenship", "governance", "rights", "power"],
    ["matrix", "theorem", "proof", "calculus", "topology", "algebra", "geometry",
     "probability", "integral", "manifold", "equation", "symmetry"],
    ["mind", "behavior", "cognition", "perception", "memory", "emotion",
     "development", "personality", "social", "learning", "attention", "language"],
]
_FILLER_WORDS = ["introduction", "theory", "analysis", "method", "principle",
                 "application", "seminar", "laboratory", "project", "survey",
                 "advanced", "foundation", "research", "study", "topic"]


class SynthError(Exception):
    pass


@dataclass
class SynthConfig:
    seed: int = 0
    n_students: int = 2000
    n_courses: int = 200
    n_majors: int = 8
    levels: int = 6
    courses_per_level: int = 3
    n_general: int = 40
    n_twin_pairs: int = 8
    load_choices: tuple[int, ...] = (3, 4, 5)  # courses per semester, median 4
    load_weights: tuple[float, ...] = (0.3, 0.45, 0.25)
    transfer_fraction: float = 0.25
    start_year: int = 2010
    end_year: int = 2016  # calendar ends at Fall of this year

    def __post_init__(self):
        block = self.n_majors * self.levels * self.courses_per_level
        if block + self.n_general + 2 * self.n_twin_pairs > self.n_courses:
            raise SynthError("course budget too small for the configured structure")


@dataclass
class GroundTruth:
    majors: list[str]
    college_of_major: dict[str, str]
    subject_of_major: dict[str, str]
    cluster_courses: dict[str, list[list[str]]]  # subject -> [[subj, number], ...]
    twin_pairs: list[tuple[list[str], list[str]]]
    general_weights: dict[str, dict[str, float]]  # major -> "SUBJ NUM" -> weight

    def to_json(self) -> str:
        return json.dumps({
            "majors": self.majors,
            "college_of_major": self.college_of_major,
            "subject_of_major": self.subject_of_major,
            "cluster_courses": self.cluster_courses,
            "twin_pairs": self.twin_pairs,
            "general_weights": self.general_weights,
        }, indent=1)

    @classmethod
    def from_json(cls, text: str) -> "GroundTruth":
        d = json.loads(text)
        return cls(d["majors"], d["college_of_major"], d["subject_of_major"],
                   d["cluster_courses"],
                   [tuple(p) for p in d["twin_pairs"]], d["general_weights"])


@dataclass
class CourseDef:
    subject: str
    number: str
    major: int | None  # owning major block, None for general pool
    level: int | None
    theme: int  # index into the description word pools

    @property
    def key(self) -> tuple[str, str]:
        return (self.subject, self.number)


def _build_courses(cfg: SynthConfig) -> tuple[list[CourseDef], list[tuple[int, int]]]:
    """Course roster plus (original_idx, twin_idx) planted pairs."""
    courses: list[CourseDef] = []
    for m in range(cfg.n_majors):
        subject = f"SUBJ{m}"
        for lvl in range(cfg.levels):
            for j in range(cfg.courses_per_level):
                courses.append(CourseDef(subject, str(100 * (lvl + 1) + j), m, lvl, m))
    for g in range(cfg.n_general):
        courses.append(CourseDef("GEN", str(g + 1), None, None, g % cfg.n_majors))
    twins: list[tuple[int, int]] = []
    for p in range(cfg.n_twin_pairs):
        # twin a mid-level block course from major p (mod n_majors)
        m = p % cfg.n_majors
        lvl = 1 + p % (cfg.levels - 2)
        orig = m * cfg.levels * cfg.courses_per_level + lvl * cfg.courses_per_level
        c = courses[orig]
        twins.append((orig, len(courses)))
        courses.append(CourseDef(c.subject, str(int(c.number) + 1000), m, lvl, m))
    n_elec = cfg.n_courses - len(courses)
    for e in range(n_elec):
        m = e % cfg.n_majors
        courses.append(CourseDef(f"SUBJ{m}", str(900 + e), m, None, m))
    return courses, twins


def _calendar(cfg: SynthConfig) -> list[Semester]:
    """Fall/Spring semesters from Spring start_year through Fall end_year."""
    out = []
    for year in range(cfg.start_year, cfg.end_year + 1):
        out.append(Semester(year, TERM_ORDER["Spring"]))
        out.append(Semester(year, TERM_ORDER["Fall"]))
    return out


def generate(cfg: SynthConfig) -> tuple[EnrollmentTable, GroundTruth]:
    """Deterministic synthetic table plus the planted ground truth."""
    rng = np.random.default_rng(cfg.seed)
    courses, twins = _build_courses(cfg)
    calendar = _calendar(cfg)
    majors = [f"Major{m}" for m in range(cfg.n_majors)]
    colleges = {majors[m]: ("College of Arts" if m < cfg.n_majors // 2
                            else "College of Science") for m in range(cfg.n_majors)}

    # twins enter enrollments only through substitution, never as a direct
    # pick, so an original and its twin cannot collide within a semester
    twin_courses = {twin for _, twin in twins}
    block_idx = {(m, lvl): [i for i, c in enumerate(courses)
                            if c.major == m and c.level == lvl
                            and i not in twin_courses]
                 for m in range(cfg.n_majors) for lvl in range(cfg.levels)}
    general_idx = [i for i, c in enumerate(courses) if c.subject == "GEN"]
    elective_idx = {m: [i for i, c in enumerate(courses)
                        if c.major == m and c.level is None]
                    for m in range(cfg.n_majors)}
    twin_targets = {orig: twin for orig, twin in twins}

    # per-major tastes over the general pool: a Zipf profile under a
    # major-specific permutation, so majors disagree about what is popular
    general_weights = {}
    zipf = 1.0 / np.arange(1, len(general_idx) + 1)
    for m in range(cfg.n_majors):
        perm = np.random.default_rng([cfg.seed, 7, m]).permutation(len(general_idx))
        w = zipf[perm]
        general_weights[m] = w / w.sum()

    records: list[EnrollmentRecord] = []
    for s in range(cfg.n_students):
        sid = f"s{s:05d}"
        m = int(rng.integers(cfg.n_majors))
        is_transfer = rng.random() < cfg.transfer_fraction
        entry = EntryType.TRANSFER if is_transfer else EntryType.NEW_FRESHMAN
        n_sems = int(rng.integers(2, 7)) if is_transfer else int(rng.integers(2, 13))
        start_pos = int(rng.integers(0, len(calendar)))
        start_level = 2 if is_transfer else 0
        sems = calendar[start_pos:start_pos + n_sems]
        for k, sem in enumerate(sems):
            level = min(start_level + k, cfg.levels - 1)
            load = int(rng.choice(cfg.load_choices, p=cfg.load_weights))
            pool = list(block_idx[(m, level)])
            rng.shuffle(pool)
            picks = pool[:min(load - 1, len(pool))]
            # fill the remaining load from generals (mostly) and electives
            while len(picks) < load:
                if elective_idx[m] and rng.random() < 0.15:
                    cand = int(rng.choice(elective_idx[m]))
                else:
                    cand = int(general_idx[rng.choice(len(general_idx),
                                                      p=general_weights[m])])
                if cand not in picks:
                    picks.append(cand)
            for ci in picks:
                # planted equivalents: half of each original's occurrences
                # flip to its twin, preserving the context distribution
                if ci in twin_targets and rng.random() < 0.5:
                    ci = twin_targets[ci]
                grade = (None if rng.random() < 0.1 else
                         str(rng.choice(LETTER_GRADES, p=GRADE_WEIGHTS)))
                records.append(EnrollmentRecord(
                    semester=sem, student_id=sid, major=majors[m],
                    entry_type=entry, subject=courses[ci].subject,
                    course_number=courses[ci].number, grade=grade))

    table = EnrollmentTable(records)
    cluster: dict[str, list[list[str]]] = {}
    for i, c in enumerate(courses):
        cluster.setdefault(c.subject, []).append([c.subject, c.number])
    truth = GroundTruth(
        majors=majors,
        college_of_major=colleges,
        subject_of_major={majors[m]: f"SUBJ{m}" for m in range(cfg.n_majors)},
        cluster_courses=cluster,
        twin_pairs=[(list(courses[a].key), list(courses[b].key)) for a, b in twins],
        general_weights={majors[m]: {
            " ".join(courses[general_idx[g]].key): float(general_weights[m][g])
            for g in range(len(general_idx))} for m in range(cfg.n_majors)},
    )
    return table, truth


def plant_equivalents(table: EnrollmentTable,
                      pairs: list[tuple[tuple[str, str], tuple[str, str]]],
                      seed: int = 0, rate: float = 0.5) -> EnrollmentTable:
    """Substitute each pair's twin into `rate` of the original's occurrences.

    Total occurrence count is conserved; in expectation both members see the
    same contexts, which is what the equivalency harness banks on.
    """
    rng = np.random.default_rng(seed)
    twin_of = {a: b for a, b in pairs}
    out = []
    for r in table.records:
        key = r.course_key
        if key in twin_of and rng.random() < rate:
            subj, num = twin_of[key]
            r = EnrollmentRecord(r.semester, r.student_id, r.major, r.entry_type,
                                 subj, num, r.grade)
        out.append(r)
    return EnrollmentTable(out)


def write_catalog(table: EnrollmentTable, truth: GroundTruth, path,
                  seed: int = 0) -> None:
    """Synthetic catalog CSV for every course in the table's vocabulary.

    Descriptions sample from a per-subject theme pool plus shared filler
    words, so subject clusters exist in description space too.
    """
    import csv

    rng = np.random.default_rng([seed, 99])
    dept_of_subject = {f"SUBJ{m}": f"Department{m}" for m in range(len(truth.majors))}
    dept_of_subject["GEN"] = "GeneralStudies"
    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["subject", "course_number", "title", "description",
                    "department", "division", "college", "capacity"])
        for subject, number in table.vocab_list:
            if subject.startswith("SUBJ"):
                theme = int(subject[4:]) % len(_THEME_WORDS)
            else:
                theme = int(number) % len(_THEME_WORDS) if number.isdigit() else 0
            pool = _THEME_WORDS[theme]
            n_words = int(rng.integers(8, 14))
            words = list(rng.choice(pool, size=min(6, n_words), replace=True))
            words += list(rng.choice(_FILLER_WORDS, size=n_words - len(words), replace=True))
            rng.shuffle(words)
            dept = dept_of_subject.get(subject, "GeneralStudies")
            major = next((mj for mj, sb in truth.subject_of_major.items() if sb == subject), None)
            college = truth.college_of_major.get(major, "College of Arts")
            division = "Division of " + college.split()[-1]
            w.writerow([subject, number, f"{subject} {number}: {pool[0].title()}",
                        " ".join(str(x) for x in words), dept, division, college,
                        int(rng.integers(30, 300))])


def write_equivalencies(truth: GroundTruth, path) -> None:
    import csv

    with open(path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["subject_a", "number_a", "subject_b", "number_b"])
        for (sa, na), (sb, nb) in truth.twin_pairs:
            w.writerow([sa, na, sb, nb])
