"""Frequentist baselines: n-gram course sequence model and popularity.

Both produce masked, renormalized distributions over the course vocabulary
so they plug into the same evaluation harness as the LSTM.
"""

from __future__ import annotations

import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np

from .data import EnrollmentTable, Semester, SerializedSequence


class BaselineError(Exception):
    pass


@dataclass
class NgramTable:
    n: int
    # context tuple (length n-1) -> Counter of following tokens; plus every
    # shorter order down to the unigram for backoff.
    tables: dict[int, dict[tuple, Counter]] = field(default_factory=dict)
    unigrams: Counter = field(default_factory=Counter)
    vocab_size: int = 0


def train_ngram(sequences: list[SerializedSequence] | list[list[int]], n: int,
                vocab_size: int) -> NgramTable:
    """Count all length-n windows per sequence (no cross-student windows).

    Lower-order tables (down to bigram) are counted too, for backoff.
    """
    if n < 2:
        raise BaselineError("n must be >= 2")
    table = NgramTable(n=n, vocab_size=vocab_size)
    table.tables = {order: defaultdict(Counter) for order in range(2, n + 1)}
    any_window = False
    for seq in sequences:
        tokens = seq.tokens if isinstance(seq, SerializedSequence) else seq
        table.unigrams.update(tokens)
        for order in range(2, n + 1):
            for start in range(len(tokens) - order + 1):
                ctx = tuple(tokens[start:start + order - 1])
                table.tables[order][ctx][tokens[start + order - 1]] += 1
                any_window = True
    if not any_window:
        warnings.warn(f"no sequence long enough for any n-gram window (n={n})")
    table.tables = {k: dict(v) for k, v in table.tables.items()}
    return table


def ngram_distribution(table: NgramTable, history_tokens: list[int]) -> np.ndarray:
    """Unmasked distribution from the last (n-1) tokens, backing off
    n -> n-1 -> ... -> unigram -> uniform on unseen contexts."""
    V = table.vocab_size
    for order in range(table.n, 1, -1):
        need = order - 1
        if len(history_tokens) < need:
            continue
        ctx = tuple(history_tokens[-need:])
        counts = table.tables.get(order, {}).get(ctx)
        if counts:
            dist = np.zeros(V)
            for tok, c in counts.items():
                dist[tok] = c
            return dist / dist.sum()
    if table.unigrams:
        dist = np.zeros(V)
        for tok, c in table.unigrams.items():
            dist[tok] = c
        return dist / dist.sum()
    return np.full(V, 1.0 / V)


def mask_distribution(dist: np.ndarray, offered: set[int]) -> np.ndarray:
    """Zero outside `offered` and renormalize; uniform over offered when the
    masked mass is zero."""
    if not offered:
        raise BaselineError("offered set is empty")
    mask = np.zeros_like(dist)
    mask[sorted(offered)] = 1.0
    masked = dist * mask
    total = masked.sum()
    if total <= 0.0:
        return mask / mask.sum()
    return masked / total


def ngram_predict(table: NgramTable, history_tokens: list[int],
                  offered: set[int]) -> np.ndarray:
    return mask_distribution(ngram_distribution(table, history_tokens), offered)


def ngram_predict_semesters(table: NgramTable, semester_course_sets: list[set[int]],
                            offered: set[int], seeds: tuple[int, ...] = (0, 1, 2, 3, 4)) -> np.ndarray:
    """Predict from semester sets by averaging over several within-semester
    shuffle serializations (the flattening introduces artificial order)."""
    if not semester_course_sets:
        return mask_distribution(ngram_distribution(table, []), offered)
    acc = None
    for seed in seeds:
        rng = np.random.default_rng(seed)
        tokens: list[int] = []
        for courses in semester_course_sets:
            cs = sorted(courses)
            rng.shuffle(cs)
            tokens.extend(int(c) for c in cs)
        dist = ngram_distribution(table, tokens)
        acc = dist if acc is None else acc + dist
    return mask_distribution(acc / len(seeds), offered)


def export_ngram(table: NgramTable, path) -> None:
    """Sorted text dump `context -> course: count` for diffing in tests."""
    with open(path, "w", encoding="utf-8") as f:
        for order in sorted(table.tables):
            for ctx in sorted(table.tables[order]):
                for tok, c in sorted(table.tables[order][ctx].items()):
                    f.write(f"{','.join(map(str, ctx))} -> {tok}: {c}\n")


@dataclass
class PopularityModel:
    global_counts: Counter  # course index -> enrollments over lookback terms
    by_major: dict[str, Counter] | None
    vocab_size: int
    term: str


def train_popularity(table: EnrollmentTable, target_term: Semester,
                     lookback_terms: int = 4, by_major: bool = False) -> PopularityModel:
    """Count enrollments over the `lookback_terms` most recent semesters
    sharing the target's term (e.g. prior Falls), strictly before it."""
    if lookback_terms < 1:
        raise BaselineError("lookback_terms must be >= 1")
    matching = sorted({r.semester for r in table.records
                       if r.semester.term_index == target_term.term_index
                       and r.semester < target_term})
    if not matching:
        raise BaselineError(f"no {target_term.term} semesters precede {target_term}")
    window = set(matching[-lookback_terms:])
    vocab = table.vocab
    global_counts: Counter = Counter()
    per_major: dict[str, Counter] | None = defaultdict(Counter) if by_major else None
    for r in table.records:
        if r.semester in window:
            idx = vocab[r.course_key]
            global_counts[idx] += 1
            if per_major is not None:
                per_major[r.major][idx] += 1
    return PopularityModel(global_counts, dict(per_major) if per_major else None,
                           len(vocab), target_term.term)


def popularity_predict(model: PopularityModel, offered: set[int],
                       major: str | None = None) -> np.ndarray:
    """Count-proportional distribution over offered courses.

    With per-major tables, the student's major bucket is used when it is
    nonempty, otherwise the global counts; all-zero counts fall back to
    uniform over offered.
    """
    counts = model.global_counts
    if model.by_major is not None and major is not None:
        bucket = model.by_major.get(major)
        if bucket:
            counts = bucket
    dist = np.zeros(model.vocab_size)
    for idx, c in counts.items():
        dist[idx] = c
    return mask_distribution(dist, offered)
