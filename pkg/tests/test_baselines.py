from collections import Counter, defaultdict

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import make_record
from courserec import baselines
from courserec.baselines import (
    BaselineError, mask_distribution, ngram_distribution, ngram_predict,
    ngram_predict_semesters, popularity_predict, train_ngram, train_popularity,
)
from courserec.data import EnrollmentTable, Semester

SEQS = [[0, 1, 2, 3], [1, 2, 3, 0], [2, 2, 1]]


def brute_counts(seqs, order):
    """Independent window counter for cross-checking the tables."""
    out = defaultdict(Counter)
    for seq in seqs:
        for i in range(len(seq) - order + 1):
            out[tuple(seq[i:i + order - 1])][seq[i + order - 1]] += 1
    return {k: dict(v) for k, v in out.items()}


def test_tables_match_brute_force():
    table = train_ngram(SEQS, 3, vocab_size=4)
    for order in (2, 3):
        expect = brute_counts(SEQS, order)
        got = {k: dict(v) for k, v in table.tables[order].items()}
        assert got == expect
    assert dict(table.unigrams) == {0: 2, 1: 3, 2: 4, 3: 2}


def test_no_cross_student_windows():
    table = train_ngram([[0, 1], [2, 3]], 2, vocab_size=4)
    assert (1, ) not in table.tables[2] or 2 not in table.tables[2][(1,)]
    assert dict(table.tables[2][(0,)]) == {1: 1}
    assert dict(table.tables[2][(2,)]) == {3: 1}


def test_distribution_uses_highest_order_with_counts():
    table = train_ngram(SEQS, 3, vocab_size=4)
    # context (1, 2) was seen twice, both followed by 3
    d = ngram_distribution(table, [0, 1, 2])
    assert d[3] == pytest.approx(1.0)


def test_backoff_chain():
    table = train_ngram(SEQS, 3, vocab_size=5)
    # trigram context (4, 4) unseen; bigram context (4,) unseen too ->
    # unigram distribution
    d = ngram_distribution(table, [4, 4])
    uni = np.array([2, 3, 4, 2, 0], dtype=float)
    assert d == pytest.approx(uni / uni.sum())
    # bigram context (2,) seen -> backoff stops there
    d = ngram_distribution(table, [9, 2])
    seen = dict(table.tables[2][(2,)])
    expect = np.zeros(5)
    for tok, c in seen.items():
        expect[tok] = c
    assert d == pytest.approx(expect / expect.sum())


def test_empty_table_uniform():
    with pytest.warns(UserWarning):
        table = train_ngram([[7]], 3, vocab_size=8)
    d = ngram_distribution(table, [])
    # the lone token still counts as a unigram
    assert d[7] == pytest.approx(1.0)


def test_train_ngram_validates_n():
    with pytest.raises(BaselineError):
        train_ngram(SEQS, 1, 4)


def test_mask_distribution():
    d = np.array([0.5, 0.3, 0.2])
    masked = mask_distribution(d, {0, 1})
    assert masked == pytest.approx([0.625, 0.375, 0.0])
    # zero mass inside the offered set -> uniform over offered
    masked = mask_distribution(np.array([0.0, 0.0, 1.0]), {0, 1})
    assert masked == pytest.approx([0.5, 0.5, 0.0])
    with pytest.raises(BaselineError):
        mask_distribution(d, set())


@given(st.lists(st.floats(0, 1), min_size=3, max_size=8),
       st.sets(st.integers(0, 7), min_size=1))
def test_mask_preserves_relative_order(values, offered):
    d = np.asarray(values + [0.0] * (8 - len(values)))
    masked = mask_distribution(d, offered)
    inside = sorted(offered)
    if d[inside].sum() > 0:
        # ranking inside the offered set is unchanged
        assert np.array_equal(np.argsort(-masked[inside], kind="stable"),
                              np.argsort(-d[inside], kind="stable"))
    assert masked.sum() == pytest.approx(1.0)


def test_predict_semesters_averages_serializations():
    table = train_ngram(SEQS, 3, vocab_size=4)
    sems = [{0, 1}, {2}]
    d = ngram_predict_semesters(table, sems, offered={0, 1, 2, 3}, seeds=(0, 1, 2))
    # oracle: average the unmasked per-serialization distributions, mask once
    expect = np.zeros(4)
    for seed in (0, 1, 2):
        rng = np.random.default_rng(seed)
        toks = []
        for s in sems:
            ordered = sorted(s)
            rng.shuffle(ordered)
            toks.extend(int(c) for c in ordered)
        expect += ngram_distribution(table, toks)
    expect = mask_distribution(expect / 3, {0, 1, 2, 3})
    assert d == pytest.approx(expect)
    assert d.sum() == pytest.approx(1.0)


def _pop_table():
    recs = []
    # Falls 2012-2015 plus a Spring that must be ignored for a Fall target
    for year, course, n in [(2012, 101, 5), (2013, 102, 4), (2014, 103, 3),
                            (2015, 104, 2), (2011, 105, 9)]:
        recs += [make_record(Semester(year, 2), f"s{year}{i}", course) for i in range(n)]
    recs += [make_record(Semester(2015, 0), "sp1", 106)]
    recs += [make_record(Semester(2015, 2), "tr1", 104, major="MajorB")]
    return EnrollmentTable(recs)


def test_popularity_window_and_term_matching():
    table = _pop_table()
    model = train_popularity(table, Semester(2016, 2), lookback_terms=4)
    v = table.vocab
    # Falls 2012..2015 only: 105 (Fall 2011) and 106 (a Spring) are excluded
    assert model.global_counts == Counter({
        v[("SUBJ", "101")]: 5, v[("SUBJ", "102")]: 4,
        v[("SUBJ", "103")]: 3, v[("SUBJ", "104")]: 3})
    model2 = train_popularity(table, Semester(2016, 2), lookback_terms=2)
    assert set(model2.global_counts) == {v[("SUBJ", "103")], v[("SUBJ", "104")]}


def test_popularity_counts_strictly_before_target():
    table = _pop_table()
    model = train_popularity(table, Semester(2015, 2), lookback_terms=10)
    v = table.vocab
    assert v[("SUBJ", "104")] not in model.global_counts


def test_popularity_predict_proportional():
    table = _pop_table()
    model = train_popularity(table, Semester(2016, 2), lookback_terms=4)
    v = table.vocab
    offered = {v[("SUBJ", "101")], v[("SUBJ", "102")]}
    d = popularity_predict(model, offered)
    assert d[v[("SUBJ", "101")]] == pytest.approx(5 / 9)
    assert d[v[("SUBJ", "102")]] == pytest.approx(4 / 9)


def test_popularity_by_major_fallback():
    table = _pop_table()
    model = train_popularity(table, Semester(2016, 2), by_major=True)
    v = table.vocab
    offered = set(v.values())
    # MajorB bucket holds only course 104
    d = popularity_predict(model, offered, major="MajorB")
    assert d[v[("SUBJ", "104")]] == pytest.approx(1.0)
    # unknown major -> global counts
    d = popularity_predict(model, offered, major="Nope")
    assert d[v[("SUBJ", "101")]] > 0


def test_popularity_requires_matching_terms():
    table = _pop_table()
    with pytest.raises(BaselineError):
        train_popularity(table, Semester(2011, 2))


def test_export_ngram(tmp_path):
    table = train_ngram(SEQS, 2, vocab_size=4)
    path = tmp_path / "ngram.txt"
    baselines.export_ngram(table, path)
    lines = path.read_text().splitlines()
    assert "1 -> 2: 2" in lines
    assert lines == sorted(lines, key=lambda l: l.split(" -> ")[0])
