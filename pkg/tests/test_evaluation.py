import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import make_record
from courserec import baselines, evaluation, lstm
from courserec.data import EnrollmentTable, EntryType, Semester
from courserec.evaluation import (
    EvalError, LstmPredictor, NgramPredictor, PopularityPredictor,
    evaluate, mrr_at_k, offered_courses, recall_at_k,
)


def test_recall_hand_values():
    assert recall_at_k([1, 2, 3], {2, 9}, 3) == pytest.approx(0.5)
    assert recall_at_k([1, 2, 3], {4, 5}, 3) == 0.0
    assert recall_at_k([1, 2], {1, 2}, 10) == 1.0


def test_mrr_hand_values():
    # first relevant item at rank 2 -> 1/2
    assert mrr_at_k([9, 4, 7], {4, 7}, 3) == pytest.approx(0.5)
    assert mrr_at_k([4, 9, 7], {4}, 3) == 1.0
    assert mrr_at_k([9, 8, 7], {4}, 3) == 0.0
    # relevant item beyond k scores zero
    assert mrr_at_k([9, 8, 7, 4], {4}, 3) == 0.0


@given(st.lists(st.integers(0, 20), min_size=1, max_size=10, unique=True),
       st.sets(st.integers(0, 20), min_size=1, max_size=10))
def test_metric_bounds(ranked, actual):
    k = len(ranked)
    r = recall_at_k(ranked, actual, k)
    m = mrr_at_k(ranked, actual, k)
    assert 0.0 <= r <= 1.0
    assert 0.0 <= m <= 1.0
    if m > 0:
        assert r > 0


class UniformPredictor:
    def __init__(self, vocab_size):
        self.v = vocab_size

    def predict(self, ctx, offered):
        return baselines.mask_distribution(np.ones(self.v), offered)


def _eval_table():
    f14, f15 = Semester(2014, 2), Semester(2015, 2)
    recs = [
        make_record(f14, "a", 101), make_record(f14, "a", 102),
        make_record(f15, "a", 103),
        make_record(f14, "b", 101),
        make_record(f15, "b", 102), make_record(f15, "b", 104),
        # new student: first ever records are in the target semester
        make_record(f15, "new", 101, entry=EntryType.TRANSFER, major="MajorB"),
    ]
    return EnrollmentTable(recs), f15


def test_offered_courses():
    table, f15 = _eval_table()
    v = table.vocab
    assert offered_courses(table, f15) == {
        v[("SUBJ", "103")], v[("SUBJ", "102")], v[("SUBJ", "104")], v[("SUBJ", "101")]}


def test_evaluate_includes_new_students():
    table, f15 = _eval_table()
    report = evaluate(UniformPredictor(len(table.vocab)), table, f15, k=4)
    by_id = {r.student_id: r for r in report.per_student}
    assert set(by_id) == {"a", "b", "new"}
    assert by_id["new"].prior_semesters == 0
    # uniform over 4 offered courses with k=4 retrieves everything
    assert report.mean_recall == pytest.approx(1.0)


def test_evaluate_histories_stop_before_target():
    table, f15 = _eval_table()

    class SpyPredictor(UniformPredictor):
        seen = {}

        def predict(self, ctx, offered):
            SpyPredictor.seen[ctx.student_id] = [
                str(sl.semester) for sl in ctx.history.slices]
            return super().predict(ctx, offered)

    evaluate(SpyPredictor(len(table.vocab)), table, f15)
    assert SpyPredictor.seen["a"] == ["Fall 2014"]
    assert SpyPredictor.seen["new"] == []


def test_evaluate_no_target_records():
    table, _ = _eval_table()
    with pytest.raises(EvalError):
        evaluate(UniformPredictor(len(table.vocab)), table, Semester(2030, 2))


def test_breakdowns():
    table, f15 = _eval_table()
    report = evaluate(UniformPredictor(len(table.vocab)), table, f15, k=4,
                      college_of_major={"MajorA": "Arts"})
    by_major = report.breakdown("major")
    assert by_major["MajorA"][0] == 2
    assert by_major["MajorB"][0] == 1
    by_college = report.breakdown("college")
    assert by_college["Arts"][0] == 2 and by_college["unknown"][0] == 1
    by_prior = report.breakdown("prior_semesters")
    assert by_prior["0"][0] == 1 and by_prior["1"][0] == 2
    with pytest.raises(EvalError):
        report.breakdown("shoe_size")


def test_report_csv(tmp_path):
    table, f15 = _eval_table()
    report = evaluate(UniformPredictor(len(table.vocab)), table, f15, k=4)
    path = tmp_path / "report.csv"
    report.write_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("student_id,recall,rr")
    assert len(lines) == 4
    agg = report.aggregate_dict()
    assert agg["students"] == 3 and agg["k"] == 4


def test_predictor_wrappers_agree_with_direct_calls():
    table, f15 = _eval_table()
    v = len(table.vocab)
    pop = baselines.train_popularity(table, f15)
    report = evaluate(PopularityPredictor(pop), table, f15, k=2)
    assert 0.0 <= report.mean_recall <= 1.0

    from courserec.data import serialize_sequences

    prior = EnrollmentTable([r for r in table.records if r.semester < f15])
    prior._vocab = table.vocab
    ng = baselines.train_ngram(serialize_sequences(prior, 0), 2, v)
    report = evaluate(NgramPredictor(ng), table, f15, k=2)
    assert 0.0 <= report.mean_recall <= 1.0

    model = lstm.init_model(lstm.LstmConfig(hidden=4, seed=0), v, ["MajorA", "MajorB"])
    report = evaluate(LstmPredictor(model), table, f15, k=2)
    assert 0.0 <= report.mean_recall <= 1.0
