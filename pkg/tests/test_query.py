import numpy as np
import pytest

from courserec.embedding import EmbeddingSpace
from courserec.query import (
    CatalogEntry, FilterSpec, QueryContext, QueryError, QuerySpec, _minmax,
    alphabetical_order, apply_filters, load_catalog, load_course_list,
    load_equivalencies, preference_scores, rank_courses,
)


def _entry(i, subject, number, dept, capacity=100):
    return CatalogEntry(subject, number, f"{subject} {number}", "desc",
                        dept, "Div", "College", capacity)


@pytest.fixture
def ctx():
    catalog = {
        0: _entry(0, "CHEM", "101", "Chemistry"),
        1: _entry(1, "CHEM", "20", "Chemistry"),
        2: _entry(2, "ENGL", "50", "English"),
        3: _entry(3, "ENGL", "7B", "English", capacity=1),
        4: _entry(4, "ANTH", "2", "Anthropology"),
    }
    return QueryContext(
        catalog=catalog,
        taken={0},
        equivalency_pairs={frozenset((0, 1)), frozenset((2, 3))},
        requirement_lists={"breadth": {2, 3, 4}},
        registrar_list={1, 4},
        offered={0, 1, 2, 3},
        enrollment_counts={3: 5, 0: 10},
    )


ALL = [0, 1, 2, 3, 4]


def test_filters_conjunctive(ctx):
    assert apply_filters(ALL, FilterSpec(), ctx) == ALL
    assert apply_filters(ALL, FilterSpec(offered=True), ctx) == [0, 1, 2, 3]
    assert apply_filters(ALL, FilterSpec(not_taken=True), ctx) == [1, 2, 3, 4]
    assert apply_filters(ALL, FilterSpec(offered=True, not_taken=True), ctx) == [1, 2, 3]


def test_credit_restriction_is_pairwise_with_taken(ctx):
    # 1 pairs with the taken course 0; 2/3 pair with each other but neither
    # is taken, so they survive
    assert apply_filters(ALL, FilterSpec(no_credit_restriction=True), ctx) == [0, 2, 3, 4]


def test_department_and_requirement_filters(ctx):
    assert apply_filters(ALL, FilterSpec(department="English"), ctx) == [2, 3]
    assert apply_filters(ALL, FilterSpec(requirement_list="breadth"), ctx) == [2, 3, 4]
    with pytest.raises(QueryError, match="Chemistry"):
        apply_filters(ALL, FilterSpec(department="Nope"), ctx)
    with pytest.raises(QueryError, match="breadth"):
        apply_filters(ALL, FilterSpec(requirement_list="nope"), ctx)


def test_open_seats_and_registrar(ctx):
    # course 3 is full (capacity 1, 5 enrolled); others have room
    assert apply_filters(ALL, FilterSpec(open_seats=True), ctx) == [0, 1, 2, 4]
    assert apply_filters(ALL, FilterSpec(registrar_list=True), ctx) == [1, 4]


def test_minmax():
    assert _minmax(np.array([2.0, 4.0, 3.0])) == pytest.approx([0.0, 1.0, 0.5])
    assert _minmax(np.array([5.0, 5.0])) == pytest.approx([0.0, 0.0])
    assert _minmax(np.array([])).size == 0


def test_alphabetical_order(ctx):
    # department, then subject, then numeric-aware course number
    assert alphabetical_order(ALL, ctx) == [4, 1, 0, 2, 3]


def test_rank_without_sort_is_alphabetical(ctx):
    scored = rank_courses(ALL, QuerySpec(), ctx)
    assert [s.course for s in scored] == [4, 1, 0, 2, 3]
    assert all(s.score == 0.0 for s in scored)


def _space():
    vecs = np.array([
        [1.0, 0.0], [0.9, 0.1],   # CHEM cluster
        [0.0, 1.0], [0.1, 0.9],   # ENGL cluster
        [0.5, 0.5],
    ])
    keys = [("CHEM", "101"), ("CHEM", "20"), ("ENGL", "50"), ("ENGL", "7B"),
            ("ANTH", "2")]
    return EmbeddingSpace(vecs, keys, [s for s, _ in keys])


def test_preference_scores_pull_and_push(ctx):
    sp = _space()
    spec = QuerySpec(interest="CHEM", disinterest="ENGL")
    scored = rank_courses(ALL, spec, ctx, space=sp)
    assert [s.course for s in scored][:2] == [0, 1]
    assert scored[-1].course in (2, 3)
    # scores are non-increasing
    vals = [s.score for s in scored]
    assert vals == sorted(vals, reverse=True)


def test_swapping_preferences_reverses_extremes(ctx):
    sp = _space()
    fwd = rank_courses(ALL, QuerySpec(interest="CHEM", disinterest="ENGL"), ctx, sp)
    rev = rank_courses(ALL, QuerySpec(interest="ENGL", disinterest="CHEM"), ctx, sp)
    assert [s.course for s in rev] == [s.course for s in fwd][::-1]


def test_total_is_sum_of_terms(ctx):
    sp = _space()
    rnn = np.array([0.1, 0.4, 0.2, 0.2, 0.1])
    spec = QuerySpec(interest="CHEM", use_collaborative=True, collaborative_weight=2.0)
    for s in rank_courses(ALL, spec, ctx, sp, rnn):
        assert s.score == pytest.approx(
            s.interest_term + s.disinterest_term + s.collaborative_term)
    # the collaborative term is w * minmax(p) over the candidate set
    best = max(rank_courses(ALL, spec, ctx, sp, rnn),
               key=lambda s: s.collaborative_term)
    assert best.course == 1
    assert best.collaborative_term == pytest.approx(2.0)


def test_rank_requires_space_and_distribution(ctx):
    with pytest.raises(QueryError):
        rank_courses(ALL, QuerySpec(interest="CHEM"), ctx, space=None)
    with pytest.raises(QueryError):
        rank_courses(ALL, QuerySpec(use_collaborative=True), ctx, _space(), None)


def test_preference_scores_function(ctx):
    sp = _space()
    scores = preference_scores(sp, ALL, sp.subject_centroid("CHEM"), None)
    assert len(scores) == 5
    assert scores[0] == pytest.approx(max(scores))
    with pytest.raises(QueryError):
        preference_scores(sp, [], None, None)


def test_load_catalog_and_lists(tmp_path):
    cat = tmp_path / "catalog.csv"
    cat.write_text(
        "subject,course_number,title,description,department,division,college,capacity\n"
        "CHEM,101,Gen Chem,atoms and bonds,Chemistry,Phys Sci,Letters,150\n")
    entries = load_catalog(cat)
    assert entries[0].subject == "CHEM" and entries[0].capacity == 150

    vocab = {("CHEM", "101"): 0, ("ENGL", "50"): 1}
    lst = tmp_path / "list.csv"
    lst.write_text("CHEM,101\nNOPE,1\n")
    assert load_course_list(lst, vocab) == {0}

    eq = tmp_path / "eq.csv"
    eq.write_text("subject_a,number_a,subject_b,number_b\nCHEM,101,ENGL,50\n")
    assert load_equivalencies(eq, vocab) == {frozenset((0, 1))}
