import io

import pytest
from hypothesis import given, strategies as st

from courserec import data
from courserec.data import (
    DataError, EnrollmentTable, EntryType, Semester,
    filter_courses, filter_students, parse_enrollments, serialize_sequences,
    split_by_semester, student_histories, write_enrollments,
)
from conftest import make_record

CSV = """semester,student_id,major,entry_type,subject,course_number,grade
Fall 2014,a,MajorA,New Freshman,SUBJ,101,B
Fall 2014,a,MajorA,New Freshman,SUBJ,102,A
Spring 2015,a,MajorA,New Freshman,SUBJ,103,
Fall 2014,b,MajorB,Transfer Student,SUBJ,101,C+
"""


def test_parse_basic():
    t = parse_enrollments(io.StringIO(CSV))
    assert len(t) == 4
    assert t.vocab == {("SUBJ", "101"): 0, ("SUBJ", "102"): 1, ("SUBJ", "103"): 2}
    assert t.records[3].entry_type == EntryType.TRANSFER
    assert t.records[2].grade is None
    assert t.records[3].grade == "C+"


def test_parse_duplicates_dropped():
    dup = CSV + "Fall 2014,a,MajorA,New Freshman,SUBJ,101,B\n"
    t = parse_enrollments(io.StringIO(dup))
    assert len(t) == 4
    assert t.duplicates_dropped == 1


def test_parse_bad_semester_reports_line():
    bad = CSV.replace("Spring 2015", "Winter 2015")
    with pytest.raises(DataError, match="line 4"):
        parse_enrollments(io.StringIO(bad))


def test_parse_bad_header():
    with pytest.raises(DataError, match="header"):
        parse_enrollments(io.StringIO("nope,nope\n1,2\n"))


def test_semester_ordering():
    assert Semester.parse("Spring 2015") < Semester.parse("Summer 2015")
    assert Semester.parse("Summer 2015") < Semester.parse("Fall 2015")
    assert Semester.parse("Fall 2014") < Semester.parse("Spring 2015")
    assert str(Semester.parse(" Fall 2014 ")) == "Fall 2014"


@given(st.integers(1990, 2100), st.integers(0, 2),
       st.integers(1990, 2100), st.integers(0, 2))
def test_semester_order_matches_tuple_order(y1, t1, y2, t2):
    assert (Semester(y1, t1) < Semester(y2, t2)) == ((y1, t1) < (y2, t2))


def test_roundtrip(tmp_path, toy_table):
    path = tmp_path / "enr.csv"
    write_enrollments(toy_table, path)
    again = parse_enrollments(path)
    assert again.records == toy_table.records
    assert again.vocab == toy_table.vocab


def test_filter_courses():
    f14 = Semester(2014, 2)
    recs = [make_record(f14, f"s{i}", 101) for i in range(3)]
    recs += [make_record(f14, "s0", 102)]
    t = filter_courses(EnrollmentTable(recs), min_enrollments=3)
    assert {r.course_number for r in t.records} == {"101"}


def test_filter_students():
    sems = [Semester(2014, 2), Semester(2015, 0), Semester(2015, 2)]
    recs = [make_record(s, "long", 101) for s in sems]
    recs += [make_record(sems[0], "short", 101)]
    t = filter_students(EnrollmentTable(recs), min_semesters=2, max_semesters=2)
    assert t.records == []
    t = filter_students(EnrollmentTable(recs), min_semesters=2, max_semesters=12)
    assert {r.student_id for r in t.records} == {"long"}


def test_student_histories(toy_table):
    hists = {h.student_id: h for h in student_histories(toy_table)}
    a = hists["a"]
    assert [str(sl.semester) for sl in a.slices] == ["Fall 2014", "Spring 2015", "Fall 2015"]
    v = toy_table.vocab
    assert a.slices[0].courses == {v[("SUBJ", "101")], v[("SUBJ", "102")]}
    # unweighted mean of two B grades
    assert a.slices[0].gpa == pytest.approx(3.0)


def test_gpa_missing_grades():
    f14 = Semester(2014, 2)
    t = EnrollmentTable([make_record(f14, "a", 101, grade=None)])
    h = student_histories(t)[0]
    assert h.slices[0].gpa is None


def test_serialize_deterministic_and_order_free(toy_table):
    s1 = serialize_sequences(toy_table, seed=3)
    s2 = serialize_sequences(toy_table, seed=3)
    assert [(x.student_id, x.tokens) for x in s1] == [(x.student_id, x.tokens) for x in s2]
    # reversing the record order must not change any student's stream
    rev = EnrollmentTable(list(reversed(toy_table.records)))
    rev._vocab = toy_table.vocab
    s3 = {x.student_id: x.tokens for x in serialize_sequences(rev, seed=3)}
    for x in s1:
        assert s3[x.student_id] == x.tokens


def test_serialize_respects_semester_blocks(toy_table):
    for seq in serialize_sequences(toy_table, seed=0):
        assert seq.semester_of == sorted(seq.semester_of)


def test_split_by_semester(toy_table):
    split = split_by_semester(toy_table, Semester(2015, 0), Semester(2015, 2))
    assert all(r.semester == Semester(2014, 2) for r in split.training.records)
    full = split.full_training_table()
    assert all(r.semester < Semester(2015, 2) for r in full.records)
    with pytest.raises(DataError):
        split_by_semester(toy_table, Semester(2015, 2), Semester(2015, 0))


def test_dataset_stats(toy_table):
    stats = data.dataset_stats(toy_table)
    assert stats.n_records == 10
    assert stats.n_students == 3
    assert stats.n_courses == 5
    assert stats.active_students_per_semester["Fall 2014"] == 2
