import numpy as np
import pytest

from courserec import data, embedding, lstm, synth
from courserec.data import EnrollmentRecord, EnrollmentTable, EntryType, Semester


def make_record(sem, sid, course, major="MajorA", entry=EntryType.NEW_FRESHMAN,
                grade="B", subject=None):
    subject = subject or "SUBJ"
    return EnrollmentRecord(sem, sid, major, entry, subject, str(course), grade)


@pytest.fixture
def toy_table():
    """Three students, three semesters, five courses; hand-auditable."""
    f14, s15, f15 = Semester(2014, 2), Semester(2015, 0), Semester(2015, 2)
    recs = [
        make_record(f14, "a", 101), make_record(f14, "a", 102),
        make_record(s15, "a", 103), make_record(s15, "a", 104),
        make_record(f15, "a", 105),
        make_record(f14, "b", 101), make_record(f14, "b", 103),
        make_record(s15, "b", 102),
        make_record(f15, "c", 101), make_record(f15, "c", 104),
    ]
    return EnrollmentTable(recs)


@pytest.fixture(scope="session")
def small_world():
    """A compact synthetic universe shared by the slower integration tests."""
    cfg = synth.SynthConfig(seed=11, n_students=120)
    table, truth = synth.generate(cfg)
    return table, truth, cfg


@pytest.fixture(scope="session")
def small_artifacts(tmp_path_factory, small_world):
    """Artifacts directory with data plus small trained models."""
    table, truth, cfg = small_world
    out = tmp_path_factory.mktemp("artifacts")
    data.write_enrollments(table, out / "enrollments.csv")
    synth.write_catalog(table, truth, out / "catalog.csv", seed=cfg.seed)
    synth.write_equivalencies(truth, out / "equivalency.csv")
    (out / "ground_truth.json").write_text(truth.to_json(), encoding="utf-8")

    sequences = [s.tokens for s in data.serialize_sequences(table, 0)]
    sg = embedding.train_skipgram(
        sequences, len(table.vocab),
        embedding.SkipGramConfig(dimension=16, epochs=2, seed=0))

    from courserec import modelio, query, textpipe

    modelio.save_skipgram(sg, table.vocab_list, out / "skipgram.zip")

    entries = query.load_catalog(out / "catalog.csv")
    by_key = {(e.subject, e.course_number): e.description for e in entries}
    descriptions = [by_key.get(k, "") for k in table.vocab_list]
    bow_vocab = textpipe.build_bow_vocabulary([d for d in descriptions if d])
    bow_matrix = np.stack([textpipe.vectorize_description(d, bow_vocab)
                           for d in descriptions])

    last = table.semesters()[-1]
    train = EnrollmentTable([r for r in table.records if r.semester < last])
    train._vocab = table.vocab
    majors = sorted({r.major for r in table.records})
    model = lstm.fit(data.student_histories(train), len(table.vocab), majors,
                     lstm.LstmConfig(hidden=24, epochs=2, batch_size=64, seed=0),
                     bow_matrix=bow_matrix, bow_stems=bow_vocab.stems)
    modelio.save_lstm(model, table.vocab_list, out / "lstm.zip")
    return out
