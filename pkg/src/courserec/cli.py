"""Command-line interface.

All commands operate on an artifacts directory: `ingest` (or `synth`)
writes the normalized `enrollments.csv` plus side files, the train-*
commands add model containers next to it, and `evaluate`/`query`/`serve`
consume whatever is there. Every command takes --seed and an optional
--config JSON file whose keys override the relevant config dataclass.
"""

from __future__ import annotations

import dataclasses
import functools
import json
import os
import shutil
import sys
from pathlib import Path

import click
import numpy as np

from . import baselines, data, embedding, evaluation, lstm, modelio, projection
from . import query as querymod
from . import synth as synthmod
from . import textpipe
from .data import DataError, Semester
from .snapshot import SnapshotError, load_snapshot

_ERRORS = (DataError, SnapshotError, modelio.ModelIOError,
           embedding.EmbeddingError, lstm.LstmError, baselines.BaselineError,
           evaluation.EvalError, querymod.QueryError, textpipe.TextError,
           synthmod.SynthError, projection.ProjectionError, OSError)


def _handled(fn):
    """Turn library errors into structured stderr messages, exit code 1."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _ERRORS as e:
            raise click.ClickException(f"{type(e).__name__}: {e}") from None

    return wrapper


def _common(fn):
    fn = click.option("--artifacts", type=click.Path(file_okay=False),
                      default="artifacts", show_default=True,
                      help="Artifacts directory.")(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
                      default=None, help="JSON file of config overrides.")(fn)
    return fn


def _load_overrides(config_path: str | None) -> dict:
    if config_path is None:
        return {}
    with open(config_path, encoding="utf-8") as f:
        overrides = json.load(f)
    if not isinstance(overrides, dict):
        raise click.ClickException("config file must hold a JSON object")
    return overrides


def _apply_overrides(cfg, overrides: dict):
    """Replace dataclass fields from a {name: value} dict; unknown keys fail."""
    names = {f.name for f in dataclasses.fields(cfg)}
    unknown = sorted(set(overrides) - names)
    if unknown:
        raise click.ClickException(
            f"unknown config keys {unknown}; valid keys: {sorted(names)}")
    coerced = {k: tuple(v) if isinstance(v, list) else v for k, v in overrides.items()}
    try:
        return dataclasses.replace(cfg, **coerced)
    except (TypeError, ValueError) as e:
        raise click.ClickException(f"bad config override: {e}") from None


def _table(artifacts: str) -> data.EnrollmentTable:
    path = Path(artifacts) / "enrollments.csv"
    if not path.exists():
        raise click.ClickException(
            f"no enrollments.csv under {artifacts}; run `ingest` or `synth` first")
    return data.parse_enrollments(path)


def _echo_json(obj) -> None:
    click.echo(json.dumps(obj, indent=2))


@click.group()
@click.version_option(package_name="courserec")
def main():
    """Enrollment-sequence course recommendation toolkit."""


@main.command()
@_common
@click.option("--students", type=int, default=2000, show_default=True)
def synth(artifacts, seed, config_path, students):
    """Generate a synthetic enrollment world into the artifacts directory."""
    cfg = synthmod.SynthConfig(seed=seed, n_students=students)
    cfg = _apply_overrides(cfg, _load_overrides(config_path))
    _run_synth(cfg, artifacts)


@_handled
def _run_synth(cfg, artifacts):
    out = Path(artifacts)
    out.mkdir(parents=True, exist_ok=True)
    table, truth = synthmod.generate(cfg)
    data.write_enrollments(table, out / "enrollments.csv")
    synthmod.write_catalog(table, truth, out / "catalog.csv", seed=cfg.seed)
    synthmod.write_equivalencies(truth, out / "equivalency.csv")
    (out / "ground_truth.json").write_text(truth.to_json(), encoding="utf-8")
    stats = data.dataset_stats(table)
    _echo_json({"records": stats.n_records, "students": stats.n_students,
                "courses": stats.n_courses,
                "semesters": len(stats.active_students_per_semester)})


@main.command()
@_common
@click.argument("source", type=click.Path(exists=True, dir_okay=False))
@click.option("--catalog", "catalog_src", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Catalog CSV to place alongside the enrollments.")
@click.option("--min-course-enrollments", type=int, default=10, show_default=True)
@click.option("--min-semesters", type=int, default=2, show_default=True)
@click.option("--max-semesters", type=int, default=12, show_default=True)
@click.option("--no-filter", is_flag=True, help="Skip course/student filtering.")
@_handled
def ingest(artifacts, seed, config_path, source, catalog_src,
           min_course_enrollments, min_semesters, max_semesters, no_filter):
    """Validate and normalize an enrollment CSV into the artifacts directory.

    Filtering happens here, once, so every later stage shares one course
    vocabulary.
    """
    del seed, config_path
    table = data.parse_enrollments(source)
    raw = len(table)
    if not no_filter:
        table = data.filter_courses(table, min_course_enrollments)
        table = data.filter_students(table, min_semesters, max_semesters)
    if not table.records:
        raise click.ClickException("no records survive filtering")
    out = Path(artifacts)
    out.mkdir(parents=True, exist_ok=True)
    data.write_enrollments(table, out / "enrollments.csv")
    if catalog_src:
        shutil.copyfile(catalog_src, out / "catalog.csv")
    stats = data.dataset_stats(table)
    _echo_json({"records": stats.n_records, "records_dropped": raw - stats.n_records,
                "duplicates_dropped": stats.duplicates_dropped,
                "students": stats.n_students, "courses": stats.n_courses,
                "active_students_per_semester": stats.active_students_per_semester})


@main.command("train-embedding")
@_common
@click.option("--dim", type=int, default=229, show_default=True)
@click.option("--window", type=int, default=2, show_default=True)
@click.option("--epochs", type=int, default=5, show_default=True)
@click.option("--objective", default="softmax", show_default=True,
              help='"softmax" or "neg<k>", e.g. "neg5".')
@click.option("--backend", type=click.Choice(["auto", "cython", "pure"]),
              default="auto", show_default=True)
@_handled
def train_embedding(artifacts, seed, config_path, dim, window, epochs,
                    objective, backend):
    """Fit skip-gram course embeddings and save skipgram.zip."""
    cfg = embedding.SkipGramConfig(dimension=dim, window=window, epochs=epochs,
                                   seed=seed, objective=objective, backend=backend)
    cfg = _apply_overrides(cfg, _load_overrides(config_path))
    table = _table(artifacts)
    sequences = [s.tokens for s in data.serialize_sequences(table, cfg.seed)]
    model = embedding.train_skipgram(sequences, len(table.vocab), cfg)
    modelio.save_skipgram(model, table.vocab_list, Path(artifacts) / "skipgram.zip")
    _echo_json({"courses": len(table.vocab), "dimension": cfg.dimension,
                "epoch_losses": [round(x, 6) for x in model.epoch_losses],
                "saved": str(Path(artifacts) / "skipgram.zip")})


@main.command("train-lstm")
@_common
@click.option("--hidden", type=int, default=256, show_default=True)
@click.option("--layers", type=int, default=1, show_default=True)
@click.option("--epochs", type=int, default=10, show_default=True)
@click.option("--batch-size", type=int, default=32, show_default=True)
@click.option("--aux-weight", type=float, default=None,
              help="Keyword-head loss weight; omit for auto-balancing.")
@click.option("--no-aux", is_flag=True, help="Disable the keyword head even "
              "when a catalog with descriptions exists.")
@click.option("--holdout", default=None,
              help='Train only on records before this semester, e.g. "Fall 2016". '
                   "Default: the last semester in the table.")
@click.option("--full", "train_full", is_flag=True,
              help="Train on every semester (no holdout); for serving models.")
@_handled
def train_lstm(artifacts, seed, config_path, hidden, layers, epochs, batch_size,
               aux_weight, no_aux, holdout, train_full):
    """Fit the next-semester sequence model and save lstm.zip."""
    cfg = lstm.LstmConfig(hidden=hidden, layers=layers, epochs=epochs,
                          batch_size=batch_size, seed=seed, aux_weight=aux_weight)
    cfg = _apply_overrides(cfg, _load_overrides(config_path))
    table = _table(artifacts)
    vocab = table.vocab
    course_keys = table.vocab_list
    majors = sorted({r.major for r in table.records})

    if train_full:
        train_table = table
    else:
        cut = Semester.parse(holdout) if holdout else table.semesters()[-1]
        train_table = data.EnrollmentTable(
            [r for r in table.records if r.semester < cut])
        train_table._vocab = vocab
        if not train_table.records:
            raise click.ClickException(f"no records before holdout semester {cut}")

    bow_matrix = bow_stems = None
    cat_path = Path(artifacts) / "catalog.csv"
    if not no_aux and cat_path.exists():
        entries = querymod.load_catalog(cat_path)
        by_key = {(e.subject, e.course_number): e.description for e in entries}
        descriptions = [by_key.get(k, "") for k in course_keys]
        if any(descriptions):
            bow_vocab = textpipe.build_bow_vocabulary([d for d in descriptions if d])
            bow_matrix = np.stack([textpipe.vectorize_description(d, bow_vocab)
                                   for d in descriptions])
            bow_stems = bow_vocab.stems

    histories = data.student_histories(train_table)
    model = lstm.fit(histories, len(vocab), majors, cfg,
                     bow_matrix=bow_matrix, bow_stems=bow_stems)
    modelio.save_lstm(model, course_keys, Path(artifacts) / "lstm.zip")
    _echo_json({"students": len(histories), "courses": len(vocab),
                "aux_head": model.has_aux,
                "aux_weight": model.aux_weight if model.has_aux else None,
                "epoch_losses": [round(x, 6) for x in model.epoch_losses],
                "saved": str(Path(artifacts) / "lstm.zip")})


@main.command("train-baselines")
@_common
@click.option("--order", type=int, default=3, show_default=True,
              help="Maximum n-gram order.")
@_handled
def train_baselines(artifacts, seed, config_path, order):
    """Fit the n-gram baseline and export its count tables to ngram.txt."""
    del config_path
    table = _table(artifacts)
    sequences = data.serialize_sequences(table, seed)
    ngram = baselines.train_ngram(sequences, order, len(table.vocab))
    out = Path(artifacts) / "ngram.txt"
    baselines.export_ngram(ngram, out)
    _echo_json({"order": order,
                "contexts": {str(n): len(t) for n, t in sorted(ngram.tables.items())},
                "saved": str(out)})


@main.command()
@_common
@click.option("--model", "model_name", default="lstm", show_default=True,
              type=click.Choice(["lstm", "ngram", "popularity", "popularity-major"]))
@click.option("--target", default=None,
              help='Target semester, e.g. "Fall 2016". Default: the last one.')
@click.option("--k", type=int, default=10, show_default=True)
@click.option("--order", type=int, default=3, show_default=True,
              help="N-gram order (ngram model only).")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None,
              help="Write the per-student report CSV here.")
@click.option("--breakdown", "dims", multiple=True,
              type=click.Choice(["prior_semesters", "college", "major"]))
@_handled
def evaluate(artifacts, seed, config_path, model_name, target, k, order,
             out_path, dims):
    """Masked recall@k / MRR@k on a held-out semester."""
    del config_path
    table = _table(artifacts)
    vocab = table.vocab
    sem = Semester.parse(target) if target else table.semesters()[-1]
    prior = data.EnrollmentTable([r for r in table.records if r.semester < sem])
    prior._vocab = vocab
    if not prior.records:
        raise click.ClickException(f"no records precede target semester {sem}")

    if model_name == "lstm":
        path = Path(artifacts) / "lstm.zip"
        if not path.exists():
            raise click.ClickException("no lstm.zip; run `train-lstm` first")
        model, courses = modelio.load_lstm(path)
        if courses != table.vocab_list:
            raise click.ClickException("lstm.zip vocabulary does not match the table")
        predictor = evaluation.LstmPredictor(model)
    elif model_name == "ngram":
        sequences = data.serialize_sequences(prior, seed)
        predictor = evaluation.NgramPredictor(
            baselines.train_ngram(sequences, order, len(vocab)))
    else:
        pop = baselines.train_popularity(table, sem, by_major=(model_name == "popularity-major"))
        predictor = evaluation.PopularityPredictor(pop)

    college_of = {}
    gt_path = Path(artifacts) / "ground_truth.json"
    if gt_path.exists():
        college_of = synthmod.GroundTruth.from_json(
            gt_path.read_text(encoding="utf-8")).college_of_major
    report = evaluation.evaluate(predictor, table, sem, k=k,
                                 college_of_major=college_of)
    if out_path:
        report.write_csv(out_path)
    payload = {"model": model_name, "target": str(sem), **report.aggregate_dict()}
    for dim in dims:
        payload[f"by_{dim}"] = {
            g: {"students": n, "recall": r, "mrr": m}
            for g, (n, r, m) in report.breakdown(dim).items()}
    _echo_json(payload)


@main.command("validate-equivalency")
@_common
@_handled
def validate_equivalency(artifacts, seed, config_path):
    """Rank each equivalent course among its partner's nearest neighbors."""
    del seed, config_path
    table = _table(artifacts)
    sg_path = Path(artifacts) / "skipgram.zip"
    eq_path = Path(artifacts) / "equivalency.csv"
    if not sg_path.exists():
        raise click.ClickException("no skipgram.zip; run `train-embedding` first")
    if not eq_path.exists():
        raise click.ClickException(f"no equivalency.csv under {artifacts}")
    model, courses = modelio.load_skipgram(sg_path)
    if courses != table.vocab_list:
        raise click.ClickException("skipgram.zip vocabulary does not match the table")
    pairs = [tuple(sorted(p)) for p in
             querymod.load_equivalencies(eq_path, table.vocab)]
    stats = embedding.equivalency_rank_eval(model.W, sorted(pairs),
                                            list(range(len(courses))))
    if not stats.ranks:
        raise click.ClickException("no equivalency pairs are in vocabulary")
    _echo_json({"pairs_evaluated": len(stats.ranks) // 2, "skipped": stats.skipped,
                "candidates": len(courses), "median_rank": stats.median,
                "mean_rank": round(stats.mean, 4), "std_rank": round(stats.std, 4)})


def _filter_options(fn):
    fn = click.option("--offered", is_flag=True)(fn)
    fn = click.option("--not-taken", is_flag=True)(fn)
    fn = click.option("--no-credit-restriction", is_flag=True)(fn)
    fn = click.option("--department", default=None)(fn)
    fn = click.option("--requirement-list", default=None)(fn)
    fn = click.option("--open-seats", is_flag=True)(fn)
    fn = click.option("--registrar-list", is_flag=True)(fn)
    return fn


@main.command("query")
@_common
@click.option("--student", "student_id", default=None,
              help="Use this student's taken courses and history.")
@click.option("--interest", default=None, help="Subject to pull toward.")
@click.option("--disinterest", default=None, help="Subject to push away from.")
@click.option("--collaborative", is_flag=True,
              help="Blend in the sequence model's next-semester probability.")
@click.option("--collaborative-weight", type=float, default=1.0, show_default=True)
@click.option("--k", type=int, default=10, show_default=True)
@_filter_options
@_handled
def query_cmd(artifacts, seed, config_path, student_id, interest, disinterest,
              collaborative, collaborative_weight, k, offered, not_taken,
              no_credit_restriction, department, requirement_list, open_seats,
              registrar_list):
    """Rank catalog courses for a preference/filter query."""
    del seed, config_path
    snap = load_snapshot(artifacts)
    hist = data.StudentHistory("(anonymous)", data.EntryType.NEW_FRESHMAN, [])
    if student_id is not None:
        if student_id not in snap.histories:
            raise click.ClickException(f"unknown student {student_id!r}")
        hist = snap.histories[student_id]
    taken = {c for sl in hist.slices for c in sl.courses}
    ctx = snap.query_context(taken)
    spec = querymod.QuerySpec(
        interest=interest, disinterest=disinterest,
        use_collaborative=collaborative,
        collaborative_weight=collaborative_weight,
        filters=querymod.FilterSpec(
            offered=offered, not_taken=not_taken,
            no_credit_restriction=no_credit_restriction, department=department,
            requirement_list=requirement_list, open_seats=open_seats,
            registrar_list=registrar_list))
    filtered = querymod.apply_filters(list(range(len(snap.course_keys))),
                                      spec.filters, ctx)
    rnn = None
    if collaborative:
        if snap.lstm_model is None:
            raise click.ClickException("no lstm.zip; run `train-lstm` first")
        if filtered:
            major = hist.slices[-1].major if hist.slices else None
            rnn = lstm.predict_next(snap.lstm_model, hist, set(filtered),
                                    major_hint=major)
    scored = querymod.rank_courses(filtered, spec, ctx, space=snap.space,
                                   rnn_distribution=rnn)
    for i, sc in enumerate(scored[:k], start=1):
        entry = snap.catalog[sc.course]
        click.echo(f"{i:3d}. {entry.subject} {entry.course_number}  "
                   f"{sc.score:+.4f}  {entry.title}")
    if not scored:
        click.echo("(no courses pass the filters)", err=True)


@main.command()
@_common
@click.argument("student_id")
@click.option("--k", type=int, default=5, show_default=True)
@_handled
def keywords(artifacts, seed, config_path, student_id, k):
    """Top description keywords the model associates with each semester."""
    del seed, config_path
    snap = load_snapshot(artifacts)
    if snap.lstm_model is None or not snap.lstm_model.has_aux:
        raise click.ClickException("no keyword-capable model; train with a catalog present")
    hist = snap.histories.get(student_id)
    if hist is None:
        raise click.ClickException(f"unknown student {student_id!r}")
    words = lstm.top_keywords(snap.lstm_model, hist, k)
    labels = ["start"] + [str(sl.semester) for sl in hist.slices]
    for label, chips in zip(labels, words):
        click.echo(f"{label}: {', '.join(chips)}")


@main.command()
@_common
@click.option("--method", type=click.Choice(["pca", "tsne"]), default="pca",
              show_default=True)
@click.option("--limit", type=int, default=200, show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True,
              help="Output CSV of student_id,major,x,y.")
@_handled
def project(artifacts, seed, config_path, method, limit, out_path):
    """2-D projection of per-student hidden states."""
    del config_path
    snap = load_snapshot(artifacts)
    if snap.lstm_model is None:
        raise click.ClickException("no lstm.zip; run `train-lstm` first")
    sids = [s for s in sorted(snap.histories) if snap.histories[s].slices][:limit]
    if len(sids) < 3:
        raise click.ClickException("not enough students with history to project")
    states = np.stack([lstm.extract_hidden_state(snap.lstm_model, snap.histories[s])
                       for s in sids])
    pts = projection.project_2d(states, method=method, seed=seed)
    import csv

    with open(out_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["student_id", "major", "x", "y"])
        for sid, (x, y) in zip(sids, pts):
            w.writerow([sid, snap.histories[sid].slices[-1].major,
                        f"{x:.6f}", f"{y:.6f}"])
    _echo_json({"method": method, "students": len(sids), "saved": out_path})


@main.command()
@_common
@click.option("--what", type=click.Choice(["embeddings", "vocabulary"]),
              default="embeddings", show_default=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@_handled
def export(artifacts, seed, config_path, what, out_path):
    """Export embeddings (word2vec text) or the description stem vocabulary."""
    del seed, config_path
    if what == "embeddings":
        sg_path = Path(artifacts) / "skipgram.zip"
        if not sg_path.exists():
            raise click.ClickException("no skipgram.zip; run `train-embedding` first")
        model, courses = modelio.load_skipgram(sg_path)
        tokens = [f"{s}-{n}" for s, n in courses]
        embedding.export_embeddings(model.W, tokens, out_path)
    else:
        cat_path = Path(artifacts) / "catalog.csv"
        if not cat_path.exists():
            raise click.ClickException(f"no catalog.csv under {artifacts}")
        entries = querymod.load_catalog(cat_path)
        vocab = textpipe.build_bow_vocabulary(
            [e.description for e in entries if e.description])
        textpipe.export_vocabulary(vocab, out_path)
    _echo_json({"what": what, "saved": out_path})


@main.command()
@_common
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
@_handled
def serve(artifacts, seed, config_path, host, port):
    """Serve the JSON API over the artifacts directory.

    The directory may also come from the COURSEREC_ARTIFACTS environment
    variable; an explicit --artifacts wins.
    """
    del seed, config_path
    import uvicorn

    from .service import create_app

    if artifacts == "artifacts" and os.environ.get("COURSEREC_ARTIFACTS"):
        artifacts = os.environ["COURSEREC_ARTIFACTS"]
    snap = load_snapshot(artifacts)
    click.echo(f"model version {snap.version}; serving on {host}:{port}", err=True)
    uvicorn.run(create_app(snap), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    sys.exit(main())
