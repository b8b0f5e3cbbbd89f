"""Versioned on-disk model containers.

A container is a zip holding `manifest.json` (format version, kind, config,
vocabularies, and the shape/dtype of every array) plus one little-endian
float32 blob per array. Loading validates every shape and byte count
against the manifest.
"""

from __future__ import annotations

import dataclasses
import json
import zipfile

import numpy as np

from .embedding import SkipGramConfig, SkipGramModel
from .lstm import LstmConfig, LstmModel

FORMAT_VERSION = 1


class ModelIOError(Exception):
    pass


def _write_container(path, kind: str, config: dict, meta: dict,
                     arrays: dict[str, np.ndarray]) -> None:
    manifest = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "config": config,
        "meta": meta,
        "arrays": {k: {"shape": list(v.shape), "dtype": "<f4"} for k, v in arrays.items()},
    }
    with zipfile.ZipFile(path, "w", compression=zipfile.ZIP_DEFLATED) as z:
        z.writestr("manifest.json", json.dumps(manifest, indent=1))
        for name, arr in arrays.items():
            z.writestr(f"arrays/{name}.bin", arr.astype("<f4").tobytes())


def _read_container(path, expect_kind: str):
    with zipfile.ZipFile(path) as z:
        manifest = json.loads(z.read("manifest.json"))
        if manifest.get("format_version") != FORMAT_VERSION:
            raise ModelIOError(f"unsupported format version {manifest.get('format_version')}")
        if manifest.get("kind") != expect_kind:
            raise ModelIOError(f"expected a {expect_kind} container, got {manifest.get('kind')}")
        arrays = {}
        for name, spec in manifest["arrays"].items():
            raw = z.read(f"arrays/{name}.bin")
            shape = tuple(spec["shape"])
            expected = int(np.prod(shape)) * 4 if shape else 4
            if len(raw) != expected:
                raise ModelIOError(f"array {name}: {len(raw)} bytes, manifest says {expected}")
            arrays[name] = np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)
    return manifest, arrays


def save_skipgram(model: SkipGramModel, course_keys: list[tuple[str, str]], path) -> None:
    if model.W.shape[0] != len(course_keys):
        raise ModelIOError(f"{len(course_keys)} course keys for "
                           f"{model.W.shape[0]} embedding rows")
    _write_container(
        path, "skipgram",
        config=dataclasses.asdict(model.config),
        meta={"courses": [list(k) for k in course_keys],
              "epoch_losses": model.epoch_losses},
        arrays={"W": model.W, "Wp": model.Wp},
    )


def load_skipgram(path) -> tuple[SkipGramModel, list[tuple[str, str]]]:
    manifest, arrays = _read_container(path, "skipgram")
    config = SkipGramConfig(**manifest["config"])
    courses = [tuple(k) for k in manifest["meta"]["courses"]]
    if arrays["W"].shape[0] != len(courses):
        raise ModelIOError("vocabulary size does not match embedding rows")
    model = SkipGramModel(arrays["W"], arrays["Wp"], config,
                          list(manifest["meta"].get("epoch_losses", [])))
    return model, courses


def save_lstm(model: LstmModel, course_keys: list[tuple[str, str]], path) -> None:
    if model.vocab_size != len(course_keys):
        raise ModelIOError(f"{len(course_keys)} course keys for vocabulary "
                           f"of {model.vocab_size}")
    _write_container(
        path, "lstm",
        config=dataclasses.asdict(model.config),
        meta={
            "courses": [list(k) for k in course_keys],
            "majors": model.majors,
            "bow_stems": model.bow_stems,
            "aux_weight": model.aux_weight,
            "epoch_losses": model.epoch_losses,
        },
        arrays=model.params,
    )


def load_lstm(path) -> tuple[LstmModel, list[tuple[str, str]]]:
    manifest, arrays = _read_container(path, "lstm")
    config = LstmConfig(**manifest["config"])
    meta = manifest["meta"]
    courses = [tuple(k) for k in meta["courses"]]
    model = LstmModel(
        config=config, params=arrays, vocab_size=len(courses),
        majors=list(meta["majors"]), bow_size=len(meta.get("bow_stems", [])),
        bow_stems=list(meta.get("bow_stems", [])),
        aux_weight=float(meta.get("aux_weight", 0.0)),
        epoch_losses=list(meta.get("epoch_losses", [])),
    )
    if arrays["Wh"].shape != (len(courses), config.hidden):
        raise ModelIOError("output layer shape does not match config/vocabulary")
    return model, courses
