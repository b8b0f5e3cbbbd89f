"""Bag-of-words course-description pipeline.

Descriptions are lowercased, stripped of punctuation, stop-word filtered,
and Porter-stemmed; the top-k most frequent remaining stems are dropped as
overly generic before building the multi-hot vocabulary.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .porter import stem

_TOKEN_RE = re.compile(r"[a-z]+")

# Shipped default stop list; callers may pass their own.
DEFAULT_STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because been
before being below between both but by can cannot could did do does doing down
during each few for from further had has have having he her here hers herself
him himself his how i if in into is it its itself me more most my myself no
nor not of off on once only or other our ours ourselves out over own same she
should so some such than that the their theirs them themselves then there
these they this those through to too under until up very was we were what when
where which while who whom why will with would you your yours yourself
yourselves
""".split())


class TextError(Exception):
    pass


def tokenize(text: str, stopwords: frozenset[str] = DEFAULT_STOPWORDS) -> list[str]:
    """Lowercase, strip punctuation, drop stopwords, Porter-stem."""
    words = _TOKEN_RE.findall(text.lower())
    return [stem(w) for w in words if w not in stopwords]


@dataclass
class BowVocabulary:
    index: dict[str, int]
    doc_freq: dict[str, int]
    removed: list[str]  # the top-k generic stems excluded from the vocabulary
    stopwords: frozenset[str] = field(default=DEFAULT_STOPWORDS, repr=False)

    @property
    def size(self) -> int:
        return len(self.index)

    @property
    def stems(self) -> list[str]:
        ordered = sorted(self.index.items(), key=lambda kv: kv[1])
        return [s for s, _ in ordered]


def build_bow_vocabulary(descriptions: list[str],
                         stopwords: frozenset[str] = DEFAULT_STOPWORDS,
                         top_k_removed: int = 15) -> BowVocabulary:
    """Build the stem vocabulary over a description corpus.

    The `top_k_removed` most frequent stems (by total occurrence count,
    counted after stemming; ties broken lexicographically) are excluded.
    Vocabulary indices are assigned in lexicographic stem order.
    """
    if top_k_removed < 0:
        raise ValueError("top_k_removed must be >= 0")
    counts: Counter[str] = Counter()
    doc_freq: Counter[str] = Counter()
    for text in descriptions:
        toks = tokenize(text, stopwords)
        counts.update(toks)
        doc_freq.update(set(toks))
    if not counts:
        raise TextError("no usable tokens in any description")
    by_freq = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    removed = [s for s, _ in by_freq[:top_k_removed]]
    kept = sorted(s for s, _ in by_freq[top_k_removed:])
    return BowVocabulary(
        index={s: i for i, s in enumerate(kept)},
        doc_freq={s: doc_freq[s] for s in kept},
        removed=removed,
        stopwords=stopwords,
    )


def vectorize_description(text: str, vocab: BowVocabulary) -> np.ndarray:
    """Multi-hot {0,1} vector over the vocabulary; OOV stems are ignored."""
    vec = np.zeros(vocab.size, dtype=np.float64)
    for tok in tokenize(text, vocab.stopwords):
        idx = vocab.index.get(tok)
        if idx is not None:
            vec[idx] = 1.0
    return vec


def bow_cosine_rank(query_index: int, candidate_indices: list[int],
                    vectors: np.ndarray) -> list[tuple[int, float, int]]:
    """Rank candidates by cosine similarity to a query course.

    Returns (course_index, similarity, rank) sorted best-first, excluding the
    query itself; ties broken by course index ascending. A zero query vector
    gives similarity 0 everywhere.
    """
    q = vectors[query_index]
    qn = np.linalg.norm(q)
    scored = []
    for ci in candidate_indices:
        if ci == query_index:
            continue
        v = vectors[ci]
        vn = np.linalg.norm(v)
        sim = 0.0 if qn == 0 or vn == 0 else float(np.dot(q, v) / (qn * vn))
        scored.append((ci, sim))
    scored.sort(key=lambda t: (-t[1], t[0]))
    return [(ci, sim, rank) for rank, (ci, sim) in enumerate(scored, start=1)]


def export_vocabulary(vocab: BowVocabulary, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for s in vocab.stems:
            f.write(f"{s}\t{vocab.index[s]}\t{vocab.doc_freq[s]}\n")
        f.write("# removed\n")
        for s in vocab.removed:
            f.write(f"{s}\n")
