"""Skip-gram course embeddings and vector-space query primitives.

Training runs one SGD update per (center, context) pair over serialized
enrollment sequences. The hot loop lives in a compiled Cython kernel when
available, with a pure-numpy fallback selected at import time.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from statistics import median

import numpy as np

from . import _sgdpure

try:
    from . import _sgdkernel
    HAVE_KERNEL = True
except ImportError:  # extension not built; fall back to numpy
    _sgdkernel = None
    HAVE_KERNEL = False


class EmbeddingError(Exception):
    pass


@dataclass
class SkipGramConfig:
    dimension: int = 229
    window: int = 2
    epochs: int = 5
    learning_rate: float = 0.025
    learning_rate_min: float = 1e-4
    seed: int = 0
    objective: str = "softmax"  # "softmax" or "neg<k>" e.g. "neg5"
    backend: str = "auto"  # "auto" | "cython" | "pure"

    def __post_init__(self):
        if self.dimension < 1 or self.window < 1 or self.learning_rate <= 0:
            raise ValueError("invalid skip-gram config")

    @property
    def negative_samples(self) -> int:
        return int(self.objective[3:]) if self.objective.startswith("neg") else 0


@dataclass
class SkipGramModel:
    W: np.ndarray  # input matrix, |V| x d; rows are the course vectors
    Wp: np.ndarray  # output matrix, |V| x d
    config: SkipGramConfig
    epoch_losses: list[float] = field(default_factory=list)

    @property
    def vocab_size(self) -> int:
        return self.W.shape[0]


def _window_pairs(tokens: list[int], c: int) -> list[tuple[int, int]]:
    """All (center, context) pairs with window truncated at sequence ends."""
    pairs = []
    n = len(tokens)
    for t in range(n):
        for i in range(max(0, t - c), min(n, t + c + 1)):
            if i != t:
                pairs.append((tokens[t], tokens[i]))
    return pairs


def skipgram_forward(model: SkipGramModel, course: int) -> np.ndarray:
    """Softmax distribution over the vocabulary given an input course."""
    if not 0 <= course < model.vocab_size:
        raise EmbeddingError(f"course index {course} out of vocabulary")
    scores = model.Wp @ model.W[course]
    scores -= scores.max()
    p = np.exp(scores)
    return p / p.sum()


def pair_loss_and_grads(W: np.ndarray, Wp: np.ndarray,
                        pairs: list[tuple[int, int]]):
    """Total cross-entropy loss over pairs and analytic gradients.

    No updates are applied; used by the finite-difference gradient check.
    """
    dW = np.zeros_like(W)
    dWp = np.zeros_like(Wp)
    loss = 0.0
    for wi, wo in pairs:
        v = W[wi]
        scores = Wp @ v
        scores -= scores.max()
        p = np.exp(scores)
        p /= p.sum()
        loss += -float(np.log(p[wo]))
        g = p.copy()
        g[wo] -= 1.0
        dW[wi] += Wp.T @ g
        dWp += np.outer(g, v)
    return loss, dW, dWp


def _select_backend(config: SkipGramConfig):
    if config.objective != "softmax":
        return _sgdpure  # negative sampling only has a numpy implementation
    if config.backend == "pure":
        return _sgdpure
    if config.backend == "cython":
        if not HAVE_KERNEL:
            raise EmbeddingError("cython backend requested but extension not built")
        return _sgdkernel
    return _sgdkernel if HAVE_KERNEL else _sgdpure


def _train_negative_sampling(W, Wp, centers, contexts, config, rng, unigram_cum):
    """Sigmoid-based negative-sampling epoch; approximation of the softmax
    objective for large vocabularies."""
    k = config.negative_samples
    loss = 0.0
    lr = config.learning_rate
    for p in range(len(centers)):
        wi, wo = int(centers[p]), int(contexts[p])
        v = W[wi]
        dv = np.zeros_like(v)
        negs = np.searchsorted(unigram_cum, rng.random(k))
        for target, label in [(wo, 1.0)] + [(int(n), 0.0) for n in negs]:
            if label == 0.0 and target == wo:
                continue
            s = 1.0 / (1.0 + np.exp(-np.dot(Wp[target], v)))
            loss += -np.log(s if label else 1.0 - s + 1e-12)
            g = s - label
            dv += g * Wp[target]
            Wp[target] -= lr * g * v
        W[wi] -= lr * dv
    return loss


def train_skipgram(sequences: list[list[int]], vocab_size: int,
                   config: SkipGramConfig | None = None) -> SkipGramModel:
    """Fit skip-gram embeddings over serialized course sequences.

    Deterministic given config.seed. Input matrix rows are initialized
    uniform in [-0.5/d, 0.5/d]; the output matrix starts at zero, so the
    initial per-pair loss is ln |V|.
    """
    config = config or SkipGramConfig()
    if not sequences:
        raise EmbeddingError("no training sequences")
    rng = np.random.default_rng(config.seed)
    d = config.dimension
    W = rng.uniform(-0.5 / d, 0.5 / d, size=(vocab_size, d))
    Wp = np.zeros((vocab_size, d))
    model = SkipGramModel(W, Wp, config)

    pairs = []
    for seq in sequences:
        pairs.extend(_window_pairs(seq, config.window))
    if not pairs:
        warnings.warn("no training pairs (all sequences of length 1); model left at init")
        return model
    centers = np.asarray([a for a, _ in pairs], dtype=np.int32)
    contexts = np.asarray([b for _, b in pairs], dtype=np.int32)
    total = len(pairs) * config.epochs

    if config.negative_samples:
        counts = np.bincount(centers, minlength=vocab_size).astype(np.float64)
        weights = counts ** 0.75
        unigram_cum = np.cumsum(weights / weights.sum())
        for _ in range(config.epochs):
            loss = _train_negative_sampling(W, Wp, centers, contexts, config, rng, unigram_cum)
            model.epoch_losses.append(loss / len(pairs))
        return model

    backend = _select_backend(config)
    for epoch in range(config.epochs):
        loss = backend.train_pairs(W, Wp, centers, contexts,
                                   config.learning_rate, config.learning_rate_min,
                                   epoch * len(pairs), total)
        model.epoch_losses.append(loss / len(pairs))
    return model


def cosine(v1: np.ndarray, v2: np.ndarray) -> float:
    if v1.shape != v2.shape:
        raise EmbeddingError(f"dimension mismatch: {v1.shape} vs {v2.shape}")
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    if n1 == 0 or n2 == 0:
        return 0.0
    return float(np.dot(v1, v2) / (n1 * n2))


@dataclass
class EmbeddingSpace:
    """Course index -> vector map with per-course subject metadata."""

    vectors: np.ndarray  # |V| x d
    course_keys: list[tuple[str, str]]  # (subject, number) per index
    subjects: list[str]

    def __post_init__(self):
        if not np.isfinite(self.vectors).all():
            raise EmbeddingError("embedding space contains non-finite values")

    @classmethod
    def from_model(cls, model: SkipGramModel, course_keys: list[tuple[str, str]]) -> "EmbeddingSpace":
        return cls(model.W.copy(), course_keys, [s for s, _ in course_keys])

    @property
    def size(self) -> int:
        return self.vectors.shape[0]

    def nearest_neighbors(self, course: int, k: int) -> list[tuple[int, float]]:
        """Top-k courses by cosine similarity, excluding the query; ties by index."""
        if not 0 <= course < self.size:
            raise EmbeddingError(f"course index {course} out of range")
        if k < 1:
            raise ValueError("k must be >= 1")
        sims = [(i, cosine(self.vectors[course], self.vectors[i]))
                for i in range(self.size) if i != course]
        sims.sort(key=lambda t: (-t[1], t[0]))
        return sims[:k]

    def subject_centroid(self, subject: str) -> np.ndarray:
        rows = [i for i, s in enumerate(self.subjects) if s == subject]
        if not rows:
            raise EmbeddingError(f"no courses carry subject {subject!r}")
        return self.vectors[rows].mean(axis=0)


@dataclass
class RankStats:
    ranks: list[int]  # one entry per evaluated pair direction
    skipped: int

    @property
    def median(self) -> float:
        return float(median(self.ranks))

    @property
    def mean(self) -> float:
        return float(np.mean(self.ranks))

    @property
    def std(self) -> float:
        return float(np.std(self.ranks))


def equivalency_rank_eval(vectors: np.ndarray, pairs: list[tuple[int, int]],
                          candidates: list[int]) -> RankStats:
    """Rank of each pair partner among cosine similarities to all candidates.

    Both directions of every pair are evaluated (c1->c2 and c2->c1); rank 1
    means the partner was the most similar candidate. Ties in similarity are
    broken by candidate index ascending.
    """
    cand = sorted(set(candidates))
    in_cand = set(cand)
    ranks = []
    skipped = 0
    for a, b in pairs:
        if a not in in_cand or b not in in_cand:
            skipped += 1
            continue
        for query, partner in ((a, b), (b, a)):
            scored = [(c, cosine(vectors[query], vectors[c]))
                      for c in cand if c != query]
            scored.sort(key=lambda t: (-t[1], t[0]))
            rank = next(i for i, (c, _) in enumerate(scored, start=1) if c == partner)
            ranks.append(rank)
    return RankStats(ranks, skipped)


def export_embeddings(vectors: np.ndarray, tokens: list[str], path) -> None:
    """word2vec text format: `<count> <dim>` header then one vector per line."""
    n, d = vectors.shape if vectors.size else (0, vectors.shape[1])
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{n} {d}\n")
        for tok, row in zip(tokens, vectors):
            f.write(tok + " " + " ".join(f"{x:.6f}" for x in row) + "\n")


def import_embeddings(path) -> tuple[np.ndarray, list[str]]:
    with open(path, encoding="utf-8") as f:
        header = f.readline().split()
        n, d = int(header[0]), int(header[1])
        tokens, rows = [], []
        for line in f:
            parts = line.rstrip("\n").split(" ")
            tokens.append(parts[0])
            rows.append([float(x) for x in parts[1:]])
    vectors = np.asarray(rows, dtype=np.float64) if rows else np.zeros((0, d))
    if vectors.shape != (n, d):
        raise EmbeddingError("embedding file shape does not match its header")
    return vectors, tokens
