"""2-D projection of hidden-state collections: PCA and exact t-SNE.

Exact O(n^2) t-SNE is deliberate; the corpus sizes here are desk scale, so
tree-based acceleration is unnecessary.
"""

from __future__ import annotations

import numpy as np


class ProjectionError(Exception):
    pass


def pca_2d(states: np.ndarray) -> np.ndarray:
    """Project rows onto the top-2 principal components.

    Deterministic up to component sign; signs are fixed by making the
    largest-magnitude loading of each component positive.
    """
    X = np.asarray(states, dtype=np.float64)
    X = X - X.mean(axis=0)
    cov = X.T @ X / (X.shape[0] - 1)
    vals, vecs = np.linalg.eigh(cov)
    comps = vecs[:, np.argsort(vals)[::-1][:2]]
    for j in range(comps.shape[1]):
        lead = np.argmax(np.abs(comps[:, j]))
        if comps[lead, j] < 0:
            comps[:, j] = -comps[:, j]
    return X @ comps


def _pairwise_sq_dists(X: np.ndarray) -> np.ndarray:
    s = (X * X).sum(axis=1)
    d2 = s[:, None] + s[None, :] - 2.0 * (X @ X.T)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def _binary_search_perplexity(d2_row: np.ndarray, i: int, perplexity: float,
                              tol: float = 1e-5, max_iter: int = 60) -> np.ndarray:
    """Row-wise precision search so the conditional distribution's entropy
    matches log(perplexity)."""
    target = np.log(perplexity)
    beta, beta_min, beta_max = 1.0, -np.inf, np.inf
    d = np.delete(d2_row, i)
    for _ in range(max_iter):
        p = np.exp(-d * beta)
        sum_p = p.sum()
        if sum_p <= 0:
            h = 0.0
            p = np.zeros_like(d)
        else:
            h = np.log(sum_p) + beta * (d * p).sum() / sum_p
            p = p / sum_p
        diff = h - target
        if abs(diff) < tol:
            break
        if diff > 0:
            beta_min = beta
            beta = beta * 2.0 if beta_max == np.inf else (beta + beta_max) / 2.0
        else:
            beta_max = beta
            beta = beta / 2.0 if beta_min == -np.inf else (beta + beta_min) / 2.0
    row = np.zeros_like(d2_row)
    row[np.arange(len(d2_row)) != i] = p
    return row


def tsne_2d(states: np.ndarray, seed: int = 0, perplexity: float = 30.0,
            n_iter: int = 500, learning_rate: float = 100.0) -> np.ndarray:
    """Standard exact t-SNE to 2 dimensions, deterministic given seed.

    Perplexity is clamped to (n-1)/3. Early exaggeration for the first 100
    iterations, momentum 0.5 then 0.8.
    """
    X = np.asarray(states, dtype=np.float64)
    n = X.shape[0]
    perplexity = min(perplexity, (n - 1) / 3.0)
    d2 = _pairwise_sq_dists(X)
    P_cond = np.stack([_binary_search_perplexity(d2[i], i, perplexity) for i in range(n)])
    P = (P_cond + P_cond.T) / (2.0 * n)
    P = np.maximum(P, 1e-12)

    rng = np.random.default_rng(seed)
    Y = rng.normal(scale=1e-4, size=(n, 2))
    dY_prev = np.zeros_like(Y)
    for it in range(n_iter):
        exaggeration = 12.0 if it < 100 else 1.0
        momentum = 0.5 if it < 250 else 0.8
        q_num = 1.0 / (1.0 + _pairwise_sq_dists(Y))
        np.fill_diagonal(q_num, 0.0)
        Q = np.maximum(q_num / q_num.sum(), 1e-12)
        PQ = (exaggeration * P - Q) * q_num
        grad = 4.0 * ((np.diag(PQ.sum(axis=1)) - PQ) @ Y)
        dY = momentum * dY_prev - learning_rate * grad
        Y = Y + dY
        dY_prev = dY
        Y = Y - Y.mean(axis=0)
    return Y


def project_2d(states: np.ndarray, method: str = "pca", seed: int = 0,
               perplexity: float = 30.0) -> np.ndarray:
    """Dispatch to pca_2d or tsne_2d; requires at least 3 points."""
    states = np.asarray(states, dtype=np.float64)
    if states.ndim != 2 or states.shape[0] < 3:
        raise ProjectionError("need at least 3 states of uniform dimension")
    method = method.lower()
    if method == "pca":
        return pca_2d(states)
    if method in ("tsne", "exact-tsne"):
        return tsne_2d(states, seed=seed, perplexity=perplexity)
    raise ProjectionError(f"unknown projection method {method!r}")
