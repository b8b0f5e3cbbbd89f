"""Pure-numpy fallback for the skip-gram SGD kernel.

Same update rule and learning-rate schedule as _sgdkernel.pyx; results agree
with the compiled kernel up to floating-point summation order.
"""

from __future__ import annotations

import numpy as np


def train_pairs(W: np.ndarray, Wp: np.ndarray,
                centers: np.ndarray, contexts: np.ndarray,
                lr0: float, lr_min: float,
                pair_offset: int, total_pairs: int) -> float:
    loss = 0.0
    for p in range(len(centers)):
        wi = int(centers[p])
        wo = int(contexts[p])
        lr = lr0 + (lr_min - lr0) * ((pair_offset + p) / float(total_pairs))

        v = W[wi]
        scores = Wp @ v
        scores -= scores.max()
        probs = np.exp(scores)
        probs /= probs.sum()
        loss += -float(np.log(probs[wo]))

        g = probs
        g[wo] -= 1.0
        dv = Wp.T @ g
        Wp -= lr * np.outer(g, v)
        W[wi] -= lr * dv
    return loss
