# cython: boundscheck=False, wraparound=False, cdivision=True
"""Hot inner loop for full-softmax skip-gram SGD.

Mirrors the pure-numpy fallback in _sgdpure.py update for update; the two
backends differ only in floating-point summation order.
"""

from libc.math cimport exp, log

import numpy as np


def train_pairs(double[:, ::1] W, double[:, ::1] Wp,
                int[::1] centers, int[::1] contexts,
                double lr0, double lr_min,
                long pair_offset, long total_pairs):
    """Run one SGD update per (center, context) pair, in order.

    The learning rate interpolates linearly from lr0 to lr_min over
    total_pairs global updates; pair_offset is the global index of the
    first pair in this call. Returns the summed cross-entropy loss.
    """
    cdef Py_ssize_t V = Wp.shape[0]
    cdef Py_ssize_t d = W.shape[1]
    cdef Py_ssize_t n = centers.shape[0]
    cdef Py_ssize_t p, j, k
    cdef int wi, wo
    cdef double lr, m, s, loss = 0.0, g
    cdef double[::1] scores = np.empty(V, dtype=np.float64)
    cdef double[::1] dv = np.empty(d, dtype=np.float64)

    for p in range(n):
        wi = centers[p]
        wo = contexts[p]
        lr = lr0 + (lr_min - lr0) * ((pair_offset + p) / <double>total_pairs)

        # scores = Wp @ W[wi]
        m = -1e300
        for j in range(V):
            s = 0.0
            for k in range(d):
                s += Wp[j, k] * W[wi, k]
            scores[j] = s
            if s > m:
                m = s
        s = 0.0
        for j in range(V):
            scores[j] = exp(scores[j] - m)
            s += scores[j]
        for j in range(V):
            scores[j] = scores[j] / s  # now the softmax probabilities
        loss += -log(scores[wo])

        # scores becomes dL/dscores; dv = Wp^T dL/dscores (old Wp)
        scores[wo] -= 1.0
        for k in range(d):
            dv[k] = 0.0
        for j in range(V):
            g = scores[j]
            for k in range(d):
                dv[k] += Wp[j, k] * g
                Wp[j, k] -= lr * g * W[wi, k]
        for k in range(d):
            W[wi, k] -= lr * dv[k]

    return loss
