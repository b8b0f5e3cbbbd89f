"""Compare the compiled skip-gram kernel against the pure-numpy fallback.

Run: python3 benchmarks/benchmark_backends.py [--students N] [--dim D]

Trains the same model with both backends on one synthetic corpus and
reports wall time per epoch plus the maximum elementwise weight
difference (the update rule is identical, so this should be ~1e-15).
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from courserec import data, embedding, synth


def train_with(backend: str, sequences, vocab_size, dim, epochs, window):
    cfg = embedding.SkipGramConfig(dimension=dim, window=window, epochs=epochs,
                                   seed=0, backend=backend)
    t0 = time.perf_counter()
    model = embedding.train_skipgram(sequences, vocab_size, cfg)
    return model, time.perf_counter() - t0


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--students", type=int, default=500)
    ap.add_argument("--dim", type=int, default=64)
    ap.add_argument("--epochs", type=int, default=2)
    ap.add_argument("--window", type=int, default=2)
    args = ap.parse_args()

    if not embedding.HAVE_KERNEL:
        raise SystemExit("compiled kernel unavailable; nothing to compare")

    table, _ = synth.generate(synth.SynthConfig(seed=7, n_students=args.students))
    sequences = [s.tokens for s in data.serialize_sequences(table, 0)]
    n_pairs = sum(max(0, 2 * args.window * len(s) - args.window * (args.window + 1))
                  for s in sequences)
    print(f"{len(sequences)} sequences, |V|={len(table.vocab)}, d={args.dim}, "
          f"~{n_pairs} pairs/epoch, {args.epochs} epochs")

    results = {}
    for backend in ("cython", "pure"):
        model, secs = train_with(backend, sequences, len(table.vocab),
                                 args.dim, args.epochs, args.window)
        results[backend] = (model, secs)
        print(f"{backend:>7}: {secs:8.2f}s total, {secs / args.epochs:6.2f}s/epoch, "
              f"final loss {model.epoch_losses[-1]:.6f}")

    diff = np.abs(results["cython"][0].W - results["pure"][0].W).max()
    speedup = results["pure"][1] / results["cython"][1]
    print(f"max |dW| between backends: {diff:.3e}")
    print(f"speedup: {speedup:.1f}x")


if __name__ == "__main__":
    main()
