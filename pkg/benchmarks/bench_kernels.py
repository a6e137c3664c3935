"""Time the numba and NumPy classifier kernels on the same synthetic corpus.

    python3 benchmarks/bench_kernels.py --rows 5000 --repeat 5

Both paths are imported from ``lotus.classifier._kernels`` directly, so the
``LOTUS_DISABLE_NUMBA`` flag does not matter here. Numba functions are
compiled once before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from lotus.classifier import _kernels as K
from lotus.classifier import featurize_texts
from lotus.classifier.train import label_matrix
from lotus.synthetic import keyword_dataset


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--rows", type=int, default=5000)
    ap.add_argument("--dim", type=int, default=2 ** 18)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not available; install lotus[jit] or unset LOTUS_DISABLE_NUMBA")
    K.warmup()

    rows = keyword_dataset(args.rows, seed=1)
    texts = [ex.text for ex in rows]
    fm = featurize_texts(texts, args.dim, 2)
    targets = label_matrix(ex.labels for ex in rows)
    order = np.random.default_rng(0).permutation(len(rows)).astype(np.int64)

    tokens = [t.encode("utf-8") for text in texts for t in text.split()]
    offsets = np.zeros(len(tokens) + 1, dtype=np.int64)
    np.cumsum([len(t) for t in tokens], out=offsets[1:])
    buf = np.frombuffer(b"".join(tokens), dtype=np.uint8)

    rng = np.random.default_rng(1)
    weights = rng.normal(0, 0.01, size=(args.dim, 5))
    bias = np.zeros(5)

    def epoch(kernel):
        w, b = weights.copy(), bias.copy()
        return lambda: kernel(fm.indptr, fm.indices, fm.counts, targets, order, w, b, 0.1, 8)

    cases = [
        ("fnv1a64 hash", lambda: K.fnv1a64_many_numpy(buf, offsets), lambda: K.fnv1a64_many_numba(buf, offsets)),
        ("csr proba", lambda: K.csr_proba_numpy(fm.indptr, fm.indices, fm.counts, weights, bias),
         lambda: K.csr_proba_numba(fm.indptr, fm.indices, fm.counts, weights, bias)),
        ("sgd epoch", epoch(K.sgd_epoch_numpy), epoch(K.sgd_epoch_numba)),
    ]
    print(f"rows={args.rows} tokens={len(tokens)} nnz={fm.indices.size} dim={args.dim} best of {args.repeat}")
    print(f"{'kernel':<14}{'numpy s':>12}{'numba s':>12}{'speedup':>10}")
    for name, np_fn, nb_fn in cases:
        t_np = best_of(np_fn, args.repeat)
        t_nb = best_of(nb_fn, args.repeat)
        print(f"{name:<14}{t_np:>12.5f}{t_nb:>12.5f}{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
