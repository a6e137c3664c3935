"""Hot loops of the reference classifier.

Each kernel exists twice: a loop version compiled with ``numba.njit`` and a
vectorised NumPy version. ``LOTUS_DISABLE_NUMBA=1`` (or numba being absent)
selects the NumPy path at import time. Both paths process examples and
features in the same order; results agree to rounding in ``exp``.

Sparse inputs use CSR layout: ``indptr`` (n+1,), ``indices`` (nnz,) and
``counts`` (nnz,) with int64 dtype; weights are a dense ``(dim, 5)`` float64
array updated in place.
"""

from __future__ import annotations

import functools
import math
import os

import numpy as np

PROB_CLAMP = 1e-12

_DISABLED = os.environ.get("LOTUS_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes", "on")

try:
    if _DISABLED:
        raise ImportError("disabled by LOTUS_DISABLE_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        # uncompiled uint64 arithmetic wraps like numba's but numpy warns about it
        def wrap(f):
            @functools.wraps(f)
            def run(*a, **kw):
                with np.errstate(over="ignore"):
                    return f(*a, **kw)
            return run

        if args and callable(args[0]):
            return wrap(args[0])
        return wrap


FNV64_OFFSET = np.uint64(0xCBF29CE484222325)
FNV64_PRIME = np.uint64(0x100000001B3)


# ---------------------------------------------------------------- numpy path


def fnv1a64_many_numpy(buf: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    """Hash the byte strings ``buf[offsets[i]:offsets[i+1]]``."""
    lengths = np.diff(offsets)
    n = lengths.shape[0]
    h = np.full(n, FNV64_OFFSET, dtype=np.uint64)
    if n == 0:
        return h
    starts = offsets[:-1]
    for pos in range(int(lengths.max(initial=0))):
        live = np.nonzero(lengths > pos)[0]
        byte = buf[starts[live] + pos].astype(np.uint64)
        # uint64 multiply wraps mod 2**64, which is what FNV wants
        h[live] = (h[live] ^ byte) * FNV64_PRIME
    return h


def _sigmoid_numpy(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _rows_of(indptr: np.ndarray) -> np.ndarray:
    return np.repeat(np.arange(indptr.shape[0] - 1, dtype=np.int64), np.diff(indptr))


def csr_logits_numpy(indptr, indices, counts, weights, bias) -> np.ndarray:
    n = indptr.shape[0] - 1
    z = np.zeros((n, weights.shape[1]), dtype=np.float64)
    np.add.at(z, _rows_of(indptr), counts[:, None] * weights[indices])
    return z + bias


def csr_proba_numpy(indptr, indices, counts, weights, bias) -> np.ndarray:
    return _sigmoid_numpy(csr_logits_numpy(indptr, indices, counts, weights, bias))


def sgd_epoch_numpy(indptr, indices, counts, targets, order, weights, bias, lr, batch_size) -> float:
    """One pass of mini-batch gradient descent; returns mean pre-step loss.

    Each batch evaluates every example at the parameters current at batch
    start, then applies ``lr`` times the batch-mean gradient.
    """
    n = order.shape[0]
    total = 0.0
    for start in range(0, n, batch_size):
        rows = order[start:start + batch_size]
        b = rows.shape[0]
        spans = [np.arange(indptr[r], indptr[r + 1]) for r in rows]
        pos = np.concatenate(spans) if spans else np.empty(0, dtype=np.int64)
        local = np.repeat(np.arange(b), [len(s) for s in spans])
        idx = indices[pos]
        cnt = counts[pos].astype(np.float64)

        z = np.zeros((b, weights.shape[1]))
        np.add.at(z, local, cnt[:, None] * weights[idx])
        z += bias
        p = _sigmoid_numpy(z)
        y = targets[rows]
        pc = np.clip(p, PROB_CLAMP, 1.0 - PROB_CLAMP)
        total += float(-(y * np.log(pc) + (1.0 - y) * np.log(1.0 - pc)).sum())

        g = (p - y) / b
        np.add.at(weights, idx, -lr * (cnt[:, None] * g[local]))
        bias -= lr * g.sum(axis=0)
    return total / n if n else 0.0


# ---------------------------------------------------------------- numba path


@njit(cache=True)
def fnv1a64_many_numba(buf, offsets):
    n = offsets.shape[0] - 1
    out = np.empty(n, dtype=np.uint64)
    for i in range(n):
        h = FNV64_OFFSET
        for j in range(offsets[i], offsets[i + 1]):
            h = (h ^ np.uint64(buf[j])) * FNV64_PRIME
        out[i] = h
    return out


@njit(cache=True)
def _sigmoid_scalar(z):
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@njit(cache=True)
def csr_logits_numba(indptr, indices, counts, weights, bias):
    n = indptr.shape[0] - 1
    k_out = weights.shape[1]
    z = np.zeros((n, k_out))
    for r in range(n):
        for j in range(indptr[r], indptr[r + 1]):
            i = indices[j]
            c = float(counts[j])
            for k in range(k_out):
                z[r, k] += c * weights[i, k]
        for k in range(k_out):
            z[r, k] += bias[k]
    return z


@njit(cache=True)
def csr_proba_numba(indptr, indices, counts, weights, bias):
    z = csr_logits_numba(indptr, indices, counts, weights, bias)
    for r in range(z.shape[0]):
        for k in range(z.shape[1]):
            z[r, k] = _sigmoid_scalar(z[r, k])
    return z


@njit(cache=True)
def sgd_epoch_numba(indptr, indices, counts, targets, order, weights, bias, lr, batch_size):
    n = order.shape[0]
    k_out = weights.shape[1]
    total = 0.0
    lo_clamp = PROB_CLAMP
    hi_clamp = 1.0 - PROB_CLAMP
    g = np.empty((batch_size, k_out))
    for start in range(0, n, batch_size):
        stop = min(start + batch_size, n)
        b = stop - start
        for t in range(b):
            r = order[start + t]
            for k in range(k_out):
                z = 0.0
                for j in range(indptr[r], indptr[r + 1]):
                    z += float(counts[j]) * weights[indices[j], k]
                z += bias[k]
                p = _sigmoid_scalar(z)
                y = targets[r, k]
                pc = min(max(p, lo_clamp), hi_clamp)
                total -= y * math.log(pc) + (1.0 - y) * math.log(1.0 - pc)
                g[t, k] = (p - y) / b
        for t in range(b):
            r = order[start + t]
            for j in range(indptr[r], indptr[r + 1]):
                i = indices[j]
                c = float(counts[j])
                for k in range(k_out):
                    weights[i, k] -= lr * (c * g[t, k])
        for k in range(k_out):
            s = 0.0
            for t in range(b):
                s += g[t, k]
            bias[k] -= lr * s
    if n == 0:
        return 0.0
    return total / n


# ---------------------------------------------------------------- dispatch

if HAVE_NUMBA:
    BACKEND = "numba"
    fnv1a64_many = fnv1a64_many_numba
    csr_proba = csr_proba_numba
    sgd_epoch = sgd_epoch_numba
else:
    BACKEND = "numpy"
    fnv1a64_many = fnv1a64_many_numpy
    csr_proba = csr_proba_numpy
    sgd_epoch = sgd_epoch_numpy


def warmup() -> None:
    """Trigger JIT compilation on tiny inputs (no-op on the NumPy path)."""
    if not HAVE_NUMBA:
        return
    indptr = np.array([0, 1], dtype=np.int64)
    indices = np.array([0], dtype=np.int64)
    counts = np.array([1], dtype=np.int64)
    w = np.zeros((2, 5))
    b = np.zeros(5)
    fnv1a64_many(np.zeros(1, dtype=np.uint8), indptr)
    csr_proba(indptr, indices, counts, w, b)
    sgd_epoch(indptr, indices, counts, np.zeros((1, 5)), np.zeros(1, dtype=np.int64), w, b, 0.1, 1)
