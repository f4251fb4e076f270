"""Vectorized numpy kernels (fallback when the compiled extension is absent).

Owner ``i`` of a trial with key ``key`` uses the stream
``derive(key, i)``; its ``j``-th uniform is ``to_unit(derive(stream, j))``.
Aggregator of owner ``i`` is ``derive(assign_key, i) % k``. These match
:mod:`sampling_privacy.rng` exactly, and ``_fast.pyx`` computes the same
words, so all three paths agree bit-for-bit.
"""
import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31, _S11 = (np.uint64(s) for s in (30, 27, 31, 11))
_UNIT = 1.0 / (1 << 53)

CHUNK = 1 << 18


def _mix(x):
    x = (x ^ (x >> _S30)) * _M1
    x = (x ^ (x >> _S27)) * _M2
    return x ^ (x >> _S31)


def _derive(key, idx):
    # idx: uint64 array of zero-based indices
    return _mix(np.uint64(key) + (idx + np.uint64(1)) * _GAMMA)


def _unit(words):
    return (words >> _S11).astype(np.float64) * _UNIT


def _draw(owner_keys, j):
    step = np.uint64(((j + 1) * 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF)
    return _unit(_mix(owner_keys + step))


def _chunks(n):
    for start in range(0, n, CHUNK):
        stop = min(n, start + CHUNK)
        yield start, stop, np.arange(start, stop, dtype=np.uint64)


def _assign(assign_key, idx, k):
    if k == 1:
        return np.zeros(idx.shape[0], dtype=np.int64)
    return (_derive(assign_key, idx) % np.uint64(k)).astype(np.int64)


def _tally(out, agg, values, width):
    out += np.bincount(agg * width + values, minlength=out.size).reshape(out.shape)


def sp_responses(cdf, truths, key):
    """Per-owner ``(round1, round2)`` arrays for the two-round mechanism."""
    cdf = np.asarray(cdf, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.int64)
    sampled = cdf.shape[0] - 1
    n = truths.shape[0]
    r1 = np.empty(n, dtype=np.int64)
    r2 = np.empty(n, dtype=np.int64)
    for start, stop, idx in _chunks(n):
        u = _draw(_derive(key, idx), 0)
        face = np.searchsorted(cdf, u, side="right")
        hit = face == sampled
        r1[start:stop] = np.where(hit, 0, face)
        r2[start:stop] = np.where(hit, truths[start:stop], face)
    return r1, r2


def sp_counts(cdf, truths, key, k, assign_key):
    cdf = np.asarray(cdf, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.int64)
    width = cdf.shape[0] - 1  # outputs 0..V
    out = np.zeros((k, 2, width), dtype=np.int64)
    n = truths.shape[0]
    for start, stop, idx in _chunks(n):
        agg = _assign(assign_key, idx, k)
        u = _draw(_derive(key, idx), 0)
        face = np.searchsorted(cdf, u, side="right")
        hit = face == width
        r1 = np.where(hit, 0, face)
        r2 = np.where(hit, truths[start:stop], face)
        _tally(out[:, 0, :], agg, r1, width)
        _tally(out[:, 1, :], agg, r2, width)
    return out


def _rr_outputs(truths, owner_keys, pi1, pi2, first_draw):
    truthful = _draw(owner_keys, first_draw) < pi1
    forced = (_draw(owner_keys, first_draw + 1) < pi2).astype(np.int64)
    return np.where(truthful, truths, forced)


def rr_counts(truths, pi1, pi2, key, k, assign_key):
    """Counts of outputs {0, 1} per aggregator, shape ``(k, 2)``."""
    truths = np.asarray(truths, dtype=np.int64)
    out = np.zeros((k, 2), dtype=np.int64)
    for start, stop, idx in _chunks(truths.shape[0]):
        agg = _assign(assign_key, idx, k)
        resp = _rr_outputs(truths[start:stop], _derive(key, idx), pi1, pi2, 0)
        _tally(out, agg, resp, 2)
    return out


def toy_counts(truths, pi_s, pi1, pi2, key, k, assign_key):
    """Counts of outputs {0, 1, absent} per aggregator, shape ``(k, 3)``."""
    truths = np.asarray(truths, dtype=np.int64)
    out = np.zeros((k, 3), dtype=np.int64)
    for start, stop, idx in _chunks(truths.shape[0]):
        agg = _assign(assign_key, idx, k)
        okeys = _derive(key, idx)
        joined = _draw(okeys, 0) < pi_s
        resp = _rr_outputs(truths[start:stop], okeys, pi1, pi2, 1)
        _tally(out, agg, np.where(joined, resp, 2), 3)
    return out
