"""Compiled episode kernels.

Conventions shared with :mod:`._numpy`:

* ``means`` is the ``(k, T)`` table of mean rewards, column ``t`` is round ``t+1``;
* ``u`` holds one uniform per round; the played arm's reward is
  ``+1 if u[t] < (1 + r) / 2 else -1``;
* ``bounds`` are the epoch boundaries ``t_0 = 0 < ... < t_m = T``.
"""

import math

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _z(u, r):
    return 1.0 if u < 0.5 * (1.0 + r) else -1.0


@njit(cache=True, nogil=True)
def be1(means, u, bounds, B, arms):
    for e in range(bounds.shape[0] - 1):
        cum = 0.0
        exploring = True
        for t in range(bounds[e], bounds[e + 1]):
            if exploring:
                arms[t] = 1
                cum += _z(u[t], means[1, t])
                if cum <= -B:
                    exploring = False
            else:
                arms[t] = 0


@njit(cache=True, nogil=True)
def be2(means, u, bounds, B, arms):
    for e in range(bounds.shape[0] - 1):
        start = bounds[e]
        d = 0.0
        committed = -1
        for t in range(start, bounds[e + 1]):
            if committed >= 0:
                arms[t] = committed
                continue
            a = (t - start) % 2
            arms[t] = a
            z = _z(u[t], means[a, t])
            if a == 0:
                d += z
            else:
                d -= z
                if abs(d) > B:
                    committed = 0 if d >= 0.0 else 1


@njit(cache=True, nogil=True)
def bek(means, u, bounds, B, arms):
    k = means.shape[0]
    cum = np.zeros(k)
    order = np.empty(k, dtype=np.int64)
    for e in range(bounds.shape[0] - 1):
        for a in range(k):
            cum[a] = 0.0
            order[a] = a
        n_active = k
        pos = 0
        committed = -1
        for t in range(bounds[e], bounds[e + 1]):
            if committed >= 0:
                arms[t] = committed
                continue
            a = order[pos]
            arms[t] = a
            cum[a] += _z(u[t], means[a, t])
            pos += 1
            if pos == n_active:
                pos = 0
                best = cum[order[0]]
                for i in range(1, n_active):
                    if cum[order[i]] > best:
                        best = cum[order[i]]
                kept = 0
                for i in range(n_active):
                    if best - cum[order[i]] <= B:
                        order[kept] = order[i]
                        kept += 1
                n_active = kept
                if n_active == 1:
                    committed = order[0]


@njit(cache=True, nogil=True)
def oracle(means, arms):
    k, T = means.shape
    for t in range(T):
        best = 0
        for a in range(1, k):
            if means[a, t] > means[best, t]:
                best = a
        arms[t] = best


@njit(cache=True, nogil=True)
def account(means, u, arms, bounds, per_epoch, pulls):
    """Accumulate both regret flavours; returns ``(realized, mean_based)``."""
    k = means.shape[0]
    realized = 0.0
    total = 0.0
    for a in range(k):
        pulls[a] = 0
    for e in range(bounds.shape[0] - 1):
        acc = 0.0
        for t in range(bounds[e], bounds[e + 1]):
            best = means[0, t]
            for a in range(1, k):
                if means[a, t] > best:
                    best = means[a, t]
            a = arms[t]
            r = means[a, t]
            pulls[a] += 1
            acc += best - r
            realized += best - _z(u[t], r)
        per_epoch[e] = acc
        total += acc
    return realized, total


@njit(cache=True, nogil=True)
def clean_scan(dev, coef, min_gap):
    """Count windows ``[t, t']`` whose deviation sum beats ``sqrt(coef * (t' - t))``.

    Returns ``(upper, two_sided)`` violation counts over all ``t' - t >= min_gap``.
    """
    n = dev.shape[0]
    prefix = np.zeros(n + 1)
    for i in range(n):
        prefix[i + 1] = prefix[i] + dev[i]
    upper = 0
    both = 0
    g0 = int(math.ceil(min_gap))
    for t in range(n):
        for t2 in range(t + g0, n):
            s = prefix[t2 + 1] - prefix[t]
            bound = math.sqrt(coef * (t2 - t))
            if s > bound:
                upper += 1
                both += 1
            elif s < -bound:
                both += 1
    return upper, both
