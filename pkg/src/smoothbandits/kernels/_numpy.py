"""Pure-numpy versions of the episode kernels (same signatures, same output).

be1, be2, the oracle and the accounting are vectorized per epoch; the
k-armed eliminator walks one round-robin cycle at a time.
"""

import numpy as np


def _z(u, r):
    return np.where(u < 0.5 * (1.0 + r), 1.0, -1.0)


def be1(means, u, bounds, B, arms):
    for e in range(bounds.shape[0] - 1):
        s, f = int(bounds[e]), int(bounds[e + 1])
        cum = np.cumsum(_z(u[s:f], means[1, s:f]))
        hit = np.flatnonzero(cum <= -B)
        stop = f if hit.size == 0 else s + int(hit[0]) + 1
        arms[s:stop] = 1
        arms[stop:f] = 0


def be2(means, u, bounds, B, arms):
    for e in range(bounds.shape[0] - 1):
        s, f = int(bounds[e]), int(bounds[e + 1])
        n = f - s
        alt = np.arange(n) % 2
        arms[s:f] = alt
        n_pairs = n // 2
        if n_pairs == 0:
            continue
        idx = s + np.arange(n_pairs) * 2
        z0 = _z(u[idx], means[0, idx])
        z1 = _z(u[idx + 1], means[1, idx + 1])
        d = np.cumsum(z0 - z1)
        hit = np.flatnonzero(np.abs(d) > B)
        if hit.size:
            p = int(hit[0])
            arms[s + 2 * p + 2 : f] = 0 if d[p] >= 0.0 else 1


def bek(means, u, bounds, B, arms):
    k = means.shape[0]
    for e in range(bounds.shape[0] - 1):
        s, f = int(bounds[e]), int(bounds[e + 1])
        cum = np.zeros(k)
        active = np.arange(k)
        t = s
        while t < f:
            if active.size == 1:
                arms[t:f] = active[0]
                break
            n = min(active.size, f - t)
            rounds = np.arange(t, t + n)
            who = active[:n]
            arms[rounds] = who
            cum[who] += _z(u[rounds], means[who, rounds])
            t += n
            if n == active.size:
                best = cum[active].max()
                active = active[best - cum[active] <= B]


def oracle(means, arms):
    arms[:] = np.argmax(means, axis=0)


def account(means, u, arms, bounds, per_epoch, pulls):
    cols = np.arange(means.shape[1])
    best = means.max(axis=0)
    r = means[arms, cols]
    inst = best - r
    realized = float(np.sum(best - _z(u, r)))
    per_epoch[:] = np.add.reduceat(inst, bounds[:-1]) if inst.size else 0.0
    pulls[:] = np.bincount(arms, minlength=means.shape[0])
    return realized, float(np.sum(per_epoch))


def clean_scan(dev, coef, min_gap):
    n = dev.shape[0]
    prefix = np.concatenate([[0.0], np.cumsum(dev)])
    t = np.arange(n)[:, None]
    t2 = np.arange(n)[None, :]
    gap = t2 - t
    mask = gap >= np.ceil(min_gap)
    s = prefix[t2 + 1] - prefix[t]
    bound = np.sqrt(coef * np.where(mask, gap, 0))
    upper = int(np.count_nonzero(mask & (s > bound)))
    lower = int(np.count_nonzero(mask & (s < -bound)))
    return upper, upper + lower
