"""Pure-numpy kernels, vectorized over the batch of starting points."""
import numpy as np

from ._common import CONVERGED, DEAD, DEAD_PROBABILITY, MAX_ITERS, OCTAHEDRON


def _map_many(exps, coef, rot, degree, r):
    # Operation order mirrors the compiled kernel so both backends round identically.
    powers = np.ones((r.shape[0], 3, degree + 1))
    for k in range(1, degree + 1):
        powers[:, :, k] = powers[:, :, k - 1] * r
    acc = np.zeros((r.shape[0], 4))
    for k in range(exps.shape[0]):
        mono = powers[:, 0, exps[k, 0]] * powers[:, 1, exps[k, 1]] * powers[:, 2, exps[k, 2]]
        acc += mono[:, None] * coef[k]
    s = acc[:, 0]
    alive = s >= DEAD_PROBABILITY
    v = np.zeros((r.shape[0], 3))
    v[alive] = acc[alive, 1:] / s[alive, None]
    out = rot[None, :, 0] * v[:, 0, None] + rot[None, :, 1] * v[:, 1, None] + rot[None, :, 2] * v[:, 2, None]
    return out, s


def map_point(exps, coef, rot, degree, r, out):
    v, s = _map_many(exps, coef, rot, degree, np.asarray(r, dtype=float)[None, :])
    out[:] = v[0]
    return float(s[0])


def iterate_batch(exps, coef, rot, degree, starts, max_iters, tol, margin, patience,
                  final, status, iters, psucc):
    r = np.array(starts, dtype=float)
    nb = r.shape[0]
    st = np.full(nb, MAX_ITERS, dtype=np.int64)
    its = np.zeros(nb, dtype=np.int64)
    ps_last = np.zeros(nb)
    inside = np.zeros(nb, dtype=np.int64)
    active = np.arange(nb)
    for _ in range(max_iters):
        if active.size == 0:
            break
        cur = r[active]
        new, ps = _map_many(exps, coef, rot, degree, cur)
        its[active] += 1
        ps_last[active] = ps
        dead = ps < DEAD_PROBABILITY
        st[active[dead]] = DEAD
        live = ~dead
        n2 = new[:, 0] * new[:, 0] + new[:, 1] * new[:, 1] + new[:, 2] * new[:, 2]
        over = n2 > 1.0
        new[over] /= np.sqrt(n2[over])[:, None]
        d = new - cur
        step = np.sqrt(d[:, 0] ** 2 + d[:, 1] ** 2 + d[:, 2] ** 2)
        r[active[live]] = new[live]
        l1 = np.abs(new).sum(axis=1)
        in_oct = l1 < 1.0 - margin
        inside[active] = np.where(in_oct, inside[active] + 1, 0)
        conv = live & (step < tol)
        st[active[conv & in_oct]] = OCTAHEDRON
        st[active[conv & ~in_oct]] = CONVERGED
        oct_out = live & ~conv & (inside[active] >= patience)
        st[active[oct_out]] = OCTAHEDRON
        active = active[live & ~conv & ~oct_out]
    final[:] = r
    status[:] = st
    iters[:] = its
    psucc[:] = ps_last
