"""Compiled iteration kernels. Semantics must match ``_numpy`` exactly."""
import numpy as np
from numba import njit

from ._common import CONVERGED, DEAD, DEAD_PROBABILITY, MAX_ITERS, OCTAHEDRON


@njit(cache=True, nogil=True)
def map_point(exps, coef, rot, degree, r, out):
    """One round at Bloch vector ``r``; writes the output to ``out`` and returns p_success."""
    px = np.empty(degree + 1)
    py = np.empty(degree + 1)
    pz = np.empty(degree + 1)
    px[0] = py[0] = pz[0] = 1.0
    for k in range(1, degree + 1):
        px[k] = px[k - 1] * r[0]
        py[k] = py[k - 1] * r[1]
        pz[k] = pz[k - 1] * r[2]
    s = 0.0
    vx = 0.0
    vy = 0.0
    vz = 0.0
    for k in range(exps.shape[0]):
        m = px[exps[k, 0]] * py[exps[k, 1]] * pz[exps[k, 2]]
        s += coef[k, 0] * m
        vx += coef[k, 1] * m
        vy += coef[k, 2] * m
        vz += coef[k, 3] * m
    if s < DEAD_PROBABILITY:
        out[0] = out[1] = out[2] = 0.0
        return s
    vx /= s
    vy /= s
    vz /= s
    for i in range(3):
        out[i] = rot[i, 0] * vx + rot[i, 1] * vy + rot[i, 2] * vz
    return s


@njit(cache=True, nogil=True)
def iterate_batch(exps, coef, rot, degree, starts, max_iters, tol, margin, patience,
                  final, status, iters, psucc):
    r = np.empty(3)
    new = np.empty(3)
    for b in range(starts.shape[0]):
        r[:] = starts[b]
        inside = 0
        st = MAX_ITERS
        ps = 0.0
        it = 0
        while it < max_iters:
            it += 1
            ps = map_point(exps, coef, rot, degree, r, new)
            if ps < DEAD_PROBABILITY:
                st = DEAD
                break
            n2 = new[0] * new[0] + new[1] * new[1] + new[2] * new[2]
            if n2 > 1.0:  # rounding pushed the state off the ball; outside it the excess grows each round
                nrm = np.sqrt(n2)
                new[0] /= nrm
                new[1] /= nrm
                new[2] /= nrm
            step = np.sqrt((new[0] - r[0]) ** 2 + (new[1] - r[1]) ** 2 + (new[2] - r[2]) ** 2)
            r[:] = new
            l1 = abs(r[0]) + abs(r[1]) + abs(r[2])
            if l1 < 1.0 - margin:
                inside += 1
            else:
                inside = 0
            if step < tol:
                st = OCTAHEDRON if l1 < 1.0 - margin else CONVERGED
                break
            if inside >= patience:
                st = OCTAHEDRON
                break
        final[b] = r
        status[b] = st
        iters[b] = it
        psucc[b] = ps
