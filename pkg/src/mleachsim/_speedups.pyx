# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the hot kernels.

Must stay semantically identical to _kernels_py: same IEEE-754 operation
per element, same iteration order where it matters (charge_uniform death
order). Keep the two files in sync when changing either.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()

NO_ROUTE = np.int32(2**30)


def pairwise_distances(cnp.ndarray[cnp.float64_t, ndim=2] pos):
    cdef Py_ssize_t m = pos.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.empty((m, m), dtype=np.float64)
    cdef Py_ssize_t i, j
    cdef double dx, dy
    for i in range(m):
        for j in range(m):
            dx = pos[i, 0] - pos[j, 0]
            dy = pos[i, 1] - pos[j, 1]
            out[i, j] = sqrt(dx * dx + dy * dy)
    return out


def charge_uniform(
    cnp.ndarray[cnp.float64_t, ndim=1] energy,
    cnp.ndarray[cnp.float64_t, ndim=1] consumed,
    cnp.ndarray[cnp.float64_t, ndim=1] comp,
    cnp.ndarray[cnp.int64_t, ndim=1] ids,
    double amount,
):
    cdef Py_ssize_t k = ids.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=1, cast=True] ok = np.empty(k, dtype=bool)
    cdef list died = []
    cdef Py_ssize_t idx
    cdef cnp.int64_t i
    cdef double s, t, x
    for idx in range(k):
        i = ids[idx]
        if energy[i] >= amount:
            energy[i] = energy[i] - amount
            x = amount
            ok[idx] = True
        else:
            x = energy[i]
            energy[i] = 0.0
            ok[idx] = False
        # Neumaier-compensated subtotal: true value is consumed[i] + comp[i]
        s = consumed[i]
        t = s + x
        if s >= x:
            comp[i] = comp[i] + ((s - t) + x)
        else:
            comp[i] = comp[i] + ((x - t) + s)
        consumed[i] = t
        if energy[i] == 0.0:
            died.append(i)
    return ok.view(np.bool_), np.asarray(died, dtype=np.int64)


def dsdv_merge(
    cnp.ndarray[cnp.int32_t, ndim=2] metric,
    cnp.ndarray[cnp.int64_t, ndim=2] seq,
    cnp.ndarray[cnp.int32_t, ndim=2] next_hop,
    cnp.ndarray[cnp.int64_t, ndim=1] receivers,
    long sender,
    cnp.ndarray[cnp.int32_t, ndim=1] adv_metric,
    cnp.ndarray[cnp.int64_t, ndim=1] adv_seq,
    cnp.ndarray[cnp.uint8_t, ndim=1, cast=True] adv_mask,
):
    cdef Py_ssize_t n_recv = receivers.shape[0]
    cdef Py_ssize_t n_dest = adv_metric.shape[0]
    cdef Py_ssize_t ri, d
    cdef cnp.int64_t r
    cdef cnp.int32_t cand
    for ri in range(n_recv):
        r = receivers[ri]
        for d in range(n_dest):
            if not adv_mask[d] or d == r:
                continue
            cand = adv_metric[d] + 1
            if adv_seq[d] > seq[r, d] or (adv_seq[d] == seq[r, d] and cand < metric[r, d]):
                metric[r, d] = cand
                seq[r, d] = adv_seq[d]
                next_hop[r, d] = <cnp.int32_t> sender
