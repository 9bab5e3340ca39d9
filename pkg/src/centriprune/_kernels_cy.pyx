# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled greedy-selection kernel.

Bit-compatible with ``_kernels_py.greedy_loop``: every float expression
replays the numpy fallback's elementwise operation order (divide, multiply,
add, compare), min/max are pure selections, and the candidate ranking goes
through the same ``np.lexsort`` call. Compile with -ffp-contract=off so no
multiply-add fusion changes the rounding.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, NAN

cnp.import_array()


def greedy_loop(object M_obj, object D_obj, double dmax, object pivots_obj,
                Py_ssize_t retain, double lam, double tau0, double dtau,
                Py_ssize_t batch):
    cdef double[:, ::1] M = np.ascontiguousarray(M_obj, dtype=np.float64)
    cdef double[:, ::1] D = np.ascontiguousarray(D_obj, dtype=np.float64)
    cdef cnp.int64_t[::1] pivots = np.ascontiguousarray(pivots_obj, dtype=np.int64)
    cdef Py_ssize_t n = M.shape[0]
    cdef Py_ssize_t n_piv = pivots.shape[0]

    sel_np = np.empty(retain, dtype=np.int64)
    loops_np = np.empty(retain, dtype=np.int64)
    taus_np = np.empty(retain, dtype=np.float64)
    cdef cnp.int64_t[::1] sel = sel_np
    cdef cnp.int64_t[::1] loops = loops_np
    cdef double[::1] taus = taus_np

    cdef cnp.uint8_t[::1] is_cand = np.ones(n, dtype=np.uint8)
    min_d_np = np.empty(n, dtype=np.float64)
    cdef double[::1] min_d = min_d_np
    cand_np = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] cand = cand_np
    r_np = np.empty(n, dtype=np.float64)
    cdef double[::1] r = r_np
    acc_np = np.empty(batch, dtype=np.int64)
    cdef cnp.int64_t[::1] acc = acc_np
    cdef cnp.int64_t[::1] ranked

    cdef Py_ssize_t n_sel = 0, n_cand, n_acc, n_snap
    cdef Py_ssize_t i, k, ci, t_loop, start, chunk_end
    cdef double tau, f, v, best, dmin

    for k in range(n_piv):
        sel[n_sel] = pivots[k]
        loops[n_sel] = -1
        taus[n_sel] = NAN
        is_cand[pivots[k]] = 0
        n_sel += 1
    for i in range(n):
        dmin = INFINITY
        for k in range(n_piv):
            v = D[i, pivots[k]]
            if v < dmin:
                dmin = v
        min_d[i] = dmin

    tau = tau0
    t_loop = 0
    while n_sel < retain:
        n_cand = 0
        for i in range(n):
            if is_cand[i]:
                cand[n_cand] = i
                f = 1.0 + lam * (min_d[i] / dmax)
                best = -INFINITY
                for k in range(n_sel):
                    v = M[i, sel[k]] * f
                    if v > best:
                        best = v
                r[n_cand] = 1.0 - best
                n_cand += 1
        order = np.lexsort((cand_np[:n_cand], -r_np[:n_cand]))
        ranked = np.ascontiguousarray(cand_np[:n_cand][order])

        start = 0
        while start < n_cand:
            chunk_end = start + batch
            if chunk_end > n_cand:
                chunk_end = n_cand
            n_snap = n_sel
            n_acc = 0
            for ci in range(start, chunk_end):
                if n_sel == retain:
                    break
                i = ranked[ci]
                f = 1.0 + lam * (min_d[i] / dmax)
                best = -INFINITY
                for k in range(n_snap):
                    v = M[i, sel[k]] * f
                    if v > best:
                        best = v
                if best < tau:
                    sel[n_sel] = i
                    loops[n_sel] = t_loop
                    taus[n_sel] = tau
                    n_sel += 1
                    acc[n_acc] = i
                    n_acc += 1
            if n_acc > 0:
                for k in range(n_acc):
                    is_cand[acc[k]] = 0
                for i in range(n):
                    dmin = min_d[i]
                    for k in range(n_acc):
                        v = D[i, acc[k]]
                        if v < dmin:
                            dmin = v
                    min_d[i] = dmin
            if n_sel == retain:
                break
            start += batch
        if n_sel == retain:
            break
        tau = tau + dtau
        t_loop += 1

    return sel_np[:n_sel].copy(), loops_np[:n_sel].copy(), taus_np[:n_sel].copy()
