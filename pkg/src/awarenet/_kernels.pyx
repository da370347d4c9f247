# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels: awareness simulation, capped-simplex projection,
and the best-response gradient loop.  Mirrors ``_purepy`` exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp, log1p, pow, sqrt
from libc.stdlib cimport free, malloc, qsort

cnp.import_array()

DEF DERIVATIVE_FLOOR = 1e-9

DEF FAMILY_TULLOCK = 0
DEF FAMILY_LOG = 1
DEF FAMILY_EXP = 2
DEF FAMILY_SOFTMAX = 3

DEF MODE_EUCLIDEAN = 0
DEF MODE_PAPER_FREEZE = 1


cdef int _cmp_desc(const void* a, const void* b) noexcept nogil:
    cdef double x = (<const double*> a)[0]
    cdef double y = (<const double*> b)[0]
    if x > y:
        return -1
    if x < y:
        return 1
    return 0


cdef double _f_eval(int family, double fa, double b) noexcept nogil:
    if family == FAMILY_TULLOCK:
        return pow(b, fa)
    elif family == FAMILY_LOG:
        return log1p(b)
    elif family == FAMILY_EXP:
        return exp(b)
    else:
        return exp(fa * b)


cdef double _fp_eval(int family, double fa, double b) noexcept nogil:
    cdef double bf
    if family == FAMILY_TULLOCK:
        bf = b if b > DERIVATIVE_FLOOR else DERIVATIVE_FLOOR
        return fa * pow(bf, fa - 1.0)
    elif family == FAMILY_LOG:
        return 1.0 / (1.0 + b)
    elif family == FAMILY_EXP:
        return exp(b)
    else:
        return fa * exp(fa * b)


cdef bint _project_row(double* v, double* w, double* buf, int n, double C) noexcept nogil:
    """Write the projection of v onto {b >= 0, sum b <= C} into w.

    Returns True when the projection moved the point (clip or cap active).
    """
    cdef int i, rho
    cdef double total = 0.0
    cdef double css, tau
    cdef bint moved = False
    for i in range(n):
        w[i] = v[i] if v[i] > 0.0 else 0.0
        if v[i] < 0.0:
            moved = True
        total += w[i]
    if total <= C:
        return moved
    for i in range(n):
        buf[i] = v[i]
    qsort(buf, n, sizeof(double), _cmp_desc)
    css = 0.0
    tau = 0.0
    rho = -1
    for i in range(n):
        css += buf[i]
        if buf[i] - (css - C) / (i + 1) > 0.0:
            rho = i
            tau = (css - C) / (i + 1)
        # cumulative sum over the descending prefix; last positive index wins
    # recompute tau for the selected rho (css above kept running)
    css = 0.0
    for i in range(rho + 1):
        css += buf[i]
    tau = (css - C) / (rho + 1)
    for i in range(n):
        w[i] = v[i] - tau
        if w[i] < 0.0:
            w[i] = 0.0
    return True


def project_capped_simplex(v, double C):
    """Euclidean projection onto {b >= 0, sum(b) <= C} (sort-based)."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] varr = np.ascontiguousarray(v, dtype=np.float64)
    cdef int n = varr.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.empty(n, dtype=np.float64)
    cdef double* buf = <double*> malloc(n * sizeof(double))
    if buf == NULL:
        raise MemoryError()
    try:
        _project_row(&varr[0], &out[0], buf, n, C)
    finally:
        free(buf)
    return out


def simulate_awareness(E, double alpha, H, X0, long T, bint record=False):
    """Running-average awareness update for t = 1..T; see ``_purepy``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=2] ET = np.ascontiguousarray(np.asarray(E, dtype=np.float64).T)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Harr = np.ascontiguousarray(H, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] X = np.array(X0, dtype=np.float64, order="C")
    cdef int m = X.shape[0]
    cdef int n = X.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=3] traj = None
    cdef double[:, :, ::1] tv = None
    cdef double[:, ::1] Xv = X
    cdef double[:, ::1] Hv = Harr
    cdef double[:, ::1] ETv = ET
    cdef cnp.ndarray[cnp.float64_t, ndim=2] Xn = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] Xnv = Xn
    cdef long t
    cdef int s, i, j
    cdef double inv_t, acc, one_minus_alpha = 1.0 - alpha

    if record:
        traj = np.empty((T + 1, m, n), dtype=np.float64)
        tv = traj
        tv[0, :, :] = Xv
    with nogil:
        for t in range(1, T + 1):
            inv_t = 1.0 / t
            for s in range(m):
                for i in range(n):
                    acc = 0.0
                    for j in range(n):
                        acc += Xv[s, j] * ETv[i, j]
                    Xnv[s, i] = inv_t * (alpha * acc + one_minus_alpha * Hv[s, i]) \
                        + (1.0 - inv_t) * Xv[s, i]
            for s in range(m):
                for i in range(n):
                    Xv[s, i] = Xnv[s, i]
            if tv is not None:
                for s in range(m):
                    for i in range(n):
                        tv[t, s, i] = Xv[s, i]
    return X, traj


def brd_loop(M, int family, double fa, double fb, B0, double C, double gamma,
             int K, double eps, int mode, bint record_budgets=False):
    """Simultaneous projected gradient best-response iteration; see ``_purepy``."""
    cdef cnp.ndarray[cnp.float64_t, ndim=1] Marr = np.ascontiguousarray(M, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] B = np.array(B0, dtype=np.float64, order="C")
    cdef int m = B.shape[0]
    cdef int n = B.shape[1]
    cdef double delta = fb
    cdef cnp.ndarray[cnp.float64_t, ndim=2] utilities = np.empty((K, m), dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] grad_norms = np.empty(K, dtype=np.float64)
    cdef cnp.ndarray[cnp.uint8_t, ndim=1] proj_active = np.zeros(K, dtype=np.uint8)
    cdef cnp.ndarray[cnp.float64_t, ndim=3] budgets = None
    cdef double[:, :, ::1] bud = None
    cdef double[:, ::1] Bv = B
    cdef double[::1] Mv = Marr
    cdef double[:, ::1] Uv = utilities
    cdef double[::1] Gn = grad_norms
    cdef cnp.uint8_t[::1] Pa = proj_active

    cdef double* F = <double*> malloc(m * n * sizeof(double))
    cdef double* Fp = <double*> malloc(m * n * sizeof(double))
    cdef double* S = <double*> malloc(n * sizeof(double))
    cdef double* raw = <double*> malloc(m * n * sizeof(double))
    cdef double* newB = <double*> malloc(m * n * sizeof(double))
    cdef double* buf = <double*> malloc(n * sizeof(double))
    if F == NULL or Fp == NULL or S == NULL or raw == NULL or newB == NULL or buf == NULL:
        free(F); free(Fp); free(S); free(raw); free(newB); free(buf)
        raise MemoryError()

    if record_budgets:
        budgets = np.empty((K + 1, m, n), dtype=np.float64)
        bud = budgets
        bud[0, :, :] = Bv

    cdef int k, s, i, n_iters = 0
    cdef bint converged = False, active, feasible, moved
    cdef double g, gn2, gval, rowsum, cost, uacc, dh

    with nogil:
        for k in range(K):
            for i in range(n):
                S[i] = delta
            for s in range(m):
                for i in range(n):
                    F[s * n + i] = _f_eval(family, fa, Bv[s, i])
                    Fp[s * n + i] = _fp_eval(family, fa, Bv[s, i])
                    S[i] += F[s * n + i]
            for s in range(m):
                uacc = 0.0
                cost = 0.0
                for i in range(n):
                    uacc += Mv[i] * F[s * n + i] / S[i]
                    cost += Bv[s, i]
                Uv[k, s] = uacc - cost
            # raw gradient step
            for s in range(m):
                for i in range(n):
                    dh = Fp[s * n + i] * (S[i] - F[s * n + i]) / (S[i] * S[i])
                    raw[s * n + i] = Bv[s, i] + gamma * (Mv[i] * dh - 1.0)
            gn2 = 0.0
            active = False
            if mode == MODE_EUCLIDEAN:
                for s in range(m):
                    moved = _project_row(raw + s * n, newB + s * n, buf, n, C)
                    if moved:
                        active = True
                    for i in range(n):
                        g = (newB[s * n + i] - Bv[s, i]) / gamma
                        gn2 += g * g
            else:
                for s in range(m):
                    feasible = True
                    rowsum = 0.0
                    for i in range(n):
                        if raw[s * n + i] < 0.0:
                            feasible = False
                        rowsum += raw[s * n + i]
                    if rowsum > C + 1e-12:
                        feasible = False
                    if feasible:
                        for i in range(n):
                            newB[s * n + i] = raw[s * n + i]
                            gval = (raw[s * n + i] - Bv[s, i]) / gamma
                            gn2 += gval * gval
                    else:
                        active = True
                        for i in range(n):
                            newB[s * n + i] = Bv[s, i]
            Gn[k] = sqrt(gn2)
            Pa[k] = 1 if active else 0
            n_iters = k + 1
            for s in range(m):
                for i in range(n):
                    Bv[s, i] = newB[s * n + i]
            if bud is not None:
                for s in range(m):
                    for i in range(n):
                        bud[k + 1, s, i] = Bv[s, i]
            if Gn[k] < eps:
                converged = True
                break

    free(F); free(Fp); free(S); free(raw); free(newB); free(buf)
    out_budgets = budgets[: n_iters + 1].copy() if record_budgets else None
    return (
        B,
        n_iters,
        bool(converged),
        utilities[:n_iters].copy(),
        grad_norms[:n_iters].copy(),
        proj_active[:n_iters].copy(),
        out_budgets,
    )
