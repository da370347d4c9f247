"""Pure-numpy implementations of the hot kernels.

Used when the compiled extension is unavailable (or forced via the
AWARENET_BACKEND=pure environment variable).  Signatures and numerical
behavior mirror ``_kernels.pyx``; the equivalence is pinned by tests.
"""

from __future__ import annotations

import numpy as np

DERIVATIVE_FLOOR = 1e-9

FAMILY_TULLOCK = 0
FAMILY_LOG = 1
FAMILY_EXP = 2
FAMILY_SOFTMAX = 3

MODE_EUCLIDEAN = 0
MODE_PAPER_FREEZE = 1


def simulate_awareness(E, alpha, H, X0, T, record=False):
    """Running-average awareness update for t = 1..T.

    X(t) = (1/t) [alpha X(t-1) E + (1-alpha) H] + (1 - 1/t) X(t-1)

    Returns (final_state, trajectory) where trajectory is an array of
    shape (T+1, m, n) when ``record`` else None.
    """
    X = np.array(X0, dtype=float)
    m, n = X.shape
    traj = None
    if record:
        traj = np.empty((T + 1, m, n))
        traj[0] = X
    drive = (1.0 - alpha) * H
    for t in range(1, T + 1):
        inv_t = 1.0 / t
        X = inv_t * (alpha * (X @ E) + drive) + (1.0 - inv_t) * X
        if record:
            traj[t] = X
    return X, traj


def project_capped_simplex(v, C):
    """Euclidean projection onto {b >= 0, sum(b) <= C} (sort-based, O(n log n))."""
    v = np.asarray(v, dtype=float)
    w = np.maximum(v, 0.0)
    if w.sum() <= C:
        return w
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - C
    idx = np.arange(1, v.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    tau = css[rho] / (rho + 1.0)
    return np.maximum(v - tau, 0.0)


def _family_f(family, fa, fb, B):
    if family == FAMILY_TULLOCK:
        return np.power(B, fa)
    if family == FAMILY_LOG:
        return np.log1p(B)
    if family == FAMILY_EXP:
        return np.exp(B)
    if family == FAMILY_SOFTMAX:
        return np.exp(fa * B)
    raise ValueError(f"unknown family id {family}")


def _family_fp(family, fa, fb, B):
    if family == FAMILY_TULLOCK:
        return fa * np.power(np.maximum(B, DERIVATIVE_FLOOR), fa - 1.0)
    if family == FAMILY_LOG:
        return 1.0 / (1.0 + B)
    if family == FAMILY_EXP:
        return np.exp(B)
    if family == FAMILY_SOFTMAX:
        return fa * np.exp(fa * B)
    raise ValueError(f"unknown family id {family}")


def brd_loop(M, family, fa, fb, B0, C, gamma, K, eps, mode, record_budgets=False):
    """Simultaneous projected gradient best-response iteration.

    Returns (B_final, n_iters, converged, utilities, grad_norms, proj_active,
    budgets) where utilities[k] holds the per-firm utilities at B(k) and
    grad_norms[k] the joint gradient-with-duals norm of step k.  budgets is
    None unless ``record_budgets``; otherwise shape (n_iters+1, m, n) with
    budgets[k] = B(k) and budgets[-1] the final profile.
    """
    M = np.asarray(M, dtype=float)
    B = np.array(B0, dtype=float)
    m, n = B.shape
    delta = fb
    utilities = np.empty((K, m))
    grad_norms = np.empty(K)
    proj_active = np.zeros(K, dtype=np.uint8)
    budgets = [B.copy()] if record_budgets else None
    converged = False
    n_iters = 0
    for k in range(K):
        F = _family_f(family, fa, fb, B)
        Fp = _family_fp(family, fa, fb, B)
        S = F.sum(axis=0) + delta
        utilities[k] = (M[None, :] * F / S[None, :]).sum(axis=1) - B.sum(axis=1)
        grad = M[None, :] * (Fp * (S[None, :] - F) / S[None, :] ** 2) - 1.0
        raw = B + gamma * grad
        if mode == MODE_EUCLIDEAN:
            newB = np.vstack([project_capped_simplex(raw[s], C) for s in range(m)])
            g = (newB - B) / gamma
            active = not np.array_equal(newB, raw)
        elif mode == MODE_PAPER_FREEZE:
            newB = B.copy()
            g = np.zeros_like(B)
            active = False
            for s in range(m):
                feasible = (raw[s] >= 0.0).all() and raw[s].sum() <= C + 1e-12
                if feasible:
                    newB[s] = raw[s]
                    g[s] = grad[s]
                else:
                    active = True
        else:
            raise ValueError(f"unknown projection mode id {mode}")
        gn = float(np.sqrt((g * g).sum()))
        grad_norms[k] = gn
        proj_active[k] = active
        n_iters = k + 1
        B = newB
        if record_budgets:
            budgets.append(B.copy())
        if gn < eps:
            converged = True
            break
    if record_budgets:
        budgets = np.array(budgets)
    return (
        B,
        n_iters,
        converged,
        utilities[:n_iters],
        grad_norms[:n_iters],
        proj_active[:n_iters],
        budgets,
    )
