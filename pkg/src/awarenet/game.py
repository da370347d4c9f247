"""The awareness competition game: utilities, gradients, best-response
dynamics, smoothness estimation, and Nash verification.

Firm s earns sum_i M_i h_si(B) - sum_i b_si, where M is the weighted
centrality vector of the network and h the contest success function.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .csf import CsfSpec
from .network import InfluenceNetwork, compute_centrality

__all__ = [
    "BudgetProfile",
    "GameConfig",
    "BrdTrace",
    "SmoothnessEstimate",
    "NashCheck",
    "utility",
    "utility_gradient",
    "hessian_blocks",
    "estimate_smoothness",
    "brd_run",
    "verify_nash",
    "best_response",
    "grid_best_response_equilibrium",
    "project_capped_simplex",
]

_FEAS_TOL = 1e-9

project_capped_simplex = _backend.project_capped_simplex


@dataclass(frozen=True)
class BudgetProfile:
    """m x n nonnegative budget matrix; every firm's row sums to at most C."""

    B: np.ndarray
    C: float = 1.0

    def __post_init__(self):
        B = np.ascontiguousarray(np.atleast_2d(np.asarray(self.B, dtype=float)))
        object.__setattr__(self, "B", B)
        if (B < 0).any():
            raise ValueError("budget entries must be nonnegative")
        rows = B.sum(axis=1)
        if (rows > self.C + _FEAS_TOL).any():
            s = int(np.argmax(rows))
            raise ValueError(f"firm {s} spends {rows[s]:.9f} > cap {self.C}")

    @property
    def m(self) -> int:
        return self.B.shape[0]

    @property
    def n(self) -> int:
        return self.B.shape[1]


@dataclass
class GameConfig:
    """Network, contest success function, and solver parameters."""

    net: InfluenceNetwork
    csf: CsfSpec
    m: int
    C: float = 1.0
    gamma: float = 1e-4
    K: int = 5000
    eps: float = 1e-6
    projection_mode: str = "euclidean"
    _M: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"firm count must be >= 1, got {self.m}")
        if not self.gamma > 0:
            raise ValueError(f"step size must be > 0, got {self.gamma}")
        if self.K < 1:
            raise ValueError(f"iteration cap must be >= 1, got {self.K}")
        if not self.eps > 0:
            raise ValueError(f"stopping tolerance must be > 0, got {self.eps}")
        if self.projection_mode not in ("euclidean", "paper_freeze"):
            raise ValueError(f"unknown projection mode {self.projection_mode!r}")

    @property
    def M(self) -> np.ndarray:
        if self._M is None:
            self._M = compute_centrality(self.net).M
        return self._M

    @property
    def n(self) -> int:
        return self.net.n

    def check_profile(self, prof: BudgetProfile):
        if prof.m != self.m or prof.n != self.n:
            raise ValueError(
                f"profile shape {(prof.m, prof.n)} does not match game {(self.m, self.n)}"
            )
        rows = prof.B.sum(axis=1)
        if (rows > self.C + _FEAS_TOL).any():
            s = int(np.argmax(rows))
            raise ValueError(f"firm {s} spends {rows[s]:.9f} > game cap {self.C}")


@dataclass
class BrdTrace:
    """Per-iteration record of a best-response run."""

    utilities: np.ndarray          # (n_iters, m), utilities at B(k)
    grad_norms: np.ndarray         # (n_iters,)
    proj_active: np.ndarray        # (n_iters,) uint8
    final: BudgetProfile
    final_utilities: np.ndarray    # (m,)
    converged: bool
    welfare_ratio: np.ndarray | None = None
    budgets: np.ndarray | None = None  # (n_iters + 1, m, n) when recorded

    @property
    def n_iters(self) -> int:
        return self.grad_norms.shape[0]

    def csv_rows(self):
        """Long-format rows: k, firm, utility, grad_norm, welfare_ratio."""
        for k in range(self.n_iters):
            for s in range(self.utilities.shape[1]):
                r = "" if self.welfare_ratio is None else f"{self.welfare_ratio[k]:.10g}"
                yield (k, s, f"{self.utilities[k, s]:.10g}", f"{self.grad_norms[k]:.10g}", r)


@dataclass
class SmoothnessEstimate:
    """Sampled curvature bounds for the joint utility system."""

    lambda_hat: float
    B_hat: float
    sample_points: int

    @property
    def strongly_concave(self) -> bool:
        return self.lambda_hat > 0

    @property
    def gamma_star(self) -> float:
        if not self.strongly_concave:
            raise ValueError("strong concavity not detected; no theoretical step size")
        return self.lambda_hat / self.B_hat**2

    def iteration_bound(self, g0_norm: float, eps: float) -> float:
        if not self.strongly_concave:
            raise ValueError("strong concavity not detected; no iteration bound")
        return 2.0 * self.B_hat**2 / self.lambda_hat**2 * np.log(g0_norm / eps)


@dataclass
class NashCheck:
    is_nash: bool
    improvements: np.ndarray  # per-firm best found utility gain
    tol: float


def utility(cfg: GameConfig, prof: BudgetProfile) -> np.ndarray:
    """Per-firm utilities: awareness mass minus advertising cost."""
    cfg.check_profile(prof)
    H = cfg.csf.values(prof.B)
    return (cfg.M[None, :] * H).sum(axis=1) - prof.B.sum(axis=1)


def utility_gradient(cfg: GameConfig, prof: BudgetProfile, s: int) -> np.ndarray:
    """Gradient of firm s's utility with respect to its own budget row."""
    cfg.check_profile(prof)
    _, dH = cfg.csf.values_and_gradients(prof.B)
    return cfg.M * dH[s] - 1.0


def _all_gradients(cfg: GameConfig, B: np.ndarray) -> np.ndarray:
    _, dH = cfg.csf.values_and_gradients(B)
    return cfg.M[None, :] * dH - 1.0


def hessian_blocks(cfg: GameConfig, prof: BudgetProfile) -> np.ndarray:
    """The mn x mn block matrix G with [G_{s1,s2}]_{ij} = d2 u_{s1} / d b_{s2,j} d b_{s1,i}.

    The contest on a node involves only that node's budgets, so every
    block is diagonal.
    """
    cfg.check_profile(prof)
    m, n = prof.m, prof.n
    F, Fp, Fpp, S = cfg.csf.second_derivative_parts(prof.B)
    G = np.zeros((m * n, m * n))
    own = cfg.M[None, :] * (S[None, :] - F) * (Fpp * S[None, :] - 2.0 * Fp**2) / S[None, :] ** 3
    for s1 in range(m):
        for s2 in range(m):
            if s1 == s2:
                diag = own[s1]
            else:
                diag = cfg.M * Fp[s1] * Fp[s2] * (2.0 * F[s1] - S) / S**3
            idx = np.arange(n)
            G[s1 * n + idx, s2 * n + idx] = diag
    return G


def sample_interior_profile(cfg: GameConfig, rng: np.random.Generator, margin: float = 0.01) -> BudgetProfile:
    """Uniform draw from the capped simplex, contracted to keep entries interior."""
    y = rng.dirichlet(np.ones(cfg.n + 1), size=cfg.m)[:, : cfg.n] * cfg.C
    B = margin * cfg.C / cfg.n + (1.0 - 2.0 * margin) * y
    return BudgetProfile(B=B, C=cfg.C)


def estimate_smoothness(cfg: GameConfig, samples: int = 50, seed: int = 0) -> SmoothnessEstimate:
    """Sample interior profiles and bound the curvature of the joint system.

    lambda_hat is the worst (smallest) strong-concavity margin of the
    symmetrized Hessian-like matrix; B_hat the largest spectral norm.
    """
    if samples < 1:
        raise ValueError(f"need at least one sample, got {samples}")
    rng = np.random.default_rng(seed)
    lam = np.inf
    bop = 0.0
    for _ in range(samples):
        prof = sample_interior_profile(cfg, rng)
        G = hessian_blocks(cfg, prof)
        ev_max = np.linalg.eigvalsh(0.5 * (G + G.T))[-1]
        lam = min(lam, -ev_max)
        bop = max(bop, np.linalg.svd(G, compute_uv=False)[0])
    return SmoothnessEstimate(lambda_hat=float(lam), B_hat=float(bop), sample_points=samples)


_MODE_IDS = {"euclidean": _backend.MODE_EUCLIDEAN, "paper_freeze": _backend.MODE_PAPER_FREEZE}


def brd_run(
    cfg: GameConfig,
    B0: BudgetProfile,
    W_ref: float | None = None,
    welfare_spec=None,
    record_budgets: bool = False,
) -> BrdTrace:
    """Run simultaneous projected gradient best-response dynamics from B0.

    In euclidean mode each firm's raw step is projected onto its capped
    simplex and the dual variable is the projection residual divided by
    the step size, so the recorded norm is the fixed-point residual.  In
    paper_freeze mode a firm whose raw step leaves the feasible set keeps
    its previous budgets and contributes zero to the norm.

    When ``W_ref`` (and a welfare spec) are given, the welfare ratio
    R(k) = W_p(B(k)) / W_ref is attached to the trace.
    """
    cfg.check_profile(B0)
    final_B, n_iters, converged, utils, gnorms, pact, budgets = _backend.brd_loop(
        cfg.M,
        cfg.csf.family_id,
        cfg.csf.family_param,
        cfg.csf.delta,
        B0.B,
        cfg.C,
        cfg.gamma,
        cfg.K,
        cfg.eps,
        _MODE_IDS[cfg.projection_mode],
        record_budgets,
    )
    final = BudgetProfile(B=np.maximum(final_B, 0.0), C=cfg.C)
    trace = BrdTrace(
        utilities=utils,
        grad_norms=gnorms,
        proj_active=pact,
        final=final,
        final_utilities=utility(cfg, final),
        converged=converged,
        budgets=budgets,
    )
    if W_ref is not None and welfare_spec is not None:
        from .welfare import ratio_from_utilities

        trace.welfare_ratio = ratio_from_utilities(trace.utilities, W_ref, welfare_spec)
    return trace


def best_response(
    cfg: GameConfig,
    prof: BudgetProfile,
    s: int,
    restarts: int = 6,
    iters: int = 3000,
    step: float = 2e-3,
    seed: int = 0,
) -> tuple[np.ndarray, float]:
    """Approximately maximize firm s's utility against the others' budgets.

    Projected gradient ascent from several starts (current row, zero,
    uniform, budget concentrated on each node in turn, random draws),
    tracking the best point visited.
    """
    rng = np.random.default_rng(seed)
    others = prof.B.copy()
    M, n = cfg.M, cfg.n

    def u_of(row):
        others[s] = row
        H = cfg.csf.values(others)
        return float((M * H[s]).sum() - row.sum())

    def grad_of(row):
        others[s] = row
        _, dH = cfg.csf.values_and_gradients(others)
        return M * dH[s] - 1.0

    starts = [prof.B[s].copy(), np.zeros(n), np.full(n, cfg.C / n)]
    starts += [cfg.C * np.eye(n)[i] for i in range(n)]
    starts += [rng.dirichlet(np.ones(n)) * cfg.C * rng.random() for _ in range(restarts)]
    best_val = -np.inf
    best_row = None
    for row0 in starts:
        row = row0.copy()
        val = u_of(row)
        if val > best_val:
            best_val, best_row = val, row.copy()
        for _ in range(iters):
            row = project_capped_simplex(row + step * grad_of(row), cfg.C)
        val = u_of(row)
        if val > best_val:
            best_val, best_row = val, row.copy()
    return best_row, best_val


def verify_nash(
    cfg: GameConfig,
    prof: BudgetProfile,
    tol: float = 0.01,
    restarts: int = 6,
    iters: int = 3000,
    seed: int = 0,
) -> NashCheck:
    """True when no firm can improve its utility by more than ``tol``."""
    cfg.check_profile(prof)
    base = utility(cfg, prof)
    improvements = np.zeros(cfg.m)
    for s in range(cfg.m):
        _, best_val = best_response(cfg, prof, s, restarts=restarts, iters=iters, seed=seed + s)
        improvements[s] = best_val - base[s]
    return NashCheck(is_nash=bool((improvements <= tol).all()), improvements=improvements, tol=tol)


def _axis_grid(step: float, C: float) -> np.ndarray:
    return np.arange(0.0, C + 1e-12, step)


def grid_best_response_equilibrium(
    cfg: GameConfig, step: float = 0.001, max_rounds: int = 200
) -> np.ndarray:
    """Independent equilibrium oracle: iterated exact best response on a grid.

    Supports n in {1, 2}.  Each firm's strategy set is every grid point of
    its capped simplex; rounds of sequential exact grid best responses run
    until the joint profile repeats.
    """
    if cfg.n > 2:
        raise ValueError("grid oracle supports n in {1, 2}")
    axis = _axis_grid(step, cfg.C)
    if cfg.n == 1:
        strategies = axis[:, None]
    else:
        a, b = np.meshgrid(axis, axis, indexing="ij")
        mask = a + b <= cfg.C + 1e-12
        strategies = np.column_stack([a[mask], b[mask]])
    M = cfg.M
    B = np.full((cfg.m, cfg.n), 0.0)

    def grid_br(s):
        others = np.delete(B, s, axis=0)
        F_others = cfg.csf.f(others).sum(axis=0)
        F_cand = cfg.csf.f(strategies)
        S = F_cand + F_others[None, :] + cfg.csf.delta
        u = (M[None, :] * F_cand / S).sum(axis=1) - strategies.sum(axis=1)
        return strategies[int(np.argmax(u))]

    seen = set()
    for _ in range(max_rounds):
        for s in range(cfg.m):
            B[s] = grid_br(s)
        key = tuple(np.round(B / step).astype(int).ravel())
        if key in seen:
            break
        seen.add(key)
    return B.copy()
