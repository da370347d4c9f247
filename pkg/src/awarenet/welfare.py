"""p-mean social welfare, welfare maximization, and the Price of Anarchy.

W_p is the power mean of firm utilities: p = 1 is the average, p -> 0 the
Nash social welfare (geometric mean), p = -inf the egalitarian minimum.
For p < 1 the power mean needs positive utilities; profiles with a
nonpositive utility are reported as undefined rather than raising.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .game import BudgetProfile, GameConfig, project_capped_simplex, utility

__all__ = [
    "WelfareSpec",
    "WelfareResult",
    "PoaResult",
    "welfare",
    "welfare_value",
    "ratio_from_utilities",
    "welfare_optimize",
    "price_of_anarchy",
    "welfare_ratio_curve",
]

_P_ZERO_TOL = 0.0  # only exactly p == 0 means the Nash-social-welfare limit


@dataclass(frozen=True)
class WelfareSpec:
    """Power-mean exponent; 0 is the geometric-mean sentinel, -inf the minimum."""

    p: float

    def __post_init__(self):
        if not (self.p <= 1.0 or math.isclose(self.p, 1.0)):
            raise ValueError(f"welfare exponent must satisfy p <= 1, got {self.p}")

    @classmethod
    def utilitarian(cls) -> "WelfareSpec":
        return cls(p=1.0)

    @classmethod
    def nash(cls) -> "WelfareSpec":
        return cls(p=0.0)

    @classmethod
    def egalitarian(cls) -> "WelfareSpec":
        return cls(p=-math.inf)

    @classmethod
    def from_config(cls, value) -> "WelfareSpec":
        if isinstance(value, str):
            if value.strip().lower() in ("-inf", "-infinity", "egalitarian"):
                return cls.egalitarian()
            raise ValueError(f"unrecognized welfare exponent {value!r}")
        return cls(p=float(value))

    def label(self) -> str:
        if self.p == 1.0:
            return "utilitarian"
        if self.p == 0.0:
            return "nash"
        if self.p == -math.inf:
            return "egalitarian"
        return f"p={self.p:g}"


@dataclass
class WelfareResult:
    value: float | None
    per_firm_utilities: np.ndarray
    defined: bool


@dataclass
class PoaResult:
    poa: float | None
    w_opt: float
    b_opt: BudgetProfile
    w_worst_ne: float | None
    defined: bool


def welfare_value(utils: np.ndarray, spec: WelfareSpec) -> tuple[float | None, bool]:
    """Power mean of a utility vector; (None, False) when undefined."""
    u = np.asarray(utils, dtype=float)
    p = spec.p
    if p == 1.0:
        return float(u.mean()), True
    if (u <= 0).any():
        return None, False
    if p == _P_ZERO_TOL:
        return float(np.exp(np.log(u).mean())), True
    if p == -math.inf:
        return float(u.min()), True
    return float((np.power(u, p).mean()) ** (1.0 / p)), True


def welfare(cfg: GameConfig, prof: BudgetProfile, spec: WelfareSpec) -> WelfareResult:
    u = utility(cfg, prof)
    value, defined = welfare_value(u, spec)
    return WelfareResult(value=value, per_firm_utilities=u, defined=defined)


def ratio_from_utilities(utilities: np.ndarray, w_ref: float, spec: WelfareSpec) -> np.ndarray:
    """R(k) = W_p(u(k)) / w_ref per recorded iteration; NaN where undefined."""
    if not w_ref > 0:
        raise ValueError(f"reference welfare must be positive, got {w_ref}")
    out = np.full(utilities.shape[0], np.nan)
    for k in range(utilities.shape[0]):
        val, defined = welfare_value(utilities[k], spec)
        if defined:
            out[k] = val / w_ref
    return out


def welfare_ratio_curve(trace, w_opt: float, spec: WelfareSpec | None = None):
    """List of (k, R(k)) pairs for plotting."""
    if spec is not None:
        R = ratio_from_utilities(trace.utilities, w_opt, spec)
    else:
        if trace.welfare_ratio is None:
            raise ValueError("trace has no welfare ratio; pass a welfare spec")
        R = trace.welfare_ratio
    return [(k, float(R[k])) for k in range(len(R))]


def _weights(u: np.ndarray, spec: WelfareSpec):
    """d W_p / d u_r, defined for positive utilities (or any u when p = 1)."""
    m = u.size
    p = spec.p
    if p == 1.0:
        return np.full(m, 1.0 / m)
    if p == _P_ZERO_TOL:
        w, _ = welfare_value(u, spec)
        return w / (m * u)
    if p == -math.inf:
        g = np.zeros(m)
        g[int(np.argmin(u))] = 1.0
        return g
    w, _ = welfare_value(u, spec)
    return (w ** (1.0 - p)) * np.power(u, p - 1.0) / m


def _welfare_gradient(cfg: GameConfig, B: np.ndarray, spec: WelfareSpec) -> np.ndarray:
    """Joint-space gradient of W_p; min-utility ascent where W_p is undefined."""
    csf = cfg.csf
    F = csf.f(B)
    Fp = csf.fp(B)
    S = F.sum(axis=0) + csf.delta
    u = (cfg.M[None, :] * F / S[None, :]).sum(axis=1) - B.sum(axis=1)
    _, defined = welfare_value(u, spec)
    if defined:
        w = _weights(u, spec)
    else:
        w = np.zeros(cfg.m)
        w[int(np.argmin(u))] = 1.0
    wF = (w[:, None] * F).sum(axis=0)
    grad = cfg.M[None, :] * Fp * (w[:, None] * S[None, :] - wF[None, :]) / S[None, :] ** 2
    return grad - w[:, None]


def _joint_pga(cfg, spec, B0, iters, step):
    B = B0.copy()
    for _ in range(iters):
        G = _welfare_gradient(cfg, B, spec)
        raw = B + step * G
        B = np.vstack([project_capped_simplex(raw[s], cfg.C) for s in range(cfg.m)])
    return B


def _symmetric_pga(cfg, b0, iters, step):
    """Planner ascent over the symmetric manifold b_si = b_i (common utility)."""
    csf = cfg.csf
    b = b0.copy()
    for _ in range(iters):
        F = csf.f(b)
        S = cfg.m * F + csf.delta
        g = cfg.M * csf.fp(b) * csf.delta / S**2 - 1.0
        b = project_capped_simplex(b + step * g, cfg.C)
    return b


def welfare_optimize(
    cfg: GameConfig,
    spec: WelfareSpec,
    restarts: int = 8,
    seed: int = 0,
    iters: int = 4000,
    step: float = 2e-3,
) -> tuple[BudgetProfile, float]:
    """Maximize W_p over the joint feasible set.

    Multi-restart projected gradient ascent in the joint space, plus the
    symmetric-manifold ascent (the CSF is identical across firms) and a
    set of concentrated candidate profiles; the best evaluated point wins
    with ties broken by candidate order.
    """
    rng = np.random.default_rng(seed)
    m, n = cfg.m, cfg.n
    candidates: list[np.ndarray] = [np.zeros((m, n)), np.full((m, n), cfg.C / n)]
    order = np.argsort(-cfg.M)
    lone = np.zeros((m, n))
    lone[0, order[0]] = cfg.C
    candidates.append(lone)
    spread = np.zeros((m, n))
    for s in range(m):
        spread[s, order[s % n]] = cfg.C
    candidates.append(spread)
    joint_starts = candidates + [
        rng.dirichlet(np.ones(n), size=m) * cfg.C * rng.random() for _ in range(restarts)
    ]
    evaluated: list[tuple[float, np.ndarray]] = []

    def consider(B):
        val, defined = welfare_value(utility(cfg, BudgetProfile(B=B, C=cfg.C)), spec)
        if defined:
            evaluated.append((val, B))

    for B0 in joint_starts:
        consider(B0)
        consider(_joint_pga(cfg, spec, B0, iters, step))
    for b0 in [np.zeros(n), np.full(n, cfg.C / n)] + [
        rng.dirichlet(np.ones(n)) * cfg.C for _ in range(max(2, restarts // 2))
    ]:
        b = _symmetric_pga(cfg, b0, iters, step)
        consider(np.tile(b, (m, 1)))

    if not evaluated:
        raise ArithmeticError(
            f"no feasible profile with defined {spec.label()} welfare was found"
        )
    best_val, best_B = max(evaluated, key=lambda t: t[0])
    return BudgetProfile(B=best_B, C=cfg.C), best_val


def price_of_anarchy(
    cfg: GameConfig,
    spec: WelfareSpec,
    ne_set: list[BudgetProfile],
    w_opt: float | None = None,
    b_opt: BudgetProfile | None = None,
    **opt_kwargs,
) -> PoaResult:
    """Optimal welfare over the welfare at the worst equilibrium in ``ne_set``."""
    if not ne_set:
        raise ValueError("need at least one equilibrium profile")
    if w_opt is None or b_opt is None:
        b_opt, w_opt = welfare_optimize(cfg, spec, **opt_kwargs)
    values = []
    for prof in ne_set:
        res = welfare(cfg, prof, spec)
        if not res.defined:
            return PoaResult(poa=None, w_opt=w_opt, b_opt=b_opt, w_worst_ne=None, defined=False)
        values.append(res.value)
    w_worst = min(values)
    return PoaResult(
        poa=w_opt / w_worst, w_opt=w_opt, b_opt=b_opt, w_worst_ne=w_worst, defined=True
    )
