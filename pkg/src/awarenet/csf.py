"""Contest success functions of ratio form h = f(b_own) / (sum_r f(b_r) + delta).

Four families of f:

* ``tullock(q, delta)``: f(b) = b^q, concave for q <= 1
* ``log(delta)``:        f(b) = log(1 + b)
* ``exp(delta)``:        f(b) = exp(b), non-concave
* ``softmax(k, delta)``: f(b) = exp(k b); f(0) = 1, so positive success
  probability at zero spend (used by the five-node benchmark game)

``check_assumptions`` numerically audits the welfare-alignment conditions
(strict concavity, strategic substitutability, dominance of diminishing
returns) on budget grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._backend import (
    DERIVATIVE_FLOOR,
    FAMILY_EXP,
    FAMILY_LOG,
    FAMILY_SOFTMAX,
    FAMILY_TULLOCK,
)

__all__ = ["CsfSpec", "make_csf", "csf_eval", "AssumptionReport", "check_assumptions"]

_FAMILY_IDS = {
    "tullock": FAMILY_TULLOCK,
    "log": FAMILY_LOG,
    "exp": FAMILY_EXP,
    "softmax": FAMILY_SOFTMAX,
}


@dataclass(frozen=True)
class CsfSpec:
    """Immutable contest success function specification."""

    family: str
    delta: float
    q: float = 1.0
    k: float = 1.0

    def __post_init__(self):
        if self.family not in _FAMILY_IDS:
            raise ValueError(
                f"unknown CSF family {self.family!r}; expected one of {sorted(_FAMILY_IDS)}"
            )
        if not self.delta > 0:
            raise ValueError(f"contest noise delta must be > 0, got {self.delta}")
        if self.family == "tullock" and not self.q > 0:
            raise ValueError(f"tullock exponent q must be > 0, got {self.q}")
        if self.family == "softmax" and not self.k > 0:
            raise ValueError(f"softmax rate k must be > 0, got {self.k}")

    @property
    def family_id(self) -> int:
        return _FAMILY_IDS[self.family]

    @property
    def family_param(self) -> float:
        """First parameter slot of the kernel ABI (q for tullock, k for softmax)."""
        if self.family == "tullock":
            return self.q
        if self.family == "softmax":
            return self.k
        return 0.0

    def label(self) -> str:
        if self.family == "tullock":
            return f"tullock(q={self.q:g}, delta={self.delta:g})"
        if self.family == "softmax":
            return f"softmax(k={self.k:g}, delta={self.delta:g})"
        return f"{self.family}(delta={self.delta:g})"

    # f and its first two derivatives, vectorized over budgets
    def f(self, b):
        b = np.asarray(b, dtype=float)
        if self.family == "tullock":
            return np.power(b, self.q)
        if self.family == "log":
            return np.log1p(b)
        if self.family == "exp":
            return np.exp(b)
        return np.exp(self.k * b)

    def fp(self, b):
        b = np.asarray(b, dtype=float)
        if self.family == "tullock":
            return self.q * np.power(np.maximum(b, DERIVATIVE_FLOOR), self.q - 1.0)
        if self.family == "log":
            return 1.0 / (1.0 + b)
        if self.family == "exp":
            return np.exp(b)
        return self.k * np.exp(self.k * b)

    def fpp(self, b):
        b = np.asarray(b, dtype=float)
        if self.family == "tullock":
            bf = np.maximum(b, DERIVATIVE_FLOOR)
            return self.q * (self.q - 1.0) * np.power(bf, self.q - 2.0)
        if self.family == "log":
            return -1.0 / (1.0 + b) ** 2
        if self.family == "exp":
            return np.exp(b)
        return self.k * self.k * np.exp(self.k * b)

    def values(self, B: np.ndarray) -> np.ndarray:
        """Per-(firm, node) success probabilities for a budget matrix B (m x n)."""
        F = self.f(B)
        S = F.sum(axis=0) + self.delta
        return F / S[None, :]

    def values_and_gradients(self, B: np.ndarray):
        """(H, dH) with dH[s, i] = d h_si / d b_si."""
        F = self.f(B)
        Fp = self.fp(B)
        S = F.sum(axis=0) + self.delta
        H = F / S[None, :]
        dH = Fp * (S[None, :] - F) / S[None, :] ** 2
        return H, dH

    def second_derivative_parts(self, B: np.ndarray):
        """(F, Fp, Fpp, S) from which both second derivatives follow.

        own:   d2 h_s / d b_s^2       = (S - F_s)(Fpp_s S - 2 Fp_s^2) / S^3
        cross: d2 h_s / d b_s d b_r   = Fp_s Fp_r (2 F_s - S) / S^3
        """
        F = self.f(B)
        Fp = self.fp(B)
        Fpp = self.fpp(B)
        S = F.sum(axis=0) + self.delta
        return F, Fp, Fpp, S


def make_csf(family: str, *, delta: float, q: float = 1.0, k: float = 1.0) -> CsfSpec:
    return CsfSpec(family=family, delta=delta, q=q, k=k)


def csf_eval(spec: CsfSpec, b_own: float, b_others) -> tuple[float, float, float, float]:
    """Scalar evaluation: (h, dh/db_own, d2h/db_own^2, d2h/db_own db_other).

    The cross derivative is taken with respect to the first entry of
    ``b_others``.
    """
    b_others = np.asarray(b_others, dtype=float)
    if b_own < 0 or (b_others < 0).any():
        raise ValueError("budgets must be nonnegative")
    f_own = float(spec.f(b_own))
    S = f_own + float(spec.f(b_others).sum()) + spec.delta
    fp_own = float(spec.fp(b_own))
    fpp_own = float(spec.fpp(b_own))
    h = f_own / S
    dh = fp_own * (S - f_own) / S**2
    d2_own = (S - f_own) * (fpp_own * S - 2.0 * fp_own**2) / S**3
    if b_others.size:
        fp_other = float(spec.fp(b_others.flat[0]))
        d2_cross = fp_own * fp_other * (2.0 * f_own - S) / S**3
    else:
        d2_cross = 0.0
    return h, dh, d2_own, d2_cross


@dataclass
class AssumptionReport:
    """Outcome of the welfare-alignment audit, with witnesses for failures."""

    concavity_ok: bool
    substitutability_ok: bool
    dominance_ok: bool
    witnesses: dict = field(default_factory=dict)
    grid: float = 0.05
    alpha_steps: tuple = ()
    m: int = 2

    @property
    def all_ok(self) -> bool:
        return self.concavity_ok and self.substitutability_ok and self.dominance_ok

    def summary_lines(self):
        names = [
            ("strict concavity", self.concavity_ok, "concavity"),
            ("strategic substitutability", self.substitutability_ok, "substitutability"),
            ("dominance of diminishing returns", self.dominance_ok, "dominance"),
        ]
        lines = []
        for label, ok, key in names:
            line = f"{label:34s} {'PASS' if ok else 'FAIL'}"
            if not ok and self.witnesses.get(key):
                cfg, val = self.witnesses[key][0]
                line += f"   witness {cfg} -> {val:+.3e}"
            lines.append(line)
        return lines


def _own_second(spec: CsfSpec, b_own, others_f_sum):
    f = spec.f(b_own)
    S = f + others_f_sum + spec.delta
    return (S - f) * (spec.fpp(b_own) * S - 2.0 * spec.fp(b_own) ** 2) / S**3


def _cross_second(spec: CsfSpec, b_own, b_r, rest_f_sum):
    f = spec.f(b_own)
    S = f + spec.f(b_r) + rest_f_sum + spec.delta
    return spec.fp(b_own) * spec.fp(b_r) * (2.0 * f - S) / S**3


def check_assumptions(
    spec: CsfSpec,
    m: int,
    grid: float = 0.05,
    alpha_steps=(0.05, 0.1, 0.2),
    slack: float = 1e-12,
    max_witnesses: int = 10,
) -> AssumptionReport:
    """Numerical audit of the three welfare-alignment conditions.

    Strict concavity is checked at every point of {0, grid, ..., 1}^m.
    Substitutability and the dominance chain are checked on the offset
    configurations (one firm at t + alpha_step, the rest at t) that the
    uniqueness argument relies on, sweeping t over {grid, 2 grid, ...,
    1 - alpha_step}.  Strict inequalities use the given slack.
    """
    if m < 2:
        raise ValueError(f"need at least two firms, got m={m}")
    if not 0 < grid <= 0.5:
        raise ValueError(f"grid step must lie in (0, 0.5], got {grid}")
    axis = np.arange(0.0, 1.0 + 1e-12, grid)
    witnesses: dict[str, list] = {"concavity": [], "substitutability": [], "dominance": []}

    # (1) own second derivative over the full grid; firm symmetry means
    # checking the first coordinate suffices.
    mesh = np.meshgrid(*([axis] * m), indexing="ij")
    b_own = mesh[0].ravel()
    others = sum(spec.f(ax.ravel()) for ax in mesh[1:])
    own2 = _own_second(spec, b_own, others)
    bad = own2 >= -slack
    concavity_ok = not bad.any()
    if not concavity_ok:
        order = np.argsort(-own2)
        for idx in order[:max_witnesses]:
            if not bad[idx]:
                break
            point = tuple(round(float(ax.ravel()[idx]), 10) for ax in mesh)
            witnesses["concavity"].append((("b", point), float(own2[idx])))

    # (2) + (3) offset configurations
    substitutability_ok = True
    dominance_ok = True
    for a in alpha_steps:
        ts = np.arange(grid, 1.0 - a + 1e-12, grid)
        if ts.size == 0:
            continue
        rest = (m - 2) * spec.f(ts)
        cross = _cross_second(spec, ts, ts + a, rest)
        own_at_lead = _own_second(spec, ts + a, (m - 1) * spec.f(ts))
        sub_bad = cross >= -slack
        if sub_bad.any():
            substitutability_ok = False
            for idx in np.nonzero(sub_bad)[0][:max_witnesses]:
                witnesses["substitutability"].append(
                    ((("t", float(ts[idx])), ("alpha_step", a)), float(cross[idx]))
                )
        dom_bad = (own_at_lead >= cross - slack) | sub_bad
        if dom_bad.any():
            dominance_ok = False
            gaps = own_at_lead - cross
            for idx in np.argsort(-gaps)[:max_witnesses]:
                if not dom_bad[idx]:
                    break
                witnesses["dominance"].append(
                    ((("t", float(ts[idx])), ("alpha_step", a)), float(gaps[idx]))
                )

    witnesses = {k: v for k, v in witnesses.items() if v}
    return AssumptionReport(
        concavity_ok=concavity_ok,
        substitutability_ok=substitutability_ok,
        dominance_ok=dominance_ok,
        witnesses=witnesses,
        grid=grid,
        alpha_steps=tuple(alpha_steps),
        m=m,
    )
