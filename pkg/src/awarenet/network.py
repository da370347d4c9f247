"""Influence networks, weighted centrality, and the fast-timescale awareness dynamics.

Conventions
-----------
The influence matrix ``E`` is stored influencer-major: ``E[j, i]`` is the
influence of node ``j`` on node ``i``.  Sub-stochasticity is a column
property (the total influence received by any node is at most one), which
is what guarantees that ``I - alpha*E`` is invertible for ``alpha < 1``.

A node's awareness toward a firm evolves as a running average of peer
communication and the firm's contest success on that node; the steady
state solves a linear system and is computed with one LU factorization
shared across firms.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import _backend

__all__ = [
    "InfluenceNetwork",
    "CentralityVector",
    "AwarenessTrajectory",
    "NetworkFormatError",
    "load_network",
    "load_network_csv",
    "save_network",
    "compute_centrality",
    "awareness_limit",
    "awareness_simulate",
    "awareness_simulate_final",
]

_SUBSTOCHASTIC_TOL = 1e-9


class NetworkFormatError(ValueError):
    """Raised when a network file or matrix violates the format contract."""


@dataclass(frozen=True)
class InfluenceNetwork:
    """A social network with peer-communication probability ``alpha``."""

    n: int
    E: np.ndarray
    alpha: float

    def __post_init__(self):
        E = np.ascontiguousarray(np.asarray(self.E, dtype=float))
        object.__setattr__(self, "E", E)
        if self.n <= 0:
            raise NetworkFormatError(f"node count must be positive, got {self.n}")
        if E.shape != (self.n, self.n):
            raise NetworkFormatError(
                f"influence matrix shape {E.shape} does not match n={self.n}"
            )
        if not (0.0 <= self.alpha < 1.0):
            raise NetworkFormatError(f"alpha must lie in [0, 1), got {self.alpha}")
        if not np.isfinite(E).all():
            raise NetworkFormatError("influence matrix contains non-finite entries")
        if (E < 0).any() or (E > 1).any():
            j, i = np.argwhere((E < 0) | (E > 1))[0]
            raise NetworkFormatError(
                f"entry ({j}, {i}) = {E[j, i]} outside [0, 1]"
            )
        diag = np.abs(np.diag(E))
        if diag.max(initial=0.0) > 0:
            i = int(np.argmax(diag))
            raise NetworkFormatError(f"nonzero diagonal at node {i}")
        colsums = E.sum(axis=0)
        if (colsums > 1.0 + _SUBSTOCHASTIC_TOL).any():
            i = int(np.argmax(colsums))
            raise NetworkFormatError(
                f"column {i} not sub-stochastic (sum {colsums[i]:.6f} > 1)"
            )


@dataclass(frozen=True)
class CentralityVector:
    """Weighted centralities M and absorption centralities c, M = (1-alpha)c."""

    M: np.ndarray
    c: np.ndarray


@dataclass
class AwarenessTrajectory:
    """States of the fast-timescale update for t = 0..T."""

    steps: np.ndarray  # shape (T+1, m, n)
    T: int

    def __len__(self):
        return self.steps.shape[0]

    @property
    def last(self) -> np.ndarray:
        return self.steps[-1]


def load_network(path) -> InfluenceNetwork:
    """Read a network from JSON: {"n":, "alpha":, "edges": [[j, i, w], ...]}."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise NetworkFormatError(f"cannot parse network file {path}: {exc}") from exc
    for key in ("n", "alpha", "edges"):
        if key not in doc:
            raise NetworkFormatError(f"network file missing field '{key}'")
    n = int(doc["n"])
    if n <= 0:
        raise NetworkFormatError(f"node count must be positive, got {n}")
    E = np.zeros((n, n))
    for entry in doc["edges"]:
        if len(entry) != 3:
            raise NetworkFormatError(f"edge entry {entry!r} is not [j, i, w]")
        j, i, w = int(entry[0]), int(entry[1]), float(entry[2])
        if not (0 <= j < n and 0 <= i < n):
            raise NetworkFormatError(f"edge ({j}, {i}) outside 0..{n - 1}")
        E[j, i] = w
    return InfluenceNetwork(n=n, E=E, alpha=float(doc["alpha"]))


def load_network_csv(path, alpha: float) -> InfluenceNetwork:
    """Read a dense n x n matrix from CSV, row j = influencer."""
    rows = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or row[0].startswith("#"):
                continue
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise NetworkFormatError(f"bad value in {path} row {lineno}: {exc}") from exc
    E = np.array(rows)
    if E.ndim != 2 or E.shape[0] != E.shape[1]:
        raise NetworkFormatError(f"matrix in {path} is not square: {E.shape}")
    return InfluenceNetwork(n=E.shape[0], E=E, alpha=alpha)


def save_network(net: InfluenceNetwork, path, extra: dict | None = None):
    jj, ii = np.nonzero(net.E)
    doc = {
        "n": net.n,
        "alpha": net.alpha,
        "edges": [[int(j), int(i), float(net.E[j, i])] for j, i in zip(jj, ii)],
    }
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh)


def _system_matrix(net: InfluenceNetwork) -> np.ndarray:
    return np.eye(net.n) - net.alpha * net.E


def compute_centrality(net: InfluenceNetwork) -> CentralityVector:
    """Solve (I - alpha E) c = 1; the weighted centrality is M = (1-alpha) c."""
    A = _system_matrix(net)
    c = np.linalg.solve(A, np.ones(net.n))
    resid = np.abs(A @ c - 1.0).max()
    if resid > 1e-10:
        raise ArithmeticError(f"centrality solve residual {resid:.3e} exceeds 1e-10")
    return CentralityVector(M=(1.0 - net.alpha) * c, c=c)


def _validate_h(H: np.ndarray, n: int) -> np.ndarray:
    H = np.atleast_2d(np.asarray(H, dtype=float))
    if H.shape[1] != n:
        raise ValueError(f"CSF value matrix has {H.shape[1]} columns, expected {n}")
    if not np.isfinite(H).all() or (H < 0).any() or (H > 1).any():
        raise ValueError("CSF values must lie in [0, 1]")
    return H


def awareness_limit(net: InfluenceNetwork, H: np.ndarray) -> np.ndarray:
    """Steady-state awareness X (m x n): each firm's row solves the linear system.

    Row s satisfies x_s = alpha E^T x_s + (1-alpha) h_s, so the whole batch is
    one factorization of (I - alpha E)^T with m right-hand sides.
    """
    H = _validate_h(H, net.n)
    A = _system_matrix(net)
    X = np.linalg.solve(A.T, (1.0 - net.alpha) * H.T).T
    return X


def awareness_simulate(
    net: InfluenceNetwork,
    H: np.ndarray,
    T: int,
    X0: np.ndarray | None = None,
) -> AwarenessTrajectory:
    """Run the running-average awareness update for t = 1..T, recording every state."""
    H = _validate_h(H, net.n)
    m = H.shape[0]
    if T < 1:
        raise ValueError(f"horizon T must be >= 1, got {T}")
    X0 = _initial_state(X0, m, net.n)
    steps = _backend.simulate_awareness(net.E, net.alpha, H, X0, int(T), record=True)[1]
    return AwarenessTrajectory(steps=steps, T=int(T))


def awareness_simulate_final(
    net: InfluenceNetwork,
    H: np.ndarray,
    T: int,
    X0: np.ndarray | None = None,
) -> np.ndarray:
    """Final state of the running-average update; avoids storing the trajectory."""
    H = _validate_h(H, net.n)
    m = H.shape[0]
    if T < 1:
        raise ValueError(f"horizon T must be >= 1, got {T}")
    X0 = _initial_state(X0, m, net.n)
    return _backend.simulate_awareness(net.E, net.alpha, H, X0, int(T), record=False)[0]


def _initial_state(X0, m, n) -> np.ndarray:
    if X0 is None:
        return np.zeros((m, n))
    X0 = np.ascontiguousarray(np.atleast_2d(np.asarray(X0, dtype=float)))
    if X0.shape != (m, n):
        raise ValueError(f"initial state shape {X0.shape}, expected {(m, n)}")
    if (X0 < 0).any() or (X0 > 1).any():
        raise ValueError("initial awareness must lie in [0, 1]")
    return X0
