"""Influence estimation from adoption logs and threshold-based prediction.

Influence probabilities are Bernoulli maximum-likelihood ratios on a
candidate edge set: successes are products that propagated j -> i
(strictly earlier adoption by j), attempts are j's adoptions in the
training window.  Prediction uses the general-threshold rule: a customer
adopts once the joint influence of its adopted in-neighbors reaches its
threshold.
"""

from __future__ import annotations

import datetime as dt
import logging
from dataclasses import dataclass

import numpy as np

from .network import InfluenceNetwork
from .synthgen import AdoptionLog, ContactMatrix, GenParams, Population, sample_network

logger = logging.getLogger(__name__)

__all__ = [
    "TRAINING_CUT_DATE",
    "CandidateGraph",
    "EstimatedInfluence",
    "ThresholdProfile",
    "ValidationResult",
    "sample_candidate_graph",
    "estimate_influence",
    "sample_thresholds",
    "gt_joint_probability",
    "gt_predict",
    "validate",
]

TRAINING_CUT_DATE = dt.date(2022, 1, 1)


@dataclass
class CandidateGraph:
    """Directed candidate edge set (structure only, no weights)."""

    adjacency: np.ndarray  # (n, n) bool, zero diagonal

    def __post_init__(self):
        A = np.asarray(self.adjacency, dtype=bool)
        object.__setattr__(self, "adjacency", A)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError(f"adjacency must be square, got {A.shape}")
        if np.diag(A).any():
            raise ValueError("candidate graph must not contain self-loops")

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]


def sample_candidate_graph(
    pop: Population, contact: ContactMatrix, params: GenParams, seed: int
) -> CandidateGraph:
    """Candidate edges via the same Bernoulli-trial procedure as generation."""
    graph = sample_network(pop, contact, params, seed)
    return CandidateGraph(adjacency=graph.adjacency)


@dataclass
class EstimatedInfluence:
    e: np.ndarray          # (n, n), e[j, i] estimated influence of j on i
    attempts: np.ndarray   # (n,)  A_j
    successes: np.ndarray  # (n, n) A_{j -> i}
    rescaled_columns: np.ndarray  # indices of columns scaled to restore sub-stochasticity

    def to_network(self, alpha: float) -> InfluenceNetwork:
        return InfluenceNetwork(n=self.e.shape[0], E=self.e.copy(), alpha=alpha)


def estimate_influence(
    log: AdoptionLog, candidates: CandidateGraph, cut_date: dt.date = TRAINING_CUT_DATE
) -> EstimatedInfluence:
    """Bernoulli MLE e_ji = successes / attempts on candidate edges.

    Customers with no training-window adoptions get zero outgoing
    influence.  Columns whose in-influence exceeds one are rescaled to sum
    exactly one so the result is a valid influence matrix.
    """
    if candidates.n != log.n:
        raise ValueError(f"candidate graph has {candidates.n} nodes, log has {log.n}")
    if not log.adopted.any():
        raise ValueError("adoption log is empty")
    cut = log.day_of(cut_date)
    day = np.where(log.adoption_day < cut, log.adoption_day, np.nan)
    adopted = ~np.isnan(day)
    attempts = adopted.sum(axis=1).astype(float)
    n = log.n
    successes = np.zeros((n, n))
    jj, ii = np.nonzero(candidates.adjacency)
    for j, i in zip(jj, ii):
        if attempts[j] == 0:
            continue
        both = adopted[j] & adopted[i] & (day[j] < day[i])
        successes[j, i] = both.sum()
    with np.errstate(invalid="ignore", divide="ignore"):
        e = np.where(attempts[:, None] > 0, successes / attempts[:, None], 0.0)
    colsums = e.sum(axis=0)
    over = np.nonzero(colsums > 1.0)[0]
    if over.size:
        e[:, over] /= colsums[over]
        logger.info("rescaled %d columns to restore sub-stochasticity", over.size)
    return EstimatedInfluence(
        e=e, attempts=attempts, successes=successes, rescaled_columns=over
    )


@dataclass(frozen=True)
class ThresholdProfile:
    theta: np.ndarray  # (n, n_products) in [0, 1]
    seed: int

    def __post_init__(self):
        t = np.asarray(self.theta, dtype=float)
        object.__setattr__(self, "theta", t)
        if (t < 0).any() or (t > 1).any():
            raise ValueError("thresholds must lie in [0, 1]")


def sample_thresholds(n: int, n_products: int, seed: int) -> ThresholdProfile:
    rng = np.random.default_rng(seed)
    return ThresholdProfile(theta=rng.random((n, n_products)), seed=seed)


def gt_joint_probability(active_in_values) -> float:
    """1 - prod(1 - e) over the active in-neighbors' influence values."""
    vals = np.asarray(list(active_in_values), dtype=float)
    if vals.size == 0:
        return 0.0
    if (vals < 0).any() or (vals > 1).any():
        raise ValueError("influence values must lie in [0, 1]")
    return float(1.0 - np.prod(1.0 - vals))


def gt_predict(
    est: EstimatedInfluence,
    initial_active: np.ndarray,
    thetas: ThresholdProfile,
    rounds: int = 100,
    cut_day: float = 0.0,
    launch_date: dt.date = dt.date(2020, 1, 1),
) -> AdoptionLog:
    """Synchronous general-threshold rounds from an adoption snapshot.

    Activation is monotone: a customer adopts product p once
    1 - prod_{j active} (1 - e_ji) >= theta_ip.  Stops at the fixed point
    or after ``rounds``.  Predicted adoptions are dated cut_day + round,
    which only orders them for bookkeeping.
    """
    active = np.array(initial_active, dtype=bool)
    n, n_products = active.shape
    if thetas.theta.shape != (n, n_products):
        raise ValueError(
            f"threshold shape {thetas.theta.shape} does not match snapshot {(n, n_products)}"
        )
    day = np.where(active, 0.0, np.nan)
    # log(1 - e) per edge; e is clipped just below 1 to keep the matrix
    # product finite (a certain edge still pushes the joint value to ~1)
    L = np.where(est.e > 0, np.log1p(-np.minimum(est.e, 1.0 - 1e-15)), 0.0)
    for rnd in range(1, rounds + 1):
        joint = 1.0 - np.exp(active.T.astype(float) @ L).T
        # zero joint influence never activates, so a threshold of zero only
        # fires once some adopted in-neighbor actually exerts influence
        newly = (~active) & (joint >= thetas.theta) & (joint > 0.0)
        if not newly.any():
            break
        active |= newly
        day[newly] = cut_day + rnd
    return AdoptionLog(
        adoption_day=day, seeds=np.array(initial_active, dtype=bool), launch_date=launch_date
    )


@dataclass
class ValidationResult:
    accuracy: float           # % of all (customer, product) pairs with matching end status
    accuracy_pending: float   # % over pairs not yet adopted at the cut date
    n_pairs: int
    n_pending: int

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "accuracy_pending": self.accuracy_pending,
            "n_pairs": self.n_pairs,
            "n_pending": self.n_pending,
        }


def validate(
    predicted: AdoptionLog, actual: AdoptionLog, cut_date: dt.date = TRAINING_CUT_DATE
) -> ValidationResult:
    """Compare predicted and actual adoption status at the horizon end.

    ``accuracy`` matches the full holdings matrix; ``accuracy_pending``
    restricts to pairs not yet adopted at the cut date (the stricter
    notion).  An empty pending set counts as full agreement.
    """
    if predicted.adoption_day.shape != actual.adoption_day.shape:
        raise ValueError(
            f"population mismatch: predicted {predicted.adoption_day.shape}, "
            f"actual {actual.adoption_day.shape}"
        )
    cut = actual.day_of(cut_date)
    match = predicted.adopted == actual.adopted
    pending = ~actual.adopted_before(cut)
    accuracy = 100.0 * match.mean()
    if pending.any():
        accuracy_pending = 100.0 * match[pending].mean()
    else:
        accuracy_pending = 100.0
    return ValidationResult(
        accuracy=float(accuracy),
        accuracy_pending=float(accuracy_pending),
        n_pairs=int(match.size),
        n_pending=int(pending.sum()),
    )
