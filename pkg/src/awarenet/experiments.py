"""Seeded batch execution: budget initializations, repetition fan-out,
welfare-ratio aggregation, and the data/estimation pipeline wiring."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .estimate import (
    TRAINING_CUT_DATE,
    estimate_influence,
    gt_predict,
    sample_candidate_graph,
    sample_thresholds,
    validate,
)
from .game import BudgetProfile, GameConfig, brd_run
from .network import InfluenceNetwork
from .synthgen import (
    ContactMatrix,
    GenParams,
    Population,
    default_contact_matrix,
    generate_population,
    ic_diffuse,
    sample_network,
)
from .welfare import WelfareSpec, ratio_from_utilities, welfare_optimize

__all__ = [
    "InitMode",
    "init_budgets",
    "repetition_kinds",
    "BatchResult",
    "run_brd_batch",
    "PipelineArtifacts",
    "pipeline_network",
    "validation_experiment",
]

DEFAULT_BIASED_MASS = 0.9


@dataclass(frozen=True)
class InitMode:
    kind: str  # uniform | random | biased
    mass: float = DEFAULT_BIASED_MASS

    def __post_init__(self):
        if self.kind not in ("uniform", "random", "biased"):
            raise ValueError(f"unknown init mode {self.kind!r}")
        if self.kind == "biased" and not 0.0 < self.mass <= 1.0:
            raise ValueError(f"biased mass must lie in (0, 1], got {self.mass}")


def init_budgets(mode: InitMode, m: int, n: int, C: float, rng: np.random.Generator) -> BudgetProfile:
    """uniform: C/n everywhere; random: Dirichlet rows; biased: ``mass`` of the
    budget on one random node per firm, the rest spread uniformly."""
    if mode.kind == "uniform":
        B = np.full((m, n), C / n)
    elif mode.kind == "random":
        B = rng.dirichlet(np.ones(n), size=m) * C
    else:
        B = np.full((m, n), (1.0 - mode.mass) * C / max(n - 1, 1))
        for s in range(m):
            B[s, rng.integers(n)] = mode.mass * C
        if n == 1:
            B[:] = C
    return BudgetProfile(B=B, C=C)


def repetition_kinds(reps: int) -> list[str]:
    """Uniform once (it is deterministic), then random and biased in equal
    proportions."""
    kinds = ["uniform"] if reps >= 1 else []
    for r in range(1, reps):
        kinds.append("random" if r % 2 == 1 else "biased")
    return kinds


@dataclass
class BatchResult:
    w_opt: dict
    terminal_ratio: dict           # label -> (reps,) array, NaN when undefined
    curves: dict                   # label -> {"mean","std","min","max"} arrays over iterations
    terminal_utilities: np.ndarray  # (reps, m)
    final_profiles: list
    n_iters: np.ndarray
    converged: np.ndarray
    init_kinds: list = field(default_factory=list)

    def terminal_mean(self, label: str) -> float:
        return float(np.nanmean(self.terminal_ratio[label]))

    def terminal_std(self, label: str) -> float:
        return float(np.nanstd(self.terminal_ratio[label]))


def _pad_to(arr: np.ndarray, length: int) -> np.ndarray:
    if arr.shape[0] >= length:
        return arr[:length]
    pad = np.full(length - arr.shape[0], arr[-1] if arr.size else np.nan)
    return np.concatenate([arr, pad])


def run_brd_batch(
    cfg: GameConfig,
    welfare_specs: dict[str, WelfareSpec],
    reps: int,
    seed: int,
    biased_mass: float = DEFAULT_BIASED_MASS,
    threads: int = 1,
    opt_kwargs: dict | None = None,
) -> BatchResult:
    """Run ``reps`` seeded best-response runs and aggregate welfare ratios.

    The welfare optimum for each measure is computed once; measures whose
    optimum is undefined on this game (for instance equal-split measures
    when no profile makes every utility positive) are carried with a null
    optimum and NaN ratios.  A converged run holds its terminal ratio for
    iterations past its stopping point when curves are aggregated.
    """
    opt_kwargs = opt_kwargs or {}
    w_opt: dict[str, float | None] = {}
    for label, spec in welfare_specs.items():
        try:
            _, w = welfare_optimize(cfg, spec, seed=seed, **opt_kwargs)
            w_opt[label] = w if w > 0 else None
        except ArithmeticError:
            w_opt[label] = None

    kinds = repetition_kinds(reps)
    seeds = np.random.SeedSequence(seed).spawn(reps)

    def one(idx: int):
        rng = np.random.default_rng(seeds[idx])
        prof = init_budgets(InitMode(kinds[idx], mass=biased_mass), cfg.m, cfg.n, cfg.C, rng)
        return brd_run(cfg, prof)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            traces = list(pool.map(one, range(reps)))
    else:
        traces = [one(i) for i in range(reps)]

    max_len = max(t.n_iters for t in traces)
    terminal_ratio = {}
    curves = {}
    for label, spec in welfare_specs.items():
        ref = w_opt[label]
        if ref is None:
            terminal_ratio[label] = np.full(reps, np.nan)
            curves[label] = None
            continue
        R = np.vstack(
            [_pad_to(ratio_from_utilities(t.utilities, ref, spec), max_len) for t in traces]
        )
        terminal_ratio[label] = R[:, -1]
        curves[label] = {
            "mean": np.nanmean(R, axis=0),
            "std": np.nanstd(R, axis=0),
            "min": np.nanmin(R, axis=0),
            "max": np.nanmax(R, axis=0),
        }
    return BatchResult(
        w_opt=w_opt,
        terminal_ratio=terminal_ratio,
        curves=curves,
        terminal_utilities=np.vstack([t.final_utilities for t in traces]),
        final_profiles=[t.final for t in traces],
        n_iters=np.array([t.n_iters for t in traces]),
        converged=np.array([t.converged for t in traces]),
        init_kinds=kinds,
    )


@dataclass
class PipelineArtifacts:
    population: Population
    contact: ContactMatrix
    aux_graph: "np.ndarray"
    log: "object"
    candidates: "object"
    estimated: "object"
    network: InfluenceNetwork


def pipeline_network(
    n: int,
    params: GenParams,
    alpha: float,
    seed: int,
    contact: ContactMatrix | None = None,
) -> PipelineArtifacts:
    """Full data pipeline: population -> auxiliary network -> adoption log
    -> candidate graph -> estimated influence network."""
    contact = contact or default_contact_matrix()
    ss = np.random.SeedSequence(seed).spawn(4)
    pop = generate_population(n, params, ss[0])
    graph = sample_network(pop, contact, params, ss[1])
    log = ic_diffuse(graph, params, ss[2])
    candidates = sample_candidate_graph(pop, contact, params, ss[3])
    est = estimate_influence(log, candidates)
    return PipelineArtifacts(
        population=pop,
        contact=contact,
        aux_graph=graph,
        log=log,
        candidates=candidates,
        estimated=est,
        network=est.to_network(alpha),
    )


def validation_experiment(
    n: int,
    params: GenParams,
    reps: int,
    seed: int,
    contact: ContactMatrix | None = None,
    cut_date=TRAINING_CUT_DATE,
    rounds: int = 100,
    threads: int = 1,
) -> dict:
    """Repeated generate/estimate/predict/validate runs (the accuracy table
    protocol): per repetition a fresh dataset is generated, influence is
    estimated on the training window, adoption after the cut is predicted
    with the general-threshold model, and both accuracy notions are
    recorded."""
    contact = contact or default_contact_matrix()
    rep_seeds = np.random.SeedSequence(seed).spawn(reps)

    def one(idx: int):
        ss = rep_seeds[idx].spawn(5)
        pop = generate_population(n, params, ss[0])
        graph = sample_network(pop, contact, params, ss[1])
        log = ic_diffuse(graph, params, ss[2])
        candidates = sample_candidate_graph(pop, contact, params, ss[3])
        est = estimate_influence(log, candidates, cut_date)
        thetas = sample_thresholds(n, params.n_products, _seed_int(ss[4]))
        cut = log.day_of(cut_date)
        predicted = gt_predict(
            est, log.adopted_before(cut), thetas, rounds=rounds, cut_day=cut,
            launch_date=params.launch_date,
        )
        return validate(predicted, log, cut_date)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, range(reps)))
    else:
        results = [one(i) for i in range(reps)]

    acc = np.array([r.accuracy for r in results])
    pend = np.array([r.accuracy_pending for r in results])
    return {
        "n": n,
        "beta_a": params.beta_a,
        "beta_b": params.beta_b,
        "mean_accuracy": float(acc.mean()),
        "std": float(acc.std()),
        "mean_accuracy_pending": float(pend.mean()),
        "std_pending": float(pend.std()),
        "runs": reps,
    }


def _seed_int(ss: np.random.SeedSequence) -> int:
    return int(ss.generate_state(1, dtype=np.uint64)[0])
