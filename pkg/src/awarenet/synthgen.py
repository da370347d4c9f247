"""Synthetic population, contact-driven network sampling, and
independent-cascade product adoption.

The pipeline has two consumers: the auxiliary network drives adoption-log
generation, and the estimation module later reconstructs influence from
those logs over a freshly sampled candidate graph.
"""

from __future__ import annotations

import csv
import datetime as dt
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "AGE_GROUPS",
    "DEFAULT_AGE_DIST",
    "DEFAULT_GENDER_DIST",
    "Population",
    "ContactMatrix",
    "GenParams",
    "SocialGraph",
    "AdoptionLog",
    "default_contact_matrix",
    "generate_population",
    "pair_counts",
    "edge_probability",
    "edge_probability_matrix",
    "sample_network",
    "ic_diffuse",
]

AGE_GROUPS = ("18-24", "25-34", "35-49", "50-64", "65+")
DEFAULT_AGE_DIST = (0.18, 0.24, 0.26, 0.18, 0.14)
GENDERS = ("female", "male")
DEFAULT_GENDER_DIST = (0.5, 0.5)

LAUNCH_DATE = dt.date(2020, 1, 1)
HORIZON_END = dt.date(2024, 12, 31)


@dataclass(frozen=True)
class GenParams:
    mu_deg: float = 4.0
    beta_a: float = 1.0
    beta_b: float = 1.0
    p0: float = 0.05
    n_products: int = 10
    gap_days: int = 30
    noise_sigma: float = 0.01
    launch_date: dt.date = LAUNCH_DATE
    horizon_end: dt.date = HORIZON_END
    age_dist: tuple = DEFAULT_AGE_DIST
    gender_dist: tuple = DEFAULT_GENDER_DIST

    def __post_init__(self):
        if not self.mu_deg > 0:
            raise ValueError(f"target average degree must be > 0, got {self.mu_deg}")
        if not (self.beta_a > 0 and self.beta_b > 0):
            raise ValueError("Beta shape parameters must be > 0")
        if not 0.0 <= self.p0 <= 1.0:
            raise ValueError(f"initial-adopter probability must lie in [0, 1], got {self.p0}")
        if self.n_products < 1:
            raise ValueError("need at least one product")
        if abs(sum(self.age_dist) - 1.0) > 1e-9 or abs(sum(self.gender_dist) - 1.0) > 1e-9:
            raise ValueError("demographic distributions must sum to 1")

    @property
    def horizon_days(self) -> int:
        return (self.horizon_end - self.launch_date).days


@dataclass
class Population:
    ids: np.ndarray
    age_group: np.ndarray  # int codes into AGE_GROUPS
    gender: np.ndarray     # int codes into GENDERS
    tile_x: np.ndarray
    tile_y: np.ndarray
    tile_side: int
    n_tiles: int

    @property
    def n(self) -> int:
        return self.ids.size

    def tile_coords(self) -> np.ndarray:
        return np.column_stack([self.tile_x, self.tile_y]).astype(float)

    def write_csv(self, path, header_comment: str | None = None):
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh)
            w.writerow(["id", "age_group", "gender", "tile_x", "tile_y"])
            for i in range(self.n):
                w.writerow(
                    [
                        int(self.ids[i]),
                        AGE_GROUPS[self.age_group[i]],
                        GENDERS[self.gender[i]],
                        int(self.tile_x[i]),
                        int(self.tile_y[i]),
                    ]
                )

    @classmethod
    def read_csv(cls, path) -> "Population":
        ids, ages, genders, txs, tys = [], [], [], [], []
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        header, body = rows[0], rows[1:]
        if header[:5] != ["id", "age_group", "gender", "tile_x", "tile_y"]:
            raise ValueError(f"unexpected customers header in {path}: {header}")
        for lineno, row in enumerate(body, start=2):
            try:
                ids.append(int(row[0]))
                ages.append(AGE_GROUPS.index(row[1]))
                genders.append(GENDERS.index(row[2]))
                txs.append(int(row[3]))
                tys.append(int(row[4]))
            except (ValueError, IndexError) as exc:
                raise ValueError(f"bad customers row {lineno} in {path}: {exc}") from exc
        tiles = len(set(zip(txs, tys)))
        side = max(txs + tys) + 1 if txs else 1
        return cls(
            ids=np.array(ids),
            age_group=np.array(ages),
            gender=np.array(genders),
            tile_x=np.array(txs),
            tile_y=np.array(tys),
            tile_side=side,
            n_tiles=tiles,
        )


@dataclass(frozen=True)
class ContactMatrix:
    s: np.ndarray
    labels: tuple = AGE_GROUPS

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        object.__setattr__(self, "s", s)
        if s.shape != (len(self.labels), len(self.labels)):
            raise ValueError(f"contact matrix shape {s.shape} does not match labels")
        if (s < 0).any():
            raise ValueError("contact frequencies must be nonnegative")
        if not np.allclose(s, s.T):
            raise ValueError("contact matrix must be symmetric")

    @classmethod
    def read_csv(cls, path) -> "ContactMatrix":
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        labels = tuple(rows[0][1:])
        s = np.array([[float(v) for v in row[1:]] for row in rows[1:]])
        return cls(s=s, labels=labels)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([""] + list(self.labels))
            for label, row in zip(self.labels, self.s):
                w.writerow([label] + [f"{v:g}" for v in row])


def default_contact_matrix() -> ContactMatrix:
    """Uniform off-diagonal contact with doubled within-group frequency."""
    g = len(AGE_GROUPS)
    return ContactMatrix(s=np.ones((g, g)) + np.eye(g))


def generate_population(n: int, params: GenParams, seed: int) -> Population:
    """Place n customers on the smallest square grid of ceil(n/4) tiles.

    Tiles average four customers; center tiles are denser (Gaussian
    falloff of placement weight with distance from the grid center).
    """
    if n < 1:
        raise ValueError(f"population size must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    n_tiles = int(np.ceil(n / 4))
    side = int(np.ceil(np.sqrt(n_tiles)))
    coords = np.array([(x, y) for x in range(side) for y in range(side)][:n_tiles])
    center = (side - 1) / 2.0
    d2 = ((coords - center) ** 2).sum(axis=1)
    weight = np.exp(-d2 / (2.0 * max(side / 2.0, 1.0) ** 2))
    weight /= weight.sum()
    tile_idx = rng.choice(n_tiles, size=n, p=weight)
    ages = rng.choice(len(AGE_GROUPS), size=n, p=np.asarray(params.age_dist))
    genders = rng.choice(len(GENDERS), size=n, p=np.asarray(params.gender_dist))
    return Population(
        ids=np.arange(n),
        age_group=ages,
        gender=genders,
        tile_x=coords[tile_idx, 0],
        tile_y=coords[tile_idx, 1],
        tile_side=side,
        n_tiles=n_tiles,
    )


def pair_counts(pop: Population, n_groups: int | None = None) -> np.ndarray:
    """m[i, j]: number of unordered customer pairs with age groups {i, j}."""
    g = n_groups or len(AGE_GROUPS)
    counts = np.bincount(pop.age_group, minlength=g).astype(float)
    m = np.outer(counts, counts)
    np.fill_diagonal(m, counts * (counts - 1) / 2.0)
    return m


def _distance_denominators(pop: Population, n_groups: int):
    """Per group pair: sum of tile distances and count over unordered pairs."""
    xy = pop.tile_coords()
    D = np.sqrt(((xy[:, None, :] - xy[None, :, :]) ** 2).sum(axis=-1))
    sum_d = np.zeros((n_groups, n_groups))
    n_pairs = np.zeros((n_groups, n_groups))
    members = [pop.age_group == gi for gi in range(n_groups)]
    for gi in range(n_groups):
        for gj in range(gi, n_groups):
            block = D[np.ix_(members[gi], members[gj])]
            if gi == gj:
                total = block.sum() / 2.0
                cnt = members[gi].sum() * (members[gi].sum() - 1) / 2.0
            else:
                total = block.sum()
                cnt = members[gi].sum() * members[gj].sum()
            sum_d[gi, gj] = sum_d[gj, gi] = total
            n_pairs[gi, gj] = n_pairs[gj, gi] = cnt
    return D, sum_d, n_pairs


def edge_probability(
    u: int,
    v: int,
    pop: Population,
    contact: ContactMatrix,
    params: GenParams,
    rng: np.random.Generator | None = None,
) -> float:
    """Connection probability of the pair (u, v), clamped to [0, 1].

    Optional Gaussian perturbation (sigma from params) is applied before
    clamping when an rng is supplied.
    """
    if u == v:
        raise ValueError("edge probability needs two distinct customers")
    P = edge_probability_matrix(pop, contact, params, rng=None)
    p = float(P[u, v])
    if rng is not None and params.noise_sigma > 0:
        p = float(np.clip(p + rng.normal(0.0, params.noise_sigma), 0.0, 1.0))
    return p


def edge_probability_matrix(
    pop: Population,
    contact: ContactMatrix,
    params: GenParams,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """All pairwise connection probabilities (zero diagonal).

    With an rng, independent Gaussian noise is added per ordered pair
    before clamping.
    """
    g = len(contact.labels)
    m = pair_counts(pop, g)
    iu = np.triu_indices(g)
    norm = (m[iu] * contact.s[iu]).sum()
    if norm <= 0:
        raise ValueError("contact/pair-count normalization is zero")
    D, sum_d, n_pairs = _distance_denominators(pop, g)
    ag = pop.age_group
    sum_d_uv = sum_d[ag[:, None], ag[None, :]]
    n_pairs_uv = np.maximum(n_pairs[ag[:, None], ag[None, :]], 1.0)
    dist_factor = np.where(sum_d_uv > 0, D / np.where(sum_d_uv > 0, sum_d_uv, 1.0), 1.0 / n_pairs_uv)
    group_factor = m[ag[:, None], ag[None, :]] * contact.s[ag[:, None], ag[None, :]] / norm
    P = (params.mu_deg * pop.n / 2.0) * group_factor * dist_factor
    if rng is not None and params.noise_sigma > 0:
        P = P + rng.normal(0.0, params.noise_sigma, size=P.shape)
    P = np.clip(P, 0.0, 1.0)
    np.fill_diagonal(P, 0.0)
    return P


@dataclass
class SocialGraph:
    """Directed weighted graph; weights[j, i] > 0 means j influences i."""

    weights: np.ndarray

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def adjacency(self) -> np.ndarray:
        return self.weights > 0

    def mean_out_degree(self) -> float:
        return float(self.adjacency.sum() / self.n)


def sample_network(
    pop: Population, contact: ContactMatrix, params: GenParams, seed: int
) -> SocialGraph:
    """One Bernoulli trial per ordered pair; realized edges get Beta weights."""
    rng = np.random.default_rng(seed)
    P = edge_probability_matrix(pop, contact, params, rng=rng)
    exists = rng.random(P.shape) < P
    np.fill_diagonal(exists, False)
    weights = np.where(exists, rng.beta(params.beta_a, params.beta_b, size=P.shape), 0.0)
    return SocialGraph(weights=weights)


@dataclass
class AdoptionLog:
    """Per-(customer, product) adoption day relative to the launch date."""

    adoption_day: np.ndarray  # (n, n_products) float, NaN = never adopted
    seeds: np.ndarray         # (n, n_products) bool
    launch_date: dt.date = LAUNCH_DATE

    @property
    def n(self) -> int:
        return self.adoption_day.shape[0]

    @property
    def n_products(self) -> int:
        return self.adoption_day.shape[1]

    @property
    def adopted(self) -> np.ndarray:
        return ~np.isnan(self.adoption_day)

    def adopted_before(self, day: float) -> np.ndarray:
        return self.adopted & (self.adoption_day < day)

    def day_of(self, date: dt.date) -> float:
        return float((date - self.launch_date).days)

    def events(self):
        """(customer_id, product_id, iso_date) sorted by customer then product."""
        nn, pp = np.nonzero(self.adopted)
        for c, p in zip(nn, pp):
            date = self.launch_date + dt.timedelta(days=int(self.adoption_day[c, p]))
            yield int(c), int(p), date.isoformat()

    def write_csv(self, path, header_comment: str | None = None):
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh)
            w.writerow(["customer_id", "product_id", "adoption_date"])
            for c, p, date in self.events():
                w.writerow([c, p, date])

    @classmethod
    def read_csv(cls, path, n: int, n_products: int, launch_date: dt.date = LAUNCH_DATE):
        day = np.full((n, n_products), np.nan)
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        if rows[0][:3] != ["customer_id", "product_id", "adoption_date"]:
            raise ValueError(f"unexpected holdings header in {path}: {rows[0]}")
        for lineno, row in enumerate(rows[1:], start=2):
            try:
                c, p = int(row[0]), int(row[1])
                date = dt.date.fromisoformat(row[2])
            except (ValueError, IndexError) as exc:
                raise ValueError(f"bad holdings row {lineno} in {path}: {exc}") from exc
            day[c, p] = (date - launch_date).days
        return cls(adoption_day=day, seeds=day == 0.0, launch_date=launch_date)


def ic_diffuse(graph: SocialGraph, params: GenParams, seed: int) -> AdoptionLog:
    """Independent-cascade adoption for each product from Bernoulli(p0) seeds.

    Each newly adopting customer gets one activation attempt per out-edge
    per product; successful targets adopt 1..gap_days after their parent.
    Events past the horizon end are dropped and do not propagate.
    """
    rng = np.random.default_rng(seed)
    n = graph.n
    horizon = params.horizon_days
    day = np.full((n, params.n_products), np.nan)
    seeds = np.zeros((n, params.n_products), dtype=bool)
    W = graph.weights
    out_neighbors = [np.nonzero(W[u])[0] for u in range(n)]
    for p in range(params.n_products):
        seed_mask = rng.random(n) < params.p0
        seeds[:, p] = seed_mask
        day[seed_mask, p] = 0.0
        adopted = seed_mask.copy()
        frontier = list(np.nonzero(seed_mask)[0])
        while frontier:
            nxt = []
            for u in frontier:
                for v in out_neighbors[u]:
                    if adopted[v]:
                        continue
                    if rng.random() <= W[u, v]:
                        d = day[u, p] + rng.integers(1, params.gap_days + 1)
                        if d <= horizon:
                            day[v, p] = d
                            adopted[v] = True
                            nxt.append(v)
            frontier = nxt
    return AdoptionLog(adoption_day=day, seeds=seeds, launch_date=params.launch_date)
