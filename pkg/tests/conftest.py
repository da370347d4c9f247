import numpy as np
import pytest

from awarenet.csf import make_csf
from awarenet.game import BudgetProfile, GameConfig, utility
from awarenet.network import InfluenceNetwork


def random_network(rng, n, alpha=0.5, density=0.6):
    """Random column-sub-stochastic influence matrix with zero diagonal."""
    E = rng.random((n, n)) * (rng.random((n, n)) < density)
    np.fill_diagonal(E, 0.0)
    colsums = E.sum(axis=0)
    scale = rng.uniform(0.3, 1.0, size=n) / np.maximum(colsums, 1e-12)
    E *= np.minimum(scale, 1.0)[None, :]
    return InfluenceNetwork(n=n, E=E, alpha=alpha)


def random_csf(rng):
    fam = rng.choice(["tullock", "log", "exp", "softmax"])
    if fam == "tullock":
        return make_csf("tullock", q=float(rng.choice([0.5, 1.0, 2.0])), delta=0.5)
    if fam == "softmax":
        return make_csf("softmax", k=float(rng.uniform(0.5, 2.0)), delta=0.5)
    return make_csf(fam, delta=0.5)


def interior_profile(rng, m, n, C=1.0, margin=0.05):
    """Budgets bounded away from zero and from the cap."""
    body = rng.dirichlet(np.ones(n), size=m) * (C - 2 * n * margin) * rng.uniform(0.3, 1.0)
    return BudgetProfile(B=margin + body, C=C)


def fd_utility_gradient(cfg: GameConfig, prof: BudgetProfile, s: int, h=1e-5):
    """Central-difference gradient of firm s's utility."""
    grad = np.zeros(cfg.n)
    for i in range(cfg.n):
        Bp, Bm = prof.B.copy(), prof.B.copy()
        Bp[s, i] += h
        Bm[s, i] -= h
        up = utility(cfg, BudgetProfile(B=Bp, C=prof.C + 2 * h))
        um = utility(cfg, BudgetProfile(B=Bm, C=prof.C + 2 * h))
        grad[i] = (up[s] - um[s]) / (2 * h)
    return grad


def fd_hessian(cfg: GameConfig, prof: BudgetProfile, h=1e-4):
    """Central second differences of all utilities: out[s1*n+i, s2*n+j]."""
    m, n = prof.m, prof.n
    out = np.zeros((m * n, m * n))

    def u_at(B, s1):
        return utility(cfg, BudgetProfile(B=B, C=prof.C + 4 * h))[s1]

    for s1 in range(m):
        for i in range(n):
            for s2 in range(m):
                for j in range(n):
                    if s1 == s2 and i == j:
                        Bp, Bm = prof.B.copy(), prof.B.copy()
                        Bp[s1, i] += h
                        Bm[s1, i] -= h
                        val = (u_at(Bp, s1) - 2 * u_at(prof.B, s1) + u_at(Bm, s1)) / h**2
                    else:
                        Bpp, Bpm, Bmp, Bmm = (prof.B.copy() for _ in range(4))
                        Bpp[s1, i] += h
                        Bpp[s2, j] += h
                        Bpm[s1, i] += h
                        Bpm[s2, j] -= h
                        Bmp[s1, i] -= h
                        Bmp[s2, j] += h
                        Bmm[s1, i] -= h
                        Bmm[s2, j] -= h
                        val = (
                            u_at(Bpp, s1) - u_at(Bpm, s1) - u_at(Bmp, s1) + u_at(Bmm, s1)
                        ) / (4 * h**2)
                    out[s1 * n + i, s2 * n + j] = val
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
