import datetime as dt

import numpy as np
import pytest

from awarenet.synthgen import (
    AGE_GROUPS,
    AdoptionLog,
    ContactMatrix,
    GenParams,
    Population,
    SocialGraph,
    default_contact_matrix,
    edge_probability,
    edge_probability_matrix,
    generate_population,
    ic_diffuse,
    pair_counts,
    sample_network,
)


class TestPopulation:
    def test_hundred_customers_25_tiles(self):
        pop = generate_population(100, GenParams(), seed=0)
        assert pop.n_tiles == 25
        assert pop.tile_side == 5
        assert pop.n == 100

    def test_four_customers_share_one_tile(self):
        pop = generate_population(4, GenParams(), seed=0)
        assert pop.n_tiles == 1
        assert len(set(zip(pop.tile_x, pop.tile_y))) == 1

    def test_seed_determinism(self):
        a = generate_population(60, GenParams(), seed=7)
        b = generate_population(60, GenParams(), seed=7)
        for field in ("age_group", "gender", "tile_x", "tile_y"):
            np.testing.assert_array_equal(getattr(a, field), getattr(b, field))

    def test_mean_occupancy_near_four(self):
        for n in (24, 100, 357):
            pop = generate_population(n, GenParams(), seed=1)
            assert 3.5 <= n / pop.n_tiles <= 4.5

    def test_csv_roundtrip(self, tmp_path):
        pop = generate_population(30, GenParams(), seed=3)
        path = tmp_path / "customers.csv"
        pop.write_csv(path, header_comment="x")
        back = Population.read_csv(path)
        np.testing.assert_array_equal(back.age_group, pop.age_group)
        np.testing.assert_array_equal(back.tile_x, pop.tile_x)


class TestEdgeProbability:
    def co_located_pair(self):
        return Population(
            ids=np.arange(2),
            age_group=np.zeros(2, dtype=int),
            gender=np.zeros(2, dtype=int),
            tile_x=np.zeros(2, dtype=int),
            tile_y=np.zeros(2, dtype=int),
            tile_side=1,
            n_tiles=1,
        )

    def test_co_located_fallback_clamps_to_one(self):
        # mu N / 2 * 1 * (1/1) = 4, clamped to 1
        pop = self.co_located_pair()
        contact = default_contact_matrix()
        p = edge_probability(0, 1, pop, contact, GenParams(mu_deg=4.0))
        assert p == 1.0

    def test_zero_contact_kills_cross_group(self):
        pop = Population(
            ids=np.arange(4),
            age_group=np.array([0, 0, 1, 1]),
            gender=np.zeros(4, dtype=int),
            tile_x=np.array([0, 1, 0, 1]),
            tile_y=np.zeros(4, dtype=int),
            tile_side=2,
            n_tiles=2,
        )
        s = np.ones((5, 5))
        s[0, 1] = s[1, 0] = 0.0
        p = edge_probability(0, 2, pop, ContactMatrix(s=s), GenParams(mu_deg=0.5))
        assert p == 0.0

    def test_linear_in_target_degree(self):
        pop = generate_population(40, GenParams(), seed=5)
        contact = default_contact_matrix()
        p1 = edge_probability_matrix(pop, contact, GenParams(mu_deg=0.05))
        p2 = edge_probability_matrix(pop, contact, GenParams(mu_deg=0.10))
        unclamped = (p2 < 1.0) & (p1 > 0)
        np.testing.assert_allclose(p2[unclamped], 2.0 * p1[unclamped], rtol=1e-12)

    def test_range_after_noise(self):
        pop = generate_population(50, GenParams(), seed=2)
        P = edge_probability_matrix(
            pop, default_contact_matrix(), GenParams(mu_deg=4.0, noise_sigma=0.3),
            rng=np.random.default_rng(0),
        )
        assert (P >= 0).all() and (P <= 1).all()
        assert np.diag(P).max() == 0.0

    def test_self_pair_rejected(self):
        pop = self.co_located_pair()
        with pytest.raises(ValueError, match="distinct"):
            edge_probability(1, 1, pop, default_contact_matrix(), GenParams())

    def test_pair_counts(self):
        pop = Population(
            ids=np.arange(3),
            age_group=np.array([0, 0, 1]),
            gender=np.zeros(3, dtype=int),
            tile_x=np.zeros(3, dtype=int),
            tile_y=np.zeros(3, dtype=int),
            tile_side=1,
            n_tiles=1,
        )
        m = pair_counts(pop)
        assert m[0, 0] == 1.0  # one within-group pair
        assert m[0, 1] == 2.0  # two cross pairs
        assert m[1, 1] == 0.0


class TestSampling:
    def test_zero_probability_empty_graph(self):
        pop = generate_population(20, GenParams(), seed=0)
        contact = ContactMatrix(s=np.zeros((5, 5)))
        with pytest.raises(ValueError, match="normalization"):
            sample_network(pop, contact, GenParams(mu_deg=1.0, noise_sigma=0.0), seed=0)

    def test_tiny_degree_sparse(self):
        pop = generate_population(30, GenParams(), seed=0)
        g = sample_network(
            pop, default_contact_matrix(), GenParams(mu_deg=1e-9, noise_sigma=0.0), seed=0
        )
        assert g.adjacency.sum() == 0

    def test_certain_edges_uniform_weights(self):
        # one shared tile puts every pair on the co-located fallback, and a
        # huge target degree clamps every probability to one
        pop = generate_population(4, GenParams(), seed=0)
        params = GenParams(mu_deg=1e6, beta_a=1.0, beta_b=1.0, noise_sigma=0.0)
        g = sample_network(pop, default_contact_matrix(), params, seed=1)
        n = pop.n
        assert g.adjacency.sum() == n * (n - 1)  # complete digraph
        w = g.weights[g.adjacency]
        assert (w > 0).all() and (w < 1).all()

    def test_mean_degree_concentration(self):
        pop = generate_population(100, GenParams(), seed=0)
        contact = default_contact_matrix()
        params = GenParams(mu_deg=4.0, noise_sigma=0.0)
        P = edge_probability_matrix(pop, contact, params)
        expected = P.sum() / pop.n
        sigma = np.sqrt((P * (1 - P)).sum()) / pop.n
        degs = []
        for s in range(50):
            degs.append(sample_network(pop, contact, params, seed=100 + s).mean_out_degree())
        assert abs(np.mean(degs) - expected) <= 3 * sigma / np.sqrt(len(degs))


class TestDiffusion:
    def chain_graph(self, n=3):
        W = np.zeros((n, n))
        for i in range(n - 1):
            W[i, i + 1] = 1.0
        return SocialGraph(weights=W)

    def test_certain_chain_adopts_with_increasing_dates(self):
        params = GenParams(p0=0.0, n_products=1)
        g = self.chain_graph()
        # force node 0 as the only seed by overriding p0 draw: use p0=1 on a
        # crafted weight matrix instead; simpler: p0 high then mask
        log = None
        for seed in range(50):
            cand = ic_diffuse(g, GenParams(p0=0.3, n_products=1), seed=seed)
            if cand.seeds[:, 0].tolist() == [True, False, False]:
                log = cand
                break
        assert log is not None, "no seed draw with only node 0 active"
        days = log.adoption_day[:, 0]
        assert not np.isnan(days).any()
        assert days[0] < days[1] < days[2]

    def test_zero_weights_only_seeds(self):
        g = SocialGraph(weights=np.zeros((6, 6)))
        log = ic_diffuse(g, GenParams(p0=0.5, n_products=3), seed=4)
        np.testing.assert_array_equal(log.adopted, log.seeds)

    def test_byte_identical_rerun(self, tmp_path):
        pop = generate_population(40, GenParams(), seed=9)
        g = sample_network(pop, default_contact_matrix(), GenParams(mu_deg=4.0), seed=9)
        paths = []
        for run in range(2):
            log = ic_diffuse(g, GenParams(p0=0.1), seed=77)
            path = tmp_path / f"h{run}.csv"
            log.write_csv(path)
            paths.append(path.read_bytes())
        assert paths[0] == paths[1]

    def test_temporal_consistency(self):
        pop = generate_population(50, GenParams(), seed=3)
        g = sample_network(pop, default_contact_matrix(), GenParams(mu_deg=6.0), seed=3)
        log = ic_diffuse(g, GenParams(p0=0.1), seed=3)
        W = g.weights
        for c, p in zip(*np.nonzero(log.adopted & ~log.seeds)):
            parents = np.nonzero(W[:, c] > 0)[0]
            assert (log.adoption_day[parents, p] < log.adoption_day[c, p]).any()

    def test_holdings_roundtrip(self, tmp_path):
        pop = generate_population(25, GenParams(), seed=1)
        g = sample_network(pop, default_contact_matrix(), GenParams(mu_deg=4.0), seed=1)
        log = ic_diffuse(g, GenParams(p0=0.2, n_products=4), seed=1)
        path = tmp_path / "holdings.csv"
        log.write_csv(path)
        back = AdoptionLog.read_csv(path, n=25, n_products=4)
        np.testing.assert_array_equal(back.adopted, log.adopted)
        np.testing.assert_array_equal(
            back.adoption_day[back.adopted], log.adoption_day[log.adopted]
        )

    def test_dates_within_horizon(self):
        params = GenParams(p0=0.2, n_products=2)
        pop = generate_population(30, params, seed=2)
        g = sample_network(pop, default_contact_matrix(), params, seed=2)
        log = ic_diffuse(g, params, seed=2)
        days = log.adoption_day[log.adopted]
        assert (days >= 0).all()
        assert (days <= params.horizon_days).all()


class TestContactMatrix:
    def test_default_shape(self):
        cm = default_contact_matrix()
        assert cm.s.shape == (len(AGE_GROUPS),) * 2
        assert (np.diag(cm.s) == 2.0).all()

    def test_asymmetric_rejected(self):
        s = np.ones((5, 5))
        s[0, 1] = 3.0
        with pytest.raises(ValueError, match="symmetric"):
            ContactMatrix(s=s)

    def test_csv_roundtrip(self, tmp_path):
        cm = default_contact_matrix()
        path = tmp_path / "contact.csv"
        cm.write_csv(path)
        back = ContactMatrix.read_csv(path)
        np.testing.assert_allclose(back.s, cm.s)
        assert back.labels == tuple(AGE_GROUPS)


class TestParams:
    def test_validation(self):
        with pytest.raises(ValueError, match="degree"):
            GenParams(mu_deg=0.0)
        with pytest.raises(ValueError, match="Beta"):
            GenParams(beta_a=-1.0)
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            GenParams(p0=1.5)

    def test_horizon_days(self):
        p = GenParams(launch_date=dt.date(2020, 1, 1), horizon_end=dt.date(2020, 1, 31))
        assert p.horizon_days == 30
