import datetime as dt

import numpy as np
import pytest

from awarenet.estimate import (
    CandidateGraph,
    ThresholdProfile,
    estimate_influence,
    gt_joint_probability,
    gt_predict,
    sample_candidate_graph,
    sample_thresholds,
    validate,
)
from awarenet.synthgen import (
    AdoptionLog,
    GenParams,
    SocialGraph,
    default_contact_matrix,
    generate_population,
    ic_diffuse,
    sample_network,
)

CUT = dt.date(2022, 1, 1)
LAUNCH = dt.date(2020, 1, 1)


def log_from_days(day):
    day = np.asarray(day, dtype=float)
    return AdoptionLog(adoption_day=day, seeds=day == 0.0, launch_date=LAUNCH)


def full_candidates(n):
    A = np.ones((n, n), dtype=bool)
    np.fill_diagonal(A, False)
    return CandidateGraph(adjacency=A)


class TestEstimate:
    def test_ratio(self):
        # node 0 adopts ten products; node 1 follows on three of them
        day = np.full((2, 10), np.nan)
        day[0] = np.arange(10)
        day[1, :3] = np.arange(3) + 1
        est = estimate_influence(log_from_days(day), full_candidates(2), CUT)
        assert est.e[0, 1] == pytest.approx(0.3)
        assert est.attempts[0] == 10

    def test_no_adoptions_no_influence(self):
        day = np.full((3, 4), np.nan)
        day[0] = [0, 1, 2, 3]
        day[1, 0] = 5.0
        est = estimate_influence(log_from_days(day), full_candidates(3), CUT)
        assert (est.e[2] == 0).all()  # node 2 adopted nothing
        assert est.attempts[2] == 0

    def test_deterministic_chain(self):
        # node 0 adopts all ten products before node 1: e_01 = 1
        day = np.full((2, 10), np.nan)
        day[0] = np.arange(10)
        day[1] = np.arange(10) + 3
        est = estimate_influence(log_from_days(day), full_candidates(2), CUT)
        assert est.e[0, 1] == 1.0

    def test_ties_do_not_count(self):
        day = np.zeros((2, 5))
        est = estimate_influence(log_from_days(day), full_candidates(2), CUT)
        assert est.e.max() == 0.0

    def test_candidate_edges_only(self):
        day = np.full((3, 6), np.nan)
        day[0] = np.arange(6)
        day[1] = np.arange(6) + 1
        day[2] = np.arange(6) + 2
        A = np.zeros((3, 3), dtype=bool)
        A[0, 1] = True
        est = estimate_influence(log_from_days(day), CandidateGraph(adjacency=A), CUT)
        assert est.e[0, 1] > 0
        assert est.e[0, 2] == 0.0 and est.e[1, 2] == 0.0

    def test_training_window_cut(self):
        # adoption after the cut date must not contribute
        day = np.full((2, 4), np.nan)
        day[0] = [0, 1, 2, 3]
        cut_day = (CUT - LAUNCH).days
        day[1] = cut_day + 10  # all of node 1's adoptions are post-cut
        est = estimate_influence(log_from_days(day), full_candidates(2), CUT)
        assert est.e[0, 1] == 0.0

    def test_column_rescaling_restores_substochasticity(self):
        # two certain influencers of node 2 would sum to 2; rescaled to 1
        day = np.full((3, 6), np.nan)
        day[0] = np.arange(6)
        day[1] = np.arange(6)
        day[2] = np.arange(6) + 1
        est = estimate_influence(log_from_days(day), full_candidates(3), CUT)
        assert est.e[:, 2].sum() == pytest.approx(1.0)
        assert 2 in est.rescaled_columns
        net = est.to_network(alpha=0.5)  # validates invariants
        assert net.n == 3

    def test_empty_log_rejected(self):
        day = np.full((2, 3), np.nan)
        with pytest.raises(ValueError, match="empty"):
            estimate_influence(log_from_days(day), full_candidates(2), CUT)

    def test_successes_bounded_by_attempts(self, rng):
        pop = generate_population(40, GenParams(), seed=11)
        g = sample_network(pop, default_contact_matrix(), GenParams(mu_deg=5.0), seed=11)
        log = ic_diffuse(g, GenParams(p0=0.1), seed=11)
        cand = sample_candidate_graph(pop, default_contact_matrix(), GenParams(mu_deg=5.0), 12)
        est = estimate_influence(log, cand, CUT)
        assert (est.successes <= est.attempts[:, None]).all()
        assert (est.e >= 0).all() and (est.e <= 1).all()


class TestJointProbability:
    def test_two_halves(self):
        assert gt_joint_probability([0.5, 0.5]) == pytest.approx(0.75)

    def test_empty(self):
        assert gt_joint_probability([]) == 0.0

    def test_three_values(self):
        assert gt_joint_probability([0.2, 0.3, 0.5]) == pytest.approx(0.72)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError, match=r"\[0, 1\]"):
            gt_joint_probability([0.5, 1.2])


class TestPredict:
    def two_parent_setup(self, theta_value):
        e = np.zeros((3, 3))
        e[0, 2] = e[1, 2] = 0.5
        est_cls = type("E", (), {"e": e})
        active = np.array([[True], [True], [False]])
        thetas = ThresholdProfile(theta=np.full((3, 1), theta_value), seed=0)
        return est_cls, active, thetas

    def test_activation_threshold_boundary(self):
        est, active, thetas = self.two_parent_setup(0.7)
        pred = gt_predict(est, active, thetas)
        assert pred.adopted[2, 0]  # 0.75 >= 0.7
        est, active, thetas = self.two_parent_setup(0.8)
        pred = gt_predict(est, active, thetas)
        assert not pred.adopted[2, 0]

    def test_threshold_one_blocks_sub_certain_influence(self):
        est, active, thetas = self.two_parent_setup(1.0)
        pred = gt_predict(est, active, thetas)
        assert not pred.adopted[2, 0]

    def test_monotone_in_seed_set(self, rng):
        n, npr = 30, 3
        e = rng.random((n, n)) * (rng.random((n, n)) < 0.2)
        np.fill_diagonal(e, 0.0)
        est = type("E", (), {"e": e})
        thetas = sample_thresholds(n, npr, seed=5)
        small = rng.random((n, npr)) < 0.1
        big = small | (rng.random((n, npr)) < 0.1)
        pred_small = gt_predict(est, small, thetas)
        pred_big = gt_predict(est, big, thetas)
        assert (pred_big.adopted | ~pred_small.adopted).all()

    def test_fixed_point_stable(self, rng):
        n, npr = 20, 2
        e = rng.random((n, n)) * 0.5
        np.fill_diagonal(e, 0.0)
        est = type("E", (), {"e": e})
        thetas = sample_thresholds(n, npr, seed=8)
        start = rng.random((n, npr)) < 0.2
        p1 = gt_predict(est, start, thetas, rounds=100)
        p2 = gt_predict(est, start, thetas, rounds=250)
        np.testing.assert_array_equal(p1.adopted, p2.adopted)

    def test_tree_self_consistency(self):
        # certain-weight tree, thresholds zero: prediction from the seed set
        # reproduces the cascade exactly
        W = np.zeros((7, 7))
        for parent, child in [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]:
            W[parent, child] = 1.0
        g = SocialGraph(weights=W)
        log = None
        for seed in range(60):
            cand = ic_diffuse(g, GenParams(p0=0.15, n_products=1), seed=seed)
            if cand.seeds[0, 0] and cand.seeds[:, 0].sum() == 1:
                log = cand
                break
        assert log is not None
        est = type("E", (), {"e": W})
        thetas = ThresholdProfile(theta=np.zeros((7, 1)), seed=0)
        pred = gt_predict(est, log.seeds, thetas)
        np.testing.assert_array_equal(pred.adopted, log.adopted)

    def test_determinism(self, rng):
        n, npr = 15, 2
        e = rng.random((n, n)) * 0.4
        np.fill_diagonal(e, 0.0)
        est = type("E", (), {"e": e})
        thetas = sample_thresholds(n, npr, seed=2)
        start = rng.random((n, npr)) < 0.3
        a = gt_predict(est, start, thetas)
        b = gt_predict(est, start, thetas)
        np.testing.assert_array_equal(a.adoption_day, b.adoption_day)


class TestValidate:
    def test_perfect_prediction(self):
        day = np.full((4, 3), np.nan)
        day[0] = [0, 10, 900]
        actual = log_from_days(day)
        res = validate(actual, actual, CUT)
        assert res.accuracy == 100.0
        assert res.accuracy_pending == 100.0

    def test_empty_post_cut(self):
        day = np.full((3, 2), np.nan)
        day[0] = [0, 5]
        actual = log_from_days(day)
        predicted = log_from_days(day.copy())
        res = validate(predicted, actual, CUT)
        assert res.accuracy == 100.0 and res.accuracy_pending == 100.0

    def test_counts_mismatches(self):
        cut_day = (CUT - LAUNCH).days
        actual_day = np.full((2, 2), np.nan)
        actual_day[0, 0] = 0.0
        actual_day[1, 1] = cut_day + 5  # adopted after the cut
        predicted_day = np.full((2, 2), np.nan)
        predicted_day[0, 0] = 0.0  # snapshot carried over; misses (1, 1)
        res = validate(log_from_days(predicted_day), log_from_days(actual_day), CUT)
        assert res.n_pending == 3
        assert res.accuracy_pending == pytest.approx(100.0 * 2 / 3)
        assert res.accuracy == pytest.approx(100.0 * 3 / 4)

    def test_population_mismatch(self):
        a = log_from_days(np.zeros((2, 2)))
        b = log_from_days(np.zeros((3, 2)))
        with pytest.raises(ValueError, match="mismatch"):
            validate(a, b, CUT)


class TestCandidates:
    def test_no_self_loops(self):
        A = np.eye(3, dtype=bool)
        with pytest.raises(ValueError, match="self-loops"):
            CandidateGraph(adjacency=A)

    def test_sampling_matches_procedure(self):
        pop = generate_population(30, GenParams(), seed=4)
        contact = default_contact_matrix()
        params = GenParams(mu_deg=4.0)
        cand = sample_candidate_graph(pop, contact, params, seed=6)
        graph = sample_network(pop, contact, params, seed=6)
        np.testing.assert_array_equal(cand.adjacency, graph.adjacency)
