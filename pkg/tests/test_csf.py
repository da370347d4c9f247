import numpy as np
import pytest

from awarenet.csf import check_assumptions, csf_eval, make_csf

ALL_FAMILIES = [
    make_csf("tullock", q=0.5, delta=0.5),
    make_csf("tullock", q=1.0, delta=0.5),
    make_csf("tullock", q=2.0, delta=0.5),
    make_csf("log", delta=0.5),
    make_csf("exp", delta=0.5),
    make_csf("softmax", k=1.0, delta=0.5),
    make_csf("softmax", k=2.0, delta=0.25),
]


class TestEval:
    def test_tullock_direct(self):
        h, *_ = csf_eval(make_csf("tullock", q=1.0, delta=0.5), 1.0, [0.0])
        assert h == pytest.approx(2.0 / 3.0)

    def test_softmax_at_zero(self):
        h, *_ = csf_eval(make_csf("softmax", k=1.0, delta=0.5), 0.0, [0.0])
        assert h == pytest.approx(0.4)

    def test_log_unit_numerator(self):
        h, *_ = csf_eval(make_csf("log", delta=1.0), np.e - 1.0, [0.0])
        assert h == pytest.approx(0.5)

    def test_negative_budget_rejected(self):
        with pytest.raises(ValueError, match="nonnegative"):
            csf_eval(make_csf("log", delta=1.0), -0.1, [0.0])

    def test_zero_profile_zero_success(self):
        for spec in ALL_FAMILIES:
            h, *_ = csf_eval(spec, 0.0, [0.0, 0.0])
            if spec.family in ("tullock", "log"):
                assert h == 0.0
            else:
                assert h > 0.0

    def test_delta_positive_enforced(self):
        with pytest.raises(ValueError, match="delta"):
            make_csf("tullock", q=1.0, delta=0.0)

    def test_unknown_family(self):
        with pytest.raises(ValueError, match="unknown CSF family"):
            make_csf("power", delta=0.5)


class TestProperties:
    def test_range_and_sum(self, rng):
        for spec in ALL_FAMILIES:
            B = rng.random((3, 6))
            H = spec.values(B)
            assert (H > 0).all() and (H < 1).all()
            assert (H.sum(axis=0) < 1).all()  # delta > 0 keeps slack

    def test_opponent_permutation_invariance(self, rng):
        for spec in ALL_FAMILIES:
            others = rng.random(4)
            h1, *_ = csf_eval(spec, 0.3, others)
            h2, *_ = csf_eval(spec, 0.3, others[::-1])
            assert h1 == pytest.approx(h2, rel=1e-14)

    def test_monotone(self, rng):
        for spec in ALL_FAMILIES:
            b = rng.random() * 0.8
            others = rng.random(2)
            h, *_ = csf_eval(spec, b, others)
            h_up, *_ = csf_eval(spec, b + 0.1, others)
            h_rival, *_ = csf_eval(spec, b, others + 0.1)
            assert h_up > h
            assert h_rival < h

    def test_derivatives_match_finite_differences(self, rng):
        # analytic first and second derivatives against central differences
        for spec in ALL_FAMILIES:
            for _ in range(150):
                b = rng.uniform(0.05, 0.95)
                others = rng.uniform(0.05, 0.95, size=int(rng.integers(1, 4)))
                h, dh, d2o, d2x = csf_eval(spec, b, others)
                e1, e2 = 1e-5, 1e-4
                hp = csf_eval(spec, b + e1, others)[0]
                hm = csf_eval(spec, b - e1, others)[0]
                np.testing.assert_allclose(dh, (hp - hm) / (2 * e1), rtol=1e-6, atol=1e-8)
                hp2 = csf_eval(spec, b + e2, others)[0]
                hm2 = csf_eval(spec, b - e2, others)[0]
                np.testing.assert_allclose(
                    d2o, (hp2 - 2 * h + hm2) / e2**2, rtol=1e-5, atol=1e-6
                )
                op, om = others.copy(), others.copy()
                op[0] += e2
                om[0] -= e2
                hpp = csf_eval(spec, b + e2, op)[0]
                hpm = csf_eval(spec, b + e2, om)[0]
                hmp = csf_eval(spec, b - e2, op)[0]
                hmm = csf_eval(spec, b - e2, om)[0]
                np.testing.assert_allclose(
                    d2x, (hpp - hpm - hmp + hmm) / (4 * e2**2), rtol=1e-5, atol=1e-6
                )


class TestAudit:
    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_aligned_families_pass(self, m):
        for spec in [
            make_csf("tullock", q=0.5, delta=0.5),
            make_csf("tullock", q=1.0, delta=0.5),
            make_csf("log", delta=0.5),
        ]:
            report = check_assumptions(spec, m=m, grid=0.05)
            assert report.all_ok, (spec.label(), report.witnesses)

    def test_convex_tullock_fails_concavity_near_zero(self):
        report = check_assumptions(make_csf("tullock", q=2.0, delta=0.5), m=3)
        assert not report.concavity_ok
        witnesses = report.witnesses["concavity"]
        assert witnesses
        (_, point), value = witnesses[0][0], witnesses[0][1]
        assert value > 0
        assert point[0] <= 0.1  # own budget near zero, where f'' > 0 dominates

    def test_exp_fails_concavity(self):
        report = check_assumptions(make_csf("exp", delta=0.5), m=2)
        assert not report.concavity_ok
        assert report.witnesses["concavity"]

    def test_every_failure_has_witness(self):
        report = check_assumptions(make_csf("exp", delta=0.5), m=3)
        for name, ok in [
            ("concavity", report.concavity_ok),
            ("substitutability", report.substitutability_ok),
            ("dominance", report.dominance_ok),
        ]:
            if not ok:
                assert report.witnesses[name]

    def test_parameter_validation(self):
        spec = make_csf("log", delta=0.5)
        with pytest.raises(ValueError, match="two firms"):
            check_assumptions(spec, m=1)
        with pytest.raises(ValueError, match="grid step"):
            check_assumptions(spec, m=2, grid=0.7)

    def test_summary_lines(self):
        report = check_assumptions(make_csf("tullock", q=2.0, delta=0.5), m=2)
        lines = report.summary_lines()
        assert any("FAIL" in line for line in lines)
        assert any("witness" in line for line in lines)
