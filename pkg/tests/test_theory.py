import math

import numpy as np
import pytest

from peci.core import Direction, SamplePairs, igci_score
from peci.datagen import ExpGenParams, gen_exp_pairs
from peci.ensemble import derive_seed
from peci.errors import DegenerateData, Saturated
from peci.theory import (
    TheoryParams,
    base_error_rate,
    best_k,
    corollary_conditions,
    critical_ensemble_size,
    ensemble_error_bound,
    erf,
    estimate_c,
    hoeffding_tail_bound,
    log_comb,
)

from oracles import draws_without_replacement, erf_quadrature, overlapping_window_sums


class TestErf:
    def test_zero(self):
        assert erf(0.0) == 0.0

    def test_odd_exactly(self):
        for x in np.random.default_rng(0).uniform(-8, 8, 500).tolist():
            assert erf(-x) == -erf(x)

    def test_one(self):
        assert erf(1.0) == pytest.approx(0.8427007929, abs=1e-9)
        assert erf(1.0) == pytest.approx(erf_quadrature(1.0), abs=1e-12)

    def test_against_quadrature(self):
        for x in np.linspace(-6, 6, 241).tolist():
            assert abs(erf(x) - erf_quadrature(x)) <= 1e-10

    def test_saturates(self):
        assert erf(6.5) == 1.0 and erf(-40.0) == -1.0


class TestBaseErrorRate:
    @pytest.mark.parametrize("m", [2, 3, 10, 1000, 10**6])
    def test_random_guess_at_zero(self, m):
        assert base_error_rate(0.0, m) == 0.5

    def test_negative_c_worse_than_chance(self):
        assert base_error_rate(-0.01, 100) > 0.5

    def test_worked_value(self):
        expected = 0.5 * (1 - erf_quadrature(0.05 * math.sqrt(2000)))
        assert base_error_rate(0.05, 2001) == pytest.approx(expected, abs=1e-12)
        # 0.000786 is a rounding of this value that sits about 0.4% high.
        assert base_error_rate(0.05, 2001) == pytest.approx(0.000786, rel=0.01)

    def test_monotone_in_m(self):
        ms = range(2, 400)
        up = [base_error_rate(0.02, m) for m in ms]
        down = [base_error_rate(-0.02, m) for m in ms]
        assert all(a > b for a, b in zip(up, up[1:]))
        assert all(a < b for a, b in zip(down, down[1:]))


class TestEnsembleBound:
    def test_vacuous_at_zero(self):
        assert ensemble_error_bound(0.0, 100, 1000) == 1.0

    def test_worked_value(self):
        e = erf_quadrature(0.05 * math.sqrt(999))
        assert ensemble_error_bound(0.05, 1000, 100) == pytest.approx(math.exp(-50 * e * e), rel=1e-10)

    def test_monotone(self):
        for c in (0.01, -0.01):
            bt = [ensemble_error_bound(c, 50, T) for T in range(1, 200)]
            assert all(a > b for a, b in zip(bt, bt[1:]))
        bk = [ensemble_error_bound(0.01, k, 20) for k in range(2, 300)]
        assert all(a >= b for a, b in zip(bk, bk[1:]))

    def test_range(self):
        assert 0 < ensemble_error_bound(0.001, 10, 5) <= 1


class TestEnsembleConditions:
    def test_zero_c(self):
        assert critical_ensemble_size(0.0, 100) == pytest.approx(2 * math.log(2), abs=1e-15)
        assert corollary_conditions(0.0, 100, 50, 10**6) == (False, False)

    def test_increasing_in_m(self):
        vals = [critical_ensemble_size(0.01, m) for m in range(2, 500)]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_worked_critical_size(self):
        expected = 2 * math.log(2 / (1 - erf_quadrature(0.05 * math.sqrt(500))))
        assert critical_ensemble_size(0.05, 501) == pytest.approx(expected, rel=1e-9)

    def test_saturated(self):
        with pytest.raises(Saturated):
            critical_ensemble_size(1.0, 2000)
        with pytest.raises(Saturated):
            corollary_conditions(1.0, 2000, 1000, 10)

    def test_T_threshold(self):
        c, m, k = 0.05, 2000, 1000
        crit = 2 * math.log(2 / (1 - erf_quadrature(c * math.sqrt(m - 1))))
        threshold = crit / erf_quadrature(c * math.sqrt(k - 1)) ** 2
        assert corollary_conditions(c, m, k, math.floor(threshold))[1] is False
        assert corollary_conditions(c, m, k, math.floor(threshold) + 1)[1] is True
        # C(2000, 1000) is astronomically large, so the k condition holds.
        assert corollary_conditions(c, m, k, 1)[0] is True

    @pytest.mark.parametrize("c", [0.001, 0.01, 0.05])
    def test_k_condition_at_m_minus_one(self, c):
        m = 300
        lhs = math.log(m) + 2 * math.log(erf_quadrature(c * math.sqrt(m - 2)))
        rhs = math.log(2 * math.log(2 / (1 - erf_quadrature(c * math.sqrt(m - 1)))))
        assert corollary_conditions(c, m, m - 1, 1)[0] is (lhs > rhs)

    def test_best_k_in_range(self):
        k = best_k(0.05, 200)
        assert 2 <= k < 200


class TestLogComb:
    def test_exact_small(self):
        for n in range(0, 61):
            for r in range(0, n + 1):
                assert math.exp(log_comb(n, r)) == pytest.approx(math.comb(n, r), rel=1e-9)

    def test_large_finite(self):
        assert math.isfinite(log_comb(2000, 1000))


class TestHoeffding:
    def test_small_t(self):
        assert hoeffding_tail_bound(1e-9, [2.0] * 10) == pytest.approx(1.0)

    @pytest.mark.parametrize("N", [1, 10, 100])
    def test_unit_votes(self, N):
        assert hoeffding_tail_bound(N, [2.0] * N) == pytest.approx(math.exp(-N / 2), rel=1e-14)

    def test_rejects_bad_input(self):
        with pytest.raises(ValueError):
            hoeffding_tail_bound(0.0, [2.0])
        with pytest.raises(ValueError):
            hoeffding_tail_bound(1.0, [2.0, 0.0])

    @pytest.mark.parametrize("sim", [draws_without_replacement, overlapping_window_sums])
    def test_monte_carlo(self, sim):
        n = 20_000
        s = sim(np.random.default_rng(17), n)
        for t in (5, 10, 15):
            bound = hoeffding_tail_bound(t, [2.0] * 50)
            p = float(np.mean(s >= t))
            assert p <= bound + 3 * math.sqrt(bound * (1 - bound) / n)


class TestEstimateC:
    def test_constant_terms_degenerate(self):
        p = SamplePairs([0.0, 1.0, 2.0, 3.0], [0.0, 1.0, 2.0, 3.0]).normalized()
        with pytest.raises(DegenerateData):
            estimate_c(p, Direction.X_CAUSES_Y)

    def test_undecided_truth_rejected(self):
        p, _ = gen_exp_pairs(ExpGenParams(m=100))
        with pytest.raises(ValueError):
            estimate_c(p, Direction.UNDECIDED)

    def test_truth_flips_sign(self):
        p, _ = gen_exp_pairs(ExpGenParams(m=500, seed=3))
        a = estimate_c(p, Direction.X_CAUSES_Y)
        b = estimate_c(p, Direction.Y_CAUSES_X)
        assert b.mu == -a.mu and b.c == -a.c and a.sigma2 == b.sigma2

    def test_invariants(self):
        p, t = gen_exp_pairs(ExpGenParams(m=500, seed=4))
        th = estimate_c(p, t)
        assert th.sigma2 > 0
        assert th.c == pytest.approx(th.mu / math.sqrt(2 * th.sigma2), abs=1e-12)
        assert th.sigma2 == pytest.approx(th.var_x + th.var_y)
        # mu's sign agrees with the base decision's correctness.
        correct = igci_score(p).decision is t
        assert (th.mu > 0) == correct

    def test_from_moments_rejects_zero_variance(self):
        with pytest.raises(DegenerateData):
            TheoryParams.from_moments(0.1, 0.0, 10)

    def test_predicted_base_error_matches_frequency(self):
        # Mean of per-replicate predictions against the observed error frequency.
        wrong, predicted = [], []
        for r in range(500):
            p, t = gen_exp_pairs(ExpGenParams(seed=derive_seed(7, 0, r)))
            wrong.append(igci_score(p).decision is not t)
            predicted.append(base_error_rate(estimate_c(p, t).c, len(p)))
        assert abs(np.mean(predicted) - np.mean(wrong)) <= 0.05
