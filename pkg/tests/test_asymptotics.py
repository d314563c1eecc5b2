"""Power-scaling laws: classification, limits, and convergence traces."""

import numpy as np
import pytest

from mmrelay.asymptotics import (NotFiniteError, Regime, classify,
                                 convergence_trace, limit_se, limit_sum,
                                 scaled_config)
from mmrelay.closed_form import approx_report
from mmrelay.config import (LinkParams, ScalingLaw, SystemConfig, db_to_linear,
                            derive_stats, separated_los_angles)


def make_setup(n=2, k_db=5.0, t=196, seed=3):
    theta_ar, theta_br = separated_los_angles(n)
    config = SystemConfig.from_db(m=128, n=n, t=t, seed=seed, trials=10)
    params = LinkParams.broadcast(n, k_db=k_db, theta_ar=theta_ar, theta_br=theta_br)
    return config, params


class TestScaledConfig:
    def test_zero_exponents_keep_powers(self):
        config, _ = make_setup()
        law = ScalingLaw.from_db(alpha=0.0, epsilon=0.0, gamma=0.0)
        cfg = scaled_config(config, law, 1024)
        assert cfg.m == 1024
        assert np.allclose(cfg.p_a, 10.0)
        assert cfg.p_r == pytest.approx(100.0)
        assert cfg.p_p == pytest.approx(10.0)

    def test_linear_scaling(self):
        config, _ = make_setup()
        law = ScalingLaw.from_db(e_u_db=10.0, alpha=1.0)
        assert scaled_config(config, law, 10).p_a[0] == pytest.approx(1.0, rel=1e-12)

    def test_sqrt_scaling(self):
        config, _ = make_setup()
        law = ScalingLaw.from_db(e_r_db=20.0, epsilon=0.5)
        assert scaled_config(config, law, 100).p_r == pytest.approx(10.0, rel=1e-12)

    def test_bad_m_rejected(self):
        config, _ = make_setup()
        with pytest.raises(ValueError):
            scaled_config(config, ScalingLaw.from_db(), 0)


class TestClassify:
    @pytest.mark.parametrize("alpha,epsilon,regime", [
        (1.5, 0.5, Regime.ZERO_LIMIT),
        (0.5, 1.5, Regime.ZERO_LIMIT),
        (1.2, 1.2, Regime.ZERO_LIMIT),
        (0.5, 0.5, Regime.UNBOUNDED),
        (0.0, 0.0, Regime.UNBOUNDED),
        (1.0, 1.0, Regime.FINITE_CASE_I),
        (1.0, 0.2, Regime.FINITE_CASE_II),
        (1.0, 0.0, Regime.FINITE_CASE_II),
        (0.2, 1.0, Regime.FINITE_CASE_III),
        (0.0, 1.0, Regime.FINITE_CASE_III),
    ])
    def test_table(self, alpha, epsilon, regime):
        assert classify(alpha, epsilon).regime is regime

    def test_total_over_grid(self):
        grid = [0.0, 0.2, 0.5, 1.0, 1.2, 2.0]
        for a in grid:
            for e in grid:
                verdict = classify(a, e)
                assert isinstance(verdict.regime, Regime)
                assert verdict.regime is not Regime.FINITE_BOUNDARY

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            classify(-0.1, 1.0)

    def test_finite_flag(self):
        assert classify(1.0, 1.0).regime.is_finite
        assert not classify(2.0, 1.0).regime.is_finite


class TestLimits:
    def test_case_i_single_pair_frozen(self):
        # beta=1, K=10^0.5: psi = K/(K+1); uplink-limit SINR is E_u psi
        config, params = make_setup(n=1)
        law = ScalingLaw.from_db(alpha=1.0, epsilon=1.0, gamma=1.0)
        lim = limit_se(config, params, law)
        psi = 10.0 ** 0.5 / (1.0 + 10.0 ** 0.5)
        lam = (196 - 2) / (2 * 196)
        assert psi == pytest.approx(0.75975, rel=1e-4)
        expected_r1 = lam * np.log2(1 + 10.0 * psi)
        assert lim.r1[0] == pytest.approx(expected_r1, rel=1e-12)
        assert lim.r[0] == pytest.approx(min(expected_r1, lim.r2[0]), rel=1e-12)

    def test_case_i_matches_scaled_closed_form(self):
        config, params = make_setup(n=1)
        law = ScalingLaw.from_db(alpha=1.0, epsilon=1.0, gamma=1.0)
        lim = limit_se(config, params, law)
        rep = approx_report(scaled_config(config, law, 2 ** 16), params)
        assert rep.sum_se == pytest.approx(lim.sum_se, rel=0.01)

    def test_case_ii_equals_case_i_uplink(self):
        config, params = make_setup(n=2)
        case_i = limit_se(config, params, ScalingLaw.from_db(alpha=1.0, epsilon=1.0))
        case_ii = limit_se(config, params, ScalingLaw.from_db(alpha=1.0, epsilon=0.2))
        # same E_u: the UL-phase limits coincide exactly
        assert np.array_equal(case_ii.r, case_i.r1)
        assert case_ii.r2 is None

    def test_case_ii_independent_of_relay_constant(self):
        config, params = make_setup(n=2)
        lo = limit_se(config, params, ScalingLaw.from_db(e_r_db=0.0, alpha=1.0, epsilon=0.5))
        hi = limit_se(config, params, ScalingLaw.from_db(e_r_db=40.0, alpha=1.0, epsilon=0.5))
        assert np.array_equal(lo.r, hi.r)

    def test_case_iii_independent_of_user_constant(self):
        config, params = make_setup(n=2)
        lo = limit_se(config, params, ScalingLaw.from_db(e_u_db=0.0, alpha=0.5, epsilon=1.0))
        hi = limit_se(config, params, ScalingLaw.from_db(e_u_db=40.0, alpha=0.5, epsilon=1.0))
        assert np.array_equal(lo.r, hi.r)
        assert lo.r1 is None

    def test_case_iii_symmetric_frozen(self):
        config, params = make_setup(n=2)
        law = ScalingLaw.from_db(alpha=0.5, epsilon=1.0)
        lim = limit_se(config, params, law)
        psi = 10.0 ** 0.5 / (1.0 + 10.0 ** 0.5)
        lam = (196 - 4) / (2 * 196)
        expected = 2 * lam * np.log2(1 + 100.0 * psi ** 2 / (2 * 2 * psi))
        assert lim.r[0] == pytest.approx(expected, rel=1e-12)

    def test_gamma_ignored_by_limits(self):
        config, params = make_setup(n=2)
        a = limit_se(config, params, ScalingLaw.from_db(alpha=1.0, epsilon=1.0, gamma=0.5))
        b = limit_se(config, params, ScalingLaw.from_db(alpha=1.0, epsilon=1.0, gamma=2.0))
        assert np.array_equal(a.r, b.r)

    def test_not_finite_raises(self):
        config, params = make_setup(n=2)
        with pytest.raises(NotFiniteError):
            limit_se(config, params, ScalingLaw.from_db(alpha=1.5, epsilon=1.0))
        with pytest.raises(NotFiniteError):
            limit_se(config, params, ScalingLaw.from_db(alpha=0.5, epsilon=0.5))

    def test_psi_is_zero_pilot_limit_of_omega(self):
        config, params = make_setup(n=2)
        zero_pilot = SystemConfig(m=config.m, n=2, t=config.t, tau=config.tau,
                                  p_a=config.p_a, p_b=config.p_b, p_r=config.p_r,
                                  p_p=0.0, trials=10)
        stats = derive_stats(zero_pilot, params)
        assert np.array_equal(stats.omega_ar, stats.psi_ar)
        assert np.array_equal(stats.omega_br, stats.psi_br)

    def test_limit_sum_totals(self):
        config, params = make_setup(n=2)
        assert limit_sum(config, params, ScalingLaw.from_db(alpha=1.5, epsilon=1.0)) == 0.0
        assert limit_sum(config, params, ScalingLaw.from_db(alpha=0.5, epsilon=0.5)) == np.inf
        finite = limit_sum(config, params, ScalingLaw.from_db(alpha=1.0, epsilon=1.0))
        assert 0.0 < finite < np.inf


class TestConvergenceTrace:
    def test_case_i_converges_within_3pct(self):
        config, params = make_setup(n=2)
        law = ScalingLaw.from_db(alpha=1.0, epsilon=1.0, gamma=1.0)
        trace = convergence_trace(config, params, law, [64, 128, 256, 512, 1024, 2048, 4096])
        last = trace[-1]
        assert abs(last.sum_se - last.limit) / last.limit < 0.03

    def test_case_i_gap_shrinks_in_the_tail(self):
        # geometric grid in the one-sided regime: the gap is nonincreasing
        config, params = make_setup(n=2)
        law = ScalingLaw.from_db(alpha=1.0, epsilon=1.0, gamma=1.0)
        trace = convergence_trace(config, params, law, [256, 512, 1024, 2048, 4096])
        gaps = [abs(pt.sum_se - pt.limit) for pt in trace]
        assert all(b <= a + 1e-9 for a, b in zip(gaps, gaps[1:]))

    def test_decay_regime_shrinks(self):
        config, params = make_setup(n=2)
        law = ScalingLaw.from_db(alpha=1.2, epsilon=1.0, gamma=1.0)
        trace = convergence_trace(config, params, law, [256, 4096])
        assert trace[-1].sum_se < trace[0].sum_se
        assert trace[0].limit == 0.0

    def test_case_i_and_ii_share_a_limit(self):
        config, params = make_setup(n=2)
        t1 = convergence_trace(config, params,
                               ScalingLaw.from_db(alpha=1.0, epsilon=1.0, gamma=1.0), [64])
        t2 = convergence_trace(config, params,
                               ScalingLaw.from_db(alpha=1.0, epsilon=0.2, gamma=1.0), [64])
        # decided by the UL phase in both regimes at these powers
        assert abs(t1[0].limit - t2[0].limit) < 1e-12

    def test_bad_grid_rejected(self):
        config, params = make_setup(n=2)
        law = ScalingLaw.from_db(alpha=1.0, epsilon=1.0)
        with pytest.raises(ValueError):
            convergence_trace(config, params, law, [])
        with pytest.raises(ValueError):
            convergence_trace(config, params, law, [64, 64])
        with pytest.raises(ValueError):
            convergence_trace(config, params, law, [128, 64])
