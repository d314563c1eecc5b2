"""Closed-form approximations: kernels, limits, and exact-engine agreement."""

import numpy as np
import pytest

from mmrelay.closed_form import (approx_report, approx_se_dl, approx_se_ul,
                                 cross_link_gain, dl_interference,
                                 ul_interference)
from mmrelay.config import (LinkParams, SystemConfig, derive_stats,
                            separated_los_angles)
from mmrelay.exact import run_trials, se_report


def make_setup(m=128, n=2, trials=2000, seed=3, p_u_db=10.0, p_r_db=20.0,
               p_p_db=10.0, k_db=5.0, beta=1.0, tau=None):
    theta_ar, theta_br = separated_los_angles(n)
    config = SystemConfig.from_db(m=m, n=n, tau=tau, p_u_db=p_u_db,
                                  p_r_db=p_r_db, p_p_db=p_p_db,
                                  trials=trials, seed=seed)
    params = LinkParams.broadcast(n, beta=beta, k_db=k_db,
                                  theta_ar=theta_ar, theta_br=theta_br)
    return config, params, derive_stats(config, params)


class TestCrossLinkGain:
    def test_perfect_csi_zero_k_limit(self):
        # K = 0 with saturated pilots: the coupling collapses to beta_i beta_j
        config, params, stats = make_setup(n=2, p_p_db=150.0, k_db=-np.inf, beta=0.8)
        val = cross_link_gain(params, stats, "a", 0, "a", 1)
        assert val == pytest.approx(0.8 * 0.8, rel=1e-6)

    def test_saturated_pilot_limit(self):
        # eta -> 1: bracket tends to K_i + K_j + 1
        config, params, stats = make_setup(n=2, p_p_db=150.0, k_db=5.0, beta=1.0)
        k = params.k_ar[0]
        expected = (2 * k + 1) / (k + 1) ** 2
        val = cross_link_gain(params, stats, "a", 0, "b", 1)
        assert val == pytest.approx(expected, rel=1e-6)

    def test_hand_computed_value(self):
        # beta=1, K=sqrt(10), tau=4, p_p=10: bracket spelled out by hand
        config, params, stats = make_setup(n=2)
        k = 10.0 ** 0.5
        eta = 40.0 / 41.0
        bracket = (k + eta) / 41.0 + k * eta + k * eta + eta * eta
        expected = bracket / (k + 1.0) ** 2
        assert cross_link_gain(params, stats, "a", 0, "a", 1) == pytest.approx(
            expected, rel=1e-12)

    def test_mc_moment_oracle(self):
        # E{|hhat_i^H h_j|^2} / M approaches the kernel for separated angles
        config, params, stats = make_setup(m=128, n=2, trials=2000)
        moments = run_trials(config, params, stats)
        xi = cross_link_gain(params, stats, "a", 0, "a", 1)
        assert moments.est_true_abs2[0, 1] / config.m == pytest.approx(xi, rel=0.05)

    def test_nonnegative(self):
        config, params, stats = make_setup(n=3, tau=6, k_db=0.0)
        for i in range(3):
            for j in range(3):
                for s1 in "ab":
                    for s2 in "ab":
                        assert cross_link_gain(params, stats, s1, i, s2, j) >= 0.0


class TestInterference:
    def test_single_pair_no_ul_interference(self):
        config, params, stats = make_setup(n=1, tau=2)
        assert ul_interference(config, params, stats, 0) == 0.0

    def test_dl_term_defined_on_diagonal(self):
        config, params, stats = make_setup(n=2)
        assert dl_interference(config, params, stats, 0, 0) > 0.0

    def test_nonnegative(self):
        config, params, stats = make_setup(n=3, tau=6)
        for i in range(3):
            assert ul_interference(config, params, stats, i) >= 0.0
            for j in range(3):
                assert dl_interference(config, params, stats, i, j) >= 0.0


class TestApproxRates:
    def test_ul_formula_spelled_out(self):
        config, params, stats = make_setup(m=64, n=2)
        rates = approx_se_ul(config, params, stats)
        omega = stats.omega_ar[0]
        q = stats.q[0]
        qi = ul_interference(config, params, stats, 0)
        den = 2 * omega * q + qi
        expected_r1 = config.lam * np.log2(1 + (64 * 10 * omega ** 2 * 2) / den)
        expected_ar = config.lam * np.log2(1 + (64 * 10 * omega ** 2) / den)
        assert rates["r1"][0] == pytest.approx(expected_r1, rel=1e-12)
        assert rates["r_ar"][0] == pytest.approx(expected_ar, rel=1e-12)

    def test_symmetric_pair(self):
        config, params, stats = make_setup(n=2)
        rates = approx_se_ul(config, params, stats)
        assert np.array_equal(rates["r_ar"], rates["r_br"])

    def test_dl_formula_spelled_out(self):
        config, params, stats = make_setup(m=64, n=2)
        rates = approx_se_dl(config, params, stats)
        omega = stats.omega_ar[0]
        den = sum(stats.omega_ar[j] + stats.omega_br[j]
                  + dl_interference(config, params, stats, 0, j) for j in range(2))
        expected = config.lam * np.log2(1 + 64 * 100 * omega ** 2 / den)
        assert rates["r_ra"][0] == pytest.approx(expected, rel=1e-12)

    def test_dl_zero_relay_power(self):
        config, params, stats = make_setup(n=2)
        zero = SystemConfig(m=config.m, n=2, t=config.t, tau=config.tau,
                            p_a=config.p_a, p_b=config.p_b, p_r=0.0,
                            p_p=config.p_p, trials=config.trials)
        rates = approx_se_dl(zero, params, derive_stats(zero, params))
        assert np.all(rates["r_ra"] == 0.0)
        assert np.all(rates["r_rb"] == 0.0)

    def test_dl_symmetric_sides(self):
        config, params, stats = make_setup(n=2)
        rates = approx_se_dl(config, params, stats)
        assert np.array_equal(rates["r_ra"], rates["r_rb"])


class TestApproxReport:
    def test_all_powers_zero(self):
        theta_ar, theta_br = separated_los_angles(2)
        config = SystemConfig(m=64, n=2, t=196, tau=4, p_a=np.zeros(2),
                              p_b=np.zeros(2), p_r=0.0, p_p=0.0, trials=10)
        params = LinkParams.broadcast(2, theta_ar=theta_ar, theta_br=theta_br)
        rep = approx_report(config, params)
        assert rep.sum_se == 0.0
        assert np.all(rep.r == 0.0)

    def test_monotone_in_antennas(self):
        config, params, _ = make_setup(m=64, n=2)
        prev = approx_report(config, params)
        for m in (128, 256, 512):
            cur = approx_report(SystemConfig(m=m, n=2, t=config.t, tau=config.tau,
                                             p_a=config.p_a, p_b=config.p_b,
                                             p_r=config.p_r, p_p=config.p_p,
                                             trials=config.trials), params)
            assert np.all(cur.r1 > prev.r1)
            assert np.all(cur.r2 > prev.r2)
            assert np.all(cur.r > prev.r)
            prev = cur

    def test_deterministic(self):
        config, params, _ = make_setup()
        a = approx_report(config, params)
        b = approx_report(config, params)
        assert np.array_equal(a.r, b.r) and a.sum_se == b.sum_se

    def test_structural_identities(self):
        config, params, _ = make_setup(n=3, tau=6)
        rep = approx_report(config, params)
        assert np.array_equal(rep.r2, np.minimum(rep.r_ar, rep.r_rb)
                              + np.minimum(rep.r_br, rep.r_ra))
        assert np.array_equal(rep.r, np.minimum(rep.r1, rep.r2))

    def test_k_sweep_increases_sum(self):
        # scaled powers E/M at a large array: stronger LOS helps every link
        sums = []
        for k_db in (3.0, 5.0, 10.0):
            theta_ar, theta_br = separated_los_angles(5)
            config = SystemConfig(m=512, n=5, t=196, tau=10,
                                  p_a=np.full(5, 10.0 / 512), p_b=np.full(5, 10.0 / 512),
                                  p_r=100.0 / 512, p_p=10.0 / 512, trials=10)
            params = LinkParams.broadcast(5, k_db=k_db, theta_ar=theta_ar,
                                          theta_br=theta_br)
            sums.append(approx_report(config, params).sum_se)
        assert sums[0] < sums[1] < sums[2]


class TestCrossValidation:
    def test_matches_exact_engine(self):
        config, params, _ = make_setup(m=128, n=2, trials=2000)
        exact_rep = se_report(config, params)
        approx_rep = approx_report(config, params)
        gap = abs(exact_rep.sum_se - approx_rep.sum_se) / exact_rep.sum_se
        assert gap <= 0.05
        per_pair = np.abs(exact_rep.r - approx_rep.r) / exact_rep.r
        assert np.all(per_pair <= 0.07)
