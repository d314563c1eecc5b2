"""Large-antenna closed-form SE approximations.

Every rate here is a deterministic function of the per-link statistics: the
random quadratic forms of the exact engine are replaced by their leading
moments, with inter-link coupling captured by the cross-link gain below.
No randomness, so identical inputs give bit-identical outputs.
"""

import numpy as np

from .config import ChannelStats, LinkParams, SystemConfig, derive_stats
from .exact import SEReport, _safe_ratio


def _link(params: LinkParams, stats: ChannelStats, side: str, i: int):
    """(beta, k, eta) of link (side, i)."""
    if side == "a":
        return params.beta_ar[i], params.k_ar[i], stats.eta_ar[i]
    if side == "b":
        return params.beta_br[i], params.k_br[i], stats.eta_br[i]
    raise ValueError(f"side must be 'a' or 'b', got {side!r}")


def cross_link_gain(params: LinkParams, stats: ChannelStats,
                    est_side: str, est_idx: int,
                    true_side: str, true_idx: int) -> float:
    """Second-moment coupling between an estimated link and a true channel.

    Returns E{|hhat_est^H h_true|^2} / M for independent links, dropping the
    LOS cross-product (negligible for well-separated angles).  With both
    links equal it also gives the variance of the effective downlink scalar
    h^T hhat* divided by M.  Note 1/(1 + tau p_p beta) = 1 - eta.
    """
    b1, k1, e1 = _link(params, stats, est_side, est_idx)
    b2, k2, e2 = _link(params, stats, true_side, true_idx)
    bracket = (k1 + e1) * (1.0 - e2) + k2 * e1 + k1 * e2 + e1 * e2
    return float(b1 * b2 / ((k1 + 1.0) * (k2 + 1.0)) * bracket)


def ul_interference(config: SystemConfig, params: LinkParams,
                    stats: ChannelStats, i: int) -> float:
    """Aggregate inter-pair uplink interference seen by pair i (per antenna).

    Sums, over every other pair j, the coupling of both of pair i's
    combining rows with both of pair j's true channels, weighted by the
    transmit powers.  Zero when N = 1.
    """
    total = 0.0
    for j in range(config.n):
        if j == i:
            continue
        total += config.p_a[j] * (cross_link_gain(params, stats, "a", i, "a", j)
                                  + cross_link_gain(params, stats, "b", i, "a", j))
        total += config.p_b[j] * (cross_link_gain(params, stats, "a", i, "b", j)
                                  + cross_link_gain(params, stats, "b", i, "b", j))
    return total


def dl_interference(config: SystemConfig, params: LinkParams,
                    stats: ChannelStats, i: int, j: int) -> float:
    """Downlink beam-coupling term between receive pair i and beam pair j.

    Defined for every j including j = i, where it reproduces the variances
    of the own and partner beams.  The estimated links sit at index j, the
    receive-side true channel at index i.
    """
    return config.p_r * (cross_link_gain(params, stats, "a", j, "a", i)
                         + cross_link_gain(params, stats, "b", j, "a", i))


def approx_se_ul(config: SystemConfig, params: LinkParams, stats: ChannelStats = None):
    """Closed-form uplink SEs: dict with per-pair r1, r_ar, r_br arrays."""
    if stats is None:
        stats = derive_stats(config, params)
    lam = config.lam
    n = config.n
    r1 = np.zeros(n)
    r_ar = np.zeros(n)
    r_br = np.zeros(n)
    for i in range(n):
        den = ((stats.omega_ar[i] + stats.omega_br[i]) * stats.q[i]
               + ul_interference(config, params, stats, i))
        num_a = config.m * config.p_a[i] * stats.omega_ar[i] ** 2
        num_b = config.m * config.p_b[i] * stats.omega_br[i] ** 2
        r1[i] = lam * np.log2(1.0 + _safe_ratio(num_a + num_b, den))
        r_ar[i] = lam * np.log2(1.0 + _safe_ratio(num_a, den))
        r_br[i] = lam * np.log2(1.0 + _safe_ratio(num_b, den))
    return {"r1": r1, "r_ar": r_ar, "r_br": r_br}


def approx_se_dl(config: SystemConfig, params: LinkParams, stats: ChannelStats = None):
    """Closed-form downlink SEs: dict with per-pair r_ra, r_rb arrays."""
    if stats is None:
        stats = derive_stats(config, params)
    lam = config.lam
    n = config.n
    r_ra = np.zeros(n)
    r_rb = np.zeros(n)
    for i in range(n):
        den = sum(stats.omega_ar[j] + stats.omega_br[j]
                  + dl_interference(config, params, stats, i, j)
                  for j in range(n))
        num_a = config.m * config.p_r * stats.omega_ar[i] ** 2
        num_b = config.m * config.p_r * stats.omega_br[i] ** 2
        r_ra[i] = lam * np.log2(1.0 + _safe_ratio(num_a, den))
        r_rb[i] = lam * np.log2(1.0 + _safe_ratio(num_b, den))
    return {"r_ra": r_ra, "r_rb": r_rb}


def approx_report(config: SystemConfig, params: LinkParams) -> SEReport:
    """Full closed-form SE report; deterministic, no Monte Carlo."""
    stats = derive_stats(config, params)
    ul = approx_se_ul(config, params, stats)
    dl = approx_se_dl(config, params, stats)
    return SEReport.assemble(ul["r1"], ul["r_ar"], ul["r_br"], dl["r_ra"], dl["r_rb"])
