"""User-runnable consistency suite.

Re-verifies the statistical contracts at a small scale (M=64, 2000 trials by
default): estimator statistics, moment identities behind the closed forms,
the relay power normalization, and exact-vs-closed-form agreement.  Each
check returns ok/fail plus a short detail string so a regression is
attributable at a glance.
"""

from dataclasses import dataclass

import numpy as np

from . import closed_form, exact
from .channel import derive_trial_stream, draw_realization
from .config import (LinkParams, SystemConfig, derive_stats,
                     separated_los_angles, DEFAULT_SEED)


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    detail: str


def _rel(value, target):
    if target == 0:
        return abs(value)
    return abs(value - target) / abs(target)


def _agree(a, b, tol):
    """Relative agreement with both-zero treated as perfect (payload may be 0)."""
    a, b = float(a), float(b)
    if a == 0.0 and b == 0.0:
        return True, 0.0
    ref = max(abs(a), abs(b))
    return abs(a - b) / ref <= tol, abs(a - b) / ref


def default_context(m=64, trials=2000, seed=DEFAULT_SEED, n=2, tau=None):
    """Shared fixture: config with well-separated LOS angles plus one MC pass."""
    theta_ar, theta_br = separated_los_angles(n)
    config = SystemConfig.from_db(m=m, n=n, trials=trials, seed=seed, tau=tau)
    params = LinkParams.broadcast(n, theta_ar=theta_ar, theta_br=theta_br)
    stats = derive_stats(config, params)
    moments = exact.run_trials(config, params, stats)
    return {"config": config, "params": params, "stats": stats, "moments": moments}


def check_stats_identity(ctx):
    """Estimate power plus error power must reconstruct the path loss."""
    stats, params = ctx["stats"], ctx["params"]
    worst = max(
        np.max(np.abs(stats.omega_ar + stats.sigma2_ar - params.beta_ar) / params.beta_ar),
        np.max(np.abs(stats.omega_br + stats.sigma2_br - params.beta_br) / params.beta_br))
    return worst <= 1e-12, f"max rel defect {worst:.2e}"


def check_stats_ranges(ctx):
    stats = ctx["stats"]
    ok = (np.all(stats.eta_ar >= 0) and np.all(stats.eta_ar < 1)
          and np.all(stats.eta_br >= 0) and np.all(stats.eta_br < 1)
          and np.all(stats.q >= 1.0))
    return ok, f"eta in [0,1), q >= 1 (min q {stats.q.min():.6f})"


def check_estimation_stats(ctx, tol=0.02):
    """Empirical per-entry estimate/error powers against their formulas."""
    config, params, stats = ctx["config"], ctx["params"], ctx["stats"]
    rng_trials = min(config.trials, 2000)
    sum_est = np.zeros(2 * config.n)
    sum_err = np.zeros(2 * config.n)
    for k in range(rng_trials):
        real = draw_realization(config, params, stats, derive_trial_stream(config.seed, k))
        est = np.concatenate([real.hhat_ar, real.hhat_br], axis=1)
        err = np.concatenate([real.err_ar, real.err_br], axis=1)
        sum_est += (np.abs(est) ** 2).mean(axis=0)
        sum_err += (np.abs(err) ** 2).mean(axis=0)
    est_power = sum_est / rng_trials
    err_power = sum_err / rng_trials
    omega = np.concatenate([stats.omega_ar, stats.omega_br])
    sigma2 = np.concatenate([stats.sigma2_ar, stats.sigma2_br])
    worst = max(np.max(np.abs(est_power - omega) / omega),
                np.max(np.abs(err_power - sigma2) / sigma2))
    return worst <= tol, f"worst rel err {worst:.3%} (tol {tol:.0%})"


def check_moment_oracles(ctx, tol=0.05):
    """MC means of the uplink forms and downlink scalars vs their closed forms."""
    config, params, stats, mom = ctx["config"], ctx["params"], ctx["stats"], ctx["moments"]
    m = config.m
    i, j = 0, 1 if config.n > 1 else 0
    omega_a, omega_b = stats.omega_ar[i], stats.omega_br[i]
    errs = {}
    errs["signal_a"] = _rel(mom.ul_mean.signal_a[i], config.p_a[i] * m ** 2 * omega_a ** 2)
    errs["signal_b"] = _rel(mom.ul_mean.signal_b[i], config.p_b[i] * m ** 2 * omega_b ** 2)
    errs["est_error"] = _rel(
        mom.ul_mean.est_error[i],
        m * (omega_a + omega_b) * (config.p_a[i] * stats.sigma2_ar[i]
                                   + config.p_b[i] * stats.sigma2_br[i]))
    errs["noise"] = _rel(mom.ul_mean.noise[i], m * (omega_a + omega_b))
    if config.n > 1:
        xi = closed_form.cross_link_gain(params, stats, "a", i, "a", j)
        errs["cross_moment"] = _rel(mom.est_true_abs2[i, j], m * xi)
    errs["dl_mean"] = _rel(mom.est_true_gram[i, i].real, m * omega_a)
    var_self = mom.est_true_abs2[i, i] - abs(mom.est_true_gram[i, i]) ** 2
    errs["dl_var_own"] = _rel(
        var_self, m * closed_form.cross_link_gain(params, stats, "a", i, "a", i))
    var_cross = (mom.est_true_abs2[config.n + i, i]
                 - abs(mom.est_true_gram[config.n + i, i]) ** 2)
    errs["dl_var_partner"] = _rel(
        var_cross, m * closed_form.cross_link_gain(params, stats, "b", i, "a", i))
    worst = max(errs, key=errs.get)
    return max(errs.values()) <= tol, f"worst {worst} {errs[worst]:.3%} (tol {tol:.0%})"


def check_relay_gain(ctx, lo=0.97, hi=1.03):
    """MC precoder norm against the closed-form power normalization."""
    config, params, stats, mom = ctx["config"], ctx["params"], ctx["stats"], ctx["moments"]
    gain = exact.relay_gain(config, params, stats, mode="closed")
    ratio = mom.fro2 * gain ** 2 / config.p_r
    return lo <= ratio <= hi, f"normalization ratio {ratio:.4f} (want [{lo}, {hi}])"


def check_report_structure(ctx):
    """min/sum identities of the report hold exactly."""
    config, params, mom = ctx["config"], ctx["params"], ctx["moments"]
    rep = exact.se_report(config, params, moments=mom)
    ok = (np.array_equal(rep.r2, np.minimum(rep.r_ar, rep.r_rb)
                         + np.minimum(rep.r_br, rep.r_ra))
          and np.array_equal(rep.r, np.minimum(rep.r1, rep.r2))
          and rep.sum_se == float(np.sum(rep.r)))
    return ok, "min/sum identities exact"


def check_cross_validation(ctx, tol=0.05):
    """Exact and closed-form sum SE agree at the check scale."""
    config, params, mom = ctx["config"], ctx["params"], ctx["moments"]
    exact_rep = exact.se_report(config, params, moments=mom)
    approx_rep = closed_form.approx_report(config, params)
    ok, gap = _agree(exact_rep.sum_se, approx_rep.sum_se, tol)
    return ok, (f"exact {exact_rep.sum_se:.4f} vs closed form "
                f"{approx_rep.sum_se:.4f} (gap {gap:.3%}, tol {tol:.0%})")


ALL_CHECKS = (
    ("stats-identity", check_stats_identity),
    ("stats-ranges", check_stats_ranges),
    ("estimation-stats", check_estimation_stats),
    ("moment-oracles", check_moment_oracles),
    ("relay-gain", check_relay_gain),
    ("report-structure", check_report_structure),
    ("cross-validation", check_cross_validation),
)


def run_self_check(m=64, trials=2000, seed=DEFAULT_SEED, n=2):
    """Run every check at the given scale; returns a list of CheckResult."""
    ctx = default_context(m=m, trials=trials, seed=seed, n=n)
    results = []
    for name, fn in ALL_CHECKS:
        try:
            ok, detail = fn(ctx)
        except Exception as exc:  # a crashed check is a failed check
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        results.append(CheckResult(name=name, ok=bool(ok), detail=detail))
    return results
