"""Exact spectral efficiencies by Monte Carlo over channel realizations.

The uplink rate takes the expectation outside the log (one instantaneous log
per trial); the downlink rate is statistical: a single SINR built from
ensemble moments of the effective scalar channels h^T hhat*.  This engine
never uses the closed-form interference scalars, so the two evaluators stay
independent for cross-validation (the closed-mode relay gain below exists
only to let tests isolate the power normalization).

Trials are keyed by index: trial k always uses the stream derived from
(seed, k), and the reduction averages a per-trial array filled by index, so
serial and multi-threaded runs produce bit-identical results.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .channel import ChannelRealization, derive_trial_stream, draw_realization
from .config import ChannelStats, LinkParams, SystemConfig, derive_stats


class DimensionMismatchError(ValueError):
    """Realization dimensions do not match the configuration."""


@dataclass(frozen=True, eq=False)
class ULTerms:
    """The five uplink quadratic forms per pair, for one realization.

    signal_a / signal_b: received powers of the two desired streams.
    est_error: leakage through the channel-estimation error.
    interference: inter-pair interference (zero when N = 1).
    noise: combined-noise gain, the squared norms of the combining rows.
    """

    signal_a: np.ndarray
    signal_b: np.ndarray
    est_error: np.ndarray
    interference: np.ndarray
    noise: np.ndarray


@dataclass(frozen=True, eq=False)
class SEReport:
    """Per-pair and sum spectral efficiencies in bits/s/Hz.

    r1 is the uplink-phase SE, r2 the downlink-phase SE combined over both
    directions, r = min(r1, r2) per pair, sum_se the total.
    """

    r1: np.ndarray
    r_ar: np.ndarray
    r_br: np.ndarray
    r_ra: np.ndarray
    r_rb: np.ndarray
    r2: np.ndarray
    r: np.ndarray
    sum_se: float

    @classmethod
    def assemble(cls, r1, r_ar, r_br, r_ra, r_rb):
        """Combine the five link SEs; the min/sum structure is enforced here."""
        r1 = np.asarray(r1, dtype=float)
        r2 = np.minimum(r_ar, r_rb) + np.minimum(r_br, r_ra)
        r = np.minimum(r1, r2)
        return cls(r1=r1, r_ar=np.asarray(r_ar, dtype=float),
                   r_br=np.asarray(r_br, dtype=float),
                   r_ra=np.asarray(r_ra, dtype=float),
                   r_rb=np.asarray(r_rb, dtype=float),
                   r2=r2, r=r, sum_se=float(np.sum(r)))


@dataclass(frozen=True, eq=False)
class TrialMoments:
    """Reduced Monte-Carlo moments for one configuration.

    est_true_gram holds E{Hhat^H H} over the stacked [AR, BR] columns, and
    est_true_abs2 the matching E{|.|^2}; the downlink scalars h_a^T hhat_b*
    are the transposed entries.  log_* are means of the per-trial log2 terms
    before the payload-fraction prefactor.
    """

    trials: int
    ul_mean: ULTerms
    log_r1: np.ndarray
    log_ar: np.ndarray
    log_br: np.ndarray
    log_r1_sem: np.ndarray
    log_ar_sem: np.ndarray
    log_br_sem: np.ndarray
    est_true_gram: np.ndarray
    est_true_abs2: np.ndarray
    est_gram: np.ndarray
    est_gram_abs2: np.ndarray
    fro2: float


def _safe_ratio(num, den):
    """num/den with the 0/0 corner (no signal, no noise gain) mapped to 0."""
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    out = np.zeros(np.broadcast_shapes(num.shape, den.shape))
    np.divide(num, den, out=out, where=den > 0)
    return out


def _combining_products(real: ChannelRealization):
    """Gram matrices of the stacked estimates against themselves, the errors,
    and the true channels; everything downstream is built from these."""
    hhat = np.concatenate([real.hhat_ar, real.hhat_br], axis=1)
    err = np.concatenate([real.err_ar, real.err_br], axis=1)
    gram = hhat.conj().T @ hhat
    gram_err = hhat.conj().T @ err
    return gram, gram_err, gram + gram_err


def _terms_from_products(gram, gram_err, gram_true, config: SystemConfig) -> ULTerms:
    n = config.n
    g2 = np.abs(gram) ** 2
    e2 = np.abs(gram_err) ** 2
    t2 = np.abs(gram_true) ** 2

    idx = np.arange(n)
    ai, bi = idx, n + idx
    signal_a = config.p_a * (g2[ai, ai] + g2[bi, ai])
    signal_b = config.p_b * (g2[ai, bi] + g2[bi, bi])
    est_error = (config.p_a * (e2[ai, ai] + e2[bi, ai])
                 + config.p_b * (e2[ai, bi] + e2[bi, bi]))
    # Interference: every other pair's true channel seen through both
    # combining rows of pair i.
    contrib = (config.p_a[None, :] * (t2[ai][:, :n] + t2[bi][:, :n])
               + config.p_b[None, :] * (t2[ai][:, n:] + t2[bi][:, n:]))
    contrib[idx, idx] = 0.0
    interference = contrib.sum(axis=1)
    noise = gram[ai, ai].real + gram[bi, bi].real
    return ULTerms(signal_a=signal_a, signal_b=signal_b, est_error=est_error,
                   interference=interference, noise=noise)


def ul_terms(real: ChannelRealization, config: SystemConfig) -> ULTerms:
    """Evaluate the five uplink quadratic forms for one realization."""
    if real.hhat_ar.shape != (config.m, config.n) or real.hhat_br.shape != (config.m, config.n):
        raise DimensionMismatchError(
            f"realization is {real.hhat_ar.shape}, config expects {(config.m, config.n)}")
    gram, gram_err, gram_true = _combining_products(real)
    return _terms_from_products(gram, gram_err, gram_true, config)


def run_trials(config: SystemConfig, params: LinkParams, stats: ChannelStats = None,
               threads: int = 1) -> TrialMoments:
    """Run the Monte-Carlo trials and reduce every moment the evaluators need."""
    if stats is None:
        stats = derive_stats(config, params)
    n, trials = config.n, config.trials
    two_n = 2 * n

    per_ul = np.zeros((trials, 5, n))
    per_log = np.zeros((trials, 3, n))
    per_gram = np.zeros((trials, two_n, two_n), dtype=complex)
    per_abs2 = np.zeros((trials, two_n, two_n))
    per_egram = np.zeros((trials, two_n, two_n), dtype=complex)
    per_eabs2 = np.zeros((trials, two_n, two_n))
    per_fro = np.zeros(trials)

    def one_trial(k):
        rng = derive_trial_stream(config.seed, k)
        real = draw_realization(config, params, stats, rng)
        gram, gram_err, gram_true = _combining_products(real)
        terms = _terms_from_products(gram, gram_err, gram_true, config)
        den = terms.est_error + terms.interference + terms.noise
        per_ul[k, 0] = terms.signal_a
        per_ul[k, 1] = terms.signal_b
        per_ul[k, 2] = terms.est_error
        per_ul[k, 3] = terms.interference
        per_ul[k, 4] = terms.noise
        per_log[k, 0] = np.log2(1.0 + _safe_ratio(terms.signal_a + terms.signal_b, den))
        per_log[k, 1] = np.log2(1.0 + _safe_ratio(terms.signal_a, den))
        per_log[k, 2] = np.log2(1.0 + _safe_ratio(terms.signal_b, den))
        per_gram[k] = gram_true
        per_abs2[k] = np.abs(gram_true) ** 2
        per_egram[k] = gram
        per_eabs2[k] = np.abs(gram) ** 2
        per_fro[k] = np.trace(gram).real

    if threads <= 1:
        for k in range(trials):
            one_trial(k)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one_trial, range(trials)))

    ul_mean = ULTerms(signal_a=per_ul[:, 0].mean(axis=0),
                      signal_b=per_ul[:, 1].mean(axis=0),
                      est_error=per_ul[:, 2].mean(axis=0),
                      interference=per_ul[:, 3].mean(axis=0),
                      noise=per_ul[:, 4].mean(axis=0))
    ddof = 1 if trials > 1 else 0
    sem = per_log.std(axis=0, ddof=ddof) / np.sqrt(trials)
    return TrialMoments(trials=trials, ul_mean=ul_mean,
                        log_r1=per_log[:, 0].mean(axis=0),
                        log_ar=per_log[:, 1].mean(axis=0),
                        log_br=per_log[:, 2].mean(axis=0),
                        log_r1_sem=sem[0], log_ar_sem=sem[1], log_br_sem=sem[2],
                        est_true_gram=per_gram.mean(axis=0),
                        est_true_abs2=per_abs2.mean(axis=0),
                        est_gram=per_egram.mean(axis=0),
                        est_gram_abs2=per_eabs2.mean(axis=0),
                        fro2=float(per_fro.mean()))


def se_ul(config: SystemConfig, params: LinkParams, stats: ChannelStats = None,
          threads: int = 1, moments: TrialMoments = None):
    """Uplink SEs: dict with per-pair r1, r_ar, r_br arrays."""
    if moments is None:
        moments = run_trials(config, params, stats, threads=threads)
    lam = config.lam
    return {"r1": lam * moments.log_r1, "r_ar": lam * moments.log_ar,
            "r_br": lam * moments.log_br}


def relay_gain(config: SystemConfig, params: LinkParams, stats: ChannelStats = None,
               mode: str = "closed", moments: TrialMoments = None) -> float:
    """Scale factor that makes the relay meet its transmit power budget.

    mode='closed' uses the expected precoder norm M * sum(omega); mode='mc'
    estimates that norm over trials.
    """
    if stats is None:
        stats = derive_stats(config, params)
    if config.p_r == 0:
        return 0.0
    if mode == "closed":
        expected = config.m * float(np.sum(stats.omega_ar + stats.omega_br))
    elif mode == "mc":
        if moments is None:
            moments = run_trials(config, params, stats)
        expected = moments.fro2
    else:
        raise ValueError(f"mode must be 'closed' or 'mc', got {mode!r}")
    return float(np.sqrt(config.p_r / expected))


def _dl_sinr_from_moments(moments: TrialMoments, config: SystemConfig,
                          pair: int, side: str) -> float:
    """Downlink SINR of user (side, pair) from ensemble moments.

    The effective scalars h_a^T hhat_b* are the transposed entries of the
    estimate-true gram matrix.  Denominator: variance of the own beam,
    variance of the partner beam (its known mean is removed by self-
    interference cancellation), second moments of all other pairs' beams,
    and unit noise over the squared relay gain.
    """
    if config.p_r == 0:
        return 0.0
    n = config.n
    if not 0 <= pair < n:
        raise IndexError(f"pair index {pair} out of range for N={n}")
    offset = {"a": 0, "b": n}[side]
    own = pair + offset
    partner = pair + (n - offset)
    t_mean = moments.est_true_gram.T
    t_abs2 = moments.est_true_abs2.T
    num = abs(t_mean[own, own]) ** 2
    den = (t_abs2[own, own] - abs(t_mean[own, own]) ** 2
           + t_abs2[own, partner] - abs(t_mean[own, partner]) ** 2)
    for j in range(n):
        if j == pair:
            continue
        den += t_abs2[own, n + j] + t_abs2[own, j]
    den += moments.fro2 / config.p_r   # unit noise / rho^2
    return float(_safe_ratio(num, den))


def dl_sinr(config: SystemConfig, params: LinkParams, stats: ChannelStats = None,
            pair: int = 0, side: str = "a", threads: int = 1,
            moments: TrialMoments = None) -> float:
    """Monte-Carlo downlink SINR of one user."""
    if moments is None:
        moments = run_trials(config, params, stats, threads=threads)
    return _dl_sinr_from_moments(moments, config, pair, side)


def se_report(config: SystemConfig, params: LinkParams, threads: int = 1,
              moments: TrialMoments = None) -> SEReport:
    """Full exact SE report from a single Monte-Carlo pass."""
    stats = derive_stats(config, params)
    if moments is None:
        moments = run_trials(config, params, stats, threads=threads)
    lam = config.lam
    ul = se_ul(config, params, stats, moments=moments)
    r_ra = np.array([lam * np.log2(1.0 + _dl_sinr_from_moments(moments, config, i, "a"))
                     for i in range(config.n)])
    r_rb = np.array([lam * np.log2(1.0 + _dl_sinr_from_moments(moments, config, i, "b"))
                     for i in range(config.n)])
    return SEReport.assemble(ul["r1"], ul["r_ar"], ul["r_br"], r_ra, r_rb)
