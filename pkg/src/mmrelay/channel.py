"""Rician channel realizations with the estimate/error decomposition.

Estimation is generated statistically: under MMSE with worst-case Gaussian
noise the estimate and the error are independent Gaussians around the known
LOS mean, with the variances in ChannelStats.  Drawing them directly is
distribution-equivalent to simulating pilot transmission and much cheaper.

Complex Gaussian convention: CN(0, s2) has independent real/imag parts of
variance s2/2 each.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .config import ChannelStats, LinkParams, SystemConfig

# Spawn-key domain for per-trial streams (angle draws use domain 1).
_TRIAL_STREAM = 0


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    """One draw of true channels, estimates, and errors for both sides.

    Columns are user pairs; h = hhat + err holds exactly by construction.
    """

    h_ar: np.ndarray
    h_br: np.ndarray
    hhat_ar: np.ndarray
    hhat_br: np.ndarray
    err_ar: np.ndarray
    err_br: np.ndarray


def los_steering(m: int, theta: float) -> np.ndarray:
    """Steering vector of a half-wavelength ULA toward angle theta.

    Entry m (0-based) is exp(-j * m * pi * sin(theta)); unit modulus, so the
    squared norm is exactly M.
    """
    if m < 1:
        raise ValueError(f"antenna count must be >= 1, got {m}")
    return np.exp(-1j * np.arange(m) * np.pi * np.sin(theta))


def derive_trial_stream(seed: int, trial: int) -> np.random.Generator:
    """Deterministic, collision-free random stream for one Monte-Carlo trial."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_TRIAL_STREAM, trial)))


def _cn(rng, m, n, s2_per_col):
    """M x N matrix, column j ~ CN(0, s2_per_col[j] I)."""
    z = rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))
    return z * np.sqrt(np.asarray(s2_per_col) / 2.0)


def draw_realization(config: SystemConfig, params: LinkParams,
                     stats: ChannelStats, rng: np.random.Generator) -> ChannelRealization:
    """Draw one channel realization for every link.

    Estimate column: sqrt(beta K/(K+1)) gbar + CN(0, beta eta/(K+1) I).
    Error column:    CN(0, sigma2 I), independent of the estimate.
    True column:     estimate + error.

    Draw order per side is estimate scatter then error, side A before side B,
    so a given stream always produces the same realization.
    """
    m, n = config.m, config.n

    def one_side(beta, k, eta, sigma2, theta):
        los = np.empty((m, n), dtype=complex)
        for j in range(n):
            los[:, j] = np.sqrt(beta[j] * k[j] / (k[j] + 1.0)) * los_steering(m, theta[j])
        hhat = los + _cn(rng, m, n, beta * eta / (k + 1.0))
        err = _cn(rng, m, n, sigma2)
        return hhat, err

    hhat_ar, err_ar = one_side(params.beta_ar, params.k_ar, stats.eta_ar,
                               stats.sigma2_ar, params.theta_ar)
    hhat_br, err_br = one_side(params.beta_br, params.k_br, stats.eta_br,
                               stats.sigma2_br, params.theta_br)
    return ChannelRealization(h_ar=hhat_ar + err_ar, h_br=hhat_br + err_br,
                              hhat_ar=hhat_ar, hhat_br=hhat_br,
                              err_ar=err_ar, err_br=err_br)


def dump_realization(real: ChannelRealization, path) -> None:
    """Debug dump: one CSV row per antenna with interleaved re/im parts."""
    blocks = [("h_ar", real.h_ar), ("h_br", real.h_br),
              ("hhat_ar", real.hhat_ar), ("hhat_br", real.hhat_br),
              ("err_ar", real.err_ar), ("err_br", real.err_br)]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        header = ["antenna"]
        for name, mat in blocks:
            for j in range(mat.shape[1]):
                header += [f"{name}_{j + 1}_re", f"{name}_{j + 1}_im"]
        writer.writerow(header)
        for row in range(real.h_ar.shape[0]):
            vals = [row]
            for _, mat in blocks:
                for j in range(mat.shape[1]):
                    vals += [f"{mat[row, j].real:.10g}", f"{mat[row, j].imag:.10g}"]
            writer.writerow(vals)
