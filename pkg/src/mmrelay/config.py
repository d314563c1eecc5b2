"""System configuration, link parameters, and the derived per-link channel statistics.

All powers are SNRs relative to unit noise variance (noise is normalized to 1
at the relay and at every user), so "power" and "SNR" are interchangeable
here.  dB quantities convert with the power convention 10^(dB/10).
"""

import warnings
from dataclasses import dataclass, field, replace

import numpy as np

# Numerical-experiment defaults: coherence interval of 196 symbols, uplink and
# pilot SNR 10 dB, relay SNR 20 dB, unit path loss, 5 dB Rician factor.
DEFAULT_T = 196
DEFAULT_M = 128
DEFAULT_N = 2
DEFAULT_TRIALS = 2000
DEFAULT_SEED = 20260810
DEFAULT_PU_DB = 10.0
DEFAULT_PR_DB = 20.0
DEFAULT_PP_DB = 10.0
DEFAULT_BETA = 1.0
DEFAULT_K_DB = 5.0
DEFAULT_EU_DB = 10.0
DEFAULT_ER_DB = 20.0
DEFAULT_EP_DB = 10.0

# Domain tags for deriving independent random streams from one master seed.
_ANGLE_STREAM = 1

CONFIG_KEYS = (
    "M", "N", "T", "tau", "trials", "seed",
    "p_u_db", "p_r_db", "p_p_db",
    "beta_ar", "beta_br", "k_ar_db", "k_br_db", "theta_ar", "theta_br",
    "alpha", "epsilon", "gamma", "e_u_db", "e_r_db", "e_p_db",
)


class ConfigError(ValueError):
    """A configuration value violates the model contract."""


class NonPositiveBetaError(ConfigError):
    pass


class NegativeKError(ConfigError):
    pass


class TauExceedsTError(ConfigError):
    pass


class ParseError(ConfigError):
    """The config file cannot be parsed."""


class TauBelowPilotMinimumWarning(UserWarning):
    """tau is shorter than the 2N symbols needed for orthogonal pilots."""


class ZeroPayloadWarning(UserWarning):
    """tau == T leaves no payload symbols, so every SE is zero."""


def db_to_linear(x_db):
    """Convert a power-like dB value (power, SNR, Rician factor) to linear."""
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True, eq=False)
class SystemConfig:
    """Dimensions, linear transmit powers, and Monte-Carlo bookkeeping.

    p_a / p_b hold one uplink power per user pair; p_r and p_p are the relay
    and per-pilot-symbol powers.  All linear, relative to unit noise.
    """

    m: int = DEFAULT_M
    n: int = DEFAULT_N
    t: int = DEFAULT_T
    tau: int = 2 * DEFAULT_N
    p_a: np.ndarray = field(default_factory=lambda: np.full(DEFAULT_N, 10.0))
    p_b: np.ndarray = field(default_factory=lambda: np.full(DEFAULT_N, 10.0))
    p_r: float = 100.0
    p_p: float = 10.0
    trials: int = DEFAULT_TRIALS
    seed: int = DEFAULT_SEED

    @property
    def lam(self) -> float:
        """Payload fraction per direction: (T - tau) / (2T)."""
        return (self.t - self.tau) / (2.0 * self.t)

    @classmethod
    def from_db(cls, m=DEFAULT_M, n=DEFAULT_N, t=DEFAULT_T, tau=None,
                p_u_db=DEFAULT_PU_DB, p_r_db=DEFAULT_PR_DB, p_p_db=DEFAULT_PP_DB,
                trials=DEFAULT_TRIALS, seed=DEFAULT_SEED):
        """Build a config from dB powers; tau defaults to 2N (orthogonal pilots)."""
        if tau is None:
            tau = 2 * n
        p_u = np.broadcast_to(db_to_linear(p_u_db), (n,)).astype(float)
        return cls(m=int(m), n=int(n), t=int(t), tau=int(tau),
                   p_a=p_u.copy(), p_b=p_u.copy(),
                   p_r=float(db_to_linear(p_r_db)), p_p=float(db_to_linear(p_p_db)),
                   trials=int(trials), seed=int(seed))


@dataclass(frozen=True, eq=False)
class LinkParams:
    """Per-user large-scale parameters, one entry per pair for each side.

    beta: path loss (linear), k: Rician factor (linear), theta: LOS angle of
    arrival in radians.
    """

    beta_ar: np.ndarray
    beta_br: np.ndarray
    k_ar: np.ndarray
    k_br: np.ndarray
    theta_ar: np.ndarray
    theta_br: np.ndarray

    @classmethod
    def broadcast(cls, n, beta=DEFAULT_BETA, k_db=DEFAULT_K_DB,
                  theta_ar=None, theta_br=None, seed=DEFAULT_SEED):
        """Same beta and K on every link; draw angles from the seed if absent."""
        if theta_ar is None or theta_br is None:
            drawn_ar, drawn_br = draw_los_angles(n, seed)
            theta_ar = drawn_ar if theta_ar is None else theta_ar
            theta_br = drawn_br if theta_br is None else theta_br
        full = lambda v: np.broadcast_to(np.asarray(v, dtype=float), (n,)).copy()
        return cls(beta_ar=full(beta), beta_br=full(beta),
                   k_ar=full(db_to_linear(k_db)), k_br=full(db_to_linear(k_db)),
                   theta_ar=full(theta_ar), theta_br=full(theta_br))


def draw_los_angles(n, seed):
    """Draw the 2N LOS angles uniformly over [-pi/2, pi/2) from the master seed.

    Uses a dedicated stream so the draw never collides with trial streams.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_ANGLE_STREAM,)))
    theta = rng.uniform(-np.pi / 2, np.pi / 2, size=2 * n)
    return theta[:n], theta[n:]


def separated_los_angles(n):
    """Angles whose sines form an even grid over [-0.75, 0.75].

    Keeps every pair of steering vectors nearly orthogonal, which is the
    generic geometry the large-antenna approximations assume.  Used by the
    verification suite so tolerances do not depend on a lucky angle draw.
    """
    s = np.linspace(-0.75, 0.75, 2 * n)
    theta = np.arcsin(s)
    return theta[:n], theta[n:]


@dataclass(frozen=True, eq=False)
class ScalingLaw:
    """Power-scaling rule: p_u = E_u/M^alpha, p_r = E_r/M^epsilon, p_p = E_p/M^gamma.

    E values are linear; a zero exponent means that power is not scaled.
    """

    e_u: float = 10.0
    e_r: float = 100.0
    e_p: float = 10.0
    alpha: float = 0.0
    epsilon: float = 0.0
    gamma: float = 0.0

    @classmethod
    def from_db(cls, e_u_db=DEFAULT_EU_DB, e_r_db=DEFAULT_ER_DB, e_p_db=DEFAULT_EP_DB,
                alpha=0.0, epsilon=0.0, gamma=0.0):
        if min(alpha, epsilon, gamma) < 0:
            raise ConfigError("scaling exponents must be nonnegative")
        return cls(e_u=float(db_to_linear(e_u_db)), e_r=float(db_to_linear(e_r_db)),
                   e_p=float(db_to_linear(e_p_db)),
                   alpha=float(alpha), epsilon=float(epsilon), gamma=float(gamma))


@dataclass(frozen=True, eq=False)
class ChannelStats:
    """Per-link scalars every evaluator shares.

    eta: fraction of the scattered power the estimator captures, in [0, 1).
    omega: per-antenna power of the channel estimate.
    sigma2: per-antenna power of the estimation error (omega + sigma2 = beta).
    psi: per-antenna LOS power, the p_p -> 0 limit of omega.
    q: uplink noise-plus-estimation-error factor per pair, >= 1.
    """

    eta_ar: np.ndarray
    eta_br: np.ndarray
    omega_ar: np.ndarray
    omega_br: np.ndarray
    sigma2_ar: np.ndarray
    sigma2_br: np.ndarray
    psi_ar: np.ndarray
    psi_br: np.ndarray
    q: np.ndarray

    def side(self, side):
        """(eta, omega, sigma2, psi) arrays for side 'a' or 'b'."""
        if side == "a":
            return self.eta_ar, self.omega_ar, self.sigma2_ar, self.psi_ar
        if side == "b":
            return self.eta_br, self.omega_br, self.sigma2_br, self.psi_br
        raise ValueError(f"side must be 'a' or 'b', got {side!r}")


def validate(config: SystemConfig, params: LinkParams):
    """Check model invariants; raise ConfigError or warn on soft violations.

    Returns (config, params) unchanged so calls can be chained.
    """
    if config.m < 1:
        raise ConfigError(f"M must be >= 1, got {config.m}")
    if config.n < 1:
        raise ConfigError(f"N must be >= 1, got {config.n}")
    if config.tau > config.t:
        raise TauExceedsTError(f"tau={config.tau} exceeds T={config.t}")
    if config.tau < 2 * config.n:
        warnings.warn(
            f"tau={config.tau} is below the orthogonal-pilot minimum 2N={2 * config.n}",
            TauBelowPilotMinimumWarning, stacklevel=2)
    if config.tau == config.t:
        warnings.warn("tau == T: payload fraction is zero, all SEs will be zero",
                      ZeroPayloadWarning, stacklevel=2)
    for name, arr in (("p_a", config.p_a), ("p_b", config.p_b)):
        arr = np.asarray(arr)
        if arr.shape != (config.n,):
            raise ConfigError(f"{name} must have one entry per pair ({config.n}), got {arr.shape}")
        if np.any(arr < 0):
            raise ConfigError(f"{name} must be nonnegative")
    if config.p_r < 0 or config.p_p < 0:
        raise ConfigError("p_r and p_p must be nonnegative")
    for name, arr in (("beta_ar", params.beta_ar), ("beta_br", params.beta_br)):
        if np.asarray(arr).shape != (config.n,):
            raise ConfigError(f"{name} must have one entry per pair ({config.n})")
        if np.any(np.asarray(arr) <= 0):
            raise NonPositiveBetaError(f"{name} must be strictly positive")
    for name, arr in (("k_ar", params.k_ar), ("k_br", params.k_br)):
        if np.asarray(arr).shape != (config.n,):
            raise ConfigError(f"{name} must have one entry per pair ({config.n})")
        if np.any(np.asarray(arr) < 0):
            raise NegativeKError(f"{name} must be nonnegative")
    for name, arr in (("theta_ar", params.theta_ar), ("theta_br", params.theta_br)):
        if np.asarray(arr).shape != (config.n,):
            raise ConfigError(f"{name} must have one entry per pair ({config.n})")
    if config.trials < 1:
        raise ConfigError("trials must be >= 1")
    return config, params


def derive_stats(config: SystemConfig, params: LinkParams) -> ChannelStats:
    """Per-link estimation statistics implied by the pilot power and geometry."""
    def one_side(beta, k):
        tp = config.tau * config.p_p * beta
        eta = tp / (1.0 + tp)
        omega = beta * (k + eta) / (k + 1.0)
        sigma2 = beta / ((1.0 + tp) * (k + 1.0))
        psi = beta * k / (k + 1.0)
        return eta, omega, sigma2, psi

    eta_ar, omega_ar, sigma2_ar, psi_ar = one_side(params.beta_ar, params.k_ar)
    eta_br, omega_br, sigma2_br, psi_br = one_side(params.beta_br, params.k_br)
    q = config.p_a * sigma2_ar + config.p_b * sigma2_br + 1.0
    return ChannelStats(eta_ar=eta_ar, eta_br=eta_br,
                        omega_ar=omega_ar, omega_br=omega_br,
                        sigma2_ar=sigma2_ar, sigma2_br=sigma2_br,
                        psi_ar=psi_ar, psi_br=psi_br, q=q)


def _parse_value(key, raw, n):
    """Parse one config value; per-user keys broadcast scalars to length n."""
    per_user = key in ("p_u_db", "beta_ar", "beta_br", "k_ar_db", "k_br_db",
                       "theta_ar", "theta_br")
    try:
        if key in ("M", "N", "T", "tau", "trials", "seed"):
            return int(raw)
        if per_user:
            vals = np.array([float(v) for v in raw.split(",")], dtype=float)
            if vals.size == 1:
                return np.full(n, vals[0])
            if vals.size != n:
                raise ParseError(f"{key} needs 1 or N={n} values, got {vals.size}")
            return vals
        return float(raw)
    except ParseError:
        raise
    except ValueError as exc:
        raise ParseError(f"cannot parse {key} = {raw!r}: {exc}") from None


def parse_config_text(text: str):
    """Parse 'key = value' lines into (SystemConfig, LinkParams, ScalingLaw).

    Per-user values may be scalars (broadcast over the N pairs) or
    comma-separated lists of length N.  '#' starts a comment.
    """
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in CONFIG_KEYS:
            raise ParseError(f"line {lineno}: unknown key {key!r}")
        if key in raw:
            raise ParseError(f"line {lineno}: duplicate key {key!r}")
        if not value:
            raise ParseError(f"line {lineno}: empty value for {key!r}")
        raw[key] = value

    n = int(raw["N"]) if "N" in raw else DEFAULT_N
    vals = {k: _parse_value(k, v, n) for k, v in raw.items()}

    seed = vals.get("seed", DEFAULT_SEED)
    tau = vals.get("tau", 2 * n)
    p_u = vals.get("p_u_db", DEFAULT_PU_DB)
    p_u = db_to_linear(p_u) if np.ndim(p_u) else np.full(n, float(db_to_linear(p_u)))
    config = SystemConfig(
        m=vals.get("M", DEFAULT_M), n=n, t=vals.get("T", DEFAULT_T), tau=tau,
        p_a=np.asarray(p_u, dtype=float).copy(), p_b=np.asarray(p_u, dtype=float).copy(),
        p_r=float(db_to_linear(vals.get("p_r_db", DEFAULT_PR_DB))),
        p_p=float(db_to_linear(vals.get("p_p_db", DEFAULT_PP_DB))),
        trials=vals.get("trials", DEFAULT_TRIALS), seed=seed)

    theta_ar = vals.get("theta_ar")
    theta_br = vals.get("theta_br")
    if theta_ar is None or theta_br is None:
        drawn_ar, drawn_br = draw_los_angles(n, seed)
        theta_ar = drawn_ar if theta_ar is None else theta_ar
        theta_br = drawn_br if theta_br is None else theta_br
    params = LinkParams(
        beta_ar=vals.get("beta_ar", np.full(n, DEFAULT_BETA)),
        beta_br=vals.get("beta_br", np.full(n, DEFAULT_BETA)),
        k_ar=db_to_linear(vals.get("k_ar_db", np.full(n, DEFAULT_K_DB))),
        k_br=db_to_linear(vals.get("k_br_db", np.full(n, DEFAULT_K_DB))),
        theta_ar=np.asarray(theta_ar, dtype=float),
        theta_br=np.asarray(theta_br, dtype=float))

    law = ScalingLaw.from_db(
        e_u_db=vals.get("e_u_db", DEFAULT_EU_DB),
        e_r_db=vals.get("e_r_db", DEFAULT_ER_DB),
        e_p_db=vals.get("e_p_db", DEFAULT_EP_DB),
        alpha=vals.get("alpha", 0.0), epsilon=vals.get("epsilon", 0.0),
        gamma=vals.get("gamma", 0.0))

    validate(config, params)
    return config, params, law


def load_config(path):
    """Read and parse a config file; see parse_config_text for the format."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise FileNotFoundError(f"config file not found: {path}") from None
    return parse_config_text(text)


def with_overrides(config: SystemConfig, seed=None, trials=None) -> SystemConfig:
    """Apply CLI-level overrides without touching anything else."""
    kwargs = {}
    if seed is not None:
        kwargs["seed"] = int(seed)
    if trials is not None:
        kwargs["trials"] = int(trials)
    return replace(config, **kwargs) if kwargs else config
