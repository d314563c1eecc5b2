"""Power-scaling laws: scaled configurations, regime classification, and
closed-form asymptotic limits.

With p_u = E_u/M^alpha, p_r = E_r/M^epsilon, p_p = E_p/M^gamma (all exponents
positive), the estimate power collapses to the LOS-only power psi as M grows,
so every limit below is a function of psi alone.  Limits are evaluated
symbolically, never by extrapolating finite-M values.
"""

import enum
from dataclasses import dataclass, replace

import numpy as np

from .closed_form import approx_report
from .config import LinkParams, ScalingLaw, SystemConfig, derive_stats


class NotFiniteError(ValueError):
    """The regime has no finite limit (zero or unbounded)."""


class Regime(enum.Enum):
    """Large-M behaviour of the per-pair SE under a power-scaling law."""

    ZERO_LIMIT = "zero-limit"
    UNBOUNDED = "unbounded"
    FINITE_CASE_I = "finite-case-i"       # alpha = 1, epsilon = 1
    FINITE_CASE_II = "finite-case-ii"     # alpha = 1, 0 < epsilon < 1
    FINITE_CASE_III = "finite-case-iii"   # 0 < alpha < 1, epsilon = 1
    FINITE_BOUNDARY = "finite-boundary"   # reserved; classify never emits it

    @property
    def is_finite(self) -> bool:
        return self in (Regime.FINITE_CASE_I, Regime.FINITE_CASE_II,
                        Regime.FINITE_CASE_III, Regime.FINITE_BOUNDARY)


@dataclass(frozen=True, eq=False)
class LimitSE:
    """Asymptotic per-pair SEs: r = min of the phases where both stay finite.

    r1 / r2 are None when that phase grows without bound in the regime.
    """

    regime: Regime
    r1: np.ndarray | None
    r2: np.ndarray | None
    r: np.ndarray
    sum_se: float


@dataclass(frozen=True, eq=False)
class RegimeVerdict:
    regime: Regime
    limits: LimitSE | None = None


def scaled_config(base: SystemConfig, law: ScalingLaw, m: int) -> SystemConfig:
    """Config with M antennas and powers scaled down per the law."""
    if m < 1:
        raise ValueError(f"antenna count must be >= 1, got {m}")
    p_u = law.e_u / m ** law.alpha
    return replace(base, m=int(m),
                   p_a=np.full(base.n, p_u), p_b=np.full(base.n, p_u),
                   p_r=law.e_r / m ** law.epsilon,
                   p_p=law.e_p / m ** law.gamma)


def classify(alpha: float, epsilon: float) -> RegimeVerdict:
    """Map scaling exponents to the large-M regime.

    An exponent above 1 on either power drives the SE to zero; both below 1
    let it grow without bound; exactly 1 on one or both powers gives a
    finite positive limit (cases I, II, III).  Exponent 0 means the power is
    not scaled, which behaves like any exponent below 1.
    """
    if alpha < 0 or epsilon < 0:
        raise ValueError("scaling exponents must be nonnegative")
    if alpha > 1 or epsilon > 1:
        return RegimeVerdict(Regime.ZERO_LIMIT)
    if alpha == 1 and epsilon == 1:
        return RegimeVerdict(Regime.FINITE_CASE_I)
    if alpha == 1:
        return RegimeVerdict(Regime.FINITE_CASE_II)
    if epsilon == 1:
        return RegimeVerdict(Regime.FINITE_CASE_III)
    return RegimeVerdict(Regime.UNBOUNDED)


def _limit_components(config: SystemConfig, params: LinkParams, law: ScalingLaw):
    """Per-pair limit rates of the four links and the combined phases.

    Built from the LOS-only powers psi: the uplink terms carry E_u, the
    downlink terms E_r over the total LOS power of all pairs.
    """
    stats = derive_stats(config, params)
    psi_a, psi_b = stats.psi_ar, stats.psi_br
    lam = config.lam
    pair_sum = psi_a + psi_b
    total = float(np.sum(pair_sum))

    def rate(x):
        return lam * np.log2(1.0 + x)

    r1 = rate(law.e_u * (psi_a ** 2 + psi_b ** 2) / pair_sum)
    r_ar = rate(law.e_u * psi_a ** 2 / pair_sum)
    r_br = rate(law.e_u * psi_b ** 2 / pair_sum)
    r_ra = rate(law.e_r * psi_a ** 2 / total)
    r_rb = rate(law.e_r * psi_b ** 2 / total)
    r2 = np.minimum(r_ar, r_rb) + np.minimum(r_br, r_ra)
    r2_dl_only = r_ra + r_rb
    return r1, r2, r2_dl_only


def limit_se(config: SystemConfig, params: LinkParams, law: ScalingLaw,
             verdict: RegimeVerdict = None) -> LimitSE:
    """Asymptotic SE limits for a finite regime.

    Case I keeps both phases; case II is uplink-limited (independent of
    E_r); case III is downlink-limited (independent of E_u, and the
    uplink-side mins drop out because those rates diverge).
    """
    if verdict is None:
        verdict = classify(law.alpha, law.epsilon)
    if not verdict.regime.is_finite:
        raise NotFiniteError(f"regime {verdict.regime.value} has no finite limit")
    r1, r2, r2_dl_only = _limit_components(config, params, law)
    if verdict.regime is Regime.FINITE_CASE_I:
        r = np.minimum(r1, r2)
        return LimitSE(regime=verdict.regime, r1=r1, r2=r2, r=r, sum_se=float(r.sum()))
    if verdict.regime is Regime.FINITE_CASE_II:
        return LimitSE(regime=verdict.regime, r1=r1, r2=None, r=r1,
                       sum_se=float(r1.sum()))
    if verdict.regime is Regime.FINITE_CASE_III:
        return LimitSE(regime=verdict.regime, r1=None, r2=r2_dl_only, r=r2_dl_only,
                       sum_se=float(r2_dl_only.sum()))
    raise NotFiniteError(f"no limit formula for regime {verdict.regime.value}")


def limit_sum(config: SystemConfig, params: LinkParams, law: ScalingLaw) -> float:
    """Sum-SE limit as a total value: 0, inf, or the finite limit."""
    verdict = classify(law.alpha, law.epsilon)
    if verdict.regime is Regime.ZERO_LIMIT:
        return 0.0
    if verdict.regime is Regime.UNBOUNDED:
        return float("inf")
    return limit_se(config, params, law, verdict).sum_se


@dataclass(frozen=True)
class TracePoint:
    m: int
    sum_se: float
    limit: float


def convergence_trace(base: SystemConfig, params: LinkParams, law: ScalingLaw,
                      m_grid) -> list[TracePoint]:
    """Closed-form sum SE under the scaled config at each M, plus the limit."""
    m_grid = [int(m) for m in m_grid]
    if not m_grid or any(b <= a for a, b in zip(m_grid, m_grid[1:])):
        raise ValueError("m_grid must be nonempty and strictly increasing")
    limit = limit_sum(base, params, law)
    points = []
    for m in m_grid:
        report = approx_report(scaled_config(base, law, m), params)
        points.append(TracePoint(m=m, sum_se=report.sum_se, limit=limit))
    return points
