"""Spectral-efficiency lab for multi-pair two-way decode-and-forward relaying
with a massive-MIMO relay over Rician fading under imperfect CSI.

Three evaluators share one configuration model: a Monte-Carlo engine for the
exact rates, deterministic closed-form approximations, and the large-M
power-scaling limits.  The CLI (``mmrelay``) runs sweeps and writes CSV and
PNG artifacts.
"""

from .asymptotics import (LimitSE, NotFiniteError, Regime, RegimeVerdict,
                          TracePoint, classify, convergence_trace, limit_se,
                          limit_sum, scaled_config)
from .channel import (ChannelRealization, derive_trial_stream,
                      draw_realization, dump_realization, los_steering)
from .closed_form import (approx_report, approx_se_dl, approx_se_ul,
                          cross_link_gain, dl_interference, ul_interference)
from .config import (ChannelStats, ConfigError, LinkParams, NegativeKError,
                     NonPositiveBetaError, ParseError, ScalingLaw,
                     SystemConfig, TauBelowPilotMinimumWarning,
                     TauExceedsTError, ZeroPayloadWarning, db_to_linear,
                     derive_stats, draw_los_angles, linear_to_db, load_config,
                     parse_config_text, separated_los_angles, validate)
from .exact import (DimensionMismatchError, SEReport, TrialMoments, ULTerms,
                    dl_sinr, relay_gain, run_trials, se_report, se_ul,
                    ul_terms)
from .selfcheck import CheckResult, run_self_check

__version__ = "0.1.0"
