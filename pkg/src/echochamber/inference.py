"""Posterior beliefs, source-quality probabilities, and optimal actions.

For a Radius policy the likelihood of state omega given an admitted signal s
is the window-renormalized mixture f(s|omega) / D_r(omega), so the posterior
is tilted toward states less likely to have produced an in-window signal.
For a NormalWeight policy the likelihood is the soft-window analogue: each
type's sampled signal is normal with shrunk mean and variance, and type
weights acquire a state-dependent factor proportional to the type's overall
admission probability.

Every summary carries a joint-consistent decomposition: the action equals
prob_high * action_H + (1 - prob_high) * action_L up to floating error,
because weights and type actions are integrals of the same tilted joint.
The direct action is nevertheless computed through the mixed likelihood in a
separate floating-point pass, so the decomposition identity remains a live
numerical health check rather than a tautology.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import expit

from .errors import DegenerateRadiusError, SignalOutsideSupportError, UndefinedOddsError
from .model import (
    ModelParams,
    NormalWeight,
    NumericsConfig,
    Radius,
    SamplingPolicy,
    mixture_logpdf,
    norm_logpdf,
    window_logmass,
)
from .quadrature import signal_rule_unbounded, signal_rule_window, state_rule


@dataclass(frozen=True)
class PosteriorSummary:
    """Posterior mean (the optimal action), posterior variance, probability
    that the source is high quality, and the two type-conditional actions."""

    action: float
    posterior_var: float
    prob_high: float
    type_actions: tuple[float, float]

    @property
    def combination(self) -> float:
        """The decomposed action: quality-probability mix of type actions."""
        aH, aL = self.type_actions
        return self.prob_high * aH + (1.0 - self.prob_high) * aL


def source_odds_closed(s, params: ModelParams):
    """Closed-form odds of a high-quality source given an unrestricted signal.

    Independent of any sampling radius by construction.
    """
    h = params.high_share
    if h <= 0.0 or h >= 1.0:
        raise UndefinedOddsError(f"odds need high_share in (0, 1), got {h!r}")
    vh = params.high_var + params.prior_var
    vl = params.low_var + params.prior_var
    s = np.asarray(s, dtype=float)
    quad = (s - params.prior_mean) ** 2 * (params.low_var - params.high_var) / (2.0 * vh * vl)
    return (h / (1.0 - h)) * math.sqrt(vl / vh) * np.exp(-quad)


def prob_high_closed(s, params: ModelParams):
    odds = source_odds_closed(s, params)
    return odds / (1.0 + odds)


def uncensored_linear_action(s, params: ModelParams, q: str):
    """Known-type, no-restriction policy: precision-weighted average of the
    prior mean and the signal."""
    var = params.signal_var(q)
    s = np.asarray(s, dtype=float)
    return (var * params.prior_mean + params.prior_var * s) / (var + params.prior_var)


# ---------------------------------------------------------------------------
# quadrature internals

@lru_cache(maxsize=256)
def _radius_base(params: ModelParams, cfg: NumericsConfig, r_key) -> tuple:
    """State nodes/weights plus log prior (tilted by the window mass for a
    finite radius). r_key is a float radius or None for unbounded."""
    omega, w = state_rule(params, cfg)
    log_prior = norm_logpdf(omega, params.prior_mean, params.prior_var)
    if r_key is not None:
        log_prior = log_prior - window_logmass(omega, r_key, params)
    return omega, w, log_prior


@lru_cache(maxsize=256)
def _normal_weight_base(params: ModelParams, cfg: NumericsConfig, mean: float, var: float) -> tuple:
    """State nodes/weights, per-type log state weights, and per-type sampled
    conditional parameters for a NormalWeight policy.

    Type weights: w_q(omega) proportional to pi_q * N(omega; mean, q_var + var),
    the admission probability of type q at state omega. The pi_q factor is kept
    separate so type-conditional objects stay defined at h in {0, 1}.
    """
    omega, w = state_rule(params, cfg)
    log_prior = norm_logpdf(omega, params.prior_mean, params.prior_var)
    admit = {}
    cond = {}
    for q in ("H", "L"):
        qv = params.signal_var(q)
        admit[q] = norm_logpdf(omega, mean, qv + var)
        lam = var / (var + qv)
        cond[q] = (lam, (1.0 - lam) * mean, qv * var / (qv + var))  # slope, intercept, var
    lh = math.log(params.high_share) if params.high_share > 0 else -math.inf
    ll = math.log1p(-params.high_share) if params.high_share < 1 else -math.inf
    log_admit_sum = np.logaddexp(lh + admit["H"], ll + admit["L"])
    return omega, w, log_prior, admit, cond, log_admit_sum


def _policy_pieces(s_values: np.ndarray, policy: SamplingPolicy, params: ModelParams, cfg: NumericsConfig):
    """Per-type log joint integrand B_q[i, j] (excluding the type share) and
    the mixed log integrand, over state nodes i and signal values j."""
    lh = math.log(params.high_share) if params.high_share > 0 else -math.inf
    ll = math.log1p(-params.high_share) if params.high_share < 1 else -math.inf
    if isinstance(policy, Radius):
        r_key = None if policy.unbounded else float(policy.r)
        if r_key == 0.0:
            raise DegenerateRadiusError("r = 0 admits no signal")
        omega, w, log_prior = _radius_base(params, cfg, r_key)
        col = omega[:, None]
        like_H = norm_logpdf(s_values[None, :], col, params.high_var)
        like_L = norm_logpdf(s_values[None, :], col, params.low_var)
        bH = log_prior[:, None] + like_H
        bL = log_prior[:, None] + like_L
    elif isinstance(policy, NormalWeight):
        if policy.unbounded:
            omega, w, log_prior = _radius_base(params, cfg, None)
            col = omega[:, None]
            bH = log_prior[:, None] + norm_logpdf(s_values[None, :], col, params.high_var)
            bL = log_prior[:, None] + norm_logpdf(s_values[None, :], col, params.low_var)
        else:
            omega, w, log_prior, admit, cond, log_admit_sum = _normal_weight_base(
                params, cfg, float(policy.mean), float(policy.var)
            )
            base = log_prior - log_admit_sum
            bs = {}
            for q in ("H", "L"):
                slope, intercept, gvar = cond[q]
                mean_q = slope * omega[:, None] + intercept
                bs[q] = (base + admit[q])[:, None] + norm_logpdf(s_values[None, :], mean_q, gvar)
            bH, bL = bs["H"], bs["L"]
    else:
        raise TypeError(f"unsupported policy {policy!r}")
    b_mix = np.logaddexp(lh + bH, ll + bL)
    return omega, w, bH, bL, b_mix, (lh, ll)


def _shifted_moments(b: np.ndarray, omega: np.ndarray, w: np.ndarray):
    """Stable (logZ, mean, second moment) columns for integrand exp(b)."""
    m = b.max(axis=0)
    e = np.exp(b - m[None, :])
    s0 = e.T @ w
    s1 = e.T @ (w * omega)
    s2 = e.T @ (w * omega * omega)
    logz = m + np.log(s0)
    return logz, s1 / s0, s2 / s0


def posterior_summaries(
    s_values, policy: SamplingPolicy, params: ModelParams, cfg: NumericsConfig
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized core: arrays (action, posterior_var, prob_high, a_H, a_L)
    for each signal in s_values. Does not enforce the support precondition;
    callers that expose single-signal contracts do."""
    s_values = np.atleast_1d(np.asarray(s_values, dtype=float))
    omega, w, bH, bL, b_mix, (lh, ll) = _policy_pieces(s_values, policy, params, cfg)
    logz_H, mean_H, _ = _shifted_moments(bH, omega, w)
    logz_L, mean_L, _ = _shifted_moments(bL, omega, w)
    logz_mix, action, m2 = _shifted_moments(b_mix, omega, w)
    post_var = np.maximum(m2 - action**2, 0.0)
    # prob_high through the log-odds so extreme signals stay in [0, 1]
    log_odds = (lh + logz_H) - (ll + logz_L)
    prob_high = expit(log_odds)
    return action, post_var, prob_high, mean_H, mean_L


def _check_support(s: float, policy: SamplingPolicy, params: ModelParams) -> None:
    if isinstance(policy, Radius) and not policy.unbounded:
        if abs(s - params.prior_mean) >= policy.r:
            raise SignalOutsideSupportError(
                f"signal {s!r} lies outside the open window of half-width {policy.r!r} "
                f"around {params.prior_mean!r}"
            )


def optimal_action(
    s: float, policy: SamplingPolicy, params: ModelParams, cfg: NumericsConfig
) -> PosteriorSummary:
    """Full posterior summary at one signal.

    The action is the posterior mean computed through the mixed likelihood;
    prob_high and the type actions come from the per-type passes of the same
    joint, so the convex-combination identity holds up to floating error.
    """
    _check_support(s, policy, params)
    action, post_var, prob_high, aH, aL = posterior_summaries(
        np.array([s], dtype=float), policy, params, cfg
    )
    return PosteriorSummary(
        action=float(action[0]),
        posterior_var=float(post_var[0]),
        prob_high=float(prob_high[0]),
        type_actions=(float(aH[0]), float(aL[0])),
    )


def type_conditional_action(
    s: float, policy: SamplingPolicy, params: ModelParams, q: str, cfg: NumericsConfig
) -> float:
    """Posterior-mean action if the source type were known to be q."""
    _check_support(s, policy, params)
    params.signal_var(q)  # validates q
    _, _, _, aH, aL = posterior_summaries(np.array([s], dtype=float), policy, params, cfg)
    return float(aH[0] if q == "H" else aL[0])


def prob_high_quadrature(
    s: float, policy: SamplingPolicy, params: ModelParams, cfg: NumericsConfig
) -> float:
    """Quadrature-path quality belief, for cross-checks against the closed form."""
    _check_support(s, policy, params)
    _, _, prob_high, _, _ = posterior_summaries(np.array([s], dtype=float), params=params, policy=policy, cfg=cfg)
    return float(prob_high[0])


def posterior_density(
    omega, s: float, policy: SamplingPolicy, params: ModelParams, cfg: NumericsConfig
):
    """Normalized posterior density of the state at omega, given signal s."""
    _check_support(s, policy, params)
    s_arr = np.array([s], dtype=float)
    nodes, w, _, _, b_mix, _ = _policy_pieces(s_arr, policy, params, cfg)
    m = b_mix.max()
    log_norm = m + math.log(np.exp(b_mix[:, 0] - m) @ w)

    omega_arr = np.asarray(omega, dtype=float)
    if isinstance(policy, Radius) and not policy.unbounded:
        log_like = mixture_logpdf(s, omega_arr, params) - window_logmass(
            omega_arr, policy.r, params
        )
    elif isinstance(policy, Radius) or (isinstance(policy, NormalWeight) and policy.unbounded):
        log_like = mixture_logpdf(s, omega_arr, params)
    else:
        lh = math.log(params.high_share) if params.high_share > 0 else -math.inf
        ll = math.log1p(-params.high_share) if params.high_share < 1 else -math.inf
        parts = []
        for q, lw in (("H", lh), ("L", ll)):
            qv = params.signal_var(q)
            var = float(policy.var)
            lam = var / (var + qv)
            gvar = qv * var / (qv + var)
            admit_q = norm_logpdf(omega_arr, policy.mean, qv + var)
            mean_q = lam * omega_arr + (1.0 - lam) * policy.mean
            parts.append(lw + admit_q + norm_logpdf(s, mean_q, gvar))
        num = np.logaddexp(parts[0], parts[1])
        den = np.logaddexp(
            lh + norm_logpdf(omega_arr, policy.mean, params.high_var + float(policy.var)),
            ll + norm_logpdf(omega_arr, policy.mean, params.low_var + float(policy.var)),
        )
        log_like = num - den
    log_post = norm_logpdf(omega_arr, params.prior_mean, params.prior_var) + log_like - log_norm
    return np.exp(log_post)


def action_map(policy: SamplingPolicy, params: ModelParams, cfg: NumericsConfig):
    """Monotone-cubic interpolant of s -> optimal action over the policy
    support, for consumers that evaluate the action many times (figures,
    Monte Carlo). Quadrature nodes double as interpolation knots."""
    if isinstance(policy, Radius) and not policy.unbounded:
        if policy.r == 0.0:
            raise DegenerateRadiusError("r = 0 admits no signal")
        nodes, _ = signal_rule_window(params, cfg, policy.r)
        lo, hi = params.prior_mean - policy.r, params.prior_mean + policy.r
    else:
        nodes, _ = signal_rule_unbounded(params, cfg)
        lo, hi = nodes[0], nodes[-1]
    grid = np.unique(np.concatenate(([lo], nodes, [hi])))
    action, _, _, _, _ = posterior_summaries(grid, policy, params, cfg)
    return PchipInterpolator(grid, action, extrapolate=True)
