"""Soft-window sampling: a Gaussian admission weight with variance sig_g2
replaces the hard censoring radius.

Conditional on the state, the admitted signal of a type-q source is normal
with mean pulled toward the window center and variance below the source
variance (the product-of-Gaussians convolution). The decision rule evaluated
here is the two-step shrinkage scheme built from the printed weights: a
quality belief from the admission-free predictive densities with the prior
type share, then a precision-style shrinkage of the signal toward the prior
mean. That rule is not the generative posterior mean; its value can fall
below minus the prior variance, which no posterior-mean rule admits. The
objective is evaluated by the closed form where the blended prior weight is
constant (single-type or equal-variance cases) and by double quadrature
otherwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import expit

from .model import (
    DEFAULT_NUMERICS,
    ModelParams,
    NormalWeight,
    NumericsConfig,
    Radius,
    UNBOUNDED,
    is_unbounded,
    norm_logpdf,
)


@dataclass(frozen=True)
class WeightBundle:
    """Scalar weights of the soft-window decision rule at one evaluation
    point: per-type prior weights alpha_q, signal-attenuation factors
    lambda_q, admitted-signal conditional variances sig_gq_q, their blends,
    and the admitted-signal conditional parameters (conv_mean, conv_var) for
    the requested state and type."""

    alpha_H: float
    alpha_L: float
    lambda_H: float
    lambda_L: float
    sig_gq_H: float
    sig_gq_L: float
    lambda_bar: float
    alpha_bar: float
    conv_mean: float
    conv_var: float


def _per_type(params: ModelParams, policy: NormalWeight, q: str) -> tuple[float, float, float]:
    """(alpha_q, lambda_q, sig_gq2_q) from the precision definitions."""
    qv = params.signal_var(q)
    p0 = 1.0 / params.prior_var
    pq = 1.0 / qv
    pg = 0.0 if policy.unbounded else 1.0 / float(policy.var)
    alpha = p0 / (p0 + pg + pq)
    lam = pq / (pq + pg)
    sig_gq2 = 1.0 / (pg + pq)
    return alpha, lam, sig_gq2


def sampled_signal_distribution(
    omega: float, params: ModelParams, policy: NormalWeight, q: str
) -> tuple[float, float]:
    """Mean and variance of the admitted type-q signal at state omega: the
    state shrunk toward the window center, with the product variance."""
    _, lam, sig_gq2 = _per_type(params, policy, q)
    return lam * omega + (1.0 - lam) * policy.mean, sig_gq2


def naive_prob_high(s, params: ModelParams, policy: NormalWeight):
    """Quality belief of the two-step rule: admitted-signal predictive
    densities under the prior state law, blended with the prior type share.

    In the no-window limit this coincides with the closed-form source odds.
    """
    h = params.high_share
    if h <= 0.0:
        return np.zeros_like(np.asarray(s, dtype=float))
    if h >= 1.0:
        return np.ones_like(np.asarray(s, dtype=float))
    s = np.asarray(s, dtype=float)
    logs = {}
    for q in ("H", "L"):
        _, lam, sig_gq2 = _per_type(params, policy, q)
        mean = lam * params.prior_mean + (1.0 - lam) * policy.mean
        var = lam * lam * params.prior_var + sig_gq2
        logs[q] = norm_logpdf(s, mean, var)
    log_odds = math.log(h) - math.log1p(-h) + logs["H"] - logs["L"]
    return expit(log_odds)


def weight_bundle(
    params: ModelParams,
    policy: NormalWeight,
    s: float | None = None,
    omega: float | None = None,
    q: str = "H",
) -> WeightBundle:
    """Assemble every scalar weight at one evaluation point. alpha_bar uses
    the quality belief at s when s is given, the prior type share otherwise."""
    aH, lH, gH = _per_type(params, policy, "H")
    aL, lL, gL = _per_type(params, policy, "L")
    h = params.high_share
    if s is None:
        p_high = h
    else:
        p_high = float(naive_prob_high(s, params, policy))
    conv_mean, conv_var = sampled_signal_distribution(
        params.prior_mean if omega is None else omega, params, policy, q
    )
    return WeightBundle(
        alpha_H=aH,
        alpha_L=aL,
        lambda_H=lH,
        lambda_L=lL,
        sig_gq_H=gH,
        sig_gq_L=gL,
        lambda_bar=h * lH + (1.0 - h) * lL,
        alpha_bar=p_high * aH + (1.0 - p_high) * aL,
        conv_mean=conv_mean,
        conv_var=conv_var,
    )


def naive_action(s, params: ModelParams, policy: NormalWeight):
    """The two-step rule's action: belief-blended prior weight on the prior
    mean, remainder on the raw signal."""
    s = np.asarray(s, dtype=float)
    aH, _, _ = _per_type(params, policy, "H")
    aL, _, _ = _per_type(params, policy, "L")
    p_high = naive_prob_high(s, params, policy)
    alpha_bar = p_high * aH + (1.0 - p_high) * aL
    return alpha_bar * params.prior_mean + (1.0 - alpha_bar) * s


def _degenerate(params: ModelParams) -> bool:
    return (
        params.high_share in (0.0, 1.0) or params.high_var == params.low_var
    )


def _closed_form_value(params: ModelParams, policy: NormalWeight) -> float:
    """Three-term closed form, exact when alpha_bar is constant in s."""
    aH, lH, gH = _per_type(params, policy, "H")
    aL, lL, gL = _per_type(params, policy, "L")
    h = params.high_share
    alpha_bar = h * aH + (1.0 - h) * aL
    lambda_bar = h * lH + (1.0 - h) * lL
    s0 = params.prior_var
    term1 = (1.0 - (1.0 - alpha_bar) * lambda_bar) ** 2 * s0
    term2 = h * (1.0 - h) * (1.0 - alpha_bar) ** 2 * (lH - lL) ** 2 * s0
    term3 = (1.0 - alpha_bar) ** 2 * (h * gH + (1.0 - h) * gL)
    return -(term1 + term2 + term3)


def closed_form_objective(
    params: ModelParams,
    sampling_var,
    cfg: NumericsConfig = DEFAULT_NUMERICS,
    *,
    check: bool = True,
) -> float:
    """Expected utility of the soft window centered at the prior mean.

    sampling_var = 0 returns minus the prior variance analytically and
    UNBOUNDED returns the no-restriction benchmark. Single-type and
    equal-variance cases use the three-term closed form; mixed cases are
    evaluated by double quadrature of the same objective, since the blended
    prior weight then varies with the signal.
    """
    from .censor import _halved, _naive_loss, expected_utility
    from .errors import QuadratureError

    if is_unbounded(sampling_var):
        return expected_utility(Radius(UNBOUNDED), params, cfg, check=check)
    v = float(sampling_var)
    if v < 0.0:
        raise ValueError(f"sampling variance must be nonnegative, got {v!r}")
    if v == 0.0:
        return -params.prior_var
    policy = NormalWeight(mean=params.prior_mean, var=v)
    if _degenerate(params):
        return _closed_form_value(params, policy)
    value = -_naive_loss(policy, params, cfg)
    if check:
        coarse = -_naive_loss(policy, params, _halved(cfg))
        if abs(value - coarse) > 1e3 * cfg.abs_tol:
            raise QuadratureError(
                f"soft-window objective failed its self-check: {value!r} vs "
                f"{coarse!r} at half resolution"
            )
    return value


def single_type_objective_offcenter(
    params: ModelParams, q: str, sampling_var: float, offset: float
) -> float:
    """Single-type closed form for a window centered offset away from the
    prior mean; the off-center penalty enters through the attenuation
    factor."""
    policy = NormalWeight(mean=params.prior_mean + offset, var=sampling_var)
    alpha, lam, sig_gq2 = _per_type(params, policy, q)
    s0 = params.prior_var
    return -(
        (1.0 - (1.0 - alpha) * lam) ** 2 * s0
        + (1.0 - alpha) ** 2 * sig_gq2
        + (1.0 - lam) ** 2 * offset**2
    )


@dataclass(frozen=True)
class CenterCheckRow:
    offset: float
    value_at_center: float
    value_off_center: float
    margin: float
    dominates: bool


@dataclass(frozen=True)
class CenterCheckReport:
    rows: tuple[CenterCheckRow, ...]

    @property
    def all_dominate(self) -> bool:
        return all(row.dominates for row in self.rows)


def sampling_center_check(
    params: ModelParams, sampling_var: float, offsets
) -> CenterCheckReport:
    """Confirm that centering the window on the prior mean weakly dominates
    any tested off-center placement, via the single-type closed form.

    Requires a single-type model (high_share 0 or 1), where the closed form
    is exact.
    """
    h = params.high_share
    if h not in (0.0, 1.0):
        raise ValueError(
            f"center check uses the single-type closed form; high_share must "
            f"be 0 or 1, got {h!r}"
        )
    q = "H" if h == 1.0 else "L"
    center = single_type_objective_offcenter(params, q, sampling_var, 0.0)
    rows = []
    for off in offsets:
        off_val = single_type_objective_offcenter(params, q, sampling_var, float(off))
        margin = center - off_val
        rows.append(
            CenterCheckRow(
                offset=float(off),
                value_at_center=center,
                value_off_center=off_val,
                margin=margin,
                dominates=margin >= 0.0,
            )
        )
    return CenterCheckReport(rows=tuple(rows))


def single_type_critical_point(params: ModelParams, q: str) -> float:
    """Stationary sampling variance of the single-type closed form:
    prior_var * (q_var - 2 prior_var) / (q_var + prior_var). Positive only
    when the source variance exceeds twice the prior variance."""
    qv = params.signal_var(q)
    s0 = params.prior_var
    return s0 * (qv - 2.0 * s0) / (qv + s0)


def locate_critical_point(
    params: ModelParams,
    lo: float,
    hi: float,
    cfg: NumericsConfig = DEFAULT_NUMERICS,
) -> tuple[float, str]:
    """Numerically locate a stationary point of the objective in (lo, hi)
    by bisecting the sign change of a central-difference derivative, and
    classify it as 'min' or 'max' by the local curvature."""

    def deriv(v: float) -> float:
        step = 1e-6 * (1.0 + v)
        up = closed_form_objective(params, v + step, cfg, check=False)
        dn = closed_form_objective(params, v - step, cfg, check=False)
        return (up - dn) / (2.0 * step)

    v_star = float(brentq(deriv, lo, hi, xtol=1e-10))
    mid = closed_form_objective(params, v_star, cfg, check=False)
    spread = 0.05 * (1.0 + v_star)
    left = closed_form_objective(params, v_star - spread, cfg, check=False)
    right = closed_form_objective(params, v_star + spread, cfg, check=False)
    kind = "min" if mid <= min(left, right) else "max"
    return v_star, kind


def optimize_sampling_variance(params: ModelParams, cfg: NumericsConfig):
    """Maximize the soft-window objective over the sampling variance on a
    logarithmic scan grid, against the no-restriction benchmark. Returns the
    same result type as the censoring-radius optimizer, with the optimizing
    sampling variance in r_star."""
    from .censor import _scan_then_refine, expected_utility

    grid = np.geomspace(1e-3, 1e4, 57)
    benchmark = expected_utility(Radius(UNBOUNDED), params, cfg, check=False)

    def fn(v: float) -> float:
        return closed_form_objective(params, v, cfg, check=False)

    return _scan_then_refine(fn, grid, benchmark, cfg, "sampling-variance")
