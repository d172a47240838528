from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from echochamber.inference import optimal_action
from echochamber.model import (
    DEFAULT_NUMERICS,
    DEFAULT_PARAMS,
    ModelParams,
    NormalWeight,
    Radius,
    UNBOUNDED,
)
from echochamber.normal_sampling import (
    closed_form_objective,
    locate_critical_point,
    naive_action,
    naive_prob_high,
    optimize_sampling_variance,
    sampled_signal_distribution,
    sampling_center_check,
    single_type_critical_point,
    single_type_objective_offcenter,
    weight_bundle,
)

P = DEFAULT_PARAMS
C = DEFAULT_NUMERICS

# single-type reference configs used throughout: one noisy (var 4), one
# precise (var 0.5, the window-centering worked example)
P_SD4 = replace(P, high_share=1.0, high_var=4.0, low_var=4.0)
P_PRECISE = replace(P, high_share=1.0, high_var=0.5)


def test_per_type_weights_hand_values() -> None:
    # low type, source var 4, window var 0.4: precisions are 1, 2.5, 0.25
    b = weight_bundle(replace(P, low_var=4.0), NormalWeight(mean=0.0, var=0.4))
    assert math.isclose(b.lambda_L, 1.0 / 11.0, rel_tol=1e-14)
    assert math.isclose(b.sig_gq_L, 4.0 / 11.0, rel_tol=1e-14)
    assert math.isclose(b.alpha_L, 4.0 / 15.0, rel_tol=1e-14)
    assert math.isclose(b.lambda_H, 4.0 / 9.0, rel_tol=1e-14)
    assert math.isclose(b.sig_gq_H, 2.0 / 9.0, rel_tol=1e-14)
    assert math.isclose(b.alpha_H, 2.0 / 11.0, rel_tol=1e-14)


def test_weight_bundle_blends_and_ranges() -> None:
    pol = NormalWeight(mean=0.0, var=2.0)
    b = weight_bundle(P, pol)
    h = P.high_share
    assert math.isclose(b.lambda_bar, h * b.lambda_H + (1 - h) * b.lambda_L)
    assert math.isclose(b.alpha_bar, h * b.alpha_H + (1 - h) * b.alpha_L)
    for x in (b.alpha_H, b.alpha_L, b.lambda_H, b.lambda_L):
        assert 0.0 < x < 1.0
    assert b.sig_gq_H < P.high_var and b.sig_gq_L < P.low_var
    b_at_s = weight_bundle(P, pol, s=1.0)
    p = float(naive_prob_high(1.0, P, pol))
    assert math.isclose(b_at_s.alpha_bar, p * b.alpha_H + (1 - p) * b.alpha_L)


def test_admitted_signal_shrinks_toward_window_center() -> None:
    pol = NormalWeight(mean=0.0, var=2.0)
    mean, var = sampled_signal_distribution(2.0, P, pol, "L")
    assert 0.0 < mean < 2.0
    assert var < P.low_var
    # removing the window restores the raw source distribution
    mean_u, var_u = sampled_signal_distribution(2.0, P, NormalWeight(), "L")
    assert mean_u == 2.0 and var_u == P.low_var
    # an off-center window pulls toward its own center, not the prior mean
    mean_off, _ = sampled_signal_distribution(0.0, P, NormalWeight(mean=3.0, var=2.0), "L")
    assert mean_off > 0.0


def test_single_type_objective_values(oracle: dict) -> None:
    assert closed_form_objective(P_SD4, 0.0, C) == -P.prior_var
    got = closed_form_objective(P_SD4, 0.4, C)
    assert math.isclose(got, -16.0 / 15.0, rel_tol=1e-12)
    assert math.isclose(got, oracle["soft_objective"]["single_sd4_v04"], rel_tol=1e-12)
    unb = closed_form_objective(P_SD4, UNBOUNDED, C)
    assert math.isclose(unb, -0.8, abs_tol=1e-9)
    assert math.isclose(unb, oracle["soft_objective"]["single_sd4_unbounded"], abs_tol=1e-9)


def test_single_type_interior_dip_below_no_data_value() -> None:
    # the two-step rule can underperform ignoring the data outright: its
    # value at the stationary variance sits below minus the prior variance
    assert closed_form_objective(P_SD4, 0.4, C) < -P.prior_var


def test_critical_point_formula() -> None:
    assert math.isclose(single_type_critical_point(P_SD4, "H"), 0.4, rel_tol=1e-14)
    # below twice the prior variance there is no positive stationary point
    assert single_type_critical_point(P_PRECISE, "H") < 0.0


def test_locate_critical_point_classifies_minimum() -> None:
    v_star, kind = locate_critical_point(P_SD4, 0.05, 2.0, C)
    assert abs(v_star - 0.4) < 1e-6
    assert kind == "min"


def test_mixed_objective_pinned(oracle: dict) -> None:
    for key in ("v1", "v4", "v16", "v1e6"):
        got = closed_form_objective(P, float(key[1:]), C, check=False)
        assert math.isclose(got, oracle["soft_objective"][key], abs_tol=1e-7), key


def test_mixed_objective_self_check_consistent() -> None:
    assert math.isclose(
        closed_form_objective(P, 4.0, C, check=True),
        closed_form_objective(P, 4.0, C, check=False),
        rel_tol=1e-15,
    )


def test_objective_rejects_negative_variance() -> None:
    with pytest.raises(ValueError):
        closed_form_objective(P, -1.0, C)


def test_naive_rule_recovers_bayes_action_without_window() -> None:
    pol = NormalWeight(mean=P.prior_mean, var=1e10)
    for s in (0.5, 1.0, 2.0):
        naive = float(naive_action(s, P, pol))
        bayes = optimal_action(s, Radius(UNBOUNDED), P, C).action
        assert abs(naive - bayes) < 1e-8, s


def test_naive_prob_high_degenerate_shares() -> None:
    pol = NormalWeight(mean=0.0, var=2.0)
    assert float(naive_prob_high(1.3, replace(P, high_share=1.0), pol)) == 1.0
    assert float(naive_prob_high(1.3, replace(P, high_share=0.0), pol)) == 0.0
    p = naive_prob_high(np.array([-2.0, 0.0, 2.0]), P, pol)
    assert np.all((p > 0.0) & (p < 1.0))
    assert math.isclose(p[0], p[2], rel_tol=1e-12)


def test_equal_variance_objective_ignores_type_share() -> None:
    # with identical variances the type label carries nothing, so the value
    # cannot depend on the share; this also exercises the vanishing middle
    # term of the three-term form
    base = replace(P, high_var=2.0, low_var=2.0, high_share=0.5)
    v = 1.7
    want = closed_form_objective(base, v, C)
    for h in (0.0, 0.3, 1.0):
        got = closed_form_objective(replace(base, high_share=h), v, C)
        assert math.isclose(got, want, rel_tol=1e-13), h


def test_degenerate_closed_form_matches_quadrature() -> None:
    # the three-term value and a direct double quadrature of the same rule
    # must agree when the blended prior weight is constant in the signal
    from echochamber.censor import _naive_loss

    for params in (P_SD4, replace(P, high_var=2.0, low_var=2.0)):
        for v in (0.4, 2.0, 10.0):
            closed = closed_form_objective(params, v, C)
            quad = -_naive_loss(NormalWeight(mean=params.prior_mean, var=v), params, C)
            assert math.isclose(closed, quad, abs_tol=1e-9), (params.high_share, v)


def test_optimize_sampling_variance_default_unbounded() -> None:
    opt = optimize_sampling_variance(P, C)
    assert not opt.is_finite
    assert opt.utility_at_opt == opt.utility_uncensored


def test_optimize_sampling_variance_single_type_unbounded() -> None:
    assert not optimize_sampling_variance(P_SD4, C).is_finite
    assert not optimize_sampling_variance(
        replace(P, high_var=2.0, low_var=2.0), C
    ).is_finite


def test_optimize_sampling_variance_low_dispersion_regime(oracle: dict) -> None:
    p300 = replace(P, low_var=300.0)
    opt = optimize_sampling_variance(p300, C)
    assert opt.is_finite
    assert abs(opt.r_star - oracle["soft_objective"]["lowvar300_vertex_v"]) < 5e-3
    assert math.isclose(
        opt.utility_at_opt, oracle["soft_objective"]["lowvar300_at_vertex"], abs_tol=1e-7
    )
    assert math.isclose(
        opt.utility_uncensored, oracle["soft_objective"]["lowvar300_unbounded"], abs_tol=1e-7
    )
    assert opt.utility_at_opt > opt.utility_uncensored + 0.1


def test_center_check_worked_example() -> None:
    # source var 0.5, window var 1: lambda = 2/3, so an offset of 1 costs
    # (1/3)^2 = 1/9 regardless of the other terms
    report = sampling_center_check(P_PRECISE, 1.0, [0.5, 1.0, 2.0])
    assert report.all_dominate
    by_offset = {row.offset: row for row in report.rows}
    assert math.isclose(by_offset[1.0].margin, 1.0 / 9.0, rel_tol=1e-12)
    assert math.isclose(by_offset[1.0].value_at_center, -7.0 / 16.0, rel_tol=1e-12)
    margins = [row.margin for row in report.rows]
    assert margins == sorted(margins)
    assert all(row.margin > 0.0 for row in report.rows)


def test_center_check_offcenter_matches_formula() -> None:
    off = single_type_objective_offcenter(P_PRECISE, "H", 1.0, 1.0)
    center = single_type_objective_offcenter(P_PRECISE, "H", 1.0, 0.0)
    assert math.isclose(center - off, (1.0 / 3.0) ** 2, rel_tol=1e-12)


def test_center_check_requires_single_type() -> None:
    with pytest.raises(ValueError, match="high_share"):
        sampling_center_check(P, 1.0, [1.0])
