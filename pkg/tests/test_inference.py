from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

from echochamber.errors import SignalOutsideSupportError, UndefinedOddsError
from echochamber.inference import (
    action_map,
    optimal_action,
    posterior_density,
    prob_high_closed,
    prob_high_quadrature,
    source_odds_closed,
    type_conditional_action,
    uncensored_linear_action,
)
from echochamber.model import (
    DEFAULT_NUMERICS,
    DEFAULT_PARAMS,
    NormalWeight,
    Radius,
    UNBOUNDED,
)

P = DEFAULT_PARAMS
C = DEFAULT_NUMERICS
R_UNB = Radius(UNBOUNDED)


def test_summary_pinned_windowed(oracle: dict) -> None:
    want = oracle["posterior"]
    got = optimal_action(1.0, Radius(2.0), P, C)
    assert math.isclose(got.action, want["action_s1_r2"], abs_tol=1e-10)
    assert math.isclose(got.posterior_var, want["posterior_var_s1_r2"], abs_tol=1e-9)
    assert math.isclose(got.prob_high, want["prob_high_s1_r2"], abs_tol=1e-10)
    a_h, a_l = got.type_actions
    assert math.isclose(a_h, want["action_high_s1_r2"], abs_tol=1e-10)
    assert math.isclose(a_l, want["action_low_s1_r2"], abs_tol=1e-10)


def test_summary_pinned_unbounded(oracle: dict) -> None:
    want = oracle["posterior"]
    assert math.isclose(
        optimal_action(1.0, R_UNB, P, C).action,
        want["action_s1_unbounded"],
        abs_tol=1e-10,
    )
    assert math.isclose(
        optimal_action(1.0, Radius(4.0), P, C).action,
        want["action_s1_r4"],
        abs_tol=1e-10,
    )
    assert math.isclose(
        optimal_action(2.0, R_UNB, P, C).action,
        want["action_s2_unbounded"],
        abs_tol=1e-10,
    )
    assert math.isclose(
        optimal_action(4.0, R_UNB, P, C).action,
        want["action_s4_unbounded"],
        abs_tol=1e-10,
    )


def test_summary_pinned_soft_window(oracle: dict) -> None:
    want = oracle["soft_posterior"]
    got = optimal_action(1.0, NormalWeight(P.prior_mean, 2.0), P, C)
    assert math.isclose(got.action, want["action_s1_v2"], abs_tol=1e-10)
    assert math.isclose(got.posterior_var, want["posterior_var_s1_v2"], abs_tol=1e-9)
    assert math.isclose(got.prob_high, want["prob_high_s1_v2"], abs_tol=1e-10)
    a_h, a_l = got.type_actions
    assert math.isclose(a_h, want["action_high_s1_v2"], abs_tol=1e-10)
    assert math.isclose(a_l, want["action_low_s1_v2"], abs_tol=1e-10)


def test_decomposition_identity_holds() -> None:
    policies = [Radius(0.8), Radius(2.0), Radius(5.0), R_UNB, NormalWeight(0.0, 1.3)]
    for policy in policies:
        r_cap = 0.75 if isinstance(policy, Radius) and not policy.unbounded else 3.0
        r_cap = min(r_cap, getattr(policy, "r", 3.0) if not policy.unbounded else 3.0)
        for s in np.linspace(-0.95 * r_cap, 0.95 * r_cap, 9):
            got = optimal_action(float(s), policy, P, C)
            assert abs(got.action - got.combination) < C.invariant_tol


def test_decomposition_is_not_a_tautology(oracle: dict) -> None:
    # per-type weights renormalized within each type produce different
    # numbers; the identity only holds for the jointly normalized pair
    want = oracle["posterior"]
    got = optimal_action(1.0, Radius(2.0), P, C)
    a_h, a_l = got.type_actions
    assert abs(a_h - want["action_high_s1_r2_own_norm"]) > 1e-3
    assert abs(a_l - want["action_low_s1_r2_own_norm"]) > 1e-2
    assert abs(want["combination_own_norm_s1_r2"] - got.action) > 1e-3


def test_action_symmetry() -> None:
    for policy in (Radius(2.0), R_UNB):
        for delta in (0.4, 0.9, 1.6):
            up = optimal_action(P.prior_mean + delta, policy, P, C).action
            dn = optimal_action(P.prior_mean - delta, policy, P, C).action
            assert abs((up - P.prior_mean) + (dn - P.prior_mean)) < C.invariant_tol


def test_action_at_center_is_prior_mean() -> None:
    for policy in (Radius(1.0), Radius(3.0), R_UNB, NormalWeight(0.0, 2.0)):
        got = optimal_action(P.prior_mean, policy, P, C)
        assert abs(got.action - P.prior_mean) < 1e-12


def test_nonmonotone_action_at_high_low_dispersion(oracle: dict) -> None:
    p30 = replace(P, low_var=30.0)
    a2 = optimal_action(2.0, R_UNB, p30, C).action
    a3 = optimal_action(3.0, R_UNB, p30, C).action
    assert math.isclose(
        a2, oracle["posterior"]["action_s2_unbounded_lowvar30"], abs_tol=1e-9
    )
    assert math.isclose(
        a3, oracle["posterior"]["action_s3_unbounded_lowvar30"], abs_tol=1e-9
    )
    assert a2 > a3


def test_unbounded_action_has_interior_peak_at_high_low_dispersion() -> None:
    p30 = replace(P, low_var=30.0)
    grid = np.linspace(0.0, 8.0, 81)
    actions = [optimal_action(float(s), R_UNB, p30, C).action for s in grid]
    k = int(np.argmax(actions))
    assert 0 < k < len(grid) - 1


def test_prob_high_closed_pinned(oracle: dict) -> None:
    assert math.isclose(
        prob_high_closed(0.0, P), oracle["belief"]["prob_high_s0"], abs_tol=1e-12
    )
    assert math.isclose(
        prob_high_closed(2.0, P), oracle["belief"]["prob_high_s2"], abs_tol=1e-12
    )


def test_source_odds_hand_values() -> None:
    # sqrt((low_var + prior_var) / (high_var + prior_var)) at the center
    assert math.isclose(source_odds_closed(0.0, P), math.sqrt(4.0 / 1.5), rel_tol=1e-12)
    want2 = math.sqrt(4.0 / 1.5) * math.exp(-10.0 / 12.0)
    assert math.isclose(source_odds_closed(2.0, P), want2, rel_tol=1e-12)


def test_source_odds_equal_variances_constant() -> None:
    p = replace(P, high_var=2.0, low_var=2.0, high_share=0.3)
    for s in (-3.0, 0.0, 1.7, 6.0):
        assert math.isclose(source_odds_closed(s, p), 0.3 / 0.7, rel_tol=1e-12)


def test_source_odds_undefined_at_pure_share() -> None:
    for h in (0.0, 1.0):
        with pytest.raises(UndefinedOddsError):
            source_odds_closed(1.0, replace(P, high_share=h))


def test_closed_vs_quadrature_belief_unbounded() -> None:
    for s in np.linspace(-6.0, 6.0, 13):
        closed = prob_high_closed(float(s), P)
        quad = prob_high_quadrature(float(s), R_UNB, P, C)
        assert abs(closed - quad) < 1e-9


def test_belief_decreasing_in_signal_magnitude() -> None:
    grid = np.linspace(0.0, 6.0, 25)
    vals = [prob_high_closed(float(s), P) for s in grid]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_quality_belief_depends_on_radius_contrary_to_stated_invariant(
    oracle: dict,
) -> None:
    """Stated invariant: the quality belief at a fixed admitted signal is the
    same for every radius and equals the closed form. Measured behavior: the
    window renormalization shifts the belief at finite radii, so the spread
    across radii is orders of magnitude above invariant_tol. The closed form
    is recovered only in the unbounded limit."""
    s = 0.3
    vals = {
        "r0.5": prob_high_quadrature(s, Radius(0.5), P, C),
        "r2": prob_high_quadrature(s, Radius(2.0), P, C),
        "unbounded": prob_high_quadrature(s, R_UNB, P, C),
        "closed": prob_high_closed(s, P),
    }
    want = oracle["posterior"]
    assert math.isclose(vals["r0.5"], want["prob_high_s03_r05"], abs_tol=1e-9)
    assert math.isclose(vals["r2"], want["prob_high_s03_r2"], abs_tol=1e-9)
    assert math.isclose(vals["unbounded"], want["prob_high_s03_unbounded"], abs_tol=1e-9)
    spread = max(vals.values()) - min(vals.values())
    assert spread < C.invariant_tol, (
        f"quality belief varies with the radius: {vals}; spread {spread:.3e} "
        f"exceeds invariant_tol {C.invariant_tol:g}"
    )


def test_type_conditional_actions() -> None:
    # unbounded single-type action is the conjugate shrinkage
    got = type_conditional_action(1.0, R_UNB, P, "H", C)
    assert math.isclose(got, 1.0 / 1.5, abs_tol=1e-9)
    # windowed high-type action responds more than the conjugate one
    windowed = type_conditional_action(1.0, Radius(2.0), P, "H", C)
    assert windowed > 1.0 / 1.5 + 1e-3


def test_type_actions_strictly_increasing() -> None:
    for policy in (Radius(2.0), R_UNB):
        for q in ("H", "L"):
            hi = 1.9 if not policy.unbounded else 5.0
            grid = np.linspace(-hi, hi, 15)
            vals = [type_conditional_action(float(s), policy, P, q, C) for s in grid]
            assert all(b > a for a, b in zip(vals, vals[1:]))


def test_uncensored_linear_action_formula() -> None:
    assert uncensored_linear_action(P.prior_mean, P, "H") == P.prior_mean
    assert math.isclose(uncensored_linear_action(4.0, P, "L"), 1.0, rel_tol=1e-12)
    for s in np.linspace(-4.0, 4.0, 21):
        for q in ("H", "L"):
            closed = uncensored_linear_action(float(s), P, q)
            quad = type_conditional_action(float(s), R_UNB, P, q, C)
            assert abs(closed - quad) < C.invariant_tol


def test_updating_direction_and_prior_responsiveness() -> None:
    wider = replace(P, prior_var=2.0)
    for q in ("H", "L"):
        for s in (-2.0, -0.5, 0.5, 2.0):
            a = uncensored_linear_action(s, P, q)
            assert (a - P.prior_mean) * (s - P.prior_mean) > 0.0
            assert abs(uncensored_linear_action(s, wider, q)) > abs(a)


def test_conjugate_posterior_single_type(oracle: dict) -> None:
    p1 = replace(P, high_share=1.0)
    got = optimal_action(0.7, R_UNB, p1, C).action
    assert math.isclose(
        got, oracle["posterior"]["conjugate_action_s07_h1"], abs_tol=1e-10
    )
    # density matches the conjugate normal
    post_var = 1.0 * 0.5 / 1.5
    post_mean = 0.7 / 1.5
    for w in (-0.5, 0.2, 0.9):
        want = math.exp(-((w - post_mean) ** 2) / (2 * post_var)) / math.sqrt(
            2 * math.pi * post_var
        )
        assert math.isclose(posterior_density(w, 0.7, R_UNB, p1, C), want, rel_tol=1e-8)


def test_posterior_density_normalized_and_pinned(oracle: dict) -> None:
    got = posterior_density(0.5, 1.0, Radius(2.0), P, C)
    assert math.isclose(
        got, oracle["densities"]["posterior_pdf_s1_r2_at_w05"], abs_tol=1e-9
    )
    grid = np.linspace(-8.0, 8.0, 4001)
    vals = np.array([posterior_density(float(w), 1.0, Radius(2.0), P, C) for w in grid])
    assert math.isclose(float(np.trapezoid(vals, grid)), 1.0, abs_tol=1e-6)


def test_posterior_density_symmetric_at_center_signal() -> None:
    for w in (0.3, 1.1, 2.4):
        up = posterior_density(P.prior_mean + w, P.prior_mean, Radius(1.5), P, C)
        dn = posterior_density(P.prior_mean - w, P.prior_mean, Radius(1.5), P, C)
        assert math.isclose(up, dn, rel_tol=1e-10)


def test_signal_outside_support_raises() -> None:
    for s in (2.0, -2.0, 5.1):
        with pytest.raises(SignalOutsideSupportError):
            optimal_action(s, Radius(2.0), P, C)
    with pytest.raises(SignalOutsideSupportError):
        type_conditional_action(2.5, Radius(2.0), P, "L", C)
    with pytest.raises(SignalOutsideSupportError):
        posterior_density(0.0, 2.0, Radius(2.0), P, C)


def test_action_map_matches_pointwise_and_extends() -> None:
    amap = action_map(Radius(2.0), P, C)
    for s in (-1.83, -0.41, 0.57, 1.9):
        direct = optimal_action(s, Radius(2.0), P, C).action
        assert abs(float(amap(s)) - direct) < 1e-6
    amap_u = action_map(R_UNB, P, C)
    for s in (-3.3, 0.9, 4.7):
        direct = optimal_action(s, R_UNB, P, C).action
        assert abs(float(amap_u(s)) - direct) < 1e-6
