"""Named verification checks over the model's structural results.

Each check states a measurable property of the implementation, measures it,
and reports pass/fail together with the measured quantity, the tolerance
applied, and the seed when Monte Carlo is involved. Checks that only hold
in a specific parameter regime evaluate there and say so in their detail
line; the default battery passes on the default parameters.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .censor import expected_utility, optimize_radius
from .inference import (
    action_map,
    optimal_action,
    posterior_summaries,
    prob_high_closed,
    type_conditional_action,
    uncensored_linear_action,
)
from .mc import mc_expected_utility, mc_high_prob_within_radius, simulate_draws
from .model import (
    UNBOUNDED,
    DEFAULT_PARAMS,
    ModelParams,
    NormalWeight,
    NumericsConfig,
    Radius,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: str
    tolerance: str
    seed: int | None
    detail: str


def _g(x: float) -> str:
    return f"{x:.6g}"


def _linearity_dev(params: ModelParams, cfg: NumericsConfig) -> float:
    """Max residual of the unrestricted action map against its least-squares
    line over s in [-4, 4]."""
    s = np.linspace(-4.0, 4.0, 21)
    a, _, _, _, _ = posterior_summaries(s, Radius(UNBOUNDED), params, cfg)
    slope, intercept = np.polyfit(s, a, 1)
    return float(np.max(np.abs(a - (intercept + slope * s))))


def check_lemma1(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    policies = [
        Radius(0.8),
        Radius(2.0),
        Radius(UNBOUNDED),
        NormalWeight(mean=params.prior_mean, var=1.0),
    ]
    s_grid = [-3.0, -1.5, -0.5, 0.0, 0.7, 1.3, 2.2, 3.1]
    worst = 0.0
    for policy in policies:
        for s in s_grid:
            if isinstance(policy, Radius) and not policy.unbounded:
                if abs(s - params.prior_mean) >= policy.r:
                    continue
            summary = optimal_action(s, policy, params, cfg)
            worst = max(worst, abs(summary.action - summary.combination))
    return CheckResult(
        name="lemma1",
        passed=worst < cfg.invariant_tol,
        measured=f"max decomposition residual {worst:.3e}",
        tolerance=f"< {cfg.invariant_tol:g}",
        seed=None,
        detail="action equals the quality-probability mix of type actions",
    )


def check_lemma2(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    u_single = expected_utility(
        Radius(UNBOUNDED), replace(params, high_share=1.0), cfg, check=False
    )
    u_mixed = expected_utility(
        Radius(UNBOUNDED), replace(params, high_share=0.5), cfg, check=False
    )
    gap = u_single - u_mixed
    return CheckResult(
        name="lemma2",
        passed=gap > 0.0,
        measured=f"U(all-high) {_g(u_single)} vs U(half-low) {_g(u_mixed)}, gap {_g(gap)}",
        tolerance="> 0",
        seed=None,
        detail="diluting high-quality sources with noisier ones lowers value",
    )


def check_lemma3(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    worst = math.inf
    for policy, lo, hi in ((Radius(1.5), -1.4, 1.4), (Radius(UNBOUNDED), -4.0, 4.0)):
        s = np.linspace(lo, hi, 17) + params.prior_mean
        _, _, _, a_h, a_l = posterior_summaries(s, policy, params, cfg)
        worst = min(worst, float(np.diff(a_h).min()), float(np.diff(a_l).min()))
    return CheckResult(
        name="lemma3",
        passed=worst > 0.0,
        measured=f"min type-action increment {worst:.3e}",
        tolerance="> 0",
        seed=None,
        detail="known-type actions increase strictly in the signal",
    )


def check_lemma5(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    s = np.linspace(-6.0, 6.0, 25)
    path_dev = math.nan
    mono_ok = True
    if 0.0 < params.high_share < 1.0:
        closed = prob_high_closed(s + params.prior_mean, params)
        _, _, quad, _, _ = posterior_summaries(
            s + params.prior_mean, Radius(UNBOUNDED), params, cfg
        )
        path_dev = float(np.max(np.abs(closed - quad)))
        right = prob_high_closed(params.prior_mean + np.linspace(0.0, 6.0, 25), params)
        mono_ok = bool(np.all(np.diff(right) < 0.0))
    p0 = prob_high_closed(0.0, DEFAULT_PARAMS)
    p2 = prob_high_closed(2.0, DEFAULT_PARAMS)
    pinned_ok = abs(p0 - 0.6202) < 1e-3 and abs(p2 - 0.4152) < 1e-3
    passed = pinned_ok and mono_ok and (math.isnan(path_dev) or path_dev < 1e-6)
    return CheckResult(
        name="lemma5",
        passed=passed,
        measured=(
            f"P(high|0) {p0:.6f}, P(high|2) {p2:.6f} at default params; "
            f"closed-vs-quadrature max dev {path_dev:.3e}"
        ),
        tolerance="pinned +/- 1e-3; path agreement < 1e-6; decreasing in |s|",
        seed=None,
        detail="closed-form source odds match the quadrature belief",
    )


def check_prop1(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    rungs = []
    for low_var in (3.0, 48.0, 768.0):
        p = replace(params, low_var=max(low_var, params.high_var))
        rungs.append(mc_high_prob_within_radius(p, 1.0, cfg.mc_n, cfg.mc_seed))
    z_steps = []
    for a, b in zip(rungs[:-1], rungs[1:]):
        z_steps.append((b.value - a.value) / math.hypot(a.std_error, b.std_error))
    passed = all(z > 3.0 for z in z_steps)
    measured = " -> ".join(f"{r.value:.4f}+/-{r.std_error:.4f}" for r in rungs)
    return CheckResult(
        name="prop1",
        passed=passed,
        measured=f"high fraction at r=1: {measured}; step z {_g(z_steps[0])}, {_g(z_steps[1])}",
        tolerance="each increase > 3 SE",
        seed=cfg.mc_seed,
        detail="noisier low types are filtered out ever more strongly by the window",
    )


def check_prop2(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    p = replace(params, low_var=300.0)
    opt = optimize_radius(p, cfg)
    passed = opt.is_finite and opt.utility_at_opt > opt.utility_uncensored + cfg.invariant_tol
    r_txt = "Unbounded" if not opt.is_finite else _g(float(opt.r_star))
    return CheckResult(
        name="prop2",
        passed=passed,
        measured=(
            f"low_var=300: r* {r_txt}, U(r*) {_g(opt.utility_at_opt)}, "
            f"U(inf) {_g(opt.utility_uncensored)}"
        ),
        tolerance=f"finite and surplus > {cfg.invariant_tol:g}",
        seed=None,
        detail="a finite window wins once low-type dispersion is large enough",
    )


def check_prop3(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    values = {}
    for label, policy in (("r=2", Radius(2.0)), ("r=4", Radius(4.0)), ("inf", Radius(UNBOUNDED))):
        values[label] = optimal_action(1.0, policy, params, cfg).action
    g1 = values["r=2"] - values["r=4"]
    g2 = values["r=4"] - values["inf"]
    passed = g1 > 1e-4 and g2 > 1e-4
    return CheckResult(
        name="prop3",
        passed=passed,
        measured=(
            f"a(1, r=2) {values['r=2']:.6f} > a(1, r=4) {values['r=4']:.6f} > "
            f"a(1, inf) {values['inf']:.6f}"
        ),
        tolerance="each gap > 1e-4",
        seed=None,
        detail="tighter windows amplify the response to an admitted signal",
    )


def check_prop4(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    p = replace(params, low_var=30.0)
    s = np.linspace(0.0, 8.0, 41)
    a, _, _, _, _ = posterior_summaries(s, Radius(UNBOUNDED), p, cfg)
    i = int(np.argmax(a))
    interior = 0 < i < len(s) - 1
    a2 = float(np.interp(2.0, s, a))
    a3 = float(np.interp(3.0, s, a))
    passed = interior and a2 > a3
    return CheckResult(
        name="prop4",
        passed=passed,
        measured=(
            f"low_var=30: action peaks at s={s[i]:.2f} (interior={interior}); "
            f"a(2) {a2:.4f} > a(3) {a3:.4f}"
        ),
        tolerance="interior peak; a(2) > a(3)",
        seed=None,
        detail="with very noisy low types the unrestricted action is non-monotone in s",
    )


def check_prop5(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    p_ratio = replace(params, low_var=params.high_var * 1.01)
    p_share = replace(params, high_share=0.999)
    opt_ratio = optimize_radius(p_ratio, cfg)
    opt_share = optimize_radius(p_share, cfg)
    dev_ratio = _linearity_dev(p_ratio, cfg)
    dev_share = _linearity_dev(p_share, cfg)
    # only the near-equal-variance route is asserted: at high share 0.999 a
    # genuine interior optimum survives (surplus ~5e-6 over the benchmark)
    # and the action map keeps visible curvature, so that arm is report-only
    passed = (not opt_ratio.is_finite) and dev_ratio < 1e-3
    share_r = "Unbounded" if not opt_share.is_finite else f"{opt_share.r_star:.4g}"
    return CheckResult(
        name="prop5",
        passed=passed,
        measured=(
            f"variance ratio 1.01: r*={'finite' if opt_ratio.is_finite else 'Unbounded'}, "
            f"linearity dev {dev_ratio:.3e}; high share 0.999 (reported): "
            f"r*={share_r}, linearity dev {dev_share:.3e}"
        ),
        tolerance="ratio config: Unbounded optimum and linearity dev < 1e-3",
        seed=None,
        detail=(
            "near-homogeneous qualities remove the value of windowing; the "
            "action map is linear in the equal-variance limit"
        ),
    )


def check_uds(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    worst = math.inf
    for q in ("H", "L"):
        for ds in (-2.0, -0.5, 0.5, 2.0):
            s = params.prior_mean + ds
            a = type_conditional_action(s, Radius(UNBOUNDED), params, q, cfg)
            worst = min(worst, (a - params.prior_mean) * ds)
    return CheckResult(
        name="uds",
        passed=worst > 0.0,
        measured=f"min (action shift x signal shift) {worst:.3e}",
        tolerance="> 0",
        seed=None,
        detail="the posterior mean moves toward the observed signal",
    )


def check_priorvar(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    s = params.prior_mean + 1.5
    worst = math.inf
    for q in ("H", "L"):
        base = abs(
            type_conditional_action(s, Radius(UNBOUNDED), params, q, cfg) - params.prior_mean
        )
        wide = abs(
            type_conditional_action(
                s, Radius(UNBOUNDED), replace(params, prior_var=2.0 * params.prior_var), q, cfg
            )
            - params.prior_mean
        )
        worst = min(worst, wide - base)
    return CheckResult(
        name="priorvar",
        passed=worst > 0.0,
        measured=f"min action-shift increase under doubled prior variance {worst:.3e}",
        tolerance="> 0",
        seed=None,
        detail="a vaguer prior lets the same signal move the action further",
    )


def check_hvanish(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    s = params.prior_mean + 10.0
    value = abs(
        float(prob_high_closed(s, params))
        * float(uncensored_linear_action(s, params, "H"))
    )
    return CheckResult(
        name="hvanish",
        passed=value < 1e-6,
        measured=f"P(high|mean+10) x a_high(mean+10) = {value:.3e}",
        tolerance="< 1e-6",
        seed=None,
        detail="extreme signals are attributed to low types; the high-type term dies",
    )


def check_exante_total_var(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    # a variance statistic has a kurtosis-heavy sampling law; quadruple the
    # draw count so the 3-SE band is tight relative to it
    draws = simulate_draws(params, Radius(UNBOUNDED), 4 * cfg.mc_n, cfg.mc_seed)
    x = draws.accepted_signals
    target = params.prior_var + params.high_share * params.high_var + (
        1.0 - params.high_share
    ) * params.low_var
    dev2 = (x - x.mean()) ** 2
    vhat = float(dev2.mean())
    se = float(dev2.std(ddof=1)) / math.sqrt(len(x))
    z = abs(vhat - target) / se
    return CheckResult(
        name="exante_total_var",
        passed=z <= 3.0,
        measured=f"sample var {vhat:.4f} vs total-variance value {target:.4f}, z {_g(z)}",
        tolerance="within 3 SE",
        seed=cfg.mc_seed,
        detail="unrestricted signal variance equals prior plus mean source variance",
    )


def _mc_eu_check(name: str, policy: Radius, params: ModelParams, cfg: NumericsConfig, detail: str) -> CheckResult:
    ref = expected_utility(policy, params, cfg, check=False)
    amap = action_map(policy, params, cfg)
    draws = simulate_draws(params, policy, cfg.mc_n, cfg.mc_seed)
    est = mc_expected_utility(draws, amap, params)
    z = abs(est.value - ref) / est.std_error
    return CheckResult(
        name=name,
        passed=z <= 3.0,
        measured=f"MC {est.value:.5f}+/-{est.std_error:.5f} vs quadrature {ref:.5f}, z {_g(z)}",
        tolerance="within 3 SE",
        seed=cfg.mc_seed,
        detail=detail,
    )


def check_mc_eu_unbounded(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    return _mc_eu_check(
        "mc_eu_unbounded",
        Radius(UNBOUNDED),
        params,
        cfg,
        "simulation confirms the unrestricted expected utility",
    )


def check_mc_eu_radius(params: ModelParams, cfg: NumericsConfig) -> CheckResult:
    return _mc_eu_check(
        "mc_eu_radius",
        Radius(2.35),
        params,
        cfg,
        "simulation confirms the windowed expected utility at r=2.35",
    )


ALL_CHECKS = {
    "lemma1": check_lemma1,
    "lemma2": check_lemma2,
    "lemma3": check_lemma3,
    "lemma5": check_lemma5,
    "prop1": check_prop1,
    "prop2": check_prop2,
    "prop3": check_prop3,
    "prop4": check_prop4,
    "prop5": check_prop5,
    "uds": check_uds,
    "priorvar": check_priorvar,
    "hvanish": check_hvanish,
    "exante_total_var": check_exante_total_var,
    "mc_eu_unbounded": check_mc_eu_unbounded,
    "mc_eu_radius": check_mc_eu_radius,
}


def run_checks(
    params: ModelParams, cfg: NumericsConfig, names: list[str] | None = None
) -> list[CheckResult]:
    if names is None:
        names = list(ALL_CHECKS)
    unknown = [n for n in names if n not in ALL_CHECKS]
    if unknown:
        raise KeyError(
            f"unknown check(s) {unknown!r}; available: {', '.join(ALL_CHECKS)}"
        )
    results = []
    for name in names:
        try:
            results.append(ALL_CHECKS[name](params, cfg))
        except Exception as exc:  # a blown-up check is a failed check, not a crash
            results.append(
                CheckResult(
                    name=name,
                    passed=False,
                    measured=f"raised {type(exc).__name__}: {exc}",
                    tolerance="check must complete",
                    seed=None,
                    detail="the check could not be evaluated at these parameters",
                )
            )
    return results


def format_report(results: list[CheckResult]) -> str:
    lines = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        seed_txt = f"; seed {r.seed}" if r.seed is not None else ""
        lines.append(f"{status} {r.name:<18} {r.measured}; tol {r.tolerance}{seed_txt}")
        lines.append(f"     {r.detail}")
    n_pass = sum(r.passed for r in results)
    lines.append(f"{n_pass}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"


def report_json(results: list[CheckResult], params: ModelParams, cfg: NumericsConfig) -> dict:
    return {
        "params": {
            "prior_mean": params.prior_mean,
            "prior_var": params.prior_var,
            "high_var": params.high_var,
            "low_var": params.low_var,
            "high_share": params.high_share,
        },
        "mc_seed": cfg.mc_seed,
        "mc_n": cfg.mc_n,
        "checks": [
            {
                "name": r.name,
                "passed": r.passed,
                "measured": r.measured,
                "tolerance": r.tolerance,
                "seed": r.seed,
                "detail": r.detail,
            }
            for r in results
        ],
        "passed": all(r.passed for r in results),
    }
