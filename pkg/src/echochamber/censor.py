"""Expected utility of a censoring radius, the utility curve, optimal-radius
search, and the signal-moment / expected-action diagnostics.

The generative joint of (state, admitted signal) keeps the state marginal at
the prior: conditional on the state, signals are redrawn until one lands in
the window, so the signal density is the window-renormalized mixture. The
expected utility of a radius is the negative expected quadratic loss of the
posterior-mean action under that joint.

r = 0 is handled analytically: an admitted signal carries no information in
the limit, the action is the prior mean, and the value is minus the prior
variance. The unbounded entry is the no-restriction benchmark.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureError, ScanBoundError
from .inference import _policy_pieces, posterior_summaries
from .model import (
    UNBOUNDED,
    Extent,
    ModelParams,
    NormalWeight,
    NumericsConfig,
    Radius,
    SamplingPolicy,
    exante_signal_params,
    is_unbounded,
    mixture_logpdf,
    window_logmass,
)
from .quadrature import signal_rule_soft, signal_rule_unbounded, signal_rule_window


@dataclass(frozen=True)
class UtilityCurve:
    """Expected utility sampled over an ordered radius grid. The last entry
    is the unbounded benchmark; a leading 0.0 entry holds the analytic limit
    (minus the prior variance)."""

    radii: tuple[Extent, ...]
    utilities: tuple[float, ...]
    params: ModelParams


@dataclass(frozen=True)
class OptimumResult:
    """Located optimum of a one-dimensional policy family.

    r_star is the optimizing scalar (censoring radius, or sampling variance
    for the soft-window family), or UNBOUNDED when no interior maximum beats
    the no-restriction benchmark within the scan bound. bracket records the
    final refinement interval; for an unbounded result its upper end is inf.
    """

    r_star: Extent
    utility_at_opt: float
    utility_uncensored: float
    is_finite: bool
    bracket: tuple[float, float]


def _signal_nodes(policy: SamplingPolicy, params: ModelParams, cfg: NumericsConfig):
    if isinstance(policy, Radius) and not policy.unbounded:
        return signal_rule_window(params, cfg, policy.r)
    if isinstance(policy, NormalWeight) and not policy.unbounded:
        return signal_rule_soft(params, cfg, policy.mean)
    return signal_rule_unbounded(params, cfg)


def _bayes_loss(policy: SamplingPolicy, params: ModelParams, cfg: NumericsConfig) -> float:
    """Expected quadratic loss of the posterior-mean action, by a double
    quadrature that shares one signal grid between the action map and the
    outer integral (no interpolation layer)."""
    s_nodes, s_w = _signal_nodes(policy, params, cfg)
    omega, w, _, _, b_mix, _ = _policy_pieces(s_nodes, policy, params, cfg)
    shift = b_mix.max()
    dens = np.exp(b_mix - shift)
    s0 = dens.T @ w
    s1 = dens.T @ (w * omega)
    s2 = dens.T @ (w * omega * omega)
    # per-column posterior loss: E[omega^2|s] - E[omega|s]^2, unnormalized
    loss_cols = s2 - s1 * s1 / s0
    mass = float(s0 @ s_w)
    if not (mass > 0.0 and math.isfinite(mass)):
        raise QuadratureError(f"joint mass degenerated to {mass!r}")
    return float((loss_cols @ s_w) / mass)


def _naive_loss(policy: NormalWeight, params: ModelParams, cfg: NumericsConfig) -> float:
    """Like _bayes_loss but with the action map replaced by the two-step
    shrinkage rule that treats type weights as radius-free predictive ones.
    Used by the soft-window objective; see normal_sampling."""
    from .normal_sampling import naive_action

    s_nodes, s_w = _signal_nodes(policy, params, cfg)
    action = naive_action(s_nodes, params, policy)
    omega, w, _, _, b_mix, _ = _policy_pieces(s_nodes, policy, params, cfg)
    shift = b_mix.max()
    dens = np.exp(b_mix - shift)
    s0 = dens.T @ w
    s1 = dens.T @ (w * omega)
    s2 = dens.T @ (w * omega * omega)
    loss_cols = s2 - 2.0 * action * s1 + action * action * s0
    mass = float(s0 @ s_w)
    if not (mass > 0.0 and math.isfinite(mass)):
        raise QuadratureError(f"joint mass degenerated to {mass!r}")
    return float((loss_cols @ s_w) / mass)


def _halved(cfg: NumericsConfig) -> NumericsConfig:
    from dataclasses import replace

    return replace(cfg, quad_nodes=max(3, cfg.quad_nodes // 2 + 1))


def expected_utility(
    policy: Radius, params: ModelParams, cfg: NumericsConfig, *, check: bool = True
) -> float:
    """Negative expected quadratic loss of the optimal action under the
    given censoring radius. r = 0 returns minus the prior variance
    analytically; UNBOUNDED gives the no-restriction benchmark.

    With check=True the quadrature is repeated at roughly half the node
    count and a disagreement beyond 1e3 * abs_tol raises QuadratureError.
    """
    if isinstance(policy, Radius) and not policy.unbounded and policy.r == 0.0:
        return -params.prior_var
    value = -_bayes_loss(policy, params, cfg)
    if check:
        coarse = -_bayes_loss(policy, params, _halved(cfg))
        if abs(value - coarse) > 1e3 * cfg.abs_tol:
            raise QuadratureError(
                f"expected utility failed its self-check: {value!r} at "
                f"{cfg.quad_nodes} nodes vs {coarse!r} at half resolution"
            )
    return value


def utility_curve(params: ModelParams, grid, cfg: NumericsConfig) -> UtilityCurve:
    """Expected utility over a radius grid, with a 0.0 entry (analytic) in
    front and the UNBOUNDED benchmark appended.

    grid is either an iterable of radii or a (lo, hi, steps) triple.
    """
    if isinstance(grid, tuple) and len(grid) == 3 and not isinstance(grid[0], tuple):
        lo, hi, steps = grid
        radii = [float(r) for r in np.linspace(lo, hi, int(steps))]
    else:
        radii = [float(r) for r in grid]
    if any(r < 0 for r in radii) or radii != sorted(radii):
        raise ValueError(f"radius grid must be nonnegative and ordered, got {radii!r}")
    if not radii or radii[0] > 0.0:
        radii = [0.0] + radii
    utilities = [
        expected_utility(Radius(r), params, cfg, check=False) for r in radii
    ]
    utilities.append(expected_utility(Radius(UNBOUNDED), params, cfg, check=False))
    return UtilityCurve(
        radii=tuple(radii) + (UNBOUNDED,),
        utilities=tuple(utilities),
        params=params,
    )


def _golden_max(fn, lo: float, hi: float, iters: int) -> tuple[float, float]:
    """Golden-section maximization on [lo, hi]; returns (x, fn(x))."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    x = 0.5 * (a + b)
    return x, fn(x)


def _scan_then_refine(
    fn, grid: np.ndarray, benchmark: float, cfg: NumericsConfig, family: str
) -> OptimumResult:
    """Shared optimizer core: coarse scan, boundary rule against the
    unbounded benchmark, golden-section refinement of interior maxima,
    smaller-argument tie-breaking."""
    values = np.array([fn(float(g)) for g in grid])
    tol = cfg.invariant_tol

    candidates: list[tuple[float, float, tuple[float, float]]] = []
    for i in range(1, len(grid) - 1):
        if values[i] >= values[i - 1] and values[i] >= values[i + 1]:
            lo, hi = float(grid[i - 1]), float(grid[i + 1])
            x, fx = _golden_max(fn, lo, hi, cfg.refine_iters)
            candidates.append((x, fx, (lo, hi)))
    if values[0] > values[1]:
        lo, hi = float(grid[0]), float(grid[1])
        x, fx = _golden_max(fn, lo, hi, cfg.refine_iters)
        candidates.append((x, fx, (lo, hi)))

    boundary_rising = values[-1] - values[-2] >= -tol
    best = None
    for cand in candidates:
        if best is None or cand[1] > best[1] + tol or (
            abs(cand[1] - best[1]) <= tol and cand[0] < best[0]
        ):
            best = cand

    if best is not None and best[1] > max(values[-1], benchmark) + tol:
        return OptimumResult(
            r_star=best[0],
            utility_at_opt=best[1],
            utility_uncensored=benchmark,
            is_finite=True,
            bracket=best[2],
        )
    if boundary_rising:
        if values[-1] > benchmark + tol:
            raise ScanBoundError(
                f"{family} objective still rising at scan bound {grid[-1]!r} "
                f"(value {values[-1]!r} above the unrestricted benchmark "
                f"{benchmark!r}); raise the scan bound"
            )
        return OptimumResult(
            r_star=UNBOUNDED,
            utility_at_opt=benchmark,
            utility_uncensored=benchmark,
            is_finite=False,
            bracket=(float(grid[-1]), math.inf),
        )
    if best is not None and best[1] >= benchmark - tol:
        return OptimumResult(
            r_star=best[0],
            utility_at_opt=best[1],
            utility_uncensored=benchmark,
            is_finite=True,
            bracket=best[2],
        )
    return OptimumResult(
        r_star=UNBOUNDED,
        utility_at_opt=benchmark,
        utility_uncensored=benchmark,
        is_finite=False,
        bracket=(float(grid[-1]), math.inf),
    )


def optimize_radius(params: ModelParams, cfg: NumericsConfig) -> OptimumResult:
    """Locate the utility-maximizing censoring radius.

    Coarse scan up to 10 * sigma_tilde_L (or cfg.radius_grid when set), then
    golden-section refinement of each interior bracket. Returns UNBOUNDED
    when the curve is nondecreasing at the scan bound without exceeding the
    unbounded benchmark; a bound hit while the curve still rises above the
    benchmark raises ScanBoundError.
    """
    if cfg.radius_grid is not None:
        lo, hi, steps = cfg.radius_grid
        grid = np.linspace(max(lo, hi / steps / 4.0) if lo == 0.0 else lo, hi, int(steps))
    else:
        _, var_l = exante_signal_params(params, "L")
        bound = 10.0 * math.sqrt(var_l)
        grid = np.linspace(bound / 32.0, bound, 32)
    benchmark = expected_utility(Radius(UNBOUNDED), params, cfg, check=False)

    def fn(r: float) -> float:
        return expected_utility(Radius(r), params, cfg, check=False)

    return _scan_then_refine(fn, grid, benchmark, cfg, "censoring-radius")


def signal_moments_vs_r(
    params: ModelParams, r: Radius, cfg: NumericsConfig
) -> tuple[float, float]:
    """Variance of the admitted signal and its correlation with the state,
    under the state-marginal-preserving joint, by double quadrature."""
    policy = r if isinstance(r, Radius) else Radius(r)
    if not policy.unbounded and policy.r == 0.0:
        return 0.0, 0.0
    s_nodes, s_w = _signal_nodes(policy, params, cfg)
    omega, w, _, _, b_mix, _ = _policy_pieces(s_nodes, policy, params, cfg)
    shift = b_mix.max()
    dens = np.exp(b_mix - shift)
    s0 = dens.T @ w
    s_om = dens.T @ (w * omega)
    om2 = dens.T @ (w * omega * omega)
    mass = float(s0 @ s_w)
    mean_s = float((s0 * s_nodes) @ s_w) / mass
    mean_s2 = float((s0 * s_nodes * s_nodes) @ s_w) / mass
    mean_om = float(s_om @ s_w) / mass
    mean_om2 = float(om2 @ s_w) / mass
    mean_s_om = float((s_om * s_nodes) @ s_w) / mass
    var_s = max(mean_s2 - mean_s**2, 0.0)
    var_om = max(mean_om2 - mean_om**2, 0.0)
    cov = mean_s_om - mean_s * mean_om
    corr = cov / math.sqrt(var_s * var_om) if var_s > 0.0 and var_om > 0.0 else 0.0
    return var_s, float(np.clip(corr, -1.0, 1.0))


def expected_action_given_state(
    omega: float, policy: Radius, params: ModelParams, cfg: NumericsConfig
) -> float:
    """Conditional expectation of the optimal action at true state omega:
    the action map integrated against the admitted-signal density."""
    if not policy.unbounded and policy.r == 0.0:
        return params.prior_mean
    s_nodes, s_w = _signal_nodes(policy, params, cfg)
    action, _, _, _, _ = posterior_summaries(s_nodes, policy, params, cfg)
    log_dens = mixture_logpdf(s_nodes, omega, params)
    if not policy.unbounded:
        log_dens = log_dens - float(window_logmass(np.array([omega]), policy.r, params)[0])
    dens = np.exp(log_dens)
    mass = float(dens @ s_w)
    return float((action * dens) @ s_w) / mass


def find_finiteness_threshold(
    params: ModelParams,
    cfg: NumericsConfig,
    lo: float,
    hi: float,
    iters: int = 20,
) -> float:
    """Bisection on low_var for the smallest value at which the optimal
    radius becomes finite, holding the other parameters fixed. The bracket
    must straddle the transition: unbounded at lo, finite at hi."""
    from dataclasses import replace

    def finite_at(v: float) -> bool:
        return optimize_radius(replace(params, low_var=v), cfg).is_finite

    if finite_at(lo) or not finite_at(hi):
        raise ValueError(
            f"bracket [{lo!r}, {hi!r}] does not straddle the finiteness transition"
        )
    for _ in range(iters):
        mid = math.sqrt(lo * hi)
        if finite_at(mid):
            hi = mid
        else:
            lo = mid
    return hi
