"""Blocklength solvers and latency sweeps under a total distortion budget.

Splitting a total distortion budget beta_t into quantization distortion
beta_s and decoding failures fixes the tolerable block error probability at
(beta_t - beta_s) / (1 - beta_s). Each solver inverts its channel's error
model in closed form to find a blocklength supporting that error
probability for the scheme's bit budget, and a sweep over beta_s locates
the split that minimizes latency n / (2B).
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .budget import BudgetFn
from .channel import (
    LN_2,
    ChannelFamily,
    ChannelSpec,
    awgn_coeffs,
    epsilon_awgn,
    epsilon_fading_csi,
    epsilon_fading_nocsi,
    fading_csi_coeffs,
    fading_nocsi_coeffs,
    q_inv,
)
from .errors import (
    BetaNotAboveDelta,
    DomainError,
    EpsilonOutOfRange,
    NoFeasibleN,
)

DEFAULT_EPS_CAP = 0.5
DEFAULT_GRID_POINTS = 1000

# Relative slack when comparing the error target against the inclusive cap,
# so budget splits that land on the cap up to float rounding still solve.
_CAP_SLACK = 1e-9


def _within_cap(eps: float, cap: float) -> bool:
    return 0.0 < eps <= cap * (1.0 + _CAP_SLACK)


def decoding_error_target(beta_t: float, beta_s: float) -> float:
    """Error probability that exhausts the distortion budget: (bt - bs)/(1 - bs)."""
    if not 0.0 <= beta_s < beta_t <= 1.0:
        raise DomainError(
            f"need 0 <= beta_s < beta_t <= 1, got beta_s={beta_s}, beta_t={beta_t}"
        )
    return (beta_t - beta_s) / (1.0 - beta_s)


class BlocklengthSolution(NamedTuple):
    n: int
    n_real: float
    eps_target: float


def _solve_root(r: float, rate: float, payload: float) -> float:
    """Positive root of n*rate - sqrt(n)*r - payload = 0, returned as sqrt(n)."""
    return (r + math.sqrt(r * r + 4.0 * rate * payload)) / (2.0 * rate)


def _ceil_n(root: float) -> int:
    # The guard only absorbs float noise from the root arithmetic (a few
    # ulps), so exact-integer solutions do not get bumped up a step.
    n_real = root * root
    n = math.ceil(n_real - 1e-12 * max(1.0, n_real))
    return max(1, n)


def _refine(n: int, eps_target: float, exact_eps) -> int:
    """Smallest blocklength in [1, n] whose exact error stays within target.

    Relies on the error model decreasing in n, which holds for positive
    payloads on all three families.
    """
    lo, hi = 1, n
    while lo < hi:
        mid = (lo + hi) // 2
        if exact_eps(mid) <= eps_target:
            hi = mid
        else:
            lo = mid + 1
    return lo


def solve_blocklength_awgn(
    beta_t: float,
    beta_s: float,
    j_bits: float,
    gamma: float,
    *,
    eps_cap: float = DEFAULT_EPS_CAP,
    refine: bool = False,
) -> BlocklengthSolution:
    """Blocklength meeting the distortion split over an AWGN channel.

    The closed form drops the (1/2)log2(n) bonus term from the error model,
    so the exact error at the returned n is at most the target. With
    ``refine`` the integer blocklength is shrunk while that still holds.
    """
    eps = decoding_error_target(beta_t, beta_s)
    if not _within_cap(eps, eps_cap):
        raise EpsilonOutOfRange(f"error target {eps} outside (0, {eps_cap}]")
    if j_bits <= 0:
        raise DomainError(f"payload must be positive, got {j_bits}")
    c, v = awgn_coeffs(gamma)
    r = math.sqrt(v) * q_inv(eps)
    root = _solve_root(r, c, j_bits)
    n = _ceil_n(root)
    if refine:
        n = _refine(n, eps, lambda m: epsilon_awgn(m, gamma, j_bits))
    return BlocklengthSolution(n, root * root, eps)


def solve_blocklength_fading_csi(
    beta_t: float,
    beta_s: float,
    j_bits: float,
    gamma: float,
    coherence: int,
    *,
    eps_cap: float = DEFAULT_EPS_CAP,
    refine: bool = False,
    awgn_denominator: bool = False,
) -> BlocklengthSolution:
    """Blocklength for the receiver-CSI Rayleigh model.

    The quadratic derived from the error model has denominator twice the
    fading capacity; ``awgn_denominator`` substitutes the AWGN capacity
    there for comparison runs, with no conservativeness guarantee.
    """
    eps = decoding_error_target(beta_t, beta_s)
    if not _within_cap(eps, eps_cap):
        raise EpsilonOutOfRange(f"error target {eps} outside (0, {eps_cap}]")
    if j_bits <= 0:
        raise DomainError(f"payload must be positive, got {j_bits}")
    c, v = fading_csi_coeffs(gamma, coherence)
    r = math.sqrt(coherence * v) * q_inv(eps)
    payload = j_bits * LN_2
    if awgn_denominator:
        awgn_c = awgn_coeffs(gamma).capacity
        root = (r + math.sqrt(r * r + 4.0 * c * payload)) / (2.0 * awgn_c)
    else:
        root = _solve_root(r, c, payload)
    n = _ceil_n(root)
    if refine:
        n = _refine(n, eps, lambda m: epsilon_fading_csi(m, gamma, j_bits, coherence))
    return BlocklengthSolution(n, root * root, eps)


def solve_blocklength_fading_nocsi(
    beta_t: float,
    beta_s: float,
    j_bits: float,
    gamma: float,
    coherence: int,
    *,
    eps_cap: float = DEFAULT_EPS_CAP,
    refine: bool = False,
    awgn_denominator: bool = False,
) -> BlocklengthSolution:
    """Blocklength for the no-CSI high-SNR Rayleigh model.

    The error target must lie strictly inside (0, 1/2); the model is not
    defined at or beyond one half.
    """
    eps = decoding_error_target(beta_t, beta_s)
    if not 0.0 < eps < min(eps_cap, 0.5):
        raise EpsilonOutOfRange(f"error target {eps} outside (0, {min(eps_cap, 0.5)})")
    if j_bits <= 0:
        raise DomainError(f"payload must be positive, got {j_bits}")
    info, disp = fading_nocsi_coeffs(gamma, coherence)
    if info <= 0:
        raise NoFeasibleN(
            f"block information {info} is not positive at SNR {gamma}; "
            "the high-SNR model does not apply"
        )
    r = math.sqrt(coherence * disp) * q_inv(eps)
    payload = j_bits * coherence * LN_2
    if awgn_denominator:
        awgn_c = awgn_coeffs(gamma).capacity
        root = (r + math.sqrt(r * r + 4.0 * info * payload)) / (2.0 * awgn_c)
    else:
        root = _solve_root(r, info, payload)
    n = _ceil_n(root)
    if refine:
        n = _refine(n, eps, lambda m: epsilon_fading_nocsi(m, gamma, j_bits, coherence))
    return BlocklengthSolution(n, root * root, eps)


def solve_blocklength(
    spec: ChannelSpec,
    beta_t: float,
    beta_s: float,
    j_bits: float,
    *,
    eps_cap: float = DEFAULT_EPS_CAP,
    refine: bool = False,
) -> BlocklengthSolution:
    """Family dispatch for the three solvers, using the spec's operational SNR."""
    gamma = spec.gamma
    if spec.family is ChannelFamily.AWGN:
        return solve_blocklength_awgn(
            beta_t, beta_s, j_bits, gamma, eps_cap=eps_cap, refine=refine
        )
    if spec.family is ChannelFamily.FADING_CSI:
        return solve_blocklength_fading_csi(
            beta_t, beta_s, j_bits, gamma, spec.coherence, eps_cap=eps_cap, refine=refine
        )
    return solve_blocklength_fading_nocsi(
        beta_t, beta_s, j_bits, gamma, spec.coherence, eps_cap=eps_cap, refine=refine
    )


@dataclass
class TradeoffPoint:
    """One solved operating point of the latency-distortion tradeoff."""

    beta_t: float
    beta_s: float
    eps_target: float
    j_bits: float
    n: int
    n_real: float
    latency_s: float
    feasible: bool = True
    hull_member: bool = False

    @property
    def latency_ms(self) -> float:
        return self.latency_s * 1e3


@dataclass
class TradeoffCurve:
    """Sweep output: all evaluated points, the best one, and an optional hull."""

    points: list[TradeoffPoint]
    best: TradeoffPoint | None = None
    hull: list[TradeoffPoint] | None = None


def beta_s_grid(
    beta_t: float,
    budget: BudgetFn,
    grid_points: int = DEFAULT_GRID_POINTS,
    grid_mode: str = "uniform",
) -> np.ndarray:
    """Source distortion grid on (lower_edge, beta_t), excluding beta_t itself."""
    lower = budget.lower_edge + 1e-9 if budget.lower_edge > 0 else 1e-6
    if beta_t <= lower:
        raise DomainError(
            f"beta_t={beta_t} leaves no admissible source distortion above {lower}"
        )
    if grid_mode == "uniform":
        return np.linspace(lower, beta_t, grid_points, endpoint=False)
    if grid_mode == "log":
        return np.geomspace(lower, beta_t, grid_points, endpoint=False)
    raise DomainError(f"unknown grid mode {grid_mode!r}")


def _evaluate_point(
    spec: ChannelSpec,
    budget: BudgetFn,
    beta_t: float,
    beta_s: float,
    eps_cap: float,
    refine: bool,
) -> TradeoffPoint:
    try:
        j_bits = budget.bits_real(beta_s)
        sol = solve_blocklength(
            spec, beta_t, beta_s, j_bits, eps_cap=eps_cap, refine=refine
        )
    except (EpsilonOutOfRange, NoFeasibleN, BetaNotAboveDelta, DomainError):
        return TradeoffPoint(
            beta_t, beta_s, math.nan, math.nan, 0, math.nan, math.inf, feasible=False
        )
    latency = sol.n / (2.0 * spec.bandwidth_hz)
    return TradeoffPoint(
        beta_t, beta_s, sol.eps_target, j_bits, sol.n, sol.n_real, latency
    )


def sweep_beta_s(
    beta_t: float,
    budget: BudgetFn,
    spec: ChannelSpec,
    *,
    grid_points: int = DEFAULT_GRID_POINTS,
    grid_mode: str = "uniform",
    eps_cap: float = DEFAULT_EPS_CAP,
    refine: bool = False,
    jobs: int = 1,
) -> TradeoffCurve:
    """Evaluate the budget and solver on every grid point; keep the argmin.

    Infeasible points are retained with their flag so curves show the
    feasibility boundary. Raises NoFeasibleN when nothing on the grid is
    feasible. Results are identical for any ``jobs``.
    """
    grid = beta_s_grid(beta_t, budget, grid_points, grid_mode)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            points = list(
                pool.map(
                    lambda bs: _evaluate_point(spec, budget, beta_t, float(bs), eps_cap, refine),
                    grid,
                )
            )
    else:
        points = [
            _evaluate_point(spec, budget, beta_t, float(bs), eps_cap, refine)
            for bs in grid
        ]
    feasible = [pt for pt in points if pt.feasible]
    if not feasible:
        raise NoFeasibleN(f"no feasible operating point for beta_t={beta_t}")
    best = min(feasible, key=lambda pt: (pt.latency_s, pt.beta_s))
    return TradeoffCurve(points, best=best)


def lower_convex_hull(xs: Sequence[float], ys: Sequence[float]) -> list[int]:
    """Indices of the lower convex hull of a non-increasing frontier.

    Points are first reduced to the running-minimum staircase (a latency
    achievable at some budget stays achievable at any larger budget), then
    the monotone-chain lower hull of that staircase is taken. The result is
    convex and non-increasing in x.
    """
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    frontier: list[int] = []
    best = math.inf
    for i in order:
        if ys[i] < best:
            frontier.append(i)
            best = ys[i]
    hull: list[int] = []
    for i in frontier:
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (xs[b] - xs[a]) * (ys[i] - ys[a]) - (ys[b] - ys[a]) * (xs[i] - xs[a])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def sweep_beta_t(
    beta_ts: Sequence[float],
    budget: BudgetFn,
    spec: ChannelSpec,
    *,
    grid_points: int = DEFAULT_GRID_POINTS,
    grid_mode: str = "uniform",
    eps_cap: float = DEFAULT_EPS_CAP,
    refine: bool = False,
    jobs: int = 1,
) -> TradeoffCurve:
    """Minimum latency per total budget, with the lower convex hull marked.

    Budgets whose inner sweep has no feasible point are kept as infeasible
    placeholders; if every budget is infeasible, NoFeasibleN propagates.
    """
    values = sorted(float(bt) for bt in beta_ts)

    def best_for(bt: float) -> TradeoffPoint:
        try:
            curve = sweep_beta_s(
                bt,
                budget,
                spec,
                grid_points=grid_points,
                grid_mode=grid_mode,
                eps_cap=eps_cap,
                refine=refine,
            )
        except (NoFeasibleN, DomainError):
            return TradeoffPoint(
                bt, math.nan, math.nan, math.nan, 0, math.nan, math.inf, feasible=False
            )
        return curve.best

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            bests = list(pool.map(best_for, values))
    else:
        bests = [best_for(bt) for bt in values]

    feasible_idx = [i for i, pt in enumerate(bests) if pt.feasible]
    if not feasible_idx:
        raise NoFeasibleN("no feasible operating point for any requested beta_t")
    hull_local = lower_convex_hull(
        [bests[i].beta_t for i in feasible_idx],
        [bests[i].latency_s for i in feasible_idx],
    )
    hull_points = []
    for j in hull_local:
        pt = bests[feasible_idx[j]]
        pt.hull_member = True
        hull_points.append(pt)
    best = min(
        (bests[i] for i in feasible_idx), key=lambda pt: (pt.latency_s, pt.beta_t)
    )
    return TradeoffCurve(bests, best=best, hull=hull_points)
