"""Relay signal design: derivative bisection over each of (p_r, c_x),
coordinate descent for the joint problem, and a grid-search oracle that
works for every metric and any fading shape.

The 1D searches exploit that the Rayleigh outage upper bound is monotone or
unimodal in each variable separately, so a single interior stationary point
(found by bisecting the analytic derivative) plus the interval endpoints
always contain the global minimizer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

from .ergodic import r_e2e_exact, r_e2e_rayleigh_lb, r_e2e_ub
from .model import RateTarget, SignalParams, SystemParams, psi_ratio_limit
from .outage import e2e_rayleigh_ub_value, p_e2e_exact, p_e2e_lb

__all__ = [
    "OptResult",
    "SearchConfig",
    "ub_derivative_cx",
    "ub_derivative_pr",
    "bisect_circularity",
    "bisect_power",
    "coordinate_descent",
    "grid_search",
]

# The derivative carries a structural zero at c_x = 0, so the bisection
# bracket starts just inside the box.
_EDGE = 1e-7


@dataclass(frozen=True)
class SearchConfig:
    """Termination control shared by the 1D/2D searches."""

    x_tol: float = 1e-8
    f_tol: float = 1e-10
    max_iters: int = 200
    grid_n: int = 101

    def __post_init__(self) -> None:
        if not 1e-10 <= self.x_tol <= 1e-3:
            raise ValueError(f"x_tol must lie in [1e-10, 1e-3], got {self.x_tol}")
        if not self.f_tol > 0:
            raise ValueError(f"f_tol must be > 0, got {self.f_tol}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.grid_n < 101:
            raise ValueError(f"grid_n must be >= 101, got {self.grid_n}")


DEFAULT_SEARCH = SearchConfig()


@dataclass(frozen=True)
class OptResult:
    """Optimizer output: the design point, its objective and the run record."""

    p_r_star: float
    c_x_star: float
    objective: float
    iterations: int
    converged: bool
    trace: Optional[List[float]] = field(default=None, compare=False)


def _survival_parts(sys: SystemParams, target: RateTarget, p_r: float, c_x: float):
    """Pieces of the Rayleigh survival bound exp(-(u+v)) / (d*u + 1)."""
    u = psi_ratio_limit(target, c_x) / (p_r * sys.rd.pi)
    beta = p_r * sys.rr.pi
    w = (beta + 1.0) / (sys.p_s * sys.sr.pi)
    y = beta / (beta + 1.0) * c_x
    s_y = math.sqrt(1.0 + target.gamma * (1.0 - y * y))
    v = w * (s_y - 1.0)
    d = sys.p_s * sys.sd.pi
    survival = math.exp(-(u + v)) / (d * u + 1.0)
    return u, v, w, y, s_y, d, survival


def ub_derivative_cx(sys: SystemParams, target: RateTarget, p_r: float, c_x: float) -> float:
    """Analytic d/dc_x of the survival bound 1 - p_e2e_rayleigh_ub.

    A positive value means increasing impropriety still helps at this point.
    The leading factor c_x forces a zero at c_x = 0.
    """
    if not 0.0 < c_x < 1.0:
        raise ValueError(f"c_x must lie in (0, 1), got {c_x}")
    gam = target.gamma
    u, v, w, y, s_y, d, survival = _survival_parts(sys, target, p_r, c_x)
    s = math.sqrt(1.0 + gam * (1.0 - c_x * c_x))
    du = gam * gam * c_x / (p_r * sys.rd.pi * s * (1.0 + s) ** 2)
    a = y / c_x  # the RSI loading factor
    dv = -w * gam * a * a * c_x / s_y
    return survival * (-du - dv - d * du / (d * u + 1.0))


def ub_derivative_pr(sys: SystemParams, target: RateTarget, p_r: float, c_x: float) -> float:
    """Analytic d/dp_r of the Rayleigh outage upper bound.

    Balances the second-hop gain (more relay power) against the growing
    self-interference seen by the first hop, including the dependence of the
    RSI loading factor on p_r.
    """
    if p_r <= 0:
        raise ValueError(f"p_r must be > 0, got {p_r}")
    gam = target.gamma
    u, v, w, y, s_y, d, survival = _survival_parts(sys, target, p_r, c_x)
    beta = p_r * sys.rr.pi
    du = -psi_ratio_limit(target, c_x) / (p_r * p_r * sys.rd.pi)
    dpsi = -gam * y / s_y
    dv = sys.rr.pi / (sys.p_s * sys.sr.pi) * ((s_y - 1.0) + c_x * dpsi / (beta + 1.0))
    dsurv = survival * (-du - dv - d * du / (d * u + 1.0))
    return -dsurv


def _ub(sys: SystemParams, target: RateTarget, p_r: float, c_x: float) -> float:
    return e2e_rayleigh_ub_value(sys, target, p_r, c_x)


def _bisect_root(
    deriv: Callable[[float], float], lo: float, hi: float, cfg: SearchConfig
) -> Tuple[float, int, bool]:
    """Root of a sign-changing derivative on [lo, hi] by plain bisection."""
    f_lo = deriv(lo)
    iters = 0
    while hi - lo > cfg.x_tol and iters < cfg.max_iters:
        mid = 0.5 * (lo + hi)
        f_mid = deriv(mid)
        if f_mid == 0.0:
            return mid, iters + 1, True
        if (f_lo > 0) == (f_mid > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
        iters += 1
    return 0.5 * (lo + hi), iters, hi - lo <= cfg.x_tol


def bisect_circularity(
    sys: SystemParams,
    target: RateTarget,
    p_r: float,
    cfg: SearchConfig = DEFAULT_SEARCH,
) -> OptResult:
    """Minimize the Rayleigh outage upper bound over c_x at fixed p_r."""
    if not sys.all_rayleigh:
        raise ValueError("bisect_circularity requires all shapes equal to 1")
    if not 0 < p_r <= sys.p_max:
        raise ValueError(f"p_r must lie in (0, p_max], got {p_r}")
    lo, hi = _EDGE, 1.0 - _EDGE
    # The objective falls as the survival rises: bisect on -survival'.
    deriv = lambda c: -ub_derivative_cx(sys, target, p_r, c)
    candidates = [0.0, 1.0]
    iterations = 0
    converged = True
    if (deriv(lo) > 0) != (deriv(hi) > 0):
        root, iterations, converged = _bisect_root(deriv, lo, hi, cfg)
        candidates.append(root)
    values = [_ub(sys, target, p_r, c) for c in candidates]
    best = int(np.argmin(values))
    return OptResult(
        p_r_star=p_r,
        c_x_star=candidates[best],
        objective=values[best],
        iterations=iterations,
        converged=converged,
        trace=values,
    )


def _pgs_exact_outage(sys: SystemParams, target: RateTarget, p_r: float) -> float:
    """Exact Rayleigh end-to-end outage of a proper (c_x = 0) relay signal."""
    u = target.eta / (sys.p_s * sys.sr.pi)
    phi = target.eta / (p_r * sys.rd.pi)
    survival = (
        math.exp(-u - phi)
        / (1.0 + p_r * sys.rr.pi * u)
        / (1.0 + sys.p_s * sys.sd.pi * phi)
    )
    return 1.0 - survival


def _pgs_exact_dlog(sys: SystemParams, target: RateTarget, p_r: float) -> float:
    """d/dp_r of -log(survival) for the proper case; same sign as the
    outage derivative, but free of the survival factor's underflow."""
    u = target.eta / (sys.p_s * sys.sr.pi)
    phi = target.eta / (p_r * sys.rd.pi)
    d = sys.p_s * sys.sd.pi
    return (
        -phi / p_r
        + sys.rr.pi * u / (1.0 + p_r * sys.rr.pi * u)
        - d * phi / (p_r * (1.0 + d * phi))
    )


def bisect_power(
    sys: SystemParams,
    target: RateTarget,
    c_x: float,
    cfg: SearchConfig = DEFAULT_SEARCH,
    objective: str = "auto",
) -> OptResult:
    """Minimize the end-to-end outage over p_r at fixed c_x.

    At c_x = 0 the objective is the exact proper-signaling outage (closed
    form); for c_x > 0 the Rayleigh upper bound is the tractable surrogate.
    Pass objective="ub" to force the bound at c_x = 0 as well, which is what
    coordinate descent needs for a consistent descent function.
    """
    if not sys.all_rayleigh:
        raise ValueError("bisect_power requires all shapes equal to 1")
    if not 0.0 <= c_x <= 1.0:
        raise ValueError(f"c_x must lie in [0, 1], got {c_x}")
    if objective not in ("auto", "ub"):
        raise ValueError(f"objective must be 'auto' or 'ub', got {objective!r}")
    use_exact = objective == "auto" and c_x == 0.0
    lo, hi = _EDGE * sys.p_max, sys.p_max
    if use_exact:
        deriv = lambda p: _pgs_exact_dlog(sys, target, p)
        value_fn = lambda p: _pgs_exact_outage(sys, target, p)
    else:
        deriv = lambda p: ub_derivative_pr(sys, target, p, c_x)
        value_fn = lambda p: _ub(sys, target, p, c_x)
    candidates = [lo, hi]
    iterations = 0
    converged = True
    if (deriv(lo) > 0) != (deriv(hi) > 0):
        root, iterations, converged = _bisect_root(deriv, lo, hi, cfg)
        candidates.append(root)
    values = [value_fn(p) for p in candidates]
    best = int(np.argmin(values))
    return OptResult(
        p_r_star=candidates[best],
        c_x_star=c_x,
        objective=values[best],
        iterations=iterations,
        converged=converged,
        trace=values,
    )


def coordinate_descent(
    sys: SystemParams, target: RateTarget, cfg: SearchConfig = DEFAULT_SEARCH
) -> OptResult:
    """Alternate the two 1D searches from (p_max, 0) until no improvement.

    The objective trace must be nonincreasing; a rise indicates a broken 1D
    solver and raises immediately rather than returning a bogus optimum.
    """
    if not sys.all_rayleigh:
        raise ValueError("coordinate_descent requires all shapes equal to 1")
    p_r, c_x = sys.p_max, 0.0
    value = _ub(sys, target, p_r, c_x)
    trace = [value]
    converged = False
    iterations = 0
    for _ in range(cfg.max_iters):
        iterations += 1
        step_p = bisect_power(sys, target, c_x, cfg, objective="ub")
        p_r = step_p.p_r_star
        step_c = bisect_circularity(sys, target, p_r, cfg)
        c_x = step_c.c_x_star
        new_value = step_c.objective
        if new_value > trace[-1] + 1e-12:
            raise RuntimeError(
                f"coordinate descent objective rose from {trace[-1]} to {new_value}"
            )
        trace.append(new_value)
        if trace[-2] - new_value < cfg.f_tol:
            converged = True
            value = new_value
            break
        value = new_value
    return OptResult(
        p_r_star=p_r,
        c_x_star=c_x,
        objective=value,
        iterations=iterations,
        converged=converged,
        trace=trace,
    )


_MINIMIZE_METRICS = {"outage-exact", "outage-lb", "outage-ub"}
_MAXIMIZE_METRICS = {"ergodic-exact", "ergodic-ub", "ergodic-lb", "throughput"}


def _metric_fn(
    sys: SystemParams, target: RateTarget, objective: str
) -> Callable[[float, float], float]:
    if objective == "outage-exact":
        return lambda p, c: p_e2e_exact(sys, SignalParams(p, c), target).value
    if objective == "outage-lb":
        return lambda p, c: p_e2e_lb(sys, SignalParams(p, c), target).value
    if objective == "outage-ub":
        return lambda p, c: e2e_rayleigh_ub_value(sys, target, p, c)
    if objective == "ergodic-exact":
        return lambda p, c: r_e2e_exact(sys, SignalParams(p, c)).value
    if objective == "ergodic-ub":
        return lambda p, c: r_e2e_ub(sys, SignalParams(p, c)).value
    if objective == "ergodic-lb":
        return lambda p, c: r_e2e_rayleigh_lb(sys, SignalParams(p, c)).value
    if objective == "throughput":
        return lambda p, c: target.r * (
            1.0 - p_e2e_exact(sys, SignalParams(p, c), target).value
        )
    raise ValueError(f"unknown objective {objective!r}")


def grid_search(
    sys: SystemParams,
    target: RateTarget,
    objective: Union[str, Callable[[float, float], float]] = "outage-ub",
    cfg: SearchConfig = DEFAULT_SEARCH,
    maximize: Optional[bool] = None,
    p_r_fixed: Optional[float] = None,
) -> OptResult:
    """Exhaustive search on a grid_n x grid_n grid over (0, p_max] x [0, 1].

    Works for every metric and any fading shape.  Ties break deterministically
    toward the smallest p_r, then the smallest c_x.  Fixing p_r collapses the
    search to a 1D sweep over c_x.
    """
    if maximize is None:
        if isinstance(objective, str):
            maximize = objective in _MAXIMIZE_METRICS
        else:
            maximize = False
    n = cfg.grid_n
    if p_r_fixed is not None:
        if not 0 < p_r_fixed <= sys.p_max:
            raise ValueError(f"p_r_fixed must lie in (0, p_max], got {p_r_fixed}")
        p_grid = np.array([p_r_fixed])
    else:
        p_grid = sys.p_max * np.arange(1, n + 1) / n
    c_grid = np.linspace(0.0, 1.0, n)

    if objective == "outage-ub":
        # vectorized closed form: the whole grid in one shot
        values = e2e_rayleigh_ub_value(
            sys, target, p_grid[:, None], c_grid[None, :]
        )
    else:
        fn = _metric_fn(sys, target, objective) if isinstance(objective, str) else objective
        values = np.empty((len(p_grid), n))
        for i, p in enumerate(p_grid):
            for j, c in enumerate(c_grid):
                values[i, j] = fn(p, c)

    flat = np.argmax(values) if maximize else np.argmin(values)
    i, j = np.unravel_index(flat, values.shape)
    return OptResult(
        p_r_star=float(p_grid[i]),
        c_x_star=float(c_grid[j]),
        objective=float(values[i, j]),
        iterations=values.size,
        converged=True,
    )
