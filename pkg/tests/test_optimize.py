"""Optimizers: analytic derivatives against finite differences, bisection
against exhaustive search, and deterministic tie-breaking."""

import numpy as np
import pytest

from fdrigs.model import LinkStat, RateTarget, SignalParams, SystemParams
from fdrigs.optimize import (
    SearchConfig,
    bisect_circularity,
    bisect_power,
    coordinate_descent,
    grid_search,
    ub_derivative_cx,
    ub_derivative_pr,
)
from fdrigs.outage import e2e_rayleigh_ub_value, p_e2e_exact, p_e2e_lb


def base_system(pi_rr=10.0, p_max=1.0):
    return SystemParams(
        sr=LinkStat(1, 100.0),
        rd=LinkStat(1, 100.0),
        rr=LinkStat(1, pi_rr),
        sd=LinkStat(1, 2.0),
        p_s=1.0,
        p_max=p_max,
    )


TARGET = RateTarget(1.0)


def fd(fn, x, h=1e-6):
    return (fn(x + h) - fn(x - h)) / (2.0 * h)


def test_search_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(x_tol=1.0)
    with pytest.raises(ValueError):
        SearchConfig(grid_n=10)


@pytest.mark.parametrize("p_r", [0.3, 1.0])
@pytest.mark.parametrize("c_x", [0.2, 0.5, 0.8])
def test_cx_derivative_matches_finite_difference(p_r, c_x):
    sys_p = base_system()
    # ub_derivative_cx differentiates the complement 1 - UB
    def f(c):
        return 1.0 - e2e_rayleigh_ub_value(sys_p, TARGET, p_r, c)

    d = ub_derivative_cx(sys_p, TARGET, p_r, c_x)
    approx = fd(f, c_x)
    assert abs(d - approx) <= abs(approx) * 1e-5 + 1e-10


@pytest.mark.parametrize("p_r", [0.2, 0.6, 1.0])
@pytest.mark.parametrize("c_x", [0.0, 0.5, 0.95])
def test_pr_derivative_matches_finite_difference(p_r, c_x):
    sys_p = base_system(p_max=2.0)

    def f(p):
        return e2e_rayleigh_ub_value(sys_p, TARGET, p, c_x)

    d = ub_derivative_pr(sys_p, TARGET, p_r, c_x)
    approx = fd(f, p_r)
    assert abs(d - approx) <= abs(approx) * 1e-5 + 1e-10


def test_bisect_circularity_vs_fine_grid():
    for pi_rr in (1.0, 10.0, 10**1.5):
        sys_p = base_system(pi_rr)
        res = bisect_circularity(sys_p, TARGET, 1.0)
        grid_c = np.linspace(0.0, 1.0, 200_001)
        vals = e2e_rayleigh_ub_value(sys_p, TARGET, 1.0, grid_c)
        assert res.objective <= vals.min() + 1e-10
        assert res.converged


def test_bisect_power_exact_objective_when_proper():
    # at c_x = 0 the default objective is the exact closed form, not the bound
    sys_p = base_system(pi_rr=1.0, p_max=4.0)
    res = bisect_power(sys_p, TARGET, 0.0)
    grid_p = np.linspace(1e-4, 4.0, 20_001)
    vals = [p_e2e_exact(sys_p, SignalParams(p, 0.0), TARGET).value for p in grid_p[::200]]
    assert res.objective <= min(vals) + 1e-8
    assert res.converged


def test_bisect_power_forced_ub_objective():
    sys_p = base_system(pi_rr=1.0, p_max=4.0)
    res = bisect_power(sys_p, TARGET, 0.0, objective="ub")
    grid_p = np.linspace(1e-4, 4.0, 100_001)
    vals = e2e_rayleigh_ub_value(sys_p, TARGET, grid_p, 0.0)
    assert res.objective <= vals.min() + 1e-10


def test_coordinate_descent_monotone_and_consistent():
    sys_p = base_system()
    res = coordinate_descent(sys_p, TARGET)
    # trace never increases
    diffs = np.diff(res.trace)
    assert np.all(diffs <= 1e-12)
    # agrees with a fine grid on the same objective
    ref = grid_search(sys_p, TARGET, "outage-ub", SearchConfig(grid_n=1001))
    assert res.objective <= ref.objective + 1e-6
    assert res.converged


def test_non_rayleigh_rejected_by_bisection():
    sys_p = SystemParams(
        sr=LinkStat(2, 100.0), rd=LinkStat(1, 100.0), rr=LinkStat(1, 10.0),
        sd=LinkStat(1, 2.0), p_s=1.0, p_max=1.0,
    )
    with pytest.raises(ValueError):
        bisect_circularity(sys_p, TARGET, 1.0)
    with pytest.raises(ValueError):
        coordinate_descent(sys_p, TARGET)
    # exhaustive search still works on any shape
    res = grid_search(sys_p, TARGET, "outage-lb", SearchConfig(grid_n=101))
    assert 0.0 <= res.objective <= 1.0


def test_grid_search_tie_breaking():
    # a constant objective must return the smallest p_r, then smallest c_x
    sys_p = base_system()
    res = grid_search(sys_p, TARGET, lambda p, c: 1.0, SearchConfig(grid_n=101))
    assert res.p_r_star == pytest.approx(sys_p.p_max / 101)
    assert res.c_x_star == 0.0


def test_grid_search_argmin_invariant_under_scaling():
    sys_p = base_system()
    cfg = SearchConfig(grid_n=101)
    a = grid_search(sys_p, TARGET, "outage-ub", cfg)
    scaled = grid_search(
        sys_p, TARGET,
        lambda p, c: 7.5 * e2e_rayleigh_ub_value(sys_p, TARGET, p, c),
        cfg,
    )
    assert scaled.p_r_star == a.p_r_star
    assert scaled.c_x_star == a.c_x_star


def test_grid_search_stability_with_resolution():
    sys_p = base_system()
    coarse = grid_search(sys_p, TARGET, "outage-ub", SearchConfig(grid_n=101))
    fine = grid_search(sys_p, TARGET, "outage-ub", SearchConfig(grid_n=1001))
    assert fine.objective <= coarse.objective + 1e-12
    assert abs(fine.objective - coarse.objective) < 1e-3


def test_grid_search_fixed_power_slice():
    sys_p = base_system()
    res = grid_search(sys_p, TARGET, "outage-ub", SearchConfig(grid_n=101), p_r_fixed=0.5)
    assert res.p_r_star == 0.5
    with pytest.raises(ValueError):
        grid_search(sys_p, TARGET, "outage-ub", p_r_fixed=2.0)


def test_grid_search_maximize_metric():
    sys_p = base_system()
    cfg = SearchConfig(grid_n=101)
    res = grid_search(sys_p, TARGET, "throughput", cfg, p_r_fixed=1.0)
    # maximizing throughput must match minimizing the exact outage
    other = grid_search(sys_p, TARGET, "outage-exact", cfg, p_r_fixed=1.0)
    assert res.p_r_star == other.p_r_star
    assert res.c_x_star == other.c_x_star
