"""Ergodic rate: partial-fraction machinery, closed-form bounds, and the
exact survival integral, each against an independent oracle."""

import math
from fractions import Fraction

import numpy as np
import pytest
from scipy import integrate

from fdrigs.ergodic import (
    PoleCollisionError,
    compute_partial_fractions,
    r_e2e_exact,
    r_e2e_rayleigh_lb,
    r_e2e_ub,
)
from fdrigs.model import LinkStat, RateTarget, SignalParams, SystemParams
from fdrigs.outage import p_e2e_exact

# frozen anchors (cross-checked against quadrature oracles)
ERG_UB = 3.0983351016783516
ERG_EXACT = 2.9165506228136158
ERG_LB = 2.6370203039880513
M2_ERG_UB = 3.5586808626614763


def base_system(m_relayed=1, m_rr=1, m_sd=1):
    return SystemParams(
        sr=LinkStat(m_relayed, 100.0),
        rd=LinkStat(m_relayed, 100.0),
        rr=LinkStat(m_rr, 10.0),
        sd=LinkStat(m_sd, 2.0),
        p_s=1.0,
        p_max=1.0,
    )


SIG = SignalParams(1.0, 0.9)


def oracle_survival_integral(sys_p, sig, upper=40.0):
    """Independent oracle: integrate the rate survival function over r."""
    val, err = integrate.quad(
        lambda r: 1.0 - p_e2e_exact(sys_p, sig, RateTarget(r)).value,
        0.0,
        upper,
        limit=400,
        epsrel=1e-10,
    )
    return val


def test_frozen_anchors():
    sys_p = base_system()
    assert r_e2e_ub(sys_p, SIG).value == pytest.approx(ERG_UB, abs=1e-10)
    assert r_e2e_exact(sys_p, SIG).value == pytest.approx(ERG_EXACT, abs=1e-10)
    assert r_e2e_rayleigh_lb(sys_p, SIG).value == pytest.approx(ERG_LB, abs=1e-10)
    assert r_e2e_ub(base_system(2), SIG).value == pytest.approx(M2_ERG_UB, abs=1e-10)


def test_exact_vs_survival_oracle():
    sys_p = base_system()
    assert r_e2e_exact(sys_p, SIG).value == pytest.approx(
        oracle_survival_integral(sys_p, SIG), rel=1e-9
    )
    sys2 = base_system(2)
    assert r_e2e_exact(sys2, SIG).value == pytest.approx(
        oracle_survival_integral(sys2, SIG), rel=1e-9
    )


@pytest.mark.parametrize("m", [1, 2, 3])
@pytest.mark.parametrize("c_x", [0.0, 0.5, 0.9])
def test_ub_dominates_exact(m, c_x):
    sys_p = base_system(m)
    sig = SignalParams(0.8, c_x)
    assert r_e2e_ub(sys_p, sig).value >= r_e2e_exact(sys_p, sig).value - 1e-9


def test_ub_exact_when_proper():
    for m in (1, 2, 3):
        sys_p = base_system(m)
        sig = SignalParams(0.9, 0.0)
        assert r_e2e_ub(sys_p, sig).value == pytest.approx(
            r_e2e_exact(sys_p, sig).value, abs=1e-6
        )


def test_rayleigh_lb_sandwich():
    sys_p = base_system()
    for c_x in (0.0, 0.4, 0.9):
        sig = SignalParams(1.0, c_x)
        lb = r_e2e_rayleigh_lb(sys_p, sig).value
        exact = r_e2e_exact(sys_p, sig).value
        assert lb <= exact + 1e-9
    with pytest.raises(ValueError):
        r_e2e_rayleigh_lb(base_system(2), SIG)


def test_partial_fraction_reconstruction_is_exact():
    # exact rational coefficients: the expansion reproduces F identically
    rng = np.random.default_rng(5)
    for m_rel, m_rr, m_sd in [(2, 1, 1), (3, 1, 1), (2, 2, 1), (3, 1, 2)]:
        sys_p = base_system(m_rel, m_rr, m_sd)
        for indices in [(0, 0, 0, 0), (m_rel - 1, m_rel - 1, m_rel - 1, m_rel - 1)]:
            pfe = compute_partial_fractions(sys_p, SIG, indices)
            psi = rng.uniform(0.01, 10.0, size=20)
            np.testing.assert_array_equal(pfe.reconstruct(psi), pfe.direct(psi))


def test_simple_pole_residues_via_limit_oracle():
    # residue at s_i as the numerical limit (s - s_i) F(s), s -> s_i
    sys_p = base_system(2)
    pfe = compute_partial_fractions(sys_p, SIG, (1, 1, 0, 1))
    for root, coeff in pfe.simple_terms:
        s = root + Fraction(1, 10**8)
        a_sr, b_sr = pfe.linear_sr
        a_sd, b_sd = pfe.linear_sd
        j, l = len(pfe.sr_pole_terms), len(pfe.sd_pole_terms)
        f_val = (s + 1) / (
            (s + 1 - pfe.c_x) * (s + 1 + pfe.c_x)
            * (a_sr * s + b_sr) ** j * (a_sd * s + b_sd) ** l
        )
        assert float((s - root) * f_val) == pytest.approx(float(coeff), rel=1e-6)


def test_residues_continuous_through_proper_limit():
    # the (psi + 1) numerator cancels the 2 c_x pole gap, so coefficients
    # stay bounded as c_x -> 0
    sys_p = base_system(2)
    eps = compute_partial_fractions(sys_p, SignalParams(1.0, 1e-9), (1, 1, 0, 1))
    zero = compute_partial_fractions(sys_p, SignalParams(1.0, 1e-12), (1, 1, 0, 1))
    for (_, c1), (_, c2) in zip(eps.simple_terms, zero.simple_terms):
        assert float(c1) == pytest.approx(float(c2), rel=1e-6)


def test_index_bounds_enforced():
    sys_p = base_system(2)
    with pytest.raises(ValueError):
        compute_partial_fractions(sys_p, SIG, (2, 1, 0, 0))
    with pytest.raises(ValueError):
        compute_partial_fractions(sys_p, SIG, (1, 1, 2, 0))


def test_pole_collision_detected():
    # arrange the sr-family root to collide with a simple pole:
    # root -b_sr/a_sr = -theta_sr p_s / (theta_rr p_r) hits the simple pole
    # at -(1 - c_x) = -1 when theta_sr = theta_rr and p_r = p_s
    sys_p = SystemParams(
        sr=LinkStat(2, 2.0),
        rd=LinkStat(2, 100.0),
        rr=LinkStat(1, 1.0),
        sd=LinkStat(1, 2.0),
        p_s=1.0,
        p_max=1.0,
    )
    with pytest.raises(PoleCollisionError):
        compute_partial_fractions(sys_p, SignalParams(1.0, 0.0), (0, 0, 0, 0))


def test_monotone_in_circularity_tradeoff():
    # stronger RSI rewards improperness; the exact ergodic rate at high RSI
    # must increase from c_x = 0 to the best c_x on a coarse grid
    strong = SystemParams(
        sr=LinkStat(1, 100.0), rd=LinkStat(1, 100.0), rr=LinkStat(1, 10**2.5),
        sd=LinkStat(1, 2.0), p_s=1.0, p_max=1.0,
    )
    vals = [r_e2e_exact(strong, SignalParams(1.0, c)).value for c in (0.0, 0.5, 0.9)]
    assert vals[2] > vals[0]
