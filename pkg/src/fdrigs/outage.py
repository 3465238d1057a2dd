"""Outage probability of both hops and end to end: exact integrals,
Nakagami lower bounds, Rayleigh closed forms, Jensen upper bounds and the
high-RSI asymptote.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .model import RateTarget, SignalParams, SystemParams, alpha, psi_r, psi_ratio_limit
from .specfun import log_upper_incomplete_gamma_int

__all__ = [
    "QuadratureConfig",
    "EvalResult",
    "QuadratureError",
    "p_sr_exact",
    "p_sr_lb",
    "p_sr_rayleigh_exact",
    "p_sr_rayleigh_ub",
    "convexity_witness",
    "p_rd_exact",
    "p_e2e_exact",
    "p_e2e_lb",
    "p_e2e_rayleigh_ub",
    "asymptotic_k",
    "throughput",
    "sr_decoding_exponent",
    "e2e_rayleigh_ub_value",
    "integrate_semi_infinite",
]


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 200

    def __post_init__(self) -> None:
        if not 0.0 < self.rel_tol <= 1e-4:
            raise ValueError(f"rel_tol must lie in (0, 1e-4], got {self.rel_tol}")
        if not 0.0 < self.abs_tol <= 1e-10:
            raise ValueError(f"abs_tol must lie in (0, 1e-10], got {self.abs_tol}")
        if self.max_subdivisions < 50:
            raise ValueError(f"max_subdivisions must be >= 50, got {self.max_subdivisions}")


DEFAULT_QUAD = QuadratureConfig()

METHOD_EXACT_INTEGRAL = "exact-integral"
METHOD_LOWER_BOUND = "lower-bound"
METHOD_UPPER_BOUND = "upper-bound"
METHOD_CLOSED_FORM = "closed-form-exact"
METHOD_MONTE_CARLO = "monte-carlo"

_METHODS = {
    METHOD_EXACT_INTEGRAL,
    METHOD_LOWER_BOUND,
    METHOD_UPPER_BOUND,
    METHOD_CLOSED_FORM,
    METHOD_MONTE_CARLO,
}


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""


@dataclass(frozen=True)
class EvalResult:
    """A metric value tagged with the method that produced it."""

    value: float
    method: str
    stderr: Optional[float] = None

    def __post_init__(self) -> None:
        if self.method not in _METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if (self.stderr is not None) != (self.method == METHOD_MONTE_CARLO):
            raise ValueError("stderr must be present iff method is monte-carlo")


def integrate_semi_infinite(
    f: Callable[[float], float], scale: float, quad: QuadratureConfig = DEFAULT_QUAD
) -> float:
    """Integrate f over (0, inf) through the substitution x = scale * t / (1 - t)."""

    def g(t: float) -> float:
        one_minus = 1.0 - t
        x = scale * t / one_minus
        return f(x) * scale / (one_minus * one_minus)

    val, err, info, *rest = integrate.quad(
        g,
        0.0,
        1.0,
        epsabs=quad.abs_tol,
        epsrel=quad.rel_tol,
        limit=quad.max_subdivisions,
        full_output=True,
    )
    if rest:
        raise QuadratureError(
            f"semi-infinite quadrature failed: {rest[0]} "
            f"(value={val:.6g}, err={err:.6g}, subdivisions={info['last']})"
        )
    return val


def sr_decoding_exponent(sys: SystemParams, sig: SignalParams, target: RateTarget, g_rr):
    """Threshold exponent of the first hop conditioned on the RSI gain.

    Equals (P_r g + 1) / (P_s theta_sr) * psi_r(P_r g c_x / (P_r g + 1));
    the first-hop outage event is {g_sr < theta_sr * exponent}.
    """
    g = np.asarray(g_rr, dtype=float)
    loading = sig.p_r * g
    x = loading * sig.c_x / (loading + 1.0)
    out = (loading + 1.0) / (sys.p_s * sys.sr.theta) * psi_r(target, x)
    return float(out) if out.ndim == 0 else out


def _log_reg_upper_gamma(a: int, x: float) -> float:
    """log of the regularized upper incomplete gamma Q(a, x) for integer a."""
    return log_upper_incomplete_gamma_int(a, x) - math.lgamma(a)


def _sr_survival_exact(
    sys: SystemParams, sig: SignalParams, target: RateTarget, quad: QuadratureConfig
) -> float:
    """E_{g_rr}{ Q(m_sr, threshold) } by adaptive quadrature on (0, 1)."""
    m_rr = sys.rr.m
    th_rr = sys.rr.theta
    m_sr = sys.sr.m
    log_norm = math.lgamma(m_rr) + m_rr * math.log(th_rr)

    def integrand(x: float) -> float:
        if x <= 0.0:
            return 0.0
        w = sr_decoding_exponent(sys, sig, target, x)
        # gamma pdf and the regularized gamma factor combined in log domain
        log_f = (m_rr - 1.0) * math.log(x) - x / th_rr - log_norm
        log_f += _log_reg_upper_gamma(m_sr, w)
        return math.exp(log_f)

    return integrate_semi_infinite(integrand, th_rr, quad)


def p_sr_exact(
    sys: SystemParams,
    sig: SignalParams,
    target: RateTarget,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> EvalResult:
    """Exact first-hop outage probability (one-dimensional integral)."""
    sys.check_signal(sig)
    return EvalResult(1.0 - _sr_survival_exact(sys, sig, target, quad), METHOD_EXACT_INTEGRAL)


def _sr_survival_lb_complement(sys: SystemParams, sig: SignalParams, target: RateTarget) -> float:
    """Survival probability whose complement is the first-hop lower bound."""
    psi = psi_r(target, sig.c_x)
    m_sr, m_rr = sys.sr.m, sys.rr.m
    th_sr, th_rr = sys.sr.theta, sys.rr.theta
    u = psi / (sys.p_s * th_sr)
    pole = sig.p_r * u + 1.0 / th_rr
    total = 0.0
    for m in range(m_sr):
        for k in range(m + 1):
            total += (
                math.comb(m, k)
                * sig.p_r**k
                * math.gamma(k + m_rr)
                * u**m
                / (math.gamma(m + 1) * pole ** (k + m_rr))
            )
    return math.exp(-u) / (math.gamma(m_rr) * th_rr**m_rr) * total


def p_sr_lb(sys: SystemParams, sig: SignalParams, target: RateTarget) -> EvalResult:
    """Closed-form lower bound on the first-hop outage; exact at c_x = 0."""
    sys.check_signal(sig)
    return EvalResult(1.0 - _sr_survival_lb_complement(sys, sig, target), METHOD_LOWER_BOUND)


def p_sr_rayleigh_exact(
    sys: SystemParams,
    sig: SignalParams,
    target: RateTarget,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> EvalResult:
    """Exact first-hop outage over Rayleigh fading (expectation over the RSI gain)."""
    if sys.sr.m != 1 or sys.rr.m != 1:
        raise ValueError("p_sr_rayleigh_exact requires m_sr = m_rr = 1")
    sys.check_signal(sig)

    def integrand(x: float) -> float:
        w = sr_decoding_exponent(sys, sig, target, x)
        return math.exp(-w - x / sys.rr.pi) / sys.rr.pi

    survival = integrate_semi_infinite(integrand, sys.rr.pi, quad)
    return EvalResult(1.0 - survival, METHOD_EXACT_INTEGRAL)


def p_sr_rayleigh_ub(sys: SystemParams, sig: SignalParams, target: RateTarget) -> EvalResult:
    """Jensen upper bound on the Rayleigh first-hop outage."""
    if sys.sr.m != 1 or sys.rr.m != 1:
        raise ValueError("p_sr_rayleigh_ub requires m_sr = m_rr = 1")
    sys.check_signal(sig)
    a = alpha(sys, sig.p_r)
    exponent = (sig.p_r * sys.rr.pi + 1.0) / (sys.p_s * sys.sr.pi) * psi_r(target, a * sig.c_x)
    return EvalResult(-math.expm1(-exponent), METHOD_UPPER_BOUND)


def _sr_exponent_coeffs(sys: SystemParams, sig: SignalParams, target: RateTarget):
    """Coefficients of the first-hop exponent sqrt(A g^2 + B g + C) - (D g + F)."""
    ps2 = (sys.p_s * sys.sr.pi) ** 2
    g1 = 1.0 + target.gamma
    a = sig.p_r**2 * (1.0 + target.gamma * (1.0 - sig.c_x**2)) / ps2
    b = 2.0 * g1 * sig.p_r / ps2
    c = g1 / ps2
    d = sig.p_r / (sys.p_s * sys.sr.pi)
    f = 1.0 / (sys.p_s * sys.sr.pi)
    return a, b, c, d, f


def convexity_witness(
    sys: SystemParams, sig: SignalParams, target: RateTarget, g_rr: float
) -> float:
    """Second derivative of the first-hop exponent in g_rr; <= 0 everywhere."""
    if g_rr < 0:
        raise ValueError("g_rr must be nonnegative")
    a, b, c, _, _ = _sr_exponent_coeffs(sys, sig, target)
    return (4.0 * a * c - b * b) / (4.0 * (c + g_rr * (b + a * g_rr)) ** 1.5)


def _rd_survival(sys: SystemParams, sig: SignalParams, target: RateTarget) -> float:
    """Survival probability of the second hop (closed double sum)."""
    phi = psi_ratio_limit(target, sig.c_x) / (sig.p_r * sys.rd.theta)
    m_rd, m_sd = sys.rd.m, sys.sd.m
    th_sd = sys.sd.theta
    pole = sys.p_s * phi + 1.0 / th_sd
    total = 0.0
    for m in range(m_rd):
        for k in range(m + 1):
            total += (
                math.comb(m, k)
                * sys.p_s**k
                * math.gamma(k + m_sd)
                * phi**m
                / (math.gamma(m + 1) * pole ** (k + m_sd))
            )
    return math.exp(-phi) / (math.gamma(m_sd) * th_sd**m_sd) * total


def p_rd_exact(sys: SystemParams, sig: SignalParams, target: RateTarget) -> EvalResult:
    """Exact second-hop outage probability (closed form, no bounding)."""
    sys.check_signal(sig)
    return EvalResult(1.0 - _rd_survival(sys, sig, target), METHOD_CLOSED_FORM)


def p_e2e_exact(
    sys: SystemParams,
    sig: SignalParams,
    target: RateTarget,
    quad: QuadratureConfig = DEFAULT_QUAD,
) -> EvalResult:
    """Exact end-to-end outage: 1 - (1 - P_sr)(1 - P_rd)."""
    sys.check_signal(sig)
    survival = _sr_survival_exact(sys, sig, target, quad) * _rd_survival(sys, sig, target)
    return EvalResult(1.0 - survival, METHOD_EXACT_INTEGRAL)


def p_e2e_lb(sys: SystemParams, sig: SignalParams, target: RateTarget) -> EvalResult:
    """Closed-form end-to-end lower bound (quadruple sum over shape indices)."""
    sys.check_signal(sig)
    psi = psi_r(target, sig.c_x)
    ratio = psi_ratio_limit(target, sig.c_x)
    m_sr, m_rd, m_rr, m_sd = sys.sr.m, sys.rd.m, sys.rr.m, sys.sd.m
    th_sr, th_rd, th_rr, th_sd = sys.sr.theta, sys.rd.theta, sys.rr.theta, sys.sd.theta
    u = psi / (sys.p_s * th_sr)
    phi = ratio / (sig.p_r * th_rd)
    pole_sr = sig.p_r * u + 1.0 / th_rr
    pole_sd = sys.p_s * phi + 1.0 / th_sd
    total = 0.0
    for m in range(m_sr):
        for mp in range(m_rd):
            for k in range(m + 1):
                for kp in range(mp + 1):
                    total += (
                        math.comb(m, k)
                        * math.comb(mp, kp)
                        * sig.p_r**k
                        * sys.p_s**kp
                        * math.gamma(k + m_rr)
                        * math.gamma(kp + m_sd)
                        * u**m
                        * phi**mp
                        / (
                            math.gamma(m + 1)
                            * math.gamma(mp + 1)
                            * pole_sr ** (k + m_rr)
                            * pole_sd ** (kp + m_sd)
                        )
                    )
    survival = (
        math.exp(-u - phi) / (math.gamma(m_sd) * math.gamma(m_rr) * th_sd**m_sd * th_rr**m_rr)
    ) * total
    return EvalResult(1.0 - survival, METHOD_LOWER_BOUND)


def e2e_rayleigh_ub_value(sys: SystemParams, target: RateTarget, p_r, c_x):
    """Rayleigh end-to-end outage upper bound, vectorized over (p_r, c_x)."""
    p_r = np.asarray(p_r, dtype=float)
    c_x = np.asarray(c_x, dtype=float)
    phi = psi_ratio_limit(target, c_x) / (p_r * sys.rd.pi)
    a = p_r * sys.rr.pi / (p_r * sys.rr.pi + 1.0)
    exp_sr = (p_r * sys.rr.pi + 1.0) / (sys.p_s * sys.sr.pi) * psi_r(target, a * c_x)
    survival = np.exp(-(phi + exp_sr)) / (sys.p_s * sys.sd.pi * phi + 1.0)
    out = 1.0 - survival
    return float(out) if out.ndim == 0 else out


def p_e2e_rayleigh_ub(sys: SystemParams, sig: SignalParams, target: RateTarget) -> EvalResult:
    """Closed-form Rayleigh end-to-end upper bound."""
    if not sys.all_rayleigh:
        raise ValueError("p_e2e_rayleigh_ub requires all shapes equal to 1")
    sys.check_signal(sig)
    return EvalResult(e2e_rayleigh_ub_value(sys, target, sig.p_r, sig.c_x), METHOD_UPPER_BOUND)


def asymptotic_k(sys: SystemParams, target: RateTarget, p_r: Optional[float] = None) -> float:
    """High-RSI limit of the maximally improper upper bound (independent of pi_rr).

    Defaults to the relay transmitting at p_max.
    """
    if not sys.all_rayleigh:
        raise ValueError("asymptotic_k is a Rayleigh-scope result")
    if p_r is None:
        p_r = sys.p_max
    if not 0 < p_r <= sys.p_max:
        raise ValueError(f"p_r must lie in (0, p_max], got {p_r}")
    two_prd = 2.0 * p_r * sys.rd.pi
    num = two_prd * math.exp(-(target.gamma / two_prd + target.gamma / (sys.p_s * sys.sr.pi)))
    return 1.0 - num / (two_prd + target.gamma * sys.p_s * sys.sd.pi)


def throughput(target: RateTarget, p_out: float) -> float:
    """Fixed-rate throughput r (1 - P_out)."""
    if not 0.0 <= p_out <= 1.0:
        raise ValueError(f"p_out must lie in [0, 1], got {p_out}")
    return target.r * (1.0 - p_out)
