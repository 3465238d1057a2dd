"""System parameters, target-rate constants and the rate-threshold map.

All powers are linear and normalized to unit noise variance at both
receivers.  dB conversion happens at the CLI boundary only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "LinkStat",
    "SystemParams",
    "SignalParams",
    "RateTarget",
    "psi_r",
    "psi_ratio_limit",
    "alpha",
]

# Integer shapes the analysis is scoped to; larger values are accepted only
# with an explicit override for experimentation.
_SUPPORTED_SHAPES = (1, 2, 3, 4)


@dataclass(frozen=True)
class LinkStat:
    """One fading link: integer shape m and mean power pi (scale theta = pi/m)."""

    m: int
    pi: float
    allow_any_shape: bool = field(default=False, compare=False)

    def __post_init__(self) -> None:
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"shape m must be a positive integer, got {self.m}")
        object.__setattr__(self, "m", int(self.m))
        if self.m not in _SUPPORTED_SHAPES and not self.allow_any_shape:
            raise ValueError(
                f"shape m={self.m} is outside the supported set {_SUPPORTED_SHAPES}; "
                "pass allow_any_shape=True to override"
            )
        if not self.pi > 0:
            raise ValueError(f"mean power pi must be > 0, got {self.pi}")

    @property
    def theta(self) -> float:
        return self.pi / self.m

    @property
    def is_rayleigh(self) -> bool:
        return self.m == 1


@dataclass(frozen=True)
class SystemParams:
    """Statistics of the four links plus source power and relay power cap."""

    sr: LinkStat
    rd: LinkStat
    rr: LinkStat
    sd: LinkStat
    p_s: float
    p_max: float

    def __post_init__(self) -> None:
        if not self.p_s > 0:
            raise ValueError(f"p_s must be > 0, got {self.p_s}")
        if not self.p_max > 0:
            raise ValueError(f"p_max must be > 0, got {self.p_max}")
        if self.p_s > self.p_max:
            raise ValueError(f"p_s={self.p_s} exceeds p_max={self.p_max}")

    @property
    def all_rayleigh(self) -> bool:
        return all(link.m == 1 for link in (self.sr, self.rd, self.rr, self.sd))

    def check_signal(self, sig: "SignalParams") -> None:
        if sig.p_r > self.p_max:
            raise ValueError(f"p_r={sig.p_r} exceeds p_max={self.p_max}")


@dataclass(frozen=True)
class SignalParams:
    """The relay design point: transmit power and circularity coefficient."""

    p_r: float
    c_x: float

    def __post_init__(self) -> None:
        if not self.p_r > 0:
            raise ValueError(f"p_r must be > 0, got {self.p_r}")
        if not 0.0 <= self.c_x <= 1.0:
            raise ValueError(f"c_x must lie in [0, 1], got {self.c_x}")


@dataclass(frozen=True)
class RateTarget:
    """Target rate r with the derived constants gamma = 2^{2r}-1, eta = 2^r-1."""

    r: float
    gamma: float = field(init=False)
    eta: float = field(init=False)

    def __post_init__(self) -> None:
        if not self.r > 0:
            raise ValueError(f"target rate r must be > 0, got {self.r}")
        eta = float(np.exp2(self.r)) - 1.0
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "gamma", (eta + 1.0) ** 2 - 1.0)


def psi_r(target: RateTarget, x):
    """Rate-threshold map sqrt(1 + gamma (1 - x^2)) - 1 on [0, 1].

    Computed as gamma (1-x)(1+x) / (1 + sqrt(1 + gamma (1 - x^2))), which
    stays accurate as x -> 1 where the naive form cancels.
    """
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > 1)):
        raise ValueError("psi_r argument must lie in [0, 1]")
    one_minus_x2 = (1.0 - x) * (1.0 + x)
    g = target.gamma * one_minus_x2
    out = g / (1.0 + np.sqrt(1.0 + g))
    return float(out) if out.ndim == 0 else out


def psi_ratio_limit(target: RateTarget, c_x):
    """psi_r(c_x) / (1 - c_x^2), continuously extended to gamma/2 at c_x = 1."""
    c_x = np.asarray(c_x, dtype=float)
    if np.any((c_x < 0) | (c_x > 1)):
        raise ValueError("c_x must lie in [0, 1]")
    g = target.gamma * (1.0 - c_x) * (1.0 + c_x)
    out = target.gamma / (1.0 + np.sqrt(1.0 + g))
    return float(out) if out.ndim == 0 else out


def alpha(sys: SystemParams, p_r):
    """RSI loading factor P_r pi_rr / (P_r pi_rr + 1), strictly inside (0, 1)."""
    p_r = np.asarray(p_r, dtype=float)
    if np.any(p_r <= 0):
        raise ValueError("p_r must be > 0")
    beta = p_r * sys.rr.pi
    out = beta / (beta + 1.0)
    return float(out) if out.ndim == 0 else out
