"""Monte Carlo oracle: block-fading simulation of the relay link, empirical
outage/ergodic estimates, and the half-duplex baselines.

Sampling uses counter-based Philox substreams, one per accumulation batch, so
estimates are bit-identical regardless of how batches are scheduled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import RateTarget, SignalParams, SystemParams
from .rates import ChannelRealization, e2e_rate, rate_rd, rate_sr

__all__ = [
    "McConfig",
    "McEstimate",
    "sample_gains",
    "sample_improper_symbol",
    "estimate_outage",
    "estimate_link_outage",
    "estimate_ergodic",
    "estimate_hdr_outage",
]


@dataclass(frozen=True)
class McConfig:
    """Sampling budget and reproducibility control."""

    n_samples: int = 1_000_000
    seed: int = 0
    batch: int = 250_000

    def __post_init__(self) -> None:
        if self.n_samples < 10_000:
            raise ValueError(f"n_samples must be >= 10000, got {self.n_samples}")
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit integer, got {self.seed}")
        if self.batch < 1:
            raise ValueError(f"batch must be >= 1, got {self.batch}")


@dataclass(frozen=True)
class McEstimate:
    """Sample mean with its standard error."""

    mean: float
    stderr: float
    n: int


def _batch_rng(cfg: McConfig, batch_index: int) -> np.random.Generator:
    """Independent substream for one batch: the seed keys the stream, the
    batch index offsets the 256-bit counter, so streams never overlap."""
    bg = np.random.Philox(key=cfg.seed)
    bg.advance(batch_index << 128)
    return np.random.Generator(bg)


def _batch_sizes(cfg: McConfig):
    full, rem = divmod(cfg.n_samples, cfg.batch)
    sizes = [cfg.batch] * full
    if rem:
        sizes.append(rem)
    return sizes


def _gamma_gain(rng: np.random.Generator, m: int, theta: float, n: int) -> np.ndarray:
    """Gamma(m, theta) gains as a sum of m exponentials (exact, integer m)."""
    return rng.exponential(theta, size=(m, n)).sum(axis=0)


def sample_gains(sys: SystemParams, rng: np.random.Generator, n: int = 1) -> ChannelRealization:
    """Draw n independent block-fading realizations of the four link gains."""
    return ChannelRealization(
        g_sr=_gamma_gain(rng, sys.sr.m, sys.sr.theta, n),
        g_rd=_gamma_gain(rng, sys.rd.m, sys.rd.theta, n),
        g_rr=_gamma_gain(rng, sys.rr.m, sys.rr.theta, n),
        g_sd=_gamma_gain(rng, sys.sd.m, sys.sd.theta, n),
    )


def sample_improper_symbol(c_x: float, rng: np.random.Generator, n: int = 1) -> np.ndarray:
    """Zero-mean unit-variance complex samples with real pseudo-variance c_x.

    Real and imaginary parts are independent Gaussians with variances
    (1 + c_x)/2 and (1 - c_x)/2; the pseudo-variance phase carries no
    information here and is fixed to zero.
    """
    if not 0.0 <= c_x <= 1.0:
        raise ValueError(f"c_x must lie in [0, 1], got {c_x}")
    re = rng.normal(0.0, math.sqrt((1.0 + c_x) / 2.0), size=n)
    im = rng.normal(0.0, math.sqrt((1.0 - c_x) / 2.0), size=n)
    return re + 1j * im


def _estimate(cfg: McConfig, batch_fn) -> McEstimate:
    """Accumulate sum and sum-of-squares over deterministic batches."""
    total = 0.0
    total_sq = 0.0
    n = 0
    for i, size in enumerate(_batch_sizes(cfg)):
        values = np.asarray(batch_fn(_batch_rng(cfg, i), size), dtype=float)
        total += float(values.sum())
        total_sq += float(np.square(values).sum())
        n += size
    mean = total / n
    var = max(total_sq / n - mean * mean, 0.0)
    return McEstimate(mean=mean, stderr=math.sqrt(var / n), n=n)


def estimate_outage(
    sys: SystemParams, sig: SignalParams, target: RateTarget, cfg: McConfig
) -> McEstimate:
    """Empirical end-to-end outage: fraction of blocks with min-rate below r."""
    sys.check_signal(sig)

    def batch(rng, size):
        ch = sample_gains(sys, rng, size)
        return e2e_rate(sys, sig, ch) < target.r

    return _estimate(cfg, batch)


def estimate_link_outage(
    sys: SystemParams,
    sig: SignalParams,
    target: RateTarget,
    cfg: McConfig,
    link: str = "sr",
) -> McEstimate:
    """Empirical per-hop outage, for checking the hop-independence split."""
    sys.check_signal(sig)
    if link not in ("sr", "rd"):
        raise ValueError(f"link must be 'sr' or 'rd', got {link!r}")
    hop = rate_sr if link == "sr" else rate_rd

    def batch(rng, size):
        ch = sample_gains(sys, rng, size)
        return hop(sys, sig, ch) < target.r

    return _estimate(cfg, batch)


def estimate_ergodic(sys: SystemParams, sig: SignalParams, cfg: McConfig) -> McEstimate:
    """Empirical ergodic rate: sample mean of the end-to-end rate."""
    sys.check_signal(sig)

    def batch(rng, size):
        return e2e_rate(sys, sig, sample_gains(sys, rng, size))

    return _estimate(cfg, batch)


def estimate_hdr_outage(
    sys: SystemParams, target: RateTarget, mrc: bool, cfg: McConfig
) -> McEstimate:
    """Outage of the half-duplex decode-and-forward baseline.

    Each hop occupies half the block, so it must support rate 2r; the relay
    transmits at full power and suffers no self-interference.  With mrc the
    destination combines the relayed and direct copies, giving second-stage
    SNR P_r g_rd + P_s g_sd.
    """
    threshold = 2.0 * target.r

    def batch(rng, size):
        ch = sample_gains(sys, rng, size)
        snr1 = sys.p_s * ch.g_sr
        snr2 = sys.p_max * ch.g_rd
        if mrc:
            snr2 = snr2 + sys.p_s * ch.g_sd
        r1 = np.log2(1.0 + snr1)
        r2 = np.log2(1.0 + snr2)
        return np.minimum(r1, r2) < threshold

    return _estimate(cfg, batch)
