"""Builders for target distributions: return histograms, binomial PMFs, log-normal grids."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .objective import TargetDistribution

DEGENERATE_PAD = 0.5          # percentage points added either side of a constant sample
DEFAULT_TRUNCATION_SIGMAS = 4.5


@dataclass(frozen=True)
class PricingParams:
    spot: float
    strike: float
    rate: float
    volatility: float
    maturity_days: float

    def __post_init__(self):
        vals = (self.spot, self.strike, self.rate, self.volatility, self.maturity_days)
        if not all(math.isfinite(v) for v in vals):
            raise DomainError(f"pricing parameters must be finite: {self}")
        if self.spot <= 0 or self.strike <= 0:
            raise DomainError("spot and strike must be positive")
        if self.volatility < 0:
            raise DomainError("volatility must be nonnegative")
        if self.maturity_days <= 0:
            raise DomainError("maturity_days must be positive")

    @property
    def tau(self) -> float:
        """Maturity as a year fraction (calendar days / 365)."""
        return self.maturity_days / 365.0

    def log_moments(self) -> tuple[float, float]:
        """Mean and standard deviation of ln S_T under the risk-neutral law."""
        mu = math.log(self.spot) + (self.rate - 0.5 * self.volatility ** 2) * self.tau
        return mu, self.volatility * math.sqrt(self.tau)

    def forward(self) -> float:
        return self.spot * math.exp(self.rate * self.tau)


def _check_bins(num_bins: int) -> None:
    if num_bins < 1 or num_bins & (num_bins - 1):
        raise DomainError(f"num_bins must be a power of two, got {num_bins}")


def histogram_from_returns(returns, num_bins: int = 16, name: str = "daily returns") -> TargetDistribution:
    """Equal-width histogram over [min, max] of the samples, last bin closed on the right.

    A constant sample is widened by DEGENERATE_PAD on each side.
    """
    r = np.asarray(returns, dtype=float)
    if r.size < 2:
        raise DomainError(f"need at least 2 returns, got {r.size}")
    if not np.all(np.isfinite(r)):
        raise DomainError("returns must be finite")
    _check_bins(num_bins)
    lo, hi = float(r.min()), float(r.max())
    if hi == lo:
        lo, hi = lo - DEGENERATE_PAD, hi + DEGENERATE_PAD
    counts, edges = np.histogram(r, bins=num_bins, range=(lo, hi))
    probs = counts / counts.sum()
    centres = 0.5 * (edges[:-1] + edges[1:])
    return TargetDistribution(probs, centres, name,
                              meta={"edges": edges.tolist(), "samples": int(r.size)})


def binomial_target(n: int, p: float, position_qubits: int) -> TargetDistribution:
    """B(n, p) PMF on k = 0..n, zero-padded to 2**N bins."""
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if position_qubits < 1:
        raise DomainError(f"position_qubits must be >= 1, got {position_qubits}")
    size = 1 << position_qubits
    if n + 1 > size:
        raise DomainError(f"n + 1 = {n + 1} outcomes do not fit in 2**{position_qubits} bins")
    probs = np.zeros(size)
    q = 1.0 - p
    for k in range(n + 1):
        probs[k] = math.comb(n, k) * p ** k * q ** (n - k)
    probs /= probs.sum()
    return TargetDistribution(probs, np.arange(size, dtype=float), f"binomial(n={n}, p={p})",
                              meta={"n": n, "p": p})


def lognormal_pdf(x, mu: float, sigma: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    pos = x > 0
    lx = np.log(x[pos])
    out[pos] = np.exp(-0.5 * ((lx - mu) / sigma) ** 2) / (x[pos] * sigma * math.sqrt(2 * math.pi))
    return out


def lognormal_target(pp: PricingParams, position_qubits: int,
                     truncation_sigmas: float = DEFAULT_TRUNCATION_SIGMAS) -> TargetDistribution:
    """Risk-neutral terminal price law sampled on 2**N equally spaced prices.

    The grid spans mean +- ``truncation_sigmas`` standard deviations of the
    log-normal itself (floored at 0); probabilities are the density at each
    grid point, renormalised.
    """
    if position_qubits < 1:
        raise DomainError(f"position_qubits must be >= 1, got {position_qubits}")
    if not truncation_sigmas > 0:
        raise DomainError(f"truncation_sigmas must be > 0, got {truncation_sigmas}")
    if pp.volatility <= 0:
        raise DomainError("log-normal target needs volatility > 0")
    mu, sigma = pp.log_moments()
    mean = math.exp(mu + 0.5 * sigma ** 2)
    std = mean * math.sqrt(math.expm1(sigma ** 2))
    lo = max(0.0, mean - truncation_sigmas * std)
    hi = mean + truncation_sigmas * std
    grid = np.linspace(lo, hi, 1 << position_qubits)
    dens = lognormal_pdf(grid, mu, sigma)
    total = dens.sum()
    if not total > 0:
        raise DomainError("log-normal density vanishes on the whole grid")
    return TargetDistribution(dens / total, grid, "log-normal terminal price",
                              meta={"mu": mu, "sigma": sigma, "mean": mean, "std": std,
                                    "truncation_sigmas": truncation_sigmas})
