"""European call payoff on a discrete price grid, and the Black-Scholes closed form."""
from __future__ import annotations

import math

import numpy as np

from .errors import DomainError
from .objective import TargetDistribution
from .targets import PricingParams


def norm_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def call_payoff_expectation(dist: TargetDistribution, strike: float, discount: bool = False,
                            rate: float = 0.0, maturity_days: float = 0.0, probs=None) -> float:
    """sum_i p_i * max(S_i - K, 0) over the distribution's price labels.

    ``probs`` overrides the distribution's own probabilities (e.g. a trained
    distribution on the same grid). Discounting multiplies by exp(-r T/365).
    """
    if strike <= 0:
        raise DomainError(f"strike must be positive, got {strike}")
    prices = dist.bin_labels
    if np.any(prices < 0):
        raise DomainError("distribution labels are not prices (negative values)")
    p = dist.probs if probs is None else np.asarray(probs, dtype=float)
    if p.shape != prices.shape:
        raise DomainError(f"{p.size} probabilities for {prices.size} prices")
    value = float(p @ np.maximum(prices - strike, 0.0))
    if discount:
        value *= math.exp(-rate * maturity_days / 365.0)
    return value


def black_scholes_call(pp: PricingParams) -> float:
    s, k, r, tau = pp.spot, pp.strike, pp.rate, pp.tau
    df = math.exp(-r * tau)
    if pp.volatility == 0.0:
        return max(s - k * df, 0.0)
    sd = pp.volatility * math.sqrt(tau)
    d1 = (math.log(s / k) + (r + 0.5 * pp.volatility ** 2) * tau) / sd
    d2 = d1 - sd
    return s * norm_cdf(d1) - k * df * norm_cdf(d2)


def undiscounted_call(pp: PricingParams) -> float:
    """E[max(S_T - K, 0)] under the risk-neutral law, i.e. e^{r tau} times the price."""
    return black_scholes_call(pp) * math.exp(pp.rate * pp.tau)
