"""Loss functions between trained and target position distributions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, ValidationError
from .walk import MultiSSQWConfig, run_multi_ssqw

KL_EPSILON = 1e-10
NORM_TOL = 1e-9


@dataclass(frozen=True)
class TargetDistribution:
    probs: np.ndarray
    bin_labels: np.ndarray
    name: str = "target"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        p = np.asarray(self.probs, dtype=float)
        labels = np.asarray(self.bin_labels, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValidationError("probs must be a non-empty vector")
        if labels.shape != p.shape:
            raise ValidationError(f"{labels.size} labels for {p.size} probabilities")
        if np.any(p < 0) or not np.all(np.isfinite(p)):
            raise ValidationError("probs must be finite and nonnegative")
        if abs(p.sum() - 1.0) > NORM_TOL:
            raise ValidationError(f"probs sum to {p.sum():.12g}, not 1")
        if p.size > 1 and np.any(np.diff(labels) <= 0):
            raise ValidationError("bin labels must be strictly increasing")
        object.__setattr__(self, "probs", p)
        object.__setattr__(self, "bin_labels", labels)

    @property
    def position_qubits(self) -> int:
        n = int(np.log2(self.probs.size))
        if 1 << n != self.probs.size:
            raise DomainError(f"{self.probs.size} bins is not a power of two")
        return n

    def mode_index(self) -> int:
        return int(np.argmax(self.probs))

    def mean(self) -> float:
        return float(self.probs @ self.bin_labels)


@dataclass(frozen=True)
class LossReport:
    mse: float
    kl: float
    combined: float

    def as_dict(self) -> dict:
        return {"mse": self.mse, "kl": self.kl, "combined": self.combined}


def _pair(p, q) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    if p.shape != q.shape:
        raise DomainError(f"length mismatch: {p.shape} vs {q.shape}")
    return p, q


def mse(p, q) -> float:
    p, q = _pair(p, q)
    d = p - q
    return float(d @ d / d.size)


def kl_divergence(target, trained, epsilon: float = KL_EPSILON) -> float:
    """D(target || trained), with trained clamped below at ``epsilon``."""
    if not epsilon > 0:
        raise DomainError(f"epsilon must be > 0, got {epsilon}")
    p, q = _pair(target, trained)
    m = p > 0
    return float(np.sum(p[m] * np.log(p[m] / np.maximum(q[m], epsilon))))


def total_variation(p, q) -> float:
    p, q = _pair(p, q)
    return 0.5 * float(np.abs(p - q).sum())


def losses(target, trained, kl_weight: float = 1.0, epsilon: float = KL_EPSILON) -> LossReport:
    a = mse(target, trained)
    b = kl_divergence(target, trained, epsilon)
    return LossReport(a, b, a + kl_weight * b)


def evaluate(params, config: MultiSSQWConfig, target: TargetDistribution,
             kl_weight: float = 1.0, epsilon: float = KL_EPSILON) -> LossReport:
    if target.probs.size != config.num_positions:
        raise DomainError(
            f"target has {target.probs.size} bins but the walk has {config.num_positions} positions")
    return losses(target.probs, run_multi_ssqw(config, params), kl_weight, epsilon)


class Objective:
    """Picklable scalar objective ``params -> combined loss`` for the optimizer."""

    def __init__(self, config: MultiSSQWConfig, target: TargetDistribution,
                 kl_weight: float = 1.0, epsilon: float = KL_EPSILON):
        if target.probs.size != config.num_positions:
            raise DomainError(
                f"target has {target.probs.size} bins but the walk has "
                f"{config.num_positions} positions")
        self.config = config
        self.target = target
        self.kl_weight = kl_weight
        self.epsilon = epsilon

    def __call__(self, params) -> float:
        return evaluate(params, self.config, self.target, self.kl_weight, self.epsilon).combined
