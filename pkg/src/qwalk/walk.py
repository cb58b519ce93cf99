"""
Discrete-time, split-step and multi-walker split-step quantum walks.

The position register is cyclic: shifts are +-1 modulo 2**N. A walker is a
pair of coins applied as ``S_minus . C2 . S_plus . C1``; ``S_plus`` moves the
|up> (coin 0) component one site right and ``S_minus`` moves the |down>
(coin 1) component one site left.

Parameter vectors are flat arrays laid out as::

    [init.theta, init.phi, init.lambda,
     w1.c1.theta, w1.c1.phi, w1.c1.lambda, w1.c2.theta, w1.c2.phi, w1.c2.lambda,
     w2.c1.theta, ...]
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError
from .statevector import (StateVector, apply_1q, apply_mcx, marginal_probs,
                          new_state, pair_kernel)

TWO_PI = 2.0 * math.pi
UP, DOWN = 0, 1


class ReachabilityWarning(UserWarning):
    """Target mass sits where the walk cannot deliver any probability."""


@dataclass(frozen=True)
class CoinParams:
    theta: float = 0.0
    phi: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.theta, self.phi, self.lam)):
            raise DomainError(f"coin angles must be finite, got {self}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.theta, self.phi, self.lam)

    def canonical(self) -> "CoinParams":
        return CoinParams(*(float(np.mod(v, TWO_PI)) for v in self.as_tuple()))


@dataclass(frozen=True)
class WalkerParams:
    coin1: CoinParams = field(default_factory=CoinParams)
    coin2: CoinParams = field(default_factory=CoinParams)


@dataclass(frozen=True)
class MultiSSQWConfig:
    position_qubits: int
    num_walkers: int = 1
    steps: int = 1
    initial_position: int = 0
    # starting value for the trainable preparation coin; the fitted value lives in the ParamVector
    initial_coin: CoinParams = field(default_factory=CoinParams)

    def __post_init__(self):
        if self.position_qubits < 1:
            raise DomainError(f"position_qubits must be >= 1, got {self.position_qubits}")
        if self.num_walkers < 1:
            raise DomainError(f"num_walkers must be >= 1, got {self.num_walkers}")
        if self.steps < 1:
            raise DomainError(f"steps must be >= 1, got {self.steps}")
        if not 0 <= self.initial_position < self.num_positions:
            raise DomainError(
                f"initial_position {self.initial_position} outside [0, {self.num_positions})")

    @property
    def num_positions(self) -> int:
        return 1 << self.position_qubits

    @property
    def num_params(self) -> int:
        return param_count(self.num_walkers)

    def default_params(self) -> np.ndarray:
        """``initial_coin`` followed by all-zero (identity) walker coins."""
        return pack_params(self.initial_coin, [WalkerParams()] * self.num_walkers)

    def reachable_mask(self) -> np.ndarray:
        """Sites within ``num_walkers * steps`` cyclic moves of the start."""
        reach = self.num_walkers * self.steps
        m = self.num_positions
        mask = np.zeros(m, dtype=bool)
        if 2 * reach + 1 >= m:
            mask[:] = True
        else:
            mask[(self.initial_position + np.arange(-reach, reach + 1)) % m] = True
        return mask


def param_count(num_walkers: int) -> int:
    return 3 + 6 * num_walkers


def coin_matrix(p: CoinParams | Sequence[float]) -> np.ndarray:
    """General U3-style coin [[c, -e^{il}s], [e^{ip}s, e^{i(l+p)}c]] with c, s = cos, sin(theta/2)."""
    theta, phi, lam = p.as_tuple() if isinstance(p, CoinParams) else p
    if not all(math.isfinite(v) for v in (theta, phi, lam)):
        raise DomainError("coin angles must be finite")
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([
        [c, -np.exp(1j * lam) * s],
        [np.exp(1j * phi) * s, np.exp(1j * (lam + phi)) * c],
    ], dtype=complex)


def pack_params(initial_coin: CoinParams, walkers: Sequence[WalkerParams]) -> np.ndarray:
    flat = list(initial_coin.as_tuple())
    for w in walkers:
        flat += list(w.coin1.as_tuple()) + list(w.coin2.as_tuple())
    return np.array(flat, dtype=float)


def unpack_params(params: Sequence[float]) -> tuple[CoinParams, list[WalkerParams]]:
    x = np.asarray(params, dtype=float)
    if x.ndim != 1 or x.size < 9 or (x.size - 3) % 6:
        raise DomainError(f"parameter vector length {x.size} is not 3 + 6*num_walkers")
    init = CoinParams(*map(float, x[:3]))
    walkers = [
        WalkerParams(CoinParams(*map(float, x[k:k + 3])), CoinParams(*map(float, x[k + 3:k + 6])))
        for k in range(3, x.size, 6)
    ]
    return init, walkers


def canonicalize(params: Sequence[float]) -> np.ndarray:
    return np.mod(np.asarray(params, dtype=float), TWO_PI)


# ---------------------------------------------------------------------------
# gate-level shifts (multi-controlled X cascades)

def _num_position_qubits(state: StateVector) -> int:
    n = state.num_qubits - 1
    if n < 1:
        raise DomainError("state needs at least one position qubit")
    return n


def apply_increment(state: StateVector, coin_value: int = UP) -> StateVector:
    """x -> x+1 mod 2**N on the slice where the coin equals ``coin_value``.

    Ripple cascade, most significant bit first: bit k flips when the coin
    matches and every lower position bit is 1.
    """
    n = _num_position_qubits(state)
    for k in range(n, 0, -1):
        controls = [(0, coin_value)] + [(j, 1) for j in range(1, k)]
        state = apply_mcx(state, controls, k)
    return state


def apply_decrement(state: StateVector, coin_value: int = DOWN) -> StateVector:
    """x -> x-1 mod 2**N on the slice where the coin equals ``coin_value``."""
    n = _num_position_qubits(state)
    for k in range(n, 0, -1):
        controls = [(0, coin_value)] + [(j, 0) for j in range(1, k)]
        state = apply_mcx(state, controls, k)
    return state


def dtqw_step(state: StateVector, coin) -> StateVector:
    state = apply_1q(state, coin, 0)
    state = apply_increment(state, UP)
    return apply_decrement(state, DOWN)


def ssqw_step(state: StateVector, w: WalkerParams) -> StateVector:
    state = apply_1q(state, coin_matrix(w.coin1), 0)
    state = apply_increment(state, UP)
    state = apply_1q(state, coin_matrix(w.coin2), 0)
    return apply_decrement(state, DOWN)


def position_distribution(state: StateVector) -> np.ndarray:
    return marginal_probs(state, range(1, state.num_qubits))


# ---------------------------------------------------------------------------
# DTQW demos

DTQW_COINS = {
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "H": np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2),
}

DTQW_INITIAL_COINS = {
    "up": np.array([1, 0], dtype=complex),
    "down": np.array([0, 1], dtype=complex),
    "symmetric": np.array([1, 1j], dtype=complex) / math.sqrt(2),
}


def min_dtqw_qubits(steps: int) -> int:
    """Smallest N with 2**N >= 2*steps + 1."""
    return max(1, math.ceil(math.log2(2 * steps + 1)))


def dtqw_distribution(coin_choice: str, initial_coin_state: str, steps: int,
                      position_qubits: int | None = None) -> np.ndarray:
    """Position distribution of a plain DTQW started at the register's centre 2**(N-1)."""
    if coin_choice not in DTQW_COINS:
        raise DomainError(f"coin must be one of {sorted(DTQW_COINS)}, got {coin_choice!r}")
    if initial_coin_state not in DTQW_INITIAL_COINS:
        raise DomainError(
            f"initial state must be one of {sorted(DTQW_INITIAL_COINS)}, got {initial_coin_state!r}")
    if steps < 0:
        raise DomainError(f"steps must be >= 0, got {steps}")
    need = min_dtqw_qubits(steps)
    n = need if position_qubits is None else position_qubits
    if n < need:
        raise DomainError(f"{steps} steps need at least N={need} position qubits, got N={n}")
    centre = 1 << (n - 1)
    amps = np.zeros(1 << (n + 1), dtype=complex)
    amps[2 * centre: 2 * centre + 2] = DTQW_INITIAL_COINS[initial_coin_state]
    state = StateVector(n + 1, amps)
    coin = DTQW_COINS[coin_choice]
    for _ in range(steps):
        state = dtqw_step(state, coin)
    return position_distribution(state)


# ---------------------------------------------------------------------------
# multi-SSQW

def _check_params(config: MultiSSQWConfig, params) -> np.ndarray:
    x = np.asarray(params, dtype=float)
    if x.shape != (config.num_params,):
        raise DomainError(
            f"expected {config.num_params} parameters for {config.num_walkers} walkers, "
            f"got shape {x.shape}")
    return x


def _walker_gates(x: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    return [(coin_matrix(x[k:k + 3]), coin_matrix(x[k + 3:k + 6])) for k in range(3, x.size, 6)]


def prepare_initial_state(config: MultiSSQWConfig, initial_coin) -> StateVector:
    state = new_state(config.position_qubits + 1, 2 * config.initial_position)
    return apply_1q(state, coin_matrix(initial_coin), 0)


def _evolve(psi: np.ndarray, gates, steps: int) -> np.ndarray:
    """Run ``steps`` rounds of every walker on a (positions, 2) amplitude array.

    Same arithmetic as ssqw_step; cyclic shifts are done with np.roll,
    which is the same permutation the MCX cascade performs.
    """
    up, down = psi[:, UP].copy(), psi[:, DOWN].copy()
    for _ in range(steps):
        for c1, c2 in gates:
            up, down = pair_kernel(c1, up, down)
            up = np.roll(up, 1)
            up, down = pair_kernel(c2, up, down)
            down = np.roll(down, -1)
    return np.stack([up, down], axis=1)


def evolve_state(state: StateVector, config: MultiSSQWConfig, params) -> StateVector:
    """Apply the walker rounds (not the initial coin) to an arbitrary state."""
    x = _check_params(config, params)
    if state.num_qubits != config.position_qubits + 1:
        raise DomainError("state size does not match config")
    psi = _evolve(state.amplitudes.reshape(-1, 2), _walker_gates(x), config.steps)
    return StateVector(state.num_qubits, psi.reshape(-1))


def run_multi_ssqw_state(config: MultiSSQWConfig, params) -> StateVector:
    x = _check_params(config, params)
    return evolve_state(prepare_initial_state(config, x[:3]), config, x)


def run_multi_ssqw(config: MultiSSQWConfig, params) -> np.ndarray:
    """Position distribution after ``steps`` rounds of all walkers, walker 1 first."""
    x = _check_params(config, params)
    m = config.num_positions
    init = coin_matrix(x[:3])
    psi = np.zeros((m, 2), dtype=complex)
    psi[config.initial_position] = init[:, UP]
    psi = _evolve(psi, _walker_gates(x), config.steps)
    probs = (psi.real ** 2 + psi.imag ** 2).sum(axis=1)
    return probs


def walk_unitary(config: MultiSSQWConfig, params) -> np.ndarray:
    """Dense matrix of the walker rounds, built column by column from basis states."""
    x = _check_params(config, params)
    gates = _walker_gates(x)
    dim = 2 * config.num_positions
    cols = np.eye(dim, dtype=complex)
    out = np.empty((dim, dim), dtype=complex)
    for j in range(dim):
        out[:, j] = _evolve(cols[:, j].reshape(-1, 2), gates, config.steps).reshape(-1)
    return out


def check_reachability(config: MultiSSQWConfig, target_probs, tol: float = 1e-12) -> float:
    """Warn when target mass lies outside the reachable window; returns that mass."""
    p = np.asarray(target_probs, dtype=float)
    outside = float(p[~config.reachable_mask()].sum())
    if outside > tol:
        warnings.warn(
            f"{outside:.3g} of the target mass lies more than "
            f"{config.num_walkers * config.steps} sites from position {config.initial_position}",
            ReachabilityWarning, stacklevel=2)
    return outside
