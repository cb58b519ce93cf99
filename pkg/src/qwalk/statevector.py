"""
Dense complex statevector engine.

Qubit 0 is the coin qubit and qubits 1..N hold the position register.
Basis index bit q corresponds to qubit q (little-endian), so the position
index is ``basis_index >> 1`` and the coin value is ``basis_index & 1``.
Coin value 0 is |up> and coin value 1 is |down>.

All gate functions are pure: they return a new StateVector and leave the
input untouched.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DomainError, ValidationError

UNITARY_TOL = 1e-10


@dataclass(frozen=True)
class StateVector:
    num_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.num_qubits < 1:
            raise DomainError(f"num_qubits must be >= 1, got {self.num_qubits}")
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.num_qubits,):
            raise DomainError(
                f"expected {1 << self.num_qubits} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return 1 << self.num_qubits

    def norm(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def new_state(num_qubits: int, basis_index: int = 0) -> StateVector:
    """Computational basis state |basis_index> on ``num_qubits`` qubits."""
    if num_qubits < 1:
        raise DomainError(f"num_qubits must be >= 1, got {num_qubits}")
    dim = 1 << num_qubits
    if not 0 <= basis_index < dim:
        raise DomainError(f"basis_index {basis_index} outside [0, {dim})")
    amps = np.zeros(dim, dtype=complex)
    amps[basis_index] = 1.0
    return StateVector(num_qubits, amps)


def from_amplitudes(amplitudes: Sequence[complex], normalize: bool = False) -> StateVector:
    amps = np.asarray(amplitudes, dtype=complex)
    n = int(round(np.log2(amps.size))) if amps.size else 0
    if amps.size == 0 or (1 << n) != amps.size:
        raise DomainError(f"amplitude count {amps.size} is not a power of two")
    if normalize:
        amps = amps / np.linalg.norm(amps)
    return StateVector(n, amps)


def is_unitary(gate, tol: float = UNITARY_TOL) -> bool:
    g = np.asarray(gate, dtype=complex)
    return g.shape == (2, 2) and np.allclose(g.conj().T @ g, np.eye(2), rtol=0, atol=tol)


def _check_qubit(state: StateVector, q: int, what: str = "qubit") -> None:
    if not 0 <= q < state.num_qubits:
        raise DomainError(f"{what} index {q} outside [0, {state.num_qubits})")


def _as_gate(gate, strict: bool) -> np.ndarray:
    g = np.asarray(gate, dtype=complex)
    if g.shape != (2, 2):
        raise DomainError(f"gate must be 2x2, got shape {g.shape}")
    if strict and not is_unitary(g):
        raise ValidationError("gate is not unitary within 1e-10")
    return g


def pair_kernel(g: np.ndarray, a0: np.ndarray, a1: np.ndarray):
    """The 2x2 update shared by every gate path, so all paths agree bit for bit."""
    return g[0, 0] * a0 + g[0, 1] * a1, g[1, 0] * a0 + g[1, 1] * a1


def _apply_on_pairs(amps: np.ndarray, gate: np.ndarray, target: int,
                    controls: Iterable[tuple[int, int]]) -> np.ndarray:
    """Apply ``gate`` to every (bit target = 0, 1) amplitude pair whose control bits match."""
    idx = np.arange(amps.size)
    sel = (idx >> target) & 1 == 0
    for q, v in controls:
        sel &= (idx >> q) & 1 == v
    i0 = idx[sel]
    i1 = i0 | (1 << target)
    a0 = amps[i0]
    a1 = amps[i1]
    out = amps.copy()
    out[i0], out[i1] = pair_kernel(gate, a0, a1)
    return out


def apply_1q(state: StateVector, gate, target: int, strict: bool = False) -> StateVector:
    _check_qubit(state, target, "target")
    g = _as_gate(gate, strict)
    n = state.num_qubits
    # view as (high bits, target bit, low bits)
    psi = state.amplitudes.reshape(1 << (n - target - 1), 2, 1 << target)
    out = np.empty_like(psi)
    out[:, 0, :], out[:, 1, :] = pair_kernel(g, psi[:, 0, :], psi[:, 1, :])
    return StateVector(n, out.reshape(-1))


def apply_controlled_1q(state: StateVector, gate, control: int, control_value: int,
                        target: int, strict: bool = False) -> StateVector:
    _check_qubit(state, control, "control")
    _check_qubit(state, target, "target")
    if control == target:
        raise DomainError("control and target must differ")
    if control_value not in (0, 1):
        raise DomainError(f"control_value must be 0 or 1, got {control_value}")
    g = _as_gate(gate, strict)
    return StateVector(state.num_qubits,
                       _apply_on_pairs(state.amplitudes, g, target, [(control, control_value)]))


_X = np.array([[0, 1], [1, 0]], dtype=complex)


def apply_mcx(state: StateVector, controls: Sequence[tuple[int, int]], target: int) -> StateVector:
    """X on ``target`` wherever every ``(qubit, bit)`` control matches."""
    _check_qubit(state, target, "target")
    seen = {target}
    for q, v in controls:
        _check_qubit(state, q, "control")
        if q in seen:
            raise DomainError(f"duplicate qubit index {q}")
        if v not in (0, 1):
            raise DomainError(f"control bit must be 0 or 1, got {v}")
        seen.add(q)
    # X is a pure permutation, so swap instead of doing arithmetic
    amps = state.amplitudes
    idx = np.arange(amps.size)
    sel = (idx >> target) & 1 == 0
    for q, v in controls:
        sel &= (idx >> q) & 1 == v
    i0 = idx[sel]
    i1 = i0 | (1 << target)
    out = amps.copy()
    out[i0], out[i1] = amps[i1], amps[i0]
    return StateVector(state.num_qubits, out)


def marginal_probs(state: StateVector, qubits: Sequence[int]) -> np.ndarray:
    """Probability of each bit pattern on ``qubits``.

    Entry j sums |amplitude|^2 over basis states whose selected bits,
    read with ``qubits[0]`` as the least significant bit, spell j.
    """
    qubits = list(qubits)
    if not qubits:
        raise DomainError("marginal needs a non-empty qubit subset")
    if len(set(qubits)) != len(qubits):
        raise DomainError("marginal qubit indices must be distinct")
    for q in qubits:
        _check_qubit(state, q)
    probs = state.probabilities()
    idx = np.arange(state.dim)
    key = np.zeros(state.dim, dtype=np.int64)
    for k, q in enumerate(qubits):
        key |= ((idx >> q) & 1) << k
    return np.bincount(key, weights=probs, minlength=1 << len(qubits))


def position_qubits(state: StateVector) -> list[int]:
    return list(range(1, state.num_qubits))


def sample_probs(probs: np.ndarray, shots: int, rng: np.random.Generator) -> np.ndarray:
    """Empirical frequencies from ``shots`` measurements of a probability vector."""
    if shots < 1:
        raise DomainError(f"shots must be >= 1, got {shots}")
    p = np.clip(np.asarray(probs, dtype=float), 0.0, None)
    counts = rng.multinomial(shots, p / p.sum())
    return counts / shots
