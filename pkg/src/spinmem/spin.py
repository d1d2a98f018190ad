"""Spin-1/2 cluster model: product operators and secular Hamiltonians.

All Hamiltonians are returned in Hz. The factor 2*pi is applied only when a
propagator is built (see :mod:`spinmem.dynamics`).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_DENSE_SPINS = 12

_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class DenseLimitError(ValueError):
    """Raised when a system is too large for dense 2^n x 2^n matrices."""


def _check_size(n: int, max_spins: int = MAX_DENSE_SPINS) -> None:
    if n < 1:
        raise ValueError(f"spin count must be >= 1, got {n}")
    if n > max_spins:
        raise DenseLimitError(
            f"{n} spins exceeds the dense simulation limit of {max_spins} "
            f"(a 2^{n} x 2^{n} matrix)"
        )


@dataclass(frozen=True, eq=False)
class SpinSystem:
    """A cluster of ``n`` spins-1/2 with resonance offsets and dipolar couplings (Hz)."""

    offsets: np.ndarray
    couplings: np.ndarray

    def __post_init__(self):
        offsets = np.asarray(self.offsets, dtype=float).reshape(-1)
        couplings = np.asarray(self.couplings, dtype=float)
        n = offsets.size
        _check_size(n)
        if couplings.shape != (n, n):
            raise ValueError(f"couplings must be {n}x{n}, got {couplings.shape}")
        if not (np.all(np.isfinite(offsets)) and np.all(np.isfinite(couplings))):
            raise ValueError("offsets and couplings must be finite")
        if not np.array_equal(couplings, couplings.T):
            raise ValueError("coupling matrix is not symmetric")
        if np.any(np.diag(couplings) != 0):
            raise ValueError("coupling matrix must have a zero diagonal")
        offsets.flags.writeable = False
        couplings = couplings.copy()
        couplings.flags.writeable = False
        object.__setattr__(self, "offsets", offsets)
        object.__setattr__(self, "couplings", couplings)

    @property
    def n(self) -> int:
        return self.offsets.size

    @property
    def dim(self) -> int:
        return 2**self.n

    def bandwidth(self) -> float:
        """Largest |offset| plus the largest absolute coupling row sum, Hz."""
        return float(np.max(np.abs(self.offsets)) + np.max(np.abs(self.couplings).sum(axis=1)))

    def __eq__(self, other):
        if not isinstance(other, SpinSystem):
            return NotImplemented
        return np.array_equal(self.offsets, other.offsets) and np.array_equal(
            self.couplings, other.couplings
        )

    def to_json(self) -> str:
        return json.dumps(
            {
                "n": self.n,
                "offsets_hz": self.offsets.tolist(),
                "couplings_hz": self.couplings.tolist(),
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "SpinSystem":
        data = json.loads(text)
        system = cls(offsets=data["offsets_hz"], couplings=data["couplings_hz"])
        if system.n != data["n"]:
            raise ValueError(f"'n' is {data['n']} but {system.n} offsets were given")
        return system


@lru_cache(maxsize=256)
def _single_spin_operator(n: int, i: int, axis: str) -> np.ndarray:
    op = np.kron(np.kron(np.eye(2**i), 0.5 * _PAULI[axis]), np.eye(2 ** (n - i - 1)))
    op.flags.writeable = False
    return op


def single_spin_operator(n: int, i: int, axis: str) -> np.ndarray:
    """I_axis for spin ``i`` of ``n``; spin 0 is the most significant tensor slot."""
    _check_size(n)
    if not 0 <= i < n:
        raise IndexError(f"spin index {i} out of range for {n} spins")
    if axis not in _PAULI:
        raise ValueError(f"axis must be one of x, y, z; got {axis!r}")
    return _single_spin_operator(n, i, axis)


def collective_operator(n: int, axis: str) -> np.ndarray:
    """Sum over all spins of I_axis. ``axis`` may also be '+' or '-'."""
    _check_size(n)
    if axis == "+":
        return collective_operator(n, "x") + 1j * collective_operator(n, "y")
    if axis == "-":
        return collective_operator(n, "x") - 1j * collective_operator(n, "y")
    if axis not in _PAULI:
        raise ValueError(f"axis must be one of x, y, z, +, -; got {axis!r}")
    return sum(single_spin_operator(n, i, axis) for i in range(n))


def _iz_diagonals(n: int) -> np.ndarray:
    # row i: diagonal of I_z^i, +1/2 where bit i (MSB first) is 0
    states = np.arange(2**n)
    bits = (states[None, :] >> (n - 1 - np.arange(n))[:, None]) & 1
    return 0.5 - bits


def dipolar_hamiltonian(system: SpinSystem) -> np.ndarray:
    """Secular homonuclear dipolar Hamiltonian.

    H = sum_{i<j} d_ij (2 Iz_i Iz_j - Ix_i Ix_j - Iy_i Iy_j)

    The flip-flop part is written as -(1/2)(I+_i I-_j + I-_i I+_j), which only
    connects basis states differing by swapping spins i and j.
    """
    n, d = system.n, system.couplings
    dim = 2**n
    iz = _iz_diagonals(n)
    H = np.zeros((dim, dim), dtype=complex)
    states = np.arange(dim)
    diag = np.zeros(dim)
    for i in range(n):
        for j in range(i + 1, n):
            if d[i, j] == 0:
                continue
            diag += 2 * d[i, j] * iz[i] * iz[j]
            bi = n - 1 - i
            bj = n - 1 - j
            differ = ((states >> bi) & 1) != ((states >> bj) & 1)
            src = states[differ]
            dst = src ^ ((1 << bi) | (1 << bj))
            H[dst, src] += -0.5 * d[i, j]
    H[states, states] += diag
    return H


def zeeman_hamiltonian(system: SpinSystem) -> np.ndarray:
    """Rotating-frame offset term sum_i nu_i Iz_i, Hz (diagonal)."""
    diag = system.offsets @ _iz_diagonals(system.n)
    return np.diag(diag).astype(complex)


def cluster_hamiltonian(system: SpinSystem) -> np.ndarray:
    return dipolar_hamiltonian(system) + zeeman_hamiltonian(system)


GEOMETRIES = ("chain", "ring")


def generate_spin_system(
    geometry: str, n: int, d_nn: float, spread: float = 0.0, seed: int = 0
) -> SpinSystem:
    """Place ``n`` spins at unit spacing and couple them with d_ij = d_nn / r_ij^3.

    Ring spins sit on a circle whose chord between neighbours is 1. Offsets
    are uniform over [-spread/2, spread/2], reproducible from ``seed``.
    """
    if geometry not in GEOMETRIES:
        raise ValueError(f"unknown geometry {geometry!r}; expected one of {GEOMETRIES}")
    _check_size(n)
    if d_nn < 0:
        raise ValueError("d_nn must be non-negative")
    if geometry == "chain" or n < 3:
        pos = np.stack([np.arange(n, dtype=float), np.zeros(n)], axis=1)
    else:
        radius = 1 / (2 * math.sin(math.pi / n))
        angle = 2 * math.pi * np.arange(n) / n
        pos = radius * np.stack([np.cos(angle), np.sin(angle)], axis=1)
    r = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    couplings = np.zeros((n, n))
    mask = ~np.eye(n, dtype=bool)
    couplings[mask] = d_nn / r[mask] ** 3
    couplings = 0.5 * (couplings + couplings.T)
    rng = np.random.default_rng(seed)
    offsets = rng.uniform(-spread / 2, spread / 2, size=n)
    return SpinSystem(offsets=offsets, couplings=couplings)


def count_transitions(n: int) -> int:
    """Upper bound on the number of allowed transitions, binomial(2n, n+1)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return math.comb(2 * n, n + 1)
