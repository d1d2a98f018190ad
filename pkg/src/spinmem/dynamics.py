"""Density-matrix propagation under the cluster Hamiltonian plus RF drive, and FID acquisition."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .pulse import PulseProgram, _field
from .spin import SpinSystem, cluster_hamiltonian, collective_operator

TWO_PI = 2 * np.pi
DEFAULT_T2STAR_S = 1 / (np.pi * 12.0)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Traceless deviation density matrix of one cluster."""

    matrix: np.ndarray
    label: str = "evolved"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.einsum("ij,ji->", self.matrix, op))


@dataclass(frozen=True, eq=False)
class Fid:
    samples: np.ndarray
    dwell: float
    acq_delay: float = 0.0
    transients: int = 1

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex).reshape(-1)
        if samples.size == 0:
            raise ValueError("an FID needs at least one sample")
        if not self.dwell > 0:
            raise ValueError("dwell must be positive")
        if self.acq_delay < 0:
            raise ValueError("acquisition delay must be non-negative")
        if self.transients < 1:
            raise ValueError("transients must be >= 1")
        object.__setattr__(self, "samples", samples)

    @property
    def times(self) -> np.ndarray:
        return self.acq_delay + self.dwell * np.arange(self.samples.size)

    def to_csv(self) -> str:
        lines = ["index,time_s,re,im"]
        for k, (t, s) in enumerate(zip(self.times, self.samples)):
            lines.append(f"{k},{t:.12g},{s.real:.12g},{s.imag:.12g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str, transients: int = 1) -> "Fid":
        rows = [line.split(",") for line in text.strip().splitlines()[1:]]
        if len(rows) < 2:
            raise ValueError("FID CSV needs at least two samples")
        t = np.array([float(r[1]) for r in rows])
        s = np.array([float(r[2]) + 1j * float(r[3]) for r in rows])
        return cls(samples=s, dwell=float(t[1] - t[0]), acq_delay=float(t[0]), transients=transients)


def thermal_state(system: SpinSystem) -> DensityMatrix:
    """High-temperature deviation state sum_i Iz_i / n."""
    rho = collective_operator(system.n, "z") / system.n
    return DensityMatrix(rho, label="thermal-deviation")


def _is_hermitian(H: np.ndarray, rtol: float = 1e-12) -> bool:
    scale = max(np.max(np.abs(H)), 1.0)
    return np.max(np.abs(H - H.conj().T)) <= rtol * scale


def step_propagator(H: np.ndarray, dt: float) -> np.ndarray:
    """exp(-i 2pi H dt) for a Hermitian H in Hz."""
    if not _is_hermitian(H):
        raise ValueError("Hamiltonian is not Hermitian")
    if dt <= 0:
        raise ValueError("dt must be positive")
    w, V = np.linalg.eigh(H)
    return (V * np.exp(-1j * TWO_PI * w * dt)) @ V.conj().T


def default_step(system: SpinSystem, pulse: PulseProgram) -> float:
    width = system.bandwidth()
    if width == 0:
        return pulse.sample_step
    return min(pulse.sample_step, 1 / (20 * width))


GAUSS_OFFSET = math.sqrt(3) / 6


def pulse_steps(system: SpinSystem, pulse: PulseProgram, dt: float | None = None):
    """Step midpoints, step width, and the field at the two Gauss-Legendre nodes of each step."""
    t, width = pulse.midpoints(default_step(system, pulse) if dt is None else dt)
    c = GAUSS_OFFSET * width
    return t, width, _field(pulse.harmonics, t - c), _field(pulse.harmonics, t + c)


def magnus_step(H1: np.ndarray, H2: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order Magnus propagator for one step of width ``h``.

    ``H1`` and ``H2`` are the Hamiltonian at the two Gauss-Legendre nodes of
    the step. Returns exp(-i 2pi K), K = h/2 (H1 + H2) - i (sqrt(3)/12) 2pi h^2 [H2, H1].
    """
    K = 0.5 * h * (H1 + H2) - 1j * (math.sqrt(3) / 12 * TWO_PI * h * h) * (H2 @ H1 - H1 @ H2)
    w, V = np.linalg.eigh(K)
    return (V * np.exp(-1j * TWO_PI * w)) @ V.conj().T


def evolve_pulse(
    rho0: DensityMatrix, system: SpinSystem, pulse: PulseProgram, dt: float | None = None
) -> DensityMatrix:
    """Propagate through the pulse in equal steps of at most ``dt`` using :func:`magnus_step`."""
    if rho0.dim != system.dim:
        raise ValueError(f"density matrix is {rho0.dim}-dimensional, system needs {system.dim}")
    H0 = cluster_hamiltonian(system)
    Ix = collective_operator(system.n, "x")
    Iy = collective_operator(system.n, "y")
    _, h, field1, field2 = pulse_steps(system, pulse, dt)
    rho = np.array(rho0.matrix, dtype=complex)
    for f1, f2 in zip(field1, field2):
        U = magnus_step(H0 + f1.real * Ix + f1.imag * Iy, H0 + f2.real * Ix + f2.imag * Iy, h)
        rho = U @ rho @ U.conj().T
    return DensityMatrix(rho, label="evolved")


def free_signal(rho: DensityMatrix, system: SpinSystem, times: np.ndarray) -> np.ndarray:
    """Noiseless Tr[rho(t) I+] under the static cluster Hamiltonian."""
    if rho.dim != system.dim:
        raise ValueError(f"density matrix is {rho.dim}-dimensional, system needs {system.dim}")
    E, V = np.linalg.eigh(cluster_hamiltonian(system))
    r = V.conj().T @ rho.matrix @ V
    p = V.conj().T @ collective_operator(system.n, "+") @ V
    # s(t) = sum_ab r_ab p_ba exp(-i 2pi (E_a - E_b) t)
    weights = r * p.T
    a, b = np.nonzero(np.abs(weights) > 1e-15 * max(np.abs(weights).max(), 1e-300))
    if a.size == 0:
        return np.zeros(len(times), dtype=complex)
    freqs = E[a] - E[b]
    w = weights[a, b]
    times = np.asarray(times, dtype=float)
    out = np.empty(times.size, dtype=complex)
    for start in range(0, times.size, 512):
        chunk = times[start : start + 512]
        out[start : start + 512] = np.exp(-1j * TWO_PI * np.outer(chunk, freqs)) @ w
    return out


def acquire_fid(
    rho: DensityMatrix,
    system: SpinSystem,
    n_points: int,
    dwell: float,
    acq_delay: float = 1e-3,
    t2star: float | None = DEFAULT_T2STAR_S,
    noise_sigma: float = 0.0,
    transients: int = 1,
    seed: int = 0,
) -> Fid:
    """Record the transverse magnetisation after the pulse.

    Samples start at ``acq_delay`` and are spaced by ``dwell``. Each transient
    adds complex Gaussian noise with E|z|^2 = noise_sigma^2; the transients are
    then averaged.
    """
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    if acq_delay < 0:
        raise ValueError("acquisition delay must be non-negative")
    if transients < 1:
        raise ValueError("transients must be >= 1")
    if dwell <= 0:
        raise ValueError("dwell must be positive")
    times = acq_delay + dwell * np.arange(n_points)
    samples = free_signal(rho, system, times)
    if t2star is not None:
        samples = samples * np.exp(-times / t2star)
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        noise = np.zeros(n_points, dtype=complex)
        per_component = noise_sigma / math.sqrt(2)
        for _ in range(transients):
            noise += rng.normal(0, per_component, n_points) + 1j * rng.normal(0, per_component, n_points)
        samples = samples + noise / transients
    return Fid(samples=samples, dwell=dwell, acq_delay=acq_delay, transients=transients)
