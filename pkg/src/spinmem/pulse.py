"""Multi-frequency excitation: a comb of circularly polarized harmonics.

Each stored bit selects the sign of one harmonic's amplitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_SPACING_HZ = 200.0
DEFAULT_AMPLITUDE_HZ = 3.0
DEFAULT_DURATION_S = 0.3


@dataclass(frozen=True)
class Harmonic:
    offset: float
    amplitude: float
    phase: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.offset):
            raise ValueError("harmonic offset must be finite")
        if not (math.isfinite(self.amplitude) and self.amplitude != 0):
            raise ValueError("harmonic amplitude must be finite and nonzero")


def default_sample_step(harmonics: Sequence[Harmonic]) -> float:
    fmax = max((abs(h.offset) for h in harmonics), default=0.0)
    if fmax == 0:
        return 1e-4
    return 1 / (20 * fmax)


@dataclass(frozen=True)
class PulseProgram:
    harmonics: tuple[Harmonic, ...]
    duration: float = DEFAULT_DURATION_S
    sample_step: float | None = field(default=None)

    def __post_init__(self):
        harmonics = tuple(self.harmonics)
        object.__setattr__(self, "harmonics", harmonics)
        if self.sample_step is None:
            object.__setattr__(self, "sample_step", default_sample_step(harmonics))
        if not self.duration > 0:
            raise ValueError("pulse duration must be positive")
        if not self.sample_step > 0:
            raise ValueError("sample_step must be positive")
        offsets = [h.offset for h in harmonics]
        if len(set(offsets)) != len(offsets):
            raise ValueError("harmonic offsets must be pairwise distinct")
        fmax = max((abs(f) for f in offsets), default=0.0)
        if fmax > 0 and self.sample_step > 1 / (10 * fmax) * (1 + 1e-12):
            raise ValueError(
                f"sample_step {self.sample_step:g} s undersamples the {fmax:g} Hz harmonic; "
                f"need <= {1 / (10 * fmax):g} s"
            )

    def midpoints(self, step: float | None = None) -> tuple[np.ndarray, float]:
        """Midpoints of equal steps no longer than ``step`` spanning [0, duration], and the step width."""
        step = self.sample_step if step is None else step
        k = max(1, int(math.ceil(self.duration / step - 1e-9)))
        width = self.duration / k
        return (np.arange(k) + 0.5) * width, width


def comb_offsets(count: int, spacing: float = DEFAULT_SPACING_HZ, base_offset: float | None = None):
    if base_offset is None:
        base_offset = -(count - 1) / 2 * spacing
    return base_offset + spacing * np.arange(count)


def bits_to_harmonics(
    bits: Sequence[int],
    base_offset: float | None = None,
    spacing: float = DEFAULT_SPACING_HZ,
    amplitude: float = DEFAULT_AMPLITUDE_HZ,
) -> list[Harmonic]:
    """Harmonic k sits at base_offset + k*spacing with amplitude +amplitude for a 1, -amplitude for a 0.

    ``base_offset`` defaults to centring the comb on the carrier.
    """
    bits = list(bits)
    if not bits:
        raise ValueError("cannot build a comb from an empty bit array")
    if spacing <= 0 or amplitude <= 0:
        raise ValueError("spacing and amplitude must be positive")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bits must be 0 or 1")
    offsets = comb_offsets(len(bits), spacing, base_offset)
    return [
        Harmonic(offset=float(f), amplitude=amplitude if b else -amplitude)
        for f, b in zip(offsets, bits)
    ]


def rf_field(pulse: PulseProgram, t):
    """Complex RF amplitude in Hz at time(s) ``t``.

    The real part drives the collective I_x, the imaginary part I_y.
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0) or np.any(t_arr > pulse.duration):
        raise ValueError(f"t outside the pulse window [0, {pulse.duration}]")
    return _field(pulse.harmonics, t_arr)


def _field(harmonics, t):
    out = np.zeros(np.shape(t), dtype=complex)
    for h in harmonics:
        out = out + h.amplitude * np.exp(1j * (2 * np.pi * h.offset * t + h.phase))
    return out[()] if out.ndim == 0 else out


def sampled_waveform(pulse: PulseProgram) -> tuple[np.ndarray, np.ndarray, float]:
    """Midpoint times, complex field and step width at the pulse's sample_step."""
    t, width = pulse.midpoints()
    return t, _field(pulse.harmonics, t), width


def export_shape(pulse: PulseProgram) -> str:
    """Render the waveform as a shape file.

    Rows are ``amplitude_rel,phase_deg`` with the magnitude normalised to a
    peak of 1 and the absolute scale stored in the ``scale_hz`` header.
    """
    if pulse.duration <= 0:
        raise ValueError("cannot export a zero-duration pulse")
    _, f, width = sampled_waveform(pulse)
    mag = np.abs(f)
    scale = float(mag.max())
    rel = mag / scale if scale > 0 else mag
    phase = np.degrees(np.angle(f)) % 360.0
    phase[phase >= 360.0] = 0.0
    lines = [
        f"# points: {len(f)}",
        f"# step_us: {width * 1e6:.9g}",
        f"# scale_hz: {scale:.9g}",
    ]
    lines += [f"{a:.9g},{p:.9g}" for a, p in zip(rel, phase)]
    return "\n".join(lines) + "\n"


@dataclass
class Shape:
    step: float
    scale: float
    amplitude: np.ndarray
    phase_deg: np.ndarray

    @property
    def field(self) -> np.ndarray:
        return self.scale * self.amplitude * np.exp(1j * np.radians(self.phase_deg))

    @property
    def times(self) -> np.ndarray:
        return (np.arange(len(self.amplitude)) + 0.5) * self.step


def parse_shape(text: str) -> Shape:
    header = {}
    rows = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
        else:
            a, p = line.split(",")
            rows.append((float(a), float(p)))
    for key in ("points", "step_us", "scale_hz"):
        if key not in header:
            raise ValueError(f"shape file is missing the '{key}' header")
    if int(header["points"]) != len(rows):
        raise ValueError(f"header says {header['points']} points but {len(rows)} rows were read")
    arr = np.array(rows, dtype=float).reshape(-1, 2)
    return Shape(
        step=float(header["step_us"]) * 1e-6,
        scale=float(header["scale_hz"]),
        amplitude=arr[:, 0],
        phase_deg=arr[:, 1],
    )
