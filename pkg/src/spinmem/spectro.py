"""FID -> spectrum -> signed comb-peak amplitudes -> bits."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dynamics import Fid
from .pulse import DEFAULT_SPACING_HZ, Harmonic

WEAK_REFERENCE_RATIO = 10.0
MARGIN_THRESHOLD = 0.25


class WeakReferenceError(ValueError):
    def __init__(self, message: str, weak: dict[float, float]):
        super().__init__(message)
        self.weak = weak


@dataclass(frozen=True, eq=False)
class Spectrum:
    freqs: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        freqs = np.asarray(self.freqs, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if freqs.shape != values.shape or freqs.ndim != 1:
            raise ValueError("freqs and values must be 1-D arrays of equal length")
        if freqs.size > 1 and np.any(np.diff(freqs) <= 0):
            raise ValueError("frequency grid must be ascending")
        object.__setattr__(self, "freqs", freqs)
        object.__setattr__(self, "values", values)

    @property
    def resolution(self) -> float:
        return float(self.freqs[1] - self.freqs[0]) if self.freqs.size > 1 else 0.0

    def scaled(self, factor: complex) -> "Spectrum":
        return Spectrum(self.freqs, self.values * factor)

    def to_csv(self) -> str:
        lines = ["freq_hz,re,im,mag"]
        for f, v in zip(self.freqs, self.values):
            lines.append(f"{f:.12g},{v.real:.12g},{v.imag:.12g},{abs(v):.12g}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "Spectrum":
        lines = text.strip().splitlines()
        if not lines or lines[0].strip() != "freq_hz,re,im,mag":
            raise ValueError("spectrum CSV must start with the header 'freq_hz,re,im,mag'")
        rows = []
        for lineno, line in enumerate(lines[1:], start=2):
            parts = line.split(",")
            if len(parts) != 4:
                raise ValueError(f"line {lineno}: expected 4 columns, got {len(parts)}")
            rows.append([float(p) for p in parts])
        if not rows:
            raise ValueError("spectrum CSV has no data rows")
        arr = np.array(rows)
        return cls(arr[:, 0], arr[:, 1] + 1j * arr[:, 2])


def spectrum(fid: Fid, zero_fill: int = 1, apodize_hz: float | None = None) -> Spectrum:
    """Fourier transform an FID onto a carrier-centred ascending grid.

    The signal rotates as exp(+i 2pi f t), so sampling from t = delay adds a
    phase 2pi f delay at frequency f; the first-order ramp exp(-i 2pi f delay)
    removes it. ``apodize_hz`` applies exp(-pi lb t) line broadening.
    """
    if zero_fill < 1:
        raise ValueError("zero_fill must be >= 1")
    samples = fid.samples
    if apodize_hz:
        samples = samples * np.exp(-np.pi * apodize_hz * fid.dwell * np.arange(samples.size))
    n_fft = zero_fill * samples.size
    values = np.fft.fftshift(np.fft.fft(samples, n_fft))
    freqs = np.fft.fftshift(np.fft.fftfreq(n_fft, fid.dwell))
    if fid.acq_delay:
        values = values * np.exp(-2j * np.pi * freqs * fid.acq_delay)
    return Spectrum(freqs, values)


def comb_spacing(comb: Sequence[Harmonic]) -> float:
    offsets = np.sort([h.offset for h in comb])
    if offsets.size < 2:
        return DEFAULT_SPACING_HZ
    return float(np.min(np.diff(offsets)))


def _window(spec: Spectrum, f: float, spacing: float) -> np.ndarray:
    if not spec.freqs[0] <= f <= spec.freqs[-1]:
        raise ValueError(f"{f} Hz lies outside the spectral window [{spec.freqs[0]}, {spec.freqs[-1]}]")
    idx = np.flatnonzero(np.abs(spec.freqs - f) <= spacing / 4)
    if idx.size == 0:
        idx = np.array([np.argmin(np.abs(spec.freqs - f))])
    return idx


def _peak_index(spec: Spectrum, f: float, spacing: float) -> int:
    idx = _window(spec, f, spacing)
    return int(idx[np.argmax(np.abs(spec.values[idx]))])


def pick_peak(spec: Spectrum, f: float, spacing: float = DEFAULT_SPACING_HZ) -> complex:
    """Complex value at the largest-magnitude bin within +-spacing/4 of ``f``."""
    return complex(spec.values[_peak_index(spec, f, spacing)])


def value_at(spec: Spectrum, f: float) -> complex:
    """Complex value at the bin nearest ``f``."""
    if not spec.freqs[0] <= f <= spec.freqs[-1]:
        raise ValueError(f"{f} Hz lies outside the spectral window")
    return complex(spec.values[np.argmin(np.abs(spec.freqs - f))])


def off_comb_median(spec: Spectrum, comb: Sequence[Harmonic], spacing: float | None = None) -> float:
    spacing = comb_spacing(comb) if spacing is None else spacing
    mask = np.ones(spec.freqs.size, dtype=bool)
    for h in comb:
        mask &= np.abs(spec.freqs - h.offset) > spacing / 4
    if not mask.any():
        return 0.0
    return float(np.median(np.abs(spec.values[mask])))


@dataclass(frozen=True)
class PhaseCalibration:
    """Reference phase, magnitude and peak position of each comb peak, keyed by offset in Hz.

    When ``peak_freqs`` has an entry, readout samples the spectrum at that
    frequency instead of searching for a maximum again.
    """

    phases: dict[float, float]
    magnitudes: dict[float, float] = field(default_factory=dict)
    peak_freqs: dict[float, float] = field(default_factory=dict)


def calibrate(
    reference: Spectrum,
    comb: Sequence[Harmonic],
    spacing: float | None = None,
    check: bool = True,
) -> PhaseCalibration:
    """Record the phase of each peak of an all-ones reference spectrum.

    Raises :class:`WeakReferenceError` when a reference peak is below
    ``WEAK_REFERENCE_RATIO`` times the median off-comb magnitude.
    """
    spacing = comb_spacing(comb) if spacing is None else spacing
    where = {h.offset: _peak_index(reference, h.offset, spacing) for h in comb}
    peaks = {f: complex(reference.values[k]) for f, k in where.items()}
    if check:
        floor = off_comb_median(reference, comb, spacing)
        weak = {f: abs(v) for f, v in peaks.items() if abs(v) < WEAK_REFERENCE_RATIO * floor}
        if weak:
            detail = ", ".join(f"{f:g} Hz ({m / floor:.1f}x)" for f, m in weak.items())
            raise WeakReferenceError(
                f"reference peaks below {WEAK_REFERENCE_RATIO:g}x the off-comb median: {detail}", weak
            )
    return PhaseCalibration(
        phases={f: float(np.angle(v)) for f, v in peaks.items()},
        magnitudes={f: abs(v) for f, v in peaks.items()},
        peak_freqs={f: float(reference.freqs[k]) for f, k in where.items()},
    )


@dataclass(frozen=True)
class PeakReading:
    offset: float
    value: complex
    projection: float
    bit: int
    margin: float

    @property
    def flagged(self) -> bool:
        return self.margin < MARGIN_THRESHOLD


def read_peaks(
    spec: Spectrum, comb: Sequence[Harmonic], cal: PhaseCalibration, spacing: float | None = None
) -> list[PeakReading]:
    """Project each comb peak onto its reference phase.

    The payload is sampled at the bin where the reference peak was found, so
    both spectra are compared at the same frequency. ``margin`` is
    |projection| over the reference peak magnitude; values near zero mean the
    sign decision is unreliable.
    """
    spacing = comb_spacing(comb) if spacing is None else spacing
    out = []
    for h in comb:
        if h.offset not in cal.phases:
            raise KeyError(f"no calibration entry for the {h.offset:g} Hz harmonic")
        if h.offset in cal.peak_freqs:
            v = value_at(spec, cal.peak_freqs[h.offset])
        else:
            v = pick_peak(spec, h.offset, spacing)
        proj = float((v * np.exp(-1j * cal.phases[h.offset])).real)
        ref = cal.magnitudes.get(h.offset) or abs(v) or 1.0
        out.append(PeakReading(h.offset, v, proj, int(proj > 0), abs(proj) / ref))
    return out


def read_bits(
    spec: Spectrum, comb: Sequence[Harmonic], cal: PhaseCalibration, spacing: float | None = None
) -> tuple[int, ...]:
    return tuple(r.bit for r in read_peaks(spec, comb, cal, spacing))


def phased_fwhm(spec: Spectrum, f: float, spacing: float = DEFAULT_SPACING_HZ) -> float:
    """Full width at half maximum of the peak near ``f`` after rotating it to pure absorption."""
    idx = _window(spec, f, spacing)
    k = idx[np.argmax(np.abs(spec.values[idx]))]
    real = (spec.values * np.exp(-1j * np.angle(spec.values[k]))).real
    half = real[k] / 2
    lo = k
    while lo > 0 and real[lo] > half:
        lo -= 1
    hi = k
    while hi < real.size - 1 and real[hi] > half:
        hi += 1
    if real[lo] > half or real[hi] > half:
        raise ValueError("peak does not fall to half height inside the spectrum")
    freqs = spec.freqs
    left = np.interp(half, [real[lo], real[lo + 1]], [freqs[lo], freqs[lo + 1]])
    right = np.interp(half, [real[hi], real[hi - 1]], [freqs[hi], freqs[hi - 1]])
    return float(right - left)
