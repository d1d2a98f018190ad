"""Run configuration and the write -> simulate -> read chain, with its on-disk bundle format."""

from __future__ import annotations

import dataclasses
import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import codec
from .dynamics import DEFAULT_T2STAR_S, DensityMatrix, Fid, acquire_fid, default_step, evolve_pulse, thermal_state
from .pulse import (
    DEFAULT_AMPLITUDE_HZ,
    DEFAULT_DURATION_S,
    DEFAULT_SPACING_HZ,
    Harmonic,
    PulseProgram,
    bits_to_harmonics,
    comb_offsets,
    default_sample_step,
    export_shape,
)
from .spectro import Spectrum, calibrate, read_peaks, spectrum
from .spin import SpinSystem, generate_spin_system

MAX_PROPAGATION_STEPS = 200_000

MANIFEST = "manifest.json"
SYSTEM = "system.json"
PULSE = "pulse.json"
SHAPE = "pulse.shape"
FID_CSV = "fid.csv"
REFERENCE_FID_CSV = "reference_fid.csv"
SPECTRUM_CSV = "spectrum.csv"
REFERENCE_CSV = "reference_spectrum.csv"


class PropagationLimitError(ValueError):
    pass


@dataclass
class SystemParams:
    geometry: str = "chain"
    spins: int = 6
    d_nn_hz: float = 800.0
    spread_hz: float = 500.0
    seed: int = 7

    def build(self) -> SpinSystem:
        return generate_spin_system(self.geometry, self.spins, self.d_nn_hz, self.spread_hz, self.seed)


@dataclass
class CombParams:
    spacing_hz: float = DEFAULT_SPACING_HZ
    amplitude_hz: float = DEFAULT_AMPLITUDE_HZ
    base_offset_hz: float | None = None
    harmonics: int | None = None


@dataclass
class AcquisitionParams:
    points: int = 4096
    dwell_s: float = 1e-4
    delay_s: float = 1e-3
    t2star_s: float | None = DEFAULT_T2STAR_S
    noise: float = 0.0
    noise_rel: float | None = None
    transients: int = 512
    seed: int = 0
    zero_fill: int = 1


@dataclass
class RunConfig:
    system: SystemParams = field(default_factory=SystemParams)
    comb: CombParams = field(default_factory=CombParams)
    acquisition: AcquisitionParams = field(default_factory=AcquisitionParams)
    duration_s: float = DEFAULT_DURATION_S
    dt_s: float | None = None

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        return cls(
            system=SystemParams(**data["system"]),
            comb=CombParams(**data["comb"]),
            acquisition=AcquisitionParams(**data["acquisition"]),
            duration_s=data["duration_s"],
            dt_s=data["dt_s"],
        )


def payload_bits(text: str | None = None, bits: str | None = None, number: int | None = None,
                 width: int | None = None) -> tuple[str, tuple[int, ...]]:
    """Resolve exactly one payload form to ``(kind, bits)``."""
    given = [(k, v) for k, v in (("text", text), ("bits", bits), ("number", number)) if v is not None]
    if len(given) != 1:
        raise ValueError("give exactly one of text, bits or number")
    kind, value = given[0]
    if kind == "text":
        out = codec.text_to_bits(value)
        if not out:
            raise ValueError("text payload is empty")
        return kind, out
    if kind == "bits":
        return kind, codec.as_bits(value)
    return kind, codec.number_to_bits(int(value), width)


def build_comb(config: RunConfig, bits: Sequence[int]) -> list[Harmonic]:
    """Signed comb for ``bits``. A zero amplitude switches the RF off and yields no harmonics."""
    c = config.comb
    if c.harmonics is not None and c.harmonics != len(bits):
        raise ValueError(f"payload has {len(bits)} bits but {c.harmonics} harmonics are configured")
    offsets = comb_offsets(len(bits), c.spacing_hz, c.base_offset_hz)
    nyquist = 1 / (2 * config.acquisition.dwell_s)
    fmax = float(np.max(np.abs(offsets)))
    if fmax >= nyquist:
        raise ValueError(
            f"comb reaches {fmax:g} Hz but the acquisition window is +-{nyquist:g} Hz; "
            "reduce --dwell-s or the number of harmonics"
        )
    if c.amplitude_hz == 0:
        return []
    return bits_to_harmonics(bits, c.base_offset_hz, c.spacing_hz, c.amplitude_hz)


def read_comb(offsets: Sequence[float]) -> list[Harmonic]:
    """Unit-amplitude harmonics at the given offsets; readout only needs positions."""
    return [Harmonic(float(f), 1.0) for f in offsets]


def build_pulse(config: RunConfig, bits: Sequence[int]) -> PulseProgram:
    comb = build_comb(config, bits)
    c = config.comb
    offsets = comb_offsets(len(bits), c.spacing_hz, c.base_offset_hz)
    return PulseProgram(tuple(comb), duration=config.duration_s, sample_step=default_sample_step(read_comb(offsets)))


def reference_pulse(pulse: PulseProgram) -> PulseProgram:
    """The all-ones version of a comb: every amplitude made positive."""
    ones = tuple(Harmonic(h.offset, abs(h.amplitude), h.phase) for h in pulse.harmonics)
    return dataclasses.replace(pulse, harmonics=ones)


def check_propagation(system: SpinSystem, pulse: PulseProgram, dt: float | None) -> float:
    step = default_step(system, pulse) if dt is None else dt
    steps = int(np.ceil(pulse.duration / step))
    if steps > MAX_PROPAGATION_STEPS:
        raise PropagationLimitError(
            f"the pulse needs {steps} propagation steps of {step:.3g} s (limit {MAX_PROPAGATION_STEPS}); "
            "shorten --duration-s, reduce couplings/offsets, or pass a larger --dt-s"
        )
    return step


def propagate(config: RunConfig, system: SpinSystem, pulse: PulseProgram) -> DensityMatrix:
    check_propagation(system, pulse, config.dt_s)
    return evolve_pulse(thermal_state(system), system, pulse, config.dt_s)


def acquire(config: RunConfig, system: SpinSystem, rho: DensityMatrix, noise: float, seed: int) -> Fid:
    a = config.acquisition
    return acquire_fid(rho, system, a.points, a.dwell_s, a.delay_s, a.t2star_s, noise, a.transients, seed)


def noise_sigma(config: RunConfig, system: SpinSystem, rho_reference: DensityMatrix) -> float:
    """Absolute per-transient noise level.

    ``noise_rel`` is relative to the peak magnitude of the noiseless reference
    signal; it overrides ``noise`` when set.
    """
    a = config.acquisition
    if a.noise_rel is None:
        return a.noise
    clean = acquire(config, system, rho_reference, 0.0, 0)
    return a.noise_rel * float(np.max(np.abs(clean.samples)))


def simulate(config: RunConfig, system: SpinSystem, pulse: PulseProgram, seed: int | None = None) -> tuple[Fid, Fid]:
    """Payload and all-ones reference FIDs for one pulse program."""
    seed = config.acquisition.seed if seed is None else seed
    rho = propagate(config, system, pulse)
    rho_ref = propagate(config, system, reference_pulse(pulse))
    sigma = noise_sigma(config, system, rho_ref)
    return acquire(config, system, rho, sigma, seed), acquire(config, system, rho_ref, sigma, reference_seed(seed))


def reference_seed(seed: int) -> int:
    # reference and payload runs get independent noise
    return seed + 1_000_003


def to_spectrum(config: RunConfig, fid: Fid) -> Spectrum:
    return spectrum(fid, config.acquisition.zero_fill)


def decode(spec: Spectrum, reference: Spectrum, comb: Sequence[Harmonic], check: bool = True):
    cal = calibrate(reference, comb, check=check)
    return read_peaks(spec, comb, cal)


# -- bundle I/O ---------------------------------------------------------------


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def pulse_to_json(pulse: PulseProgram) -> str:
    return json.dumps(
        {
            "duration_s": pulse.duration,
            "sample_step_s": pulse.sample_step,
            "harmonics": [
                {"offset_hz": h.offset, "amplitude_hz": h.amplitude, "phase_rad": h.phase}
                for h in pulse.harmonics
            ],
        },
        indent=2,
    )


def pulse_from_json(text: str) -> PulseProgram:
    data = json.loads(text)
    harmonics = tuple(
        Harmonic(h["offset_hz"], h["amplitude_hz"], h.get("phase_rad", 0.0)) for h in data["harmonics"]
    )
    return PulseProgram(harmonics, duration=data["duration_s"], sample_step=data["sample_step_s"])


def write_bundle(out_dir: Path, config: RunConfig, system: SpinSystem, kind: str,
                 bits: Sequence[int], payload: str | int) -> PulseProgram:
    pulse = build_pulse(config, bits)
    c = config.comb
    out_dir = Path(out_dir)
    manifest = {
        "config": config.to_dict(),
        "payload": {"kind": kind, "value": payload, "bits": codec.bits_to_str(bits)},
        "comb_offsets_hz": comb_offsets(len(bits), c.spacing_hz, c.base_offset_hz).tolist(),
        "files": {"system": SYSTEM, "pulse": PULSE, "shape": SHAPE},
    }
    atomic_write(out_dir / SYSTEM, system.to_json() + "\n")
    atomic_write(out_dir / PULSE, pulse_to_json(pulse) + "\n")
    atomic_write(out_dir / SHAPE, export_shape(pulse))
    atomic_write(out_dir / MANIFEST, json.dumps(manifest, indent=2) + "\n")
    return pulse


@dataclass
class Bundle:
    path: Path
    manifest: dict
    config: RunConfig
    system: SpinSystem
    pulse: PulseProgram

    @property
    def bits(self) -> tuple[int, ...]:
        return codec.as_bits(self.manifest["payload"]["bits"])

    @property
    def comb(self) -> list[Harmonic]:
        return read_comb(self.manifest["comb_offsets_hz"])


def load_bundle(out_dir: Path) -> Bundle:
    out_dir = Path(out_dir)
    manifest = json.loads((out_dir / MANIFEST).read_text())
    system = SpinSystem.from_json((out_dir / manifest["files"]["system"]).read_text())
    pulse = pulse_from_json((out_dir / manifest["files"]["pulse"]).read_text())
    return Bundle(out_dir, manifest, RunConfig.from_dict(manifest["config"]), system, pulse)


def simulate_bundle(out_dir: Path) -> dict[str, Path]:
    """Simulate payload and all-ones reference runs and write their CSVs."""
    b = load_bundle(out_dir)
    fid, ref_fid = simulate(b.config, b.system, b.pulse)
    outputs = {
        FID_CSV: fid.to_csv(),
        REFERENCE_FID_CSV: ref_fid.to_csv(),
        SPECTRUM_CSV: to_spectrum(b.config, fid).to_csv(),
        REFERENCE_CSV: to_spectrum(b.config, ref_fid).to_csv(),
    }
    paths = {}
    for name, text in outputs.items():
        atomic_write(b.path / name, text)
        paths[name] = b.path / name
    return paths
