"""Storing bit arrays in the multi-frequency response of a dipolar-coupled spin cluster."""

from .codec import bits_to_number, bits_to_text, number_to_bits, text_to_bits
from .dynamics import DensityMatrix, Fid, acquire_fid, evolve_pulse, magnus_step, step_propagator, thermal_state
from .pulse import Harmonic, PulseProgram, bits_to_harmonics, export_shape, rf_field
from .spectro import PhaseCalibration, Spectrum, calibrate, pick_peak, read_bits, spectrum
from .spin import (
    SpinSystem,
    collective_operator,
    count_transitions,
    dipolar_hamiltonian,
    generate_spin_system,
    single_spin_operator,
    zeeman_hamiltonian,
)
