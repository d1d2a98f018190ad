"""Where does the response peak sit relative to a single weak drive frequency?

Drives one harmonic at a time and reports the offset of the largest spectral
bin from the drive frequency, globally and inside the +-spacing/4 read window.

    python scripts/peak_locking.py --spins 6 --amp-hz 3
"""

import argparse
import time

import numpy as np

from spinmem.dynamics import acquire_fid, evolve_pulse, thermal_state
from spinmem.pulse import Harmonic, PulseProgram, comb_offsets
from spinmem.spectro import spectrum
from spinmem.spin import generate_spin_system


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--spins", type=int, default=6)
    ap.add_argument("--d-nn-hz", type=float, default=800.0)
    ap.add_argument("--spread-hz", type=float, default=500.0)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--amp-hz", type=float, default=3.0)
    ap.add_argument("--duration-s", type=float, default=0.3)
    ap.add_argument("--offsets", type=float, nargs="*", help="drive offsets in Hz (default: 12-harmonic comb)")
    ap.add_argument("--spacing-hz", type=float, default=200.0)
    args = ap.parse_args()

    system = generate_spin_system("chain", args.spins, args.d_nn_hz, args.spread_hz, seed=args.seed)
    offsets = args.offsets or list(comb_offsets(12, args.spacing_hz))
    print("offset_hz  global_shift_hz  window_shift_hz  bin_hz  seconds")
    within = 0
    for f in offsets:
        t0 = time.time()
        pulse = PulseProgram((Harmonic(f, args.amp_hz),), duration=args.duration_s)
        rho = evolve_pulse(thermal_state(system), system, pulse)
        spec = spectrum(acquire_fid(rho, system, 4096, 1e-4))
        mag = np.abs(spec.values)
        shift = spec.freqs[np.argmax(mag)] - f
        window = np.flatnonzero(np.abs(spec.freqs - f) <= args.spacing_hz / 4)
        wshift = spec.freqs[window[np.argmax(mag[window])]] - f
        within += abs(shift) <= spec.resolution
        print(f"{f:9.1f}  {shift:15.2f}  {wshift:15.2f}  {spec.resolution:6.3f}  {time.time() - t0:7.1f}", flush=True)
    print(f"global maximum within one bin of the drive: {within}/{len(offsets)}")


if __name__ == "__main__":
    main()
