"""Weakest all-ones reference peak versus the spread of resonance offsets.

For each spread the reference comb is simulated once and the smallest comb
peak is reported as a multiple of the median off-comb magnitude (readout
refuses references below 10x).

    python scripts/sweep_spread.py --spins 6 --spreads 0 250 500 1000
"""

import argparse

from spinmem import pipeline
from spinmem.spectro import off_comb_median, pick_peak


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--spins", type=int, default=6)
    ap.add_argument("--harmonics", type=int, default=12)
    ap.add_argument("--spreads", type=float, nargs="+", default=[0, 250, 500, 750, 1000])
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    print("spread_hz  weakest_peak/off_comb_median  at_offset_hz")
    for spread in args.spreads:
        config = pipeline.RunConfig(system=pipeline.SystemParams(spins=args.spins, spread_hz=spread, seed=args.seed))
        system = config.system.build()
        pulse = pipeline.build_pulse(config, [1] * args.harmonics)
        rho = pipeline.propagate(config, system, pulse)
        spec = pipeline.to_spectrum(config, pipeline.acquire(config, system, rho, 0.0, 0))
        comb = pipeline.read_comb([h.offset for h in pulse.harmonics])
        floor = off_comb_median(spec, comb)
        ratio, where = min((abs(pick_peak(spec, h.offset)) / floor, h.offset) for h in comb)
        print(f"{spread:9.0f}  {ratio:29.1f}  {where:12.1f}", flush=True)


if __name__ == "__main__":
    main()
