"""Command-line front end: gen, write, simulate, read, plot, roundtrip.

Exit codes: 0 success, 1 decoded payload differs from the manifest, 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import codec, pipeline
from .plot import spectrum_svg
from .spectro import MARGIN_THRESHOLD, Spectrum, WeakReferenceError, calibrate, read_peaks
from .spin import SpinSystem, generate_spin_system

EXIT_OK, EXIT_MISMATCH, EXIT_INVALID = 0, 1, 2


class CliError(Exception):
    pass


def _optional_float(text: str) -> float | None:
    return None if text.lower() in ("none", "off", "") else float(text)


def _add_system_args(p: argparse.ArgumentParser, seed_flag: str) -> None:
    d = pipeline.SystemParams()
    p.add_argument("--geometry", choices=["chain", "ring"], default=d.geometry)
    p.add_argument("--spins", type=int, default=d.spins)
    p.add_argument("--d-nn-hz", type=float, default=d.d_nn_hz, help="nearest-neighbour dipolar coupling")
    p.add_argument("--spread-hz", type=float, default=d.spread_hz, help="span of random resonance offsets")
    p.add_argument(seed_flag, dest="system_seed", type=int, default=d.seed)


def _add_run_args(p: argparse.ArgumentParser) -> None:
    _add_system_args(p, "--system-seed")
    p.add_argument("--system", type=Path, help="spin-system JSON (overrides the generator flags)")
    c, a = pipeline.CombParams(), pipeline.AcquisitionParams()
    p.add_argument("--spacing-hz", type=float, default=c.spacing_hz)
    p.add_argument("--amp-hz", type=float, default=c.amplitude_hz)
    p.add_argument("--base-offset-hz", type=float, default=None, help="default centres the comb")
    p.add_argument("--harmonics", type=int, default=None, help="expected comb size; must match the payload")
    p.add_argument("--duration-s", type=float, default=pipeline.RunConfig().duration_s)
    p.add_argument("--dt-s", type=float, default=None, help="propagation step (default from bandwidth)")
    p.add_argument("--points", type=int, default=a.points)
    p.add_argument("--dwell-s", type=float, default=a.dwell_s)
    p.add_argument("--delay-s", type=float, default=a.delay_s)
    p.add_argument("--t2star-s", type=_optional_float, default=a.t2star_s, help="'none' disables damping")
    p.add_argument("--noise", type=float, default=a.noise, help="per-transient noise std")
    p.add_argument("--noise-rel", type=float, default=None, help="noise std relative to the reference signal peak")
    p.add_argument("--transients", type=int, default=a.transients)
    p.add_argument("--seed", type=int, default=a.seed, help="noise seed")
    p.add_argument("--zero-fill", type=int, default=a.zero_fill)
    payload = p.add_mutually_exclusive_group(required=True)
    payload.add_argument("--text")
    payload.add_argument("--bits")
    payload.add_argument("--number", type=int)
    p.add_argument("--width", type=int, default=None, help="bit width for --number")
    p.add_argument("--out-dir", type=Path, required=True)


def _config(args) -> pipeline.RunConfig:
    return pipeline.RunConfig(
        system=pipeline.SystemParams(args.geometry, args.spins, args.d_nn_hz, args.spread_hz, args.system_seed),
        comb=pipeline.CombParams(args.spacing_hz, args.amp_hz, args.base_offset_hz, args.harmonics),
        acquisition=pipeline.AcquisitionParams(
            points=args.points, dwell_s=args.dwell_s, delay_s=args.delay_s, t2star_s=args.t2star_s,
            noise=args.noise, noise_rel=args.noise_rel, transients=args.transients, seed=args.seed,
            zero_fill=args.zero_fill,
        ),
        duration_s=args.duration_s,
        dt_s=args.dt_s,
    )


def cmd_gen(args) -> int:
    system = generate_spin_system(args.geometry, args.spins, args.d_nn_hz, args.spread_hz, args.system_seed)
    pipeline.atomic_write(args.out, system.to_json() + "\n")
    print(f"wrote {args.spins}-spin {args.geometry} to {args.out}")
    return EXIT_OK


def cmd_write(args) -> int:
    config = _config(args)
    kind, bits = pipeline.payload_bits(args.text, args.bits, args.number, args.width)
    value = {"text": args.text, "bits": args.bits, "number": args.number}[kind]
    if args.system is not None:
        system = SpinSystem.from_json(args.system.read_text())
    else:
        system = config.system.build()
    pulse = pipeline.write_bundle(args.out_dir, config, system, kind, bits, value)
    print(f"wrote bundle to {args.out_dir}: {len(bits)} bits, {len(pulse.harmonics)} harmonics")
    return EXIT_OK


def cmd_simulate(args) -> int:
    paths = pipeline.simulate_bundle(args.out_dir)
    for p in paths.values():
        print(f"wrote {p}")
    return EXIT_OK


def _read(spectrum_path: Path, reference_path: Path, manifest_path: Path, out=None) -> int:
    out = sys.stdout if out is None else out
    manifest = json.loads(Path(manifest_path).read_text())
    comb = pipeline.read_comb(manifest["comb_offsets_hz"])
    spec = Spectrum.from_csv(Path(spectrum_path).read_text())
    ref = Spectrum.from_csv(Path(reference_path).read_text())
    status = EXIT_OK
    weak = {}
    try:
        cal = calibrate(ref, comb)
    except WeakReferenceError as err:
        print(f"calibration failed: {err}", file=out)
        weak = err.weak
        cal = calibrate(ref, comb, check=False)
        status = EXIT_INVALID
    readings = read_peaks(spec, comb, cal)
    bits = tuple(r.bit for r in readings)
    print(f"bits:   {codec.bits_to_str(bits)}", file=out)
    if len(bits) % codec.BITS_PER_CHAR == 0:
        try:
            print(f"text:   {codec.bits_to_text(bits)!r}", file=out)
        except codec.DecodeError as err:
            print(f"text:   <undecodable: {err}>", file=out)
    print(f"number: {codec.bits_to_number(bits)}", file=out)
    print(f"{'offset_hz':>10} {'magnitude':>12} {'phase_rad':>10} {'bit':>3} {'margin':>7}  flags", file=out)
    for r in readings:
        flags = []
        if r.flagged:
            flags.append(f"low-margin(<{MARGIN_THRESHOLD:g})")
        if r.offset in weak:
            flags.append("weak-reference")
        print(
            f"{r.offset:10.1f} {abs(r.value):12.5g} {cal.phases[r.offset]:10.4f} {r.bit:3d} {r.margin:7.3f}  "
            + ",".join(flags),
            file=out,
        )
    expected = codec.as_bits(manifest["payload"]["bits"])
    if status == EXIT_OK and bits != expected:
        wrong = [k for k, (a, b) in enumerate(zip(bits, expected)) if a != b]
        print(f"MISMATCH: expected {codec.bits_to_str(expected)}, wrong bits at {wrong}", file=out)
        status = EXIT_MISMATCH
    elif status == EXIT_OK:
        print(f"OK: {len(bits)}/{len(bits)} bits match the manifest payload", file=out)
    return status


def cmd_read(args) -> int:
    d = args.out_dir
    return _read(
        args.spectrum or d / pipeline.SPECTRUM_CSV,
        args.reference or d / pipeline.REFERENCE_CSV,
        args.manifest or d / pipeline.MANIFEST,
    )


def cmd_plot(args) -> int:
    spec = Spectrum.from_csv(Path(args.spectrum).read_text())
    offsets = []
    manifest = args.manifest or Path(args.spectrum).parent / pipeline.MANIFEST
    if Path(manifest).exists():
        offsets = json.loads(Path(manifest).read_text())["comb_offsets_hz"]
    out = args.out or Path(args.spectrum).with_suffix(".svg")
    pipeline.atomic_write(out, spectrum_svg(spec, offsets, title=Path(args.spectrum).name))
    print(f"wrote {out}")
    return EXIT_OK


def cmd_roundtrip(args) -> int:
    cmd_write(args)
    cmd_simulate(args)
    return _read(
        args.out_dir / pipeline.SPECTRUM_CSV,
        args.out_dir / pipeline.REFERENCE_CSV,
        args.out_dir / pipeline.MANIFEST,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spinmem", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a spin-system JSON file")
    _add_system_args(p, "--seed")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("write", help="encode a payload into a pulse bundle")
    _add_run_args(p)
    p.set_defaults(func=cmd_write)

    p = sub.add_parser("simulate", help="simulate payload and reference runs of a bundle")
    p.add_argument("--out-dir", type=Path, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("read", help="decode bits from a simulated spectrum")
    p.add_argument("--out-dir", type=Path, default=Path("."))
    p.add_argument("--spectrum", type=Path)
    p.add_argument("--reference", type=Path)
    p.add_argument("--manifest", type=Path)
    p.set_defaults(func=cmd_read)

    p = sub.add_parser("plot", help="render a spectrum CSV as SVG")
    p.add_argument("--spectrum", type=Path, required=True)
    p.add_argument("--manifest", type=Path)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("roundtrip", help="write, simulate and read; exit 1 on mismatch")
    _add_run_args(p)
    p.set_defaults(func=cmd_roundtrip)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
