"""Command-line runner: presets or config files in, CSV and JSON manifests out.

Exit codes: 0 success, 2 usage or configuration error, 3 numerical failure.
"""
import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .dynamics import simulate
from .errors import ConfigError, NumericalError
from .features import extract_features
from .io import (build_manifest, compare_trajectories, ensure_parent, trajectory_table,
                 write_csv, write_manifest)
from .model import MODES, load_config, normalize_mode
from .scenarios import PRESETS, feature_value, get_scenario, preset_names

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3


def _pairs(text):
    out = []
    for chunk in text.split(";"):
        parts = chunk.split(",")
        if len(parts) != 2:
            raise argparse.ArgumentTypeError(f"expected b,c pairs, got {chunk!r}")
        try:
            out.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise argparse.ArgumentTypeError(f"site indices must be integers: {chunk!r}") from None
    return out


def build_parser():
    p = argparse.ArgumentParser(
        prog="eetsim",
        description="Exciton transfer in the FMO complex in the adiabatic basis.",
    )
    src = p.add_mutually_exclusive_group()
    src.add_argument("--config", metavar="PATH", help="JSON run configuration")
    src.add_argument("--preset", metavar="NAME", help="named scenario, see --list-presets")
    src.add_argument("--compare", nargs=2, metavar=("A", "B"),
                     help="compare two trajectory CSVs and print statistics")
    src.add_argument("--list-presets", action="store_true", help="list presets and exit")
    p.add_argument("--mode", choices=MODES + ("decoherence-only",),
                   help="override the dynamics mode")
    p.add_argument("--output", metavar="PATH",
                   help="CSV path; the manifest goes next to it with a .json suffix "
                        "(CSV on stdout and no manifest when omitted)")
    p.add_argument("--features", action="store_true",
                   help="print the feature summary")
    p.add_argument("--coherences", type=_pairs, default=[], metavar="b,c[;b,c...]",
                   help="add real/imaginary columns for these site coherences (1-based)")
    p.add_argument("--plot", action="store_true",
                   help="also save a PNG of the populations next to --output")
    return p


def _module_of(exc):
    tb = exc.__traceback__
    name = None
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("eetsim."):
            name = mod.split(".", 1)[1]
        tb = tb.tb_next
    return name or "eetsim"


def _features_text(features, checks):
    lines = []
    for b, td in enumerate(features.damping_time, start=1):
        shown = "never" if td is None else f"{td:.1f} fs"
        lines.append(f"site{b}: {features.extrema[b - 1].size} extrema, damping time {shown}")
    cross = features.crossing_time
    lines.append("site3 over site1: " + ("never" if cross is None else f"{cross:.1f} fs"))
    for c in checks:
        lines.append(f"expected site{c['site']} {c['feature']} in [{c['low']}, {c['high']}]: "
                     f"{c['value']} -> {'ok' if c['holds'] else 'MISS'}")
    return "\n".join(lines)


def run(args, out=None):
    out = sys.stdout if out is None else out
    scenario = None
    if args.preset:
        sc = get_scenario(args.preset, normalize_mode(args.mode) if args.mode else None)
        cfg, scenario, expected = sc.config, sc.name, sc.expected
    else:
        cfg = load_config(args.config)
        if args.mode:
            cfg = replace(cfg, mode=normalize_mode(args.mode))
        expected = []

    sim = simulate(cfg)
    traj = sim.trajectory
    pops = traj.populations
    features = extract_features(traj.times, pops)
    checks = []
    for item in expected:
        v = feature_value(features, pops, item)
        checks.append({**item.to_dict(), "value": v, "holds": item.holds(v)})

    header, rows = trajectory_table(traj, args.coherences)
    manifest = build_manifest(sim, features, scenario)
    manifest["expected_features"] = checks
    if args.output:
        csv_path = Path(args.output)
        ensure_parent(csv_path)
        write_csv(csv_path, header, rows)
        write_manifest(csv_path.with_suffix(".json"), manifest)
        if args.plot:
            from .plotting import plot_populations
            plot_populations(traj.times, pops, csv_path.with_suffix(".png"),
                             title=scenario or csv_path.stem, features=features)
        if args.features:
            print(_features_text(features, checks), file=out)
    else:
        if args.plot:
            raise ConfigError("--plot", "needs --output to know where to write the PNG")
        write_csv(out, header, rows)
        if args.features:
            print(_features_text(features, checks), file=sys.stderr)
    return EXIT_OK


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.list_presets:
            for name in preset_names():
                print(f"{name}: {PRESETS[name].description}")
            return EXIT_OK
        if args.compare:
            stats = compare_trajectories(*args.compare)
            print(json.dumps(stats.to_dict(), indent=2))
            return EXIT_OK
        if not (args.preset or args.config):
            parser.error("one of --config, --preset, --compare or --list-presets is required")
        return run(args)
    except ConfigError as exc:
        print(f"eetsim: configuration error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (NumericalError, ArithmeticError, ValueError, FloatingPointError) as exc:
        print(f"eetsim: numerical error in {_module_of(exc)}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
