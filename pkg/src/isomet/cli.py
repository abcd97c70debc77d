"""Command-line interface.

Subcommands::

    isomet test        run the isotropic test on a dataset
    isomet simulate    Monte Carlo rejection-rate sweep, CSV output
    isomet invert      confidence set for a circular mean by test inversion
    isomet score-test  chi-squared score test for a circular mean
    isomet synth       synthetic von Mises wind-direction data

Exit status is 0 on completion (a rejection is a result, not a failure),
2 on a usage error and 1 when the computation itself fails.
"""
import argparse
import json
import math
import sys
from datetime import date, datetime, timedelta, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .dataio import (
    RunManifest,
    format_null_mean,
    ingest_angles,
    parse_null_mean,
    read_points,
    write_sweep_csv,
)
from .errors import DegenerateStatisticError, IsometError
from .frechet import frechet_mean
from .geometry.points import TWO_PI
from .geometry.spaces import Booklet, BuresWasserstein, Circle, Euclidean
from .harness import DEFAULT_KAPPA, SCENARIO_IDS, SweepConfig, run_sweep, scenario_cell
from .inference import TestConfig, invert_test, isotropic_test, score_test_circle
from .parallel import resolve_workers
from .sampling import sample_von_mises
from .streams import generator


class UsageError(Exception):
    """Raised for bad flag combinations found after argument parsing."""


# -- argument types --------------------------------------------------------------

def _alpha(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("alpha must lie in (0, 1)")
    return value


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _positive_float(text):
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not value > 0 or not math.isfinite(value):
        raise argparse.ArgumentTypeError("must be a positive number")
    return value


def _int_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of integers: {text!r}") from None
    if not values or min(values) < 2:
        raise argparse.ArgumentTypeError("need a nonempty list of sample sizes >= 2")
    return values


def _float_list(text):
    try:
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None
    if not values or not all(math.isfinite(v) for v in values):
        raise argparse.ArgumentTypeError("need a nonempty list of finite numbers")
    return values


def _seed(text):
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError("seed must be nonnegative")
    return value


def _date(text):
    try:
        return date.fromisoformat(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO date: {text!r}") from None


def _hour(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an hour: {text!r}") from None
    if not 0 <= value <= 23:
        raise argparse.ArgumentTypeError("hour must be in 0..23")
    return value


# -- parser ----------------------------------------------------------------------

def _add_angle_input(p):
    p.add_argument("--input", required=True, help="CSV file with a header row")
    p.add_argument("--column", default="dir", help="direction column (default: dir)")
    p.add_argument("--time-column", default="ts", help="timestamp column (default: ts)")
    p.add_argument("--unit", choices=("deg", "rad"), default="deg")
    p.add_argument("--hour", type=_hour, help="keep only observations taken at this hour")
    p.add_argument("--date-from", type=_date)
    p.add_argument("--date-to", type=_date)


def build_parser():
    parser = argparse.ArgumentParser(prog="isomet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"isomet {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("test", help="isotropic randomization test of a Frechet mean")
    p.add_argument("--space", choices=("circle", "bw", "booklet", "euclidean"), required=True)
    p.add_argument("--null-mean", required=True,
                   help="circle '225deg' or '3.9rad'; bw 'a,b;b,c'; booklet 'z:x:y1,...'; euclidean 'a,b'")
    _add_angle_input(p)
    p.add_argument("--branches", type=_positive_int, default=4, help="booklet branch count (default 4)")
    p.add_argument("--replicates", type=_positive_int, default=1000)
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--seed", type=_seed, default=0)
    p.set_defaults(func=cmd_test, parser=p)

    p = sub.add_parser("simulate", help="rejection-rate sweep over sample sizes and offsets")
    p.add_argument("--scenario", choices=sorted(SCENARIO_IDS), required=True)
    p.add_argument("--n-list", type=_int_list, required=True, help="comma-separated sample sizes")
    grid = p.add_mutually_exclusive_group(required=True)
    grid.add_argument("--delta-list", type=_float_list, help="comma-separated offsets")
    grid.add_argument("--local-c", type=float, help="use delta_n = c / sqrt(n)")
    p.add_argument("--datasets", type=_positive_int, default=500)
    p.add_argument("--replicates", type=_positive_int, default=1000)
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--kappa", type=_positive_float, default=DEFAULT_KAPPA,
                   help=f"von Mises concentration for circle scenarios (default {DEFAULT_KAPPA})")
    p.add_argument("--threads", type=_positive_int, help="worker processes (default: $ISOMET_THREADS or 1)")
    p.add_argument("--out", help="CSV path (default: stdout); a manifest is written next to it")
    p.add_argument("--no-timing", action="store_true",
                   help="report wall_seconds as 0 so repeated runs are byte-identical")
    p.set_defaults(func=cmd_simulate, parser=p)

    p = sub.add_parser("invert", help="confidence set for a circular mean")
    _add_angle_input(p)
    p.add_argument("--grid-size", type=int, default=1000)
    p.add_argument("--replicates", type=_positive_int, default=1000)
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--threads", type=_positive_int)
    p.add_argument("--out", help="grid CSV path (default: stdout)")
    p.set_defaults(func=cmd_invert, parser=p)

    p = sub.add_parser("score-test", help="chi-squared score test for a circular mean")
    _add_angle_input(p)
    p.add_argument("--null-mean", required=True, help="'225deg' or '3.9rad'")
    p.add_argument("--alpha", type=_alpha, default=0.05)
    p.set_defaults(func=cmd_score_test, parser=p)

    p = sub.add_parser("synth", help="synthetic von Mises directions as a ts,dir CSV")
    p.add_argument("--center", type=float, default=225.0, help="mean direction in degrees")
    p.add_argument("--kappa", type=_positive_float, default=2.0)
    p.add_argument("--n", type=_positive_int, default=152)
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--start", type=_date, default=date(2024, 1, 1), help="first day (noon readings)")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_synth, parser=p)
    return parser


# -- helpers ---------------------------------------------------------------------

def _load_angles(args):
    return ingest_angles(args.input, column=args.column, unit=args.unit, hour=args.hour,
                         date_from=args.date_from, date_to=args.date_to,
                         time_column=args.time_column)


def _space_and_sample(args):
    if args.space == "circle":
        return Circle(), _load_angles(args).radians
    if args.space == "bw":
        space = BuresWasserstein(2)
        return space, read_points(args.input, space)
    if args.space == "booklet":
        raw = read_points(args.input, Booklet(args.branches, 1))
        space = Booklet(args.branches, raw.shape[1] - 1)
        return space, space.canonical(raw)
    raw = read_points(args.input, Euclidean(1))
    space = Euclidean(raw.shape[1])
    return space, raw


def _antipode_warning(space, sample, null):
    """A message when the sample mean sits nearer the null's antipode than the null."""
    try:
        mean = frechet_mean(space, sample).mean
    except IsometError:
        return None
    if space.distance(mean, null) > 0.5 * np.pi:
        anti = math.degrees(float(space.antipode(null)))
        return (f"the sample Frechet mean ({math.degrees(float(mean)):.1f} deg) is closer to the "
                f"antipode of the null ({anti:.1f} deg); reflections through the null also fix "
                "its antipode, so the test cannot tell the two apart")
    return None


def _open_out(path):
    return open(path, "w", newline="", encoding="utf-8") if path else None


def _now():
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# -- commands --------------------------------------------------------------------

def cmd_test(args):
    space, sample = _space_and_sample(args)
    try:
        null = parse_null_mean(args.null_mean, space)
    except IsometError as exc:
        raise UsageError(str(exc)) from None
    result = isotropic_test(sample, TestConfig(space, null, args.replicates, args.alpha, args.seed))
    report = result.to_dict()
    report["null_mean"] = format_null_mean(null, space)
    report["n"] = int(np.asarray(sample).shape[0])
    if isinstance(space, Circle):
        report["antipode_warning"] = _antipode_warning(space, sample, null)
    print(json.dumps(report, indent=2))
    return 0


def cmd_simulate(args):
    try:
        config = SweepConfig(args.scenario, args.n_list, args.delta_list, args.local_c,
                             args.datasets, args.replicates, args.alpha, args.seed, args.kappa)
        for _, _, _, delta in config.cells():
            scenario_cell(config.scenario, delta, config.kappa)
        workers = resolve_workers(args.threads)
    except (IsometError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    started = _now()
    rows = run_sweep(config, workers=workers, timing=not args.no_timing)
    if args.out:
        with _open_out(args.out) as fh:
            write_sweep_csv(rows, fh)
        flags = {k: v for k, v in vars(args).items() if k not in ("func", "parser")}
        manifest = RunManifest("simulate", flags, args.seed, __version__, started, _now())
        manifest.write(Path(args.out).with_suffix(".manifest.json"))
    else:
        write_sweep_csv(rows, sys.stdout)
    return 0


def cmd_invert(args):
    if args.grid_size < 1:
        raise UsageError("--grid-size must be positive")
    try:
        workers = resolve_workers(args.threads)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    theta = _load_angles(args).radians
    if theta.size < 2:
        raise DegenerateStatisticError("a single observation gives a degenerate test; need at least two")
    space = Circle()
    frechet_mean(space, theta)  # surfaces a non-unique sample mean before the grid runs
    grid = np.arange(args.grid_size) * (TWO_PI / args.grid_size)
    cs = invert_test(theta, space, grid, args.replicates, args.alpha, args.seed, workers)
    if len(cs.errors) == grid.size:
        raise IsometError(f"every grid point failed: {cs.errors[0][1]}")
    fh = _open_out(args.out) or sys.stdout
    try:
        fh.write("grid_deg,p_value,accepted\n")
        for g, p, a in zip(grid, cs.p_values, cs.accepted):
            fh.write(f"{math.degrees(float(g))!r},{float(p)!r},{int(a)}\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    if cs.intervals:
        for start, end in cs.intervals:
            print(f"accepted arc: {math.degrees(start):.2f} .. {math.degrees(end):.2f} deg", file=sys.stderr)
    else:
        print("accepted arc: none", file=sys.stderr)
    return 0


def cmd_score_test(args):
    try:
        null = parse_null_mean(args.null_mean, Circle())
    except IsometError as exc:
        raise UsageError(str(exc)) from None
    theta = _load_angles(args).radians
    stat, p, reject = score_test_circle(theta, null, args.alpha)
    print(json.dumps({"statistic": stat, "p_value": p, "reject": reject}, indent=2))
    return 0


def cmd_synth(args):
    rng = generator(args.seed, 0)
    theta = sample_von_mises(math.radians(args.center), args.kappa, args.n, rng)
    fh = _open_out(args.out) or sys.stdout
    try:
        fh.write("ts,dir\n")
        for i, t in enumerate(theta):
            day = datetime.combine(args.start + timedelta(days=i), datetime.min.time()).replace(hour=12)
            fh.write(f"{day.isoformat()},{math.degrees(t)!r}\n")
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def main(argv=None):
    """Entry point; returns the exit status instead of raising ``SystemExit``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        return args.func(args)
    except UsageError as exc:
        try:
            args.parser.error(str(exc))
        except SystemExit as stop:
            return stop.code
    except (IsometError, OSError) as exc:
        print(f"isomet {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
