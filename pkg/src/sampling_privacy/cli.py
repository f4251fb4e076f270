"""Command-line front end.

    sampling-privacy simulate --seed 7 --mechanism rr,sp-binary --yes 100 --no 1000,100000
    sampling-privacy epsilon --family rr,sp
    sampling-privacy dataset breast-cancer.data --format breast-cancer --pad 10000 --seed 7

Every subcommand writes CSV (to ``--out`` or stdout) preceded by a
``# sampling-privacy <command> v<N>`` schema line. ``--config FILE`` reads
defaults from a JSON object keyed by option name; flags given on the
command line win. Exit codes: 0 ok, 1 invalid configuration, 2 I/O or
parse failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from contextlib import contextmanager
from typing import List, Optional, Sequence

import numpy as np

from .datasets import (
    AGE_GROUPS,
    BREAST_CANCER_ATTRIBUTES,
    TUMOR_SIZE_GROUPS,
    GridSpec,
    n_values_for,
    pad_population,
    parse_breast_cancer,
    parse_checkins,
)
from .exceptions import DatasetError, InvalidParameters
from .mechanisms import RRParams, SPBinarySpec, SPMultiSpec, ToyParams
from .privacy import SWEEP_FAMILIES, epsilon_sweep
from .simulation import (
    AggregatorModel,
    PopulationSpec,
    TrialStats,
    run_experiment_per_value,
    simulate_estimates,
)

SCHEMA_VERSION = 1
EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 1, 2

# operating point used by the reference experiments
DEFAULT_PI1, DEFAULT_PI2, DEFAULT_PI_S = 0.8, 0.2, 0.45
MECHANISMS = ("rr", "toy", "sp-binary", "sp-multi")

STAT_FIELDS = ("ground_truth", "mean_estimate", "stddev", "mean_abs_error",
               "error_bound_95", "normal_bound_95")


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        if math.isnan(x):
            return "nan"
        return f"{x:.6f}"
    return str(x)


def _floats(text: str) -> List[float]:
    """``"0.1,0.2"`` or a range ``"start:stop:step"`` (stop inclusive)."""
    text = str(text).strip()
    if ":" in text:
        start, stop, step = (float(p) for p in text.split(":"))
        if step <= 0:
            raise ConfigError("range step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9))
        return [round(start + i * step, 12) for i in range(n + 1)]
    return [float(p) for p in text.split(",") if p.strip()]


def _ints(text: str) -> List[int]:
    return [int(p) for p in str(text).split(",") if p.strip()]


def _common(p: argparse.ArgumentParser, *, seed_required=True) -> None:
    p.add_argument("--config", help="JSON file of option defaults")
    p.add_argument("--seed", type=int, required=seed_required, help="master seed")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--aggregators", type=int, default=1, help="number of simulated aggregators")
    p.add_argument("--workers", type=int, default=1, help="threads running trials")
    p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")


def _mechanism_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--pi1", type=float, default=DEFAULT_PI1, help="truthful-answer coin")
    p.add_argument("--pi2", type=float, default=DEFAULT_PI2, help="forced-Yes coin")
    p.add_argument("--pi-s", dest="pi_s", type=float, default=DEFAULT_PI_S, help="sampling face")
    p.add_argument("--pi0", type=float, default=None,
                   help="sp-binary output-0 face (default: half of 1 - pi_s)")
    p.add_argument("--pis", default=None,
                   help="sp-multi faces for outputs 0..V (default: 1 - pi_s spread evenly)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sampling-privacy", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="trial statistics on synthetic populations")
    _common(sim)
    _mechanism_flags(sim)
    sim.add_argument("--mechanism", default="sp-binary",
                     help=f"comma list from {', '.join(MECHANISMS)}")
    sim.add_argument("--yes", default="100", help="Yes population per value, comma list")
    sim.add_argument("--no", default="1000,10000,100000", help="No population points, comma list")

    eps = sub.add_parser("epsilon", help="closed-form leakage sweep")
    _common(eps, seed_required=False)
    eps.add_argument("--family", default="rr,sp", help=f"comma list from {', '.join(SWEEP_FAMILIES)}")
    eps.add_argument("--grid", default=None, help="swept values: comma list or start:stop:step")
    eps.add_argument("--pi1", type=float, default=DEFAULT_PI1)
    eps.add_argument("--pi-s", dest="pi_s", type=float, default=DEFAULT_PI_S)

    ds = sub.add_parser("dataset", help="per-value accuracy on a dataset file")
    _common(ds)
    _mechanism_flags(ds)
    ds.add_argument("path", nargs="?", help="dataset file")
    ds.add_argument("--format", choices=("checkins", "breast-cancer"), default="breast-cancer")
    ds.add_argument("--attribute", choices=BREAST_CANCER_ATTRIBUTES, default="age")
    ds.add_argument("--pad", type=int, default=None, help="pad the population to this many owners")
    ds.add_argument("--locations", type=int, default=4, help="check-ins: monitor the K busiest locations")
    ds.add_argument("--grid", default=None,
                    help="check-ins: lat_min,lat_max,lng_min,lng_max,cell_size to discretize coordinates")
    return parser


def _load_config(argv: Sequence[str]) -> dict:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    ns, _ = pre.parse_known_args(argv)
    if not ns.config:
        return {}
    try:
        with open(ns.config, encoding="utf-8") as fh:
            defaults = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {ns.config} is not valid JSON: {exc}") from exc
    if not isinstance(defaults, dict):
        raise ConfigError("config file must hold a JSON object")
    return {k.replace("-", "_"): v for k, v in defaults.items()}


def parse_args(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    """Parse ``argv`` with defaults taken from ``--config`` when given."""
    defaults = _load_config(argv)
    command = next((a for a in argv if a in COMMANDS), None)
    if defaults and command is not None:
        sub = parser._subparsers._group_actions[0].choices[command]
        known = {a.dest for a in sub._actions}
        unknown = set(defaults) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        sub.set_defaults(**defaults)
        for action in sub._actions:
            if action.dest in defaults:
                action.required = False
    return parser.parse_args(argv)


@contextmanager
def _output(path: str):
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            yield fh


def _write(args, command: str, header: Sequence[str], rows) -> None:
    with _output(args.out) as fh:
        fh.write(f"# sampling-privacy {command} v{SCHEMA_VERSION}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def _check_common(args) -> None:
    if args.trials < 2:
        raise ConfigError(f"--trials must be >= 2, got {args.trials}")
    if args.aggregators < 1:
        raise ConfigError("--aggregators must be >= 1")
    if args.workers < 1:
        raise ConfigError("--workers must be >= 1")
    if args.seed is None or args.seed < 0:
        raise ConfigError("--seed must be a non-negative integer")


def make_mechanism(name: str, args, n_values: int):
    if name == "rr":
        return RRParams(args.pi1, args.pi2)
    if name == "toy":
        return ToyParams(args.pi_s, args.pi1, args.pi2)
    if name == "sp-binary":
        pi0 = args.pi0 if args.pi0 is not None else (1.0 - args.pi_s) / 2
        return SPBinarySpec(pi0, args.pi_s)
    if name == "sp-multi":
        if args.pis:
            spec = SPMultiSpec(tuple(_floats(args.pis)), args.pi_s)
            if spec.V != n_values:
                raise ConfigError(f"--pis gives V={spec.V}, population has {n_values} values")
            return spec
        return SPMultiSpec.uniform(n_values, args.pi_s)
    raise ConfigError(f"unknown mechanism {name!r}; choose from {', '.join(MECHANISMS)}")


def cmd_simulate(args) -> int:
    _check_common(args)
    names = [m.strip() for m in args.mechanism.split(",") if m.strip()]
    yes = _ints(args.yes)
    no_points = _ints(args.no)
    if not names or not yes or not no_points:
        raise ConfigError("need at least one mechanism, Yes count and No point")
    aggregators = AggregatorModel(args.aggregators, args.seed)
    header = ("mechanism", "value", "yes_pop", "no_pop", "total", "trials") + STAT_FIELDS
    rows = []
    for name in names:
        mech = make_mechanism(name, args, len(yes))
        if name != "sp-multi" and len(yes) != 1:
            raise ConfigError(f"{name} is binary: give a single --yes count")
        for no in no_points:
            spec = PopulationSpec(tuple(yes), no)
            est = simulate_estimates(spec, mech, args.trials, args.seed, aggregators,
                                     workers=args.workers)
            targets = [("total", est.sum(axis=1), sum(yes))]
            if len(yes) > 1:
                targets += [(str(v + 1), est[:, v], yes[v]) for v in range(len(yes))]
            for label, column, truth in targets:
                st = TrialStats.from_estimates(column, truth)
                rows.append((name, label, sum(yes) if label == "total" else truth, no,
                             spec.total, st.trials) + tuple(getattr(st, f) for f in STAT_FIELDS))
    _write(args, "simulate", header, rows)
    return EXIT_OK


DEFAULT_GRIDS = {"rr": "0:1:0.05", "sp": "0:0.55:0.05", "sp-binary": "0:0.55:0.05"}


def cmd_epsilon(args) -> int:
    families = [f.strip() for f in args.family.split(",") if f.strip()]
    if not families:
        raise ConfigError("--family is empty")
    operating = {"rr": DEFAULT_PI2, "sp": DEFAULT_PI_S}
    rows = []
    for family in families:
        if family not in SWEEP_FAMILIES:
            raise ConfigError(f"unknown family {family!r}")
        grid = _floats(args.grid or DEFAULT_GRIDS[family])
        point = operating.get(family)
        if point is not None and not any(math.isclose(g, point) for g in grid):
            grid = sorted(grid + [point])
        for r in epsilon_sweep(family, grid, pi1=args.pi1, pi_s=args.pi_s):
            is_point = point is not None and math.isclose(r.value, point)
            rows.append((r.mechanism, r.parameter, r.value, r.epsilon, r.bounded, is_point))
    header = ("mechanism", "parameter", "value", "epsilon", "bounded", "operating_point")
    _write(args, "epsilon", header, rows)
    return EXIT_OK


def _grid_arg(text: str) -> GridSpec:
    parts = _floats(text)
    if len(parts) != 5:
        raise ConfigError("--grid needs lat_min,lat_max,lng_min,lng_max,cell_size")
    return GridSpec(*parts)


def _dataset_populations(args):
    """``[(label, PopulationSpec)]`` and the per-value display labels."""
    if args.format == "breast-cancer":
        parsed = parse_breast_cancer(args.path, args.attribute)
        V = n_values_for(args.attribute)
        values = parsed.values
        labels = {"age": AGE_GROUPS, "tumor-size": TUMOR_SIZE_GROUPS,
                  "recurrence": ("recurrence-events",)}[args.attribute]
    else:
        selection = _grid_arg(args.grid) if args.grid else "native"
        parsed = parse_checkins(args.path, selection)
        monitored = parsed.top_values(args.locations)
        V = len(monitored)
        values = parsed.monitor(monitored)
        labels = tuple(str(m) for m in monitored)
    pops = [("unpadded", pad_population(values, None, V))]
    if args.pad is not None:
        pops.append(("padded", pad_population(values, args.pad, V)))
    return pops, labels


def cmd_dataset(args) -> int:
    _check_common(args)
    if not args.path:
        raise ConfigError("dataset path is required")
    pops, labels = _dataset_populations(args)
    aggregators = AggregatorModel(args.aggregators, args.seed)
    rr = RRParams(args.pi1, args.pi2)
    rows = []
    for pop_label, spec in pops:
        sp = make_mechanism("sp-multi", args, spec.n_values)
        sp_stats = run_experiment_per_value(spec, sp, args.trials, args.seed, aggregators,
                                            workers=args.workers)
        for v in range(1, spec.n_values + 1):
            # randomized response answers one binary question per value
            binary = PopulationSpec((spec.yes_counts[v - 1],), spec.total - spec.yes_counts[v - 1])
            rr_stats = run_experiment_per_value(binary, rr, args.trials, args.seed, aggregators,
                                                workers=args.workers)[0]
            s = sp_stats[v - 1]
            ratio = (rr_stats.error_bound_95 / s.error_bound_95 if s.error_bound_95 > 0
                     else math.inf)
            rows.append(
                (pop_label, spec.total, v, labels[v - 1], s.ground_truth,
                 s.mean_estimate, s.stddev, s.mean_abs_error, s.error_bound_95,
                 rr_stats.mean_estimate, rr_stats.stddev, rr_stats.mean_abs_error,
                 rr_stats.error_bound_95, ratio)
            )
    header = ("population", "total", "value", "label", "ground_truth",
              "sp_mean_estimate", "sp_stddev", "sp_mean_abs_error", "sp_error_bound_95",
              "rr_mean_estimate", "rr_stddev", "rr_mean_abs_error", "rr_error_bound_95",
              "rr_sp_error_bound_ratio")
    _write(args, "dataset", header, rows)
    return EXIT_OK


COMMANDS = {"simulate": cmd_simulate, "epsilon": cmd_epsilon, "dataset": cmd_dataset}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(parser, argv)
        return COMMANDS[args.command](args)
    except (ConfigError, InvalidParameters, ValueError) as exc:
        if isinstance(exc, DatasetError):
            print(f"sampling-privacy: {exc}", file=sys.stderr)
            return EXIT_IO
        print(f"sampling-privacy: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"sampling-privacy: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
