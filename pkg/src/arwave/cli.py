"""Command line entry point: ``arwave {lattice,wave,theory,experiment} ...``.

Exit codes: 0 success, 1 runtime error, 2 statistical band violation,
64 usage error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

from . import __version__, experiment, lattice, theory, wave
from .lattice import Direction

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_BAND = 2
EXIT_USAGE = 64

CENSUS_COLUMNS = ("m", "N", "min_gap", "arc_occ_third_root", "arc_occ_fourth_root")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"expected a positive number, got {v}")
    return v


def _direction(text: str) -> Direction:
    try:
        return Direction.parse(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _offset(text: str) -> tuple[float, float]:
    try:
        x, y = (float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected x,y, got {text!r}")
    return (x, y)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="arwave", description="Nodal intersections of arithmetic random waves with segments.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    lat = sub.add_parser("lattice", help="lattice points on circles")
    lsub = lat.add_subparsers(dest="action", required=True, parser_class=_Parser)
    e = lsub.add_parser("enum", help="enumerate the lattice points of m")
    e.add_argument("--m", type=_positive_int, required=True)
    c = lsub.add_parser("census", help="per-m table and |S(X)| for m <= X")
    c.add_argument("--X", type=_positive_int, required=True)
    c.add_argument("--csv", action="store_true", help="emit the per-m table as CSV")
    c.add_argument("--epsilon", type=_positive_float, default=None,
                   help="also report the min-gap density check at this epsilon")
    a = lsub.add_parser("arcs", help="maximal arc occupancy")
    a.add_argument("--m", type=_positive_int, required=True)
    a.add_argument("--length", type=_positive_float, action="append",
                   help="arc length (repeatable); defaults to the sqrt(m)^(1/3) and m^(1/4) scales")
    ps = lsub.add_parser("pairsum", help="pair sums over A_alpha")
    ps.add_argument("--m", type=_positive_int, required=True)
    ps.add_argument("--alpha", type=_direction, required=True)
    ps.add_argument("--a", type=_positive_float, default=None)
    ps.add_argument("--c", type=_positive_float, default=None)

    wv = sub.add_parser("wave", help="sample waves and count zeros")
    wsub = wv.add_subparsers(dest="action", required=True, parser_class=_Parser)
    s = wsub.add_parser("sample", help="count zeros of one sample along a segment")
    s.add_argument("--m", type=_positive_int, required=True)
    s.add_argument("--seed", type=_int, required=True)
    s.add_argument("--alpha", type=_direction, required=True)
    s.add_argument("--L", type=_positive_float, required=True)
    s.add_argument("--offset", type=_offset, default=(0.0, 0.0))
    s.add_argument("--oversample", type=_positive_int, default=wave.DEFAULT_OVERSAMPLE)

    th = sub.add_parser("theory", help="closed-form reference values")
    tsub = th.add_subparsers(dest="action", required=True, parser_class=_Parser)
    b = tsub.add_parser("bounds", help="expectation, second moments and variance bound shapes")
    b.add_argument("--m", type=_positive_int, required=True)
    b.add_argument("--alpha", type=_direction, required=True)
    b.add_argument("--L", type=_positive_float, required=True)
    b.add_argument("--epsilon", type=_positive_float, default=0.25)

    ex = sub.add_parser("experiment", help="Monte Carlo ensembles")
    xsub = ex.add_subparsers(dest="action", required=True, parser_class=_Parser)
    r = xsub.add_parser("run", help="run ensembles from a key=value config file")
    r.add_argument("--config", required=True)
    r.add_argument("--csv", action="store_true", help="write CSV instead of JSON")

    for sp in (e, c, a, ps, s, b, r):
        sp.add_argument("--out", default=None, help="write the output to this path")
    return p


def _meta(seed, resolved: dict) -> dict:
    return {"tool_version": __version__, "seed": seed, "resolved_config": resolved}


def _dump(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None, stdout) -> None:
    if out:
        Path(out).write_text(text)
    else:
        stdout.write(text)


def _cmd_lattice(args, stdout, stderr):
    if args.action == "enum":
        level = lattice.enumerate_lattice_points(args.m)
        payload = {
            **_meta(None, {"command": "lattice enum", "m": args.m}),
            "m": level.m,
            "N": level.n_points,
            "points": [list(p) for p in level.points],
            "factorization": [[p, e] for p, e in sorted(level.factorization.items())],
        }
        _emit(_dump(payload), args.out, stdout)
    elif args.action == "census":
        if args.X < 2:
            raise ValueError("--X must be at least 2")
        count, ratio = lattice.census_S(args.X)
        if args.csv:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(CENSUS_COLUMNS)
            for level in lattice.levels_upto(args.X):
                m = level.m
                w.writerow([
                    m, level.n_points, repr(lattice.min_pair_distance(level)),
                    lattice.arc_max_occupancy(level, math.sqrt(m) ** (1 / 3)),
                    lattice.arc_max_occupancy(level, m ** 0.25),
                ])
            _emit(buf.getvalue(), args.out, stdout)
            if not args.out:
                return EXIT_OK
        resolved = {"command": "lattice census", "X": args.X, "epsilon": args.epsilon}
        payload = {**_meta(None, resolved), "X": args.X, "count": count, "ratio": ratio}
        if args.epsilon is not None:
            rep = lattice.density_one_check(args.X, args.epsilon, verbose=True)
            payload["density_check"] = {
                "epsilon": args.epsilon, "failing": rep.failing,
                "fraction": rep.fraction, "failing_m": rep.failing_m,
            }
        if args.csv:
            stdout.write(_dump(payload))
        else:
            _emit(_dump(payload), args.out, stdout)
    elif args.action == "arcs":
        level = lattice.enumerate_lattice_points(args.m)
        lengths = args.length or [math.sqrt(args.m) ** (1 / 3), args.m ** 0.25]
        rows = [{"arc_length": ell, "max_occupancy": lattice.arc_max_occupancy(level, ell)} for ell in lengths]
        payload = {
            **_meta(None, {"command": "lattice arcs", "m": args.m, "length": lengths}),
            "m": level.m, "N": level.n_points,
            "min_gap": lattice.min_pair_distance(level), "arcs": rows,
        }
        _emit(_dump(payload), args.out, stdout)
    elif args.action == "pairsum":
        level = lattice.enumerate_lattice_points(args.m)
        d = args.alpha
        payload = {
            **_meta(None, {"command": "lattice pairsum", "m": args.m, "alpha": str(d), "a": args.a, "c": args.c}),
            "m": level.m, "N": level.n_points, "alpha": str(d),
            "A_size": sum(1 for _ in lattice.pair_set_A(level, d)),
            "min_pair_sum": lattice.min_pair_sum(level, d),
        }
        if d.is_rational:
            q, p = d.integer_vector
            payload["rational_pair_sum"] = lattice.rational_pair_sum(level, q, p)
            payload["rational_pair_sum_bound"] = 2 * math.pi**2 / 3 * level.n_points
        if args.a is not None and args.c is not None:
            rep = lattice.range_decomposition(level, d, args.a, args.c)
            payload["ranges"] = {
                "total": rep.total, "small_gap": rep.range_small_gap,
                "near_orthogonal": rep.range_near_orthogonal, "far": rep.range_far,
                "a": rep.parameters[0], "c": rep.parameters[1],
            }
        _emit(_dump(payload), args.out, stdout)
    return EXIT_OK


def _cmd_wave(args, stdout, stderr):
    level = lattice.enumerate_lattice_points(args.m)
    sample = wave.sample_wave(level, args.seed)
    seg = wave.Segment(args.alpha, args.L, tuple(args.offset))
    res = wave.count_nodal_intersections(sample, seg, oversample=args.oversample)
    resolved = {
        "command": "wave sample", "m": args.m, "seed": args.seed, "alpha": str(args.alpha),
        "L": args.L, "offset": list(args.offset), "oversample": args.oversample,
        "rng": "numpy PCG64 via default_rng(seed)",
    }
    payload = {
        **_meta(args.seed, resolved),
        "m": args.m, "seed": args.seed, "Z": res.count, "roots": res.roots,
        "expected_Z": theory.expected_intersections(args.m, args.L),
        "suspicious_cells": res.suspicious_cells, "grid_cells": res.n_cells,
    }
    _emit(_dump(payload), args.out, stdout)
    return EXIT_OK


def _cmd_theory(args, stdout, stderr):
    level = lattice.enumerate_lattice_points(args.m)
    rep = theory.second_moment_closed_form(level, args.alpha, args.L)
    bounds = {}
    for kind in theory.BOUND_KINDS:
        try:
            vb = theory.variance_bound(level, args.alpha, kind, epsilon=args.epsilon)
        except ValueError:
            continue
        bounds[kind] = {"value": vb.value, "hypothesis_note": vb.hypothesis_note}
    resolved = {"command": "theory bounds", "m": args.m, "alpha": str(args.alpha), "L": args.L, "epsilon": args.epsilon}
    payload = {
        **_meta(None, resolved),
        "m": args.m, "N": level.n_points,
        "expected_mean": theory.expected_intersections(args.m, args.L),
        "zero_density": theory.zero_density_constant(args.m),
        "second_moment": rep.to_dict(),
        "variance_bounds": bounds,
    }
    _emit(_dump(payload), args.out, stdout)
    return EXIT_OK


def _cmd_experiment(args, stdout, stderr):
    config = experiment.load_config(args.config)
    results = [experiment.run_ensemble(config, m) for m in config.m_list]
    resolved = {"command": "experiment run", **config.resolved()}
    out = args.out or config.output_path
    fmt = "csv" if args.csv else config.format
    if fmt == "csv":
        _emit(experiment.results_to_csv(results), out, stdout)
    else:
        _emit(experiment.results_to_json(results, _meta(config.seed_base, resolved)), out, stdout)
    bad = [r.m for r in results if not r.mean_band_ok]
    if bad:
        print(f"mean outside 4 standard errors for m={bad}", file=stderr)
        return EXIT_BAND
    return EXIT_OK


_COMMANDS = {
    "lattice": _cmd_lattice,
    "wave": _cmd_wave,
    "theory": _cmd_theory,
    "experiment": _cmd_experiment,
}


def parse_and_dispatch(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, stdout, stderr)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_RUNTIME


def main(argv=None) -> None:
    sys.exit(parse_and_dispatch(argv))


if __name__ == "__main__":
    main()
