"""Command-line front end.

Exit codes: 0 success, 2 numerical failure (any package error or a failed
check), 1 usage error or unusable input.  Errors go to stderr as
``CODE: [module] message (context)``.

Word orientation: in every output, the word ``w_1 w_2 ... w_n`` labels
``psi_{w_1} o psi_{w_2} o ... o psi_{w_n}``, so ``w_1`` is applied last.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .config import THETA, RunConfig
from .errors import InputError, MalformedInput, TwistRenormError
from .io import load_fixed_point, read_json, save_fixed_point, write_csv, write_json
from .renorm import validate_schedule

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2
DEFAULT_FIXED_POINT = "fixed_point.json"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _say(args, text):
    if not args.quiet:
        print(text)


def _json_line(obj):
    return json.dumps(obj, separators=(",", ":"))


def _load_config(args):
    if args.config is None:
        return RunConfig()
    try:
        return RunConfig.from_dict(read_json(args.config))
    except (TypeError, ValueError, KeyError) as exc:
        raise MalformedInput(f"bad config: {exc}", path=args.config) from exc


def _load_gen(args, config):
    """Fixed point from ``--in``; a missing default file triggers a fresh solve."""
    if args.input is not None:
        return load_fixed_point(args.input)[0]
    if os.path.exists(DEFAULT_FIXED_POINT):
        return load_fixed_point(DEFAULT_FIXED_POINT)[0]
    from .pipeline import solve
    return solve(config)[0]


def _parse_point(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"point must be 'x,y', got {text!r}") from None
    return x, y


def _numbered(template, k):
    """``curve_k.csv`` -> ``curve_3.csv``; ``{k}`` placeholders also work."""
    if "{k}" in template:
        return template.format(k=k)
    stem, ext = os.path.splitext(template)
    if stem.endswith("_k"):
        stem = stem[:-2]
    return f"{stem}_{k}{ext}"


def _summary_name(template):
    stem, _ = os.path.splitext(template.replace("{k}", "k"))
    if stem.endswith("_k"):
        stem = stem[:-2]
    return f"{stem}_summary.json"


# commands -----------------------------------------------------------------------------

def cmd_solve(config, args):
    from .pipeline import solve
    if args.degree_schedule is not None:
        try:
            sched = tuple(int(v) for v in args.degree_schedule.split(","))
        except ValueError:
            raise UsageError("degree schedule must be comma-separated integers") from None
        validate_schedule(sched)
        config = RunConfig.from_dict({**config.to_dict(), "degree_schedule": list(sched)})
    gen, rep, path = solve(config)
    out = args.out or DEFAULT_FIXED_POINT
    save_fixed_point(out, gen, rep, path)
    _say(args, f"lambda={gen.lam!r} mu={gen.mu!r} residual={rep.residual_norm:.3e} -> {out}")
    return EXIT_OK


def cmd_map(config, args):
    from .twistmap import ImplicitMap
    gen = _load_gen(args, config)
    m = ImplicitMap(gen)
    if not args.point:
        raise UsageError("map needs at least one --point x,y")
    records = []
    for text in args.point:
        x, y = _parse_point(text)
        X, Y = m.forward(x, y)
        J = m.differential(x, y)
        records.append({"point": [x, y], "image": [X, Y], "differential": J.tolist(),
                        "det": float(np.linalg.det(J)), "twist": float(J[0, 1])})
    for r in records:
        print(_json_line(r))
    if args.out:
        with open(args.out, "w") as fh:
            fh.writelines(_json_line(r) + "\n" for r in records)
    return EXIT_OK


def cmd_cantor(config, args):
    from .ifs import box_levels, cantor_cloud
    from .pipeline import prepare
    gen = _load_gen(args, config)
    sc = prepare(gen)
    n = config.cloud_level if args.level is None else args.level
    if n < 0 or n > config.max_level:
        raise UsageError(f"level must be in [0, {config.max_level}]")
    if args.boxes:
        levels = box_levels(sc.scal, sc.m, n, sc.region.sample(), config.tolerances)
        out = args.out or "boxes.json"
        write_json(out, {"level": n, "frame": "tip-centred", "scalings": sc.scal.to_dict(),
                         "base_region": {"lo": list(map(float, sc.region.lo)),
                                         "hi": list(map(float, sc.region.hi))},
                         "boxes": [b.to_dict() for b in levels[n]]})
        _say(args, f"{2 ** n} boxes at level {n}, nested and disjoint -> {out}")
        return EXIT_OK
    out = args.out or "cloud.csv"
    write_csv(out, ["word", "x", "y"],
              ([str(w), float(p[0]), float(p[1])] for w, p in cantor_cloud(sc.scal, sc.m, n)))
    _say(args, f"{2 ** n} points at level {n} -> {out}")
    return EXIT_OK


def cmd_curve(config, args):
    from .curve import (curve_sequence, diagonal_seed, hausdorff_to_cloud, piece_slopes,
                        sequence_summary)
    from .ifs import cloud_points
    from .pipeline import prepare
    gen = _load_gen(args, config)
    sc = prepare(gen)
    K = config.curve_iters if args.iters is None else args.iters
    if K < 0:
        raise UsageError("iters must be non-negative")
    curves = curve_sequence(diagonal_seed(sc.region, metric=sc.metric), sc.scal, sc.m, K)
    template = args.out or "curve_k.csv"
    for k, c in enumerate(curves):
        write_csv(_numbered(template, k), ["t", "x", "y"],
                  ([float(t), float(p[0]), float(p[1])] for t, p in zip(c.params, c.points)))
    summ = sequence_summary(curves)
    haus = [hausdorff_to_cloud(c, cloud_points(sc.scal, sc.m, k))
            for k, c in enumerate(curves)]
    summary = {"iters": K, "theta": THETA, "metric_kappa": sc.metric.kappa,
               "base_diameter": sc.diam, **summ, "hausdorff": haus,
               "hausdorff_bound": [THETA ** k * sc.diam for k in range(K + 1)],
               "pieces": [piece_slopes(curves[k], len(curves[k - 1]))
                          for k in range(1, K + 1)]}
    write_json(_summary_name(template), summary)
    _say(args, f"{K + 1} curves, L_k max {max(summ['lipschitz'][1:] or [0.0]):.6g}"
               f" -> {_summary_name(template)}")
    return EXIT_OK


def cmd_obstruct(config, args):
    from .obstruction import Direction, clash_experiment, tip_derivative_chain
    from .pipeline import prepare
    gen = _load_gen(args, config)
    if args.chain:
        rec = tip_derivative_chain(gen, config.tolerances).to_dict()
        print(json.dumps(rec, indent=1))
        if args.out:
            write_json(args.out, rec)
        return EXIT_OK
    sc = prepare(gen)
    depth = config.clash_depth if args.max_depth is None else args.max_depth
    if depth < 1:
        raise UsageError("max-depth must be positive")
    rep = clash_experiment(sc.m, sc.scal, depth, Direction.from_degrees(args.seed_angle),
                           sc.diam, sc.metric, config.tolerances)
    out = args.out or "clash.json"
    write_json(out, rep.to_dict())
    _say(args, f"N={rep.N} monotone={rep.monotone_from_N} -> {out}")
    return EXIT_OK if rep.N is not None else EXIT_NUMERIC


def cmd_verify(config, args):
    from .verify import report_dict, run_checks
    gen = _load_gen(args, config)
    only = None
    if args.only:
        only = [v for item in args.only for v in item.split(",") if v]
    try:
        results = run_checks(gen, config, only)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    for r in results:
        _say(args, r.line())
    report = report_dict(results)
    write_json(args.out or "verify_report.json", report)
    return EXIT_OK if report["passed"] else EXIT_NUMERIC


COMMANDS = {"solve": cmd_solve, "map": cmd_map, "cantor": cmd_cantor, "curve": cmd_curve,
            "obstruct": cmd_obstruct, "verify": cmd_verify}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="run configuration JSON")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output path")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS)
    p = _Parser(prog="twistrenorm", description=__doc__.split("\n")[0])
    p.add_argument("--config", default=None, help="run configuration JSON")
    p.add_argument("--out", default=None, help="output path")
    p.add_argument("--quiet", action="store_true", default=False)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("solve", parents=[common], help="degree continuation to the fixed point")
    sp.add_argument("--degree-schedule", default=None, help="e.g. 6,10,14,20")

    def with_input(sp):
        sp.add_argument("--in", dest="input", default=None,
                        help=f"fixed-point file (default {DEFAULT_FIXED_POINT}, solved if absent)")
        return sp

    sp = with_input(sub.add_parser("map", parents=[common], help="evaluate the map at points"))
    sp.add_argument("--point", action="append", help="x,y (repeatable)")
    sp = with_input(sub.add_parser("cantor", parents=[common], help="Cantor cloud or boxes"))
    sp.add_argument("--level", type=int, default=None)
    sp.add_argument("--boxes", action="store_true")
    sp = with_input(sub.add_parser("curve", parents=[common], help="Lipschitz curve sequence"))
    sp.add_argument("--iters", type=int, default=None)
    sp = with_input(sub.add_parser("obstruct", parents=[common],
                                   help="direction-field clash or tip derivative chain"))
    sp.add_argument("--max-depth", type=int, default=None)
    sp.add_argument("--seed-angle", type=float, default=45.0, help="degrees from horizontal")
    sp.add_argument("--chain", action="store_true")
    sp = with_input(sub.add_parser("verify", parents=[common], help="run the invariant suite"))
    sp.add_argument("--only", action="append", help="check or group names (comma-separated)")
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = _load_config(args)
        return COMMANDS[args.command](config, args)
    except UsageError as exc:
        print(f"USAGE: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, MalformedInput) as exc:
        print(_error_line(exc), file=sys.stderr)
        return EXIT_USAGE
    except TwistRenormError as exc:
        print(_error_line(exc), file=sys.stderr)
        return EXIT_NUMERIC


def _error_line(exc):
    """``CODE: [module] message (context)``, module being where it was raised."""
    tb, module = exc.__traceback__, "cli"
    while tb is not None:
        name = tb.tb_frame.f_globals.get("__name__", "")
        if name.startswith("twistrenorm."):
            module = name.split(".", 1)[1]
        tb = tb.tb_next
    return f"{exc.code}: [{module}] {exc}"

if __name__ == "__main__":
    sys.exit(main())
