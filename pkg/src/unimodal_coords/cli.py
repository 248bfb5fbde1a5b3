"""Command-line front end: lattices, codings, decoding, conjugacies and checks.

Every subcommand writes CSV by default and a ``{command, config, result}``
JSON envelope with ``--format json``. Exit status is 0 on success, 2 for an
invalid configuration and 1 when a computation fails.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction

from .codings import (DigitSequence, digit_sequence, g_decomposition, invariant_coordinates)
from .conjugacy import ConvergenceError, conjugate_grid, decode
from .lattice import DepthError, MidpointError, localize, preimage_level
from .maps import DomainError, MapError, parse_map_arg
from .verification import DEFAULT_SEED, SUITE_CHECKS, run_suite

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    maps: dict
    depth: int = 48
    tol: float = 1e-8
    samples: int = 257
    format: str = "csv"
    out: str | None = None
    seed: int = DEFAULT_SEED

    def validate(self) -> None:
        if not 1 <= self.depth <= 64:
            raise ConfigError(f"depth must lie in [1, 64], got {self.depth}")
        if not 0.0 < self.tol < 1.0:
            raise ConfigError(f"tol must lie in (0, 1), got {self.tol}")
        if self.format not in ("csv", "json"):
            raise ConfigError(f"format must be csv or json, got {self.format!r}")
        if self.samples < 2:
            raise ConfigError("samples must be at least 2")


def _csv(rows, header=None) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def _parse_point(text: str) -> float:
    try:
        x = float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise ConfigError(f"cannot parse point {text!r}") from exc
    if not 0.0 <= x <= 1.0:
        raise ConfigError(f"point {text!r} outside [0, 1]")
    return x


def _load(text: str | None, v: float | None, flag: str):
    if text is None:
        raise ConfigError(f"{flag} is required")
    return parse_map_arg(text, v)


def _emit(cfg: RunConfig, text_csv: str, result) -> None:
    if cfg.format == "json":
        text = json.dumps({"command": cfg.command, "config": asdict(cfg), "result": result}) + "\n"
    else:
        text = text_csv
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# --- subcommands

def cmd_preimages(cfg: RunConfig, args) -> int:
    g = _load(args.map, args.v, "--map")
    if args.n is None:
        raise ConfigError("--n is required")
    level = preimage_level(g, args.n)
    rows = [(k, _fmt(float(mu))) for k, mu in enumerate(level.points)]
    _emit(cfg, _csv(rows, ["k", "mu"]), level.to_json())
    return EXIT_OK


def cmd_encode(cfg: RunConfig, args) -> int:
    g = _load(args.map, args.v, "--map")
    x = _parse_point(args.x)
    d = g_decomposition(g, x, cfg.depth)
    rho = digit_sequence(g, x, cfg.depth)
    theta = invariant_coordinates(g, x, cfg.depth - 1)
    path = localize(g, x, cfg.depth - 1)
    result = {"x": x, "decomposition": str(d), "decomposition_tail": d.tail,
              "digits": str(rho), "invariant_coordinates": str(theta),
              "localization": path.to_json()}
    head = _csv([("decomposition", str(d)), ("digits", str(rho)),
                 ("invariant_coordinates", str(theta))])
    table = _csv([(c.n, c.k, _fmt(c.left), _fmt(c.right), _fmt(c.midpoint), _fmt(c.length),
                   _fmt(c.delta), c.bit) for c in path.intervals],
                 ["n", "k", "left", "right", "midpoint", "length", "delta", "bit"])
    _emit(cfg, head + "\n" + table, result)
    return EXIT_FAILED if path.truncated else EXIT_OK


def cmd_decode(cfg: RunConfig, args) -> int:
    g = _load(args.map, args.v, "--map")
    try:
        rho = DigitSequence.parse(args.digits or "")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    rho = DigitSequence(rho.bits, zero_tail=args.zero_tail)
    report = decode(g, rho, cfg.tol, cfg.depth)
    summary = report.to_json()
    header = ["value", "converged", "exact", "depth", "final_length", "crosscheck_residual"]
    row = [_fmt(report.value), report.converged, report.exact, report.depth,
           _fmt(report.final_length), _fmt(report.crosscheck_residual)]
    _emit(cfg, _csv([row], header), summary)
    if report.diagnostic and not report.converged:
        print(f"note: {report.diagnostic}", file=sys.stderr)
    return EXIT_OK


def cmd_conjugate(cfg: RunConfig, args) -> int:
    source = _load(args.source, args.v, "--source")
    target = _load(args.target, args.v_target, "--target")
    rows = conjugate_grid(source, target, cfg.samples, cfg.tol, cfg.depth)
    text = _csv([(_fmt(x), _fmt(h)) for x, h in rows], ["x", "h_x"])
    _emit(cfg, text, [{"x": x, "h_x": h} for x, h in rows])
    return EXIT_OK


def cmd_verify(cfg: RunConfig, args) -> int:
    only = None
    if args.only:
        only = [name for part in args.only for name in part.split(",") if name]
        unknown = [n for n in only if n not in SUITE_CHECKS]
        if unknown:
            raise ConfigError(f"unknown check(s) {unknown}; choose from {', '.join(SUITE_CHECKS)}")
    maps = None
    if args.map:
        g = parse_map_arg(args.map, args.v)
        maps = {g.describe(): g}
    reports = run_suite(cfg.seed, only, maps)
    rows = [(r.name, r.map_description, r.samples, _fmt(r.max_residual), _fmt(r.tolerance),
             "PASS" if r.passed else "FAIL", r.seed) for r in reports]
    text = _csv(rows, ["check", "maps", "samples", "max_residual", "tolerance", "status", "seed"])
    _emit(cfg, text, [r.to_json() for r in reports])
    return EXIT_OK if all(r.passed for r in reports) else EXIT_FAILED


COMMANDS = {"preimages": cmd_preimages, "encode": cmd_encode, "decode": cmd_decode,
            "conjugate": cmd_conjugate, "verify": cmd_verify}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--v", type=float, default=None, help="critical point for skew_tent maps")
    common.add_argument("--depth", type=int, default=48)
    common.add_argument("--tol", type=float, default=1e-8)
    common.add_argument("--samples", type=int, default=257)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)

    parser = argparse.ArgumentParser(prog="unimodal-coords",
                                     description="Preimage lattices, codings and conjugacies of unimodal maps.")
    sub = parser.add_subparsers(dest="command", required=True)
    map_help = "tent, logistic, sine, skew_tent[:v] or @spec.json"

    p = sub.add_parser("preimages", parents=[common], help="level n of the preimage lattice of 0")
    p.add_argument("--map", required=True, help=map_help)
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("encode", parents=[common], help="all codings of a point")
    p.add_argument("--map", required=True, help=map_help)
    p.add_argument("x", help="point in [0, 1], decimal or fraction such as 1/3")

    p = sub.add_parser("decode", parents=[common], help="point with a given digit sequence")
    p.add_argument("--map", required=True, help=map_help)
    p.add_argument("--digits", required=True, help="0/1 string, first digit first")
    p.add_argument("--zero-tail", action="store_true", help="digits past the string are all 0")

    p = sub.add_parser("conjugate", parents=[common], help="conjugacy h on a uniform grid")
    p.add_argument("--source", required=True, help=map_help)
    p.add_argument("--target", required=True, help=map_help)
    p.add_argument("--v-target", type=float, default=None, help="critical point of a skew_tent target")

    p = sub.add_parser("verify", parents=[common], help="run the verification checks")
    p.add_argument("--map", default=None, help="restrict per-map checks to this map")
    p.add_argument("--only", action="append", help=f"comma separated subset of: {', '.join(SUITE_CHECKS)}")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    maps = {k: getattr(args, k) for k in ("map", "source", "target") if getattr(args, k, None)}
    cfg = RunConfig(args.command, maps, args.depth, args.tol, args.samples, args.format,
                    args.out, args.seed)
    try:
        cfg.validate()
        return COMMANDS[args.command](cfg, args)
    except (ConfigError, MapError, DomainError, DepthError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConvergenceError, MidpointError, ArithmeticError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


if __name__ == "__main__":
    sys.exit(main())
