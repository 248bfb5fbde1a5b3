"""Executable checks of the lattice identities, codings and conjugacy formulas.

Every check returns a :class:`CheckReport`. Sampled checks draw from a seeded
``numpy`` generator and record the seed, so any report can be reproduced.
Residuals are absolute; the lattice identities are compared in forms that are
multiplied through by the cell length (``mid - left`` rather than ``delta``),
since a ratio of two nearby floats is only as accurate as ``ulp / length``.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .codings import (DigitSequence, decomposition_from_digits, digit_sequence,
                      digits_from_decomposition, g_decomposition, invariant_coordinates,
                      lex_compare, rot)
from .conjugacy import (DEFAULT_TOL, ConvergenceError, conjugate, conjugate_grid,
                        conjugate_report, skew_endpoint_series,
                        skew_endpoint_series_from_decomposition, skew_interval_length)
from .lattice import LocalizationPath, localize, preimage_level
from .maps import (UnimodalMap, evaluate, logistic_map, piecewise_linear_map, skew_tent_map,
                   tent_map)

DEFAULT_SEED = 20240612
RECURRENCE_TOL = 1e-10
SKEW_TOL = 1e-12
SIGNED_SUM_TOL = 1e-9
SKEW_LENGTH_TOL = 1e-12
SERIES_TOL = 1e-10
EQUATION_TOL = 1e-7
MU_TOL = 1e-8
ORACLE_TOL = 1e-6

EXAMPLE_PROFILE = ((0.0, 0.0), (0.25, 0.6), (0.4, 1.0), (0.7, 0.5), (1.0, 0.0))


def builtin_maps() -> dict[str, UnimodalMap]:
    """The maps every check is expected to pass on."""
    return {
        "tent": tent_map(),
        "skew_tent_0.2": skew_tent_map(0.2),
        "skew_tent_0.5": skew_tent_map(0.5),
        "skew_tent_0.8": skew_tent_map(0.8),
        "logistic": logistic_map(),
        "piecewise_linear": piecewise_linear_map(EXAMPLE_PROFILE),
    }


@dataclass
class Failure:
    input: str
    expected: str
    got: str


@dataclass
class CheckReport:
    """``passed`` holds iff ``max_residual <= tolerance`` and every part passed."""

    name: str
    map_description: str
    samples: int
    max_residual: float
    tolerance: float
    failures: list[Failure] = field(default_factory=list)
    seed: int | None = None
    parts: list["CheckReport"] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance and all(p.passed for p in self.parts)

    def to_json(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        out["parts"] = [p.to_json() for p in self.parts]
        if math.isinf(self.max_residual):
            out["max_residual"] = "inf"
        return out

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name} [{self.map_description}] samples={self.samples} "
                f"max_residual={self.max_residual:.3g} tol={self.tolerance:.3g} seed={self.seed}")


class _Tally:
    """Accumulates residuals and keeps the first few failures."""

    def __init__(self, tol: float, keep: int = 20):
        self.tol = tol
        self.keep = keep
        self.max = 0.0
        self.failures: list[Failure] = []

    def add(self, label: str, expected, got, residual: float | None = None) -> None:
        if residual is None:
            residual = abs(float(expected) - float(got))
        if not residual <= self.max:
            self.max = residual if not math.isnan(residual) else math.inf
        if not residual <= self.tol and len(self.failures) < self.keep:
            self.failures.append(Failure(label, repr(expected), repr(got)))

    def report(self, name: str, desc: str, samples: int, seed=None, parts=()) -> CheckReport:
        return CheckReport(name, desc, samples, self.max, self.tol, self.failures, seed, list(parts))


def merge(name: str, reports: Sequence[CheckReport], seed: int | None = None) -> CheckReport:
    """Combine reports of one check over several samples or maps."""
    if not reports:
        return CheckReport(name, "none", 0, 0.0, 0.0, [], seed)
    descs = sorted({r.map_description for r in reports})
    failures = [f for r in reports for f in r.failures][:50]
    parts = [p for r in reports for p in r.parts]
    return CheckReport(name, ", ".join(descs), sum(r.samples for r in reports),
                       max(r.max_residual for r in reports), max(r.tolerance for r in reports),
                       failures, seed, parts)


def _cells(path: LocalizationPath, tally: _Tally, label: str):
    if path.truncated:
        tally.add(f"{label}: descent truncated", "full path", path.diagnostic, math.inf)
    return path.intervals


# --- lattice identities

def check_recurrences(g: UnimodalMap, x: float, depth: int, tol: float = RECURRENCE_TOL) -> CheckReport:
    """Endpoint, midpoint and length recurrences between consecutive cells."""
    t = _Tally(tol)
    cells = _cells(localize(g, x, depth), t, f"x={x!r}") if depth > 0 else ()
    for c in cells:
        n = c.n
        t.add(f"x={x!r} n={n} midpoint from delta", c.left + c.delta * c.length, c.midpoint)
    for c, nxt in zip(cells, cells[1:]):
        n, d = c.n, c.bit
        dl = c.midpoint - c.left  # delta_{n+1,k_n} * l_{n+1,k_n}
        lab = f"x={x!r} n={n}"
        t.add(f"{lab} child length", (dl if d == 0 else c.length - dl), nxt.length)
        t.add(f"{lab} length split", dl, nxt.length + d * (c.length - 2.0 * nxt.length))
        t.add(f"{lab} left endpoint", c.left + d * dl, nxt.left)
        t.add(f"{lab} right endpoint", c.right - (1 - d) * (c.length - dl), nxt.right)
        nl = nxt.midpoint - nxt.left
        step = nl if d else -(nxt.length - nl)  # (-1)^(1+d) Rot^(1+d)(delta) l
        t.add(f"{lab} midpoint", c.midpoint + step, nxt.midpoint)
    return t.report("recurrences", g.describe(), 1)


def check_skew_cells(v: float, x: float, depth: int, tol: float = SKEW_TOL) -> CheckReport:
    """Cell proportions and lengths of the skew tent ``f_v``."""
    g = skew_tent_map(v)
    t = _Tally(tol)
    if depth == 0:
        return t.report("skew_cells", g.describe(), 1)
    cells = _cells(localize(g, x, depth), t, f"x={x!r}")
    d = (0, *(c.bit for c in cells))
    prod = 1.0
    for n, c in enumerate(cells):
        if n >= 1:
            lab = f"x={x!r} n={n}"
            t.add(f"{lab} midpoint proportion", rot(d[n], v) * c.length, c.midpoint - c.left)
            t.add(f"{lab} length recurrence", cells[n - 1].length * rot(d[n - 1] + d[n], v), c.length)
            prod *= rot(d[n - 1] + d[n], v)
            t.add(f"{lab} length product", prod, c.length)
    return t.report("skew_cells", g.describe(), 1)


def check_signed_sum(g: UnimodalMap, x: float, depth: int, tol: float = SIGNED_SUM_TOL) -> CheckReport:
    """``x_(n) + d_{n+1} l_n`` against the signed sum over the orbit digits."""
    t = _Tally(tol)
    cells = _cells(localize(g, x, depth), t, f"x={x!r}")
    rho = digit_sequence(g, x, len(cells)).bits
    signed = float(rho[0])
    prefix = 0
    for n, c in enumerate(cells):
        if n >= 1:
            prefix += rho[n - 1]
            signed += (-1) ** prefix * rho[n] * c.length
        direct = c.left + c.bit * c.length
        t.add(f"x={x!r} n={n}", direct, signed)
    return t.report("signed_sum", g.describe(), 1)


def check_skew_lengths(v: float, x: float, depth: int, tol: float = SKEW_LENGTH_TOL) -> CheckReport:
    """Closed-form skew-tent cell lengths against the descent."""
    if depth > 40:
        raise ValueError("the length check is specified for depth <= 40")
    g = skew_tent_map(v)
    t = _Tally(tol)
    path = localize(g, x, depth)
    cells = _cells(path, t, f"x={x!r}")
    rho = digits_from_decomposition(g_decomposition(g, x, depth))
    for c in cells:
        t.add(f"x={x!r} n={c.n}", skew_interval_length(v, rho, c.n), c.length)
    return t.report("skew_lengths", g.describe(), 1)


def check_endpoint_series(g: UnimodalMap, x: float, depth: int, tol: float = SERIES_TOL) -> CheckReport:
    """Endpoint and midpoint series built from the descent data; skew tents
    also use their closed-form series."""
    t = _Tally(tol)
    path = localize(g, x, depth)
    cells = _cells(path, t, f"x={x!r}")
    v = g.critical_point
    lefts, rights, mids = [], [1.0], [v]
    for n, c in enumerate(cells):
        lab = f"x={x!r} n={n}"
        t.add(f"{lab} left series", math.fsum(lefts), c.left)
        t.add(f"{lab} right series", math.fsum(rights), c.right)
        t.add(f"{lab} midpoint series", math.fsum(mids), c.midpoint)
        dl = c.midpoint - c.left
        lefts.append(c.bit * dl)
        rights.append(-(1 - c.bit) * (c.length - dl))
        if n + 1 < len(cells):
            nxt = cells[n + 1]
            nl = nxt.midpoint - nxt.left
            mids.append(nl if c.bit else -(nxt.length - nl))
    if g.kind in ("skew_tent", "tent") and cells:
        d = g_decomposition(g, x, len(cells))
        rho = digits_from_decomposition(d)
        for c in cells:
            lab = f"x={x!r} n={c.n}"
            for form, (lo, hi, mid) in (("digit", skew_endpoint_series(v, rho, c.n)),
                                        ("decomposition", skew_endpoint_series_from_decomposition(v, d, c.n))):
                t.add(f"{lab} {form} left", lo, c.left)
                t.add(f"{lab} {form} right", hi, c.right)
                t.add(f"{lab} {form} midpoint", mid, c.midpoint)
    return t.report("endpoint_series", g.describe(), 1)


# --- codings

def check_conversions(g: UnimodalMap, x: float, depth: int) -> CheckReport:
    """Descent bits and orbit digits convert into each other bitwise."""
    t = _Tally(0.0)
    d = g_decomposition(g, x, depth)
    rho = digit_sequence(g, x, depth)
    lab = f"x={x!r}"
    got_rho = digits_from_decomposition(d).bits
    got_d = decomposition_from_digits(rho).bits
    t.add(f"{lab} digits", str(rho), "".join(map(str, got_rho)),
          sum(a != b for a, b in zip(rho.bits, got_rho)) + abs(len(rho.bits) - len(got_rho)))
    t.add(f"{lab} decomposition", str(d), "".join(map(str, got_d[1:])),
          sum(a != b for a, b in zip(d.bits, got_d)) + abs(len(d.bits) - len(got_d)))
    return t.report("conversions", g.describe(), 1)


def check_conversion_roundtrip(rng: np.random.Generator, count: int, length: int = 64,
                            seed: int | None = None) -> CheckReport:
    """Bit-string round trips of the two conversions."""
    t = _Tally(0.0)
    for _ in range(count):
        bits = tuple(int(b) for b in rng.integers(0, 2, length))
        rho = DigitSequence(bits)
        back = digits_from_decomposition(decomposition_from_digits(rho)).bits
        t.add(f"digits {rho}", str(rho), "".join(map(str, back)), float(back != bits))
        d = decomposition_from_digits(DigitSequence(bits))
        again = decomposition_from_digits(digits_from_decomposition(d))
        t.add(f"decomposition {d}", str(d), str(again), float(again.bits != d.bits))
    return t.report("conversions_roundtrip", "bit strings", count, seed)


def check_rot(rng: np.random.Generator, samples: int = 100, seed: int | None = None) -> CheckReport:
    """Nested ``Rot`` exponents over all bit arguments, residual in ulps."""
    t = _Tally(1.0)
    ts = [0.0, 1.0, 0.5, *(float(s) for s in rng.random(samples))]
    for s in ts:
        ulp = np.spacing(max(s, 1.0 - s, 0.5))
        for x1 in (0, 1):
            for x2 in (0, 1):
                a, b = rot(rot(x1, x2), s), rot(x1 + x2, s)
                t.add(f"Rot^Rot^{x1}({x2})(t), t={s!r}", b, a, abs(a - b) / ulp)
            a, b = rot(rot(x1, 0), s), rot(x1, s)
            t.add(f"Rot^Rot^{x1}(0)(t), t={s!r}", b, a, abs(a - b) / ulp)
    return t.report("rot", "Rot algebra", len(ts), seed)


def check_mt_monotone(g: UnimodalMap, xs: Iterable[float], depth: int = 32) -> CheckReport:
    """Consecutive sorted points must have non-decreasing invariant coordinates;
    the residual counts the pairs where they decrease."""
    pts = sorted(float(x) for x in xs)
    thetas = [invariant_coordinates(g, x, depth) for x in pts]
    t = _Tally(0.0)
    for (xa, ta), (xb, tb) in zip(zip(pts, thetas), zip(pts[1:], thetas[1:])):
        c = lex_compare(ta, tb)
        t.add(f"x={xa!r} < x={xb!r}", f"{ta} <= {tb}", f"order {c:+d}", float(c > 0))
    t.max = float(sum(1 for ta, tb in zip(thetas, thetas[1:]) if lex_compare(ta, tb) > 0))
    return t.report("mt_monotone", g.describe(), len(pts))


# --- conjugacy

def _reliable_digits(hx: float, lefts: Sequence[float], rights: Sequence[float], margin: float) -> int:
    """How many leading digits of ``hx`` are settled with room ``margin`` to spare."""
    n = 0
    for lo, hi in zip(lefts[1:], rights[1:]):
        if min(hx - lo, hi - hx) < margin:
            break
        n += 1
    return n


def check_conjugacy(source: UnimodalMap, target: UnimodalMap, samples: int, depth: int = 48,
                    tol: float = DEFAULT_TOL, rng: np.random.Generator | None = None,
                    seed: int | None = None, equation_tol: float = EQUATION_TOL,
                    mu_levels: int = 8, grid: int = 257) -> CheckReport:
    """``h o source = target o h`` on random points, plus monotonicity of ``h``,
    lattice correspondence for levels up to ``mu_levels`` and digit transfer."""
    if rng is None:
        rng = np.random.default_rng(seed)
    desc = f"{source.describe()} -> {target.describe()}"
    xs = np.sort(rng.random(samples))
    eq, mono, mu, dig = _Tally(equation_tol), _Tally(0.0), _Tally(MU_TOL), _Tally(0.0)
    hs = []
    for x in map(float, xs):
        try:
            rep = conjugate_report(source, target, x, tol, depth)
            if not rep.converged:
                raise ConvergenceError(rep.diagnostic)
            hx = rep.value
            lhs = conjugate(source, target, evaluate(source, x), tol, depth)
        except (ConvergenceError, ArithmeticError) as exc:
            eq.add(f"x={x!r}", "converged", str(exc), math.inf)
            hs.append(math.nan)
            continue
        hs.append(hx)
        eq.add(f"x={x!r}", evaluate(target, hx), lhs)
        src = localize(source, x, min(depth, 40))
        n_src = _reliable_digits(x, [c.left for c in src.intervals], [c.right for c in src.intervals], 1e-9)
        n = min(n_src, _reliable_digits(hx, rep.lefts, rep.rights, 100 * tol))
        if n:
            a, b = digit_sequence(source, x, n), digit_sequence(target, hx, n)
            dig.add(f"x={x!r} first {n} digits", str(a), str(b), float(a.bits != b.bits))
    # random samples may share a depth-limited source cell, so only a strict
    # decrease counts there; the uniform grid must increase strictly
    for (xa, ha), (xb, hb) in zip(zip(xs, hs), zip(xs[1:], hs[1:])):
        if ha > hb:
            mono.add(f"x={xa!r} < x={xb!r}", "h non-decreasing", f"{ha!r} > {hb!r}", 1.0)
    try:
        # monotonicity needs no finer resolution than the equation asserts
        rows = conjugate_grid(source, target, grid, max(tol, equation_tol), depth)
        bad = [(a, b) for a, b in zip(rows, rows[1:]) if not a[1] < b[1]]
        for (xa, ha), (xb, hb) in bad:
            mono.add(f"grid x={xa!r} < x={xb!r}", "h strictly increasing", f"{ha!r} >= {hb!r}", 1.0)
        mono_grid = len(bad)
    except (ConvergenceError, ArithmeticError) as exc:
        mono.add(f"{grid}-point grid", "strictly increasing", str(exc), 1.0)
        mono_grid = 1
    mono.max = float(sum(1 for a, b in zip(hs, hs[1:]) if a > b) + mono_grid)
    for n in range(1, mu_levels + 1):
        p1, p2 = preimage_level(source, n).points, preimage_level(target, n).points
        for k, (a, b) in enumerate(zip(p1, p2)):
            try:
                mu.add(f"n={n} k={k}", float(b), conjugate(source, target, float(a), tol, depth))
            except ConvergenceError as exc:
                mu.add(f"n={n} k={k}", float(b), str(exc), math.inf)
    parts = [mono.report("conjugacy.monotone", desc, samples + grid),
             mu.report("conjugacy.mu", desc, sum(2 ** (n - 1) + 1 for n in range(1, mu_levels + 1))),
             dig.report("conjugacy.digits", desc, samples)]
    return eq.report("conjugacy", desc, samples, seed, parts)


def analytic_conjugacy(x: float) -> float:
    """The logistic-to-tent conjugacy ``(2/pi) asin(sqrt(x))``."""
    return 2.0 / math.pi * math.asin(math.sqrt(x))


def check_analytic_oracle(samples: int = 257, depth: int = 48, tol: float = DEFAULT_TOL,
                          oracle_tol: float = ORACLE_TOL) -> CheckReport:
    """Logistic-to-tent conjugacy on a grid against the arcsine formula."""
    t = _Tally(oracle_tol)
    try:
        rows = conjugate_grid(logistic_map(), tent_map(), samples, tol, depth)
    except (ConvergenceError, ArithmeticError) as exc:
        t.add("grid", "converged and increasing", str(exc), math.inf)
        rows = []
    for x, h in rows:
        t.add(f"x={x!r}", analytic_conjugacy(x), h)
    return t.report("oracle", "logistic -> tent", samples)


# --- suite

def _xs(rng: np.random.Generator, count: int) -> list[float]:
    return [float(s) for s in rng.random(count)]


def _per_map(name: str, check: Callable, maps: dict, rng, count: int, depth: int, seed) -> CheckReport:
    reports = [check(g, x, depth) for g in maps.values() for x in _xs(rng, count)]
    return merge(name, reports, seed)


def _suite_entries(maps: dict, count: int) -> dict[str, Callable]:
    skews = (0.3, 0.5, 0.7)
    return {
        "rot": lambda rng, seed: check_rot(rng, 100, seed),
        "conversions": lambda rng, seed: merge("conversions", [
            check_conversion_roundtrip(rng, 200, 64, seed),
            _per_map("conversions", check_conversions, maps, rng, count, 32, seed)], seed),
        "recurrences": lambda rng, seed: _per_map("recurrences", check_recurrences, maps, rng, count, 24, seed),
        "skew_cells": lambda rng, seed: merge("skew_cells", [
            check_skew_cells(v, x, 30) for v in skews for x in _xs(rng, count)], seed),
        "signed_sum": lambda rng, seed: _per_map("signed_sum", check_signed_sum, maps, rng, count, 24, seed),
        "skew_lengths": lambda rng, seed: merge("skew_lengths", [
            check_skew_lengths(v, x, 40) for v in skews for x in _xs(rng, count)], seed),
        "endpoint_series": lambda rng, seed: _per_map("endpoint_series", check_endpoint_series, maps, rng, count, 16, seed),
        "conjugacy": lambda rng, seed: merge("conjugacy", [
            check_conjugacy(tent_map(), skew_tent_map(1 / 3), count, rng=rng, seed=seed, grid=33),
            check_conjugacy(logistic_map(), skew_tent_map(0.8), count, rng=rng, seed=seed, grid=33)], seed),
        "oracle": lambda rng, seed: check_analytic_oracle(),
        "mt_monotone": lambda rng, seed: merge("mt_monotone", [
            check_mt_monotone(tent_map(), _xs(rng, 50)),
            check_mt_monotone(logistic_map(), _xs(rng, 50))], seed),
    }


SUITE_CHECKS = ("rot", "conversions", "recurrences", "skew_cells", "signed_sum", "skew_lengths",
                "endpoint_series", "conjugacy", "oracle", "mt_monotone")


def run_suite(seed: int = DEFAULT_SEED, only: Sequence[str] | None = None,
              maps: dict[str, UnimodalMap] | None = None, count: int = 10) -> list[CheckReport]:
    """Run the named checks (all by default); reports come back sorted by name.

    Each check gets its own generator seeded from ``seed`` and its name, so
    filtering with ``only`` does not change the samples a check sees.
    """
    maps = builtin_maps() if maps is None else maps
    entries = _suite_entries(maps, count)
    names = SUITE_CHECKS if not only else tuple(only)
    unknown = [n for n in names if n not in entries]
    if unknown:
        raise KeyError(f"unknown check(s): {', '.join(unknown)}; choose from {', '.join(SUITE_CHECKS)}")
    reports = []
    for name in names:
        rng = np.random.default_rng([seed, SUITE_CHECKS.index(name)])
        rep = entries[name](rng, seed)
        rep.name, rep.seed = name, seed
        reports.append(rep)
    return sorted(reports, key=lambda r: r.name)


def reports_to_json(reports: Sequence[CheckReport]) -> str:
    return json.dumps([r.to_json() for r in reports])
