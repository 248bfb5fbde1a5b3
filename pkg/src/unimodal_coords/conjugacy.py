"""Reconstruction of points from digit sequences and explicit conjugacies.

A digit sequence fixes a path through the preimage lattice of any unimodal
map. Walking that path in a *target* map and summing signed cell lengths gives
partial sums ``a_n``, each an endpoint of the depth-``n`` cell. When the cells
shrink to a point the limit is the target point with the same digits, and
``h(x) = decode(target, digits(source, x))`` is the conjugacy.
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .codings import (DigitSequence, GDecomposition, decomposition_from_digits,
                      digit_sequence, digits_from_decomposition, g_decomposition, rot)
from .lattice import MidpointError, walk
from .maps import UnimodalMap

DEFAULT_TOL = 1e-8
DEFAULT_DEPTH = 48
CROSSCHECK_TOL = 1e-12


class ConvergenceError(RuntimeError):
    """Target cells did not shrink below the tolerance within the available depth."""


@dataclass
class ConvergenceReport:
    value: float
    partial_sums: list[float]
    lefts: list[float]
    rights: list[float]
    final_length: float
    converged: bool
    exact: bool
    tol: float
    crosscheck_residual: float
    diagnostic: str | None = None
    digits: str = field(default="", repr=False)

    @property
    def depth(self) -> int:
        return len(self.partial_sums) - 1

    def to_json(self, verbose: bool = False) -> dict:
        out = asdict(self)
        if not verbose:
            for key in ("partial_sums", "lefts", "rights"):
                out.pop(key)
        out["depth"] = self.depth
        return out


def decode(g: UnimodalMap, rho: DigitSequence, tol: float = DEFAULT_TOL,
           max_depth: int = DEFAULT_DEPTH, strategy: str = "auto") -> ConvergenceReport:
    """Reconstruct the point of ``g`` whose digit sequence is ``rho``.

    The partial sums follow the update
    ``a_{n+1} = a_n + (-1)^{d_{n+1}} Rot^{d_{n+1}}(d_{n+2}) l_{n+1}`` with
    ``a_0 = d_1``, where ``l_n`` is the length of the depth-``n`` cell. At every
    step they are checked against the signed digit sum
    ``rho_1 + sum (-1)^{rho_1+...+rho_{i-1}} rho_i l_{i-1}`` and against the
    cell endpoint they must equal.

    Stops when the current cell is no longer than ``tol`` (``converged``), when
    the digits run out, or at ``max_depth``. With a confirmed zero tail the
    bits become constant after the last 1 digit and the partial sums freeze on
    a lattice point; that value is exact and reported as such.
    """
    if len(rho) == 0:
        raise ValueError("cannot decode an empty digit sequence")
    d = decomposition_from_digits(rho)
    m = len(rho)
    last_depth = max_depth if rho.zero_tail else min(max_depth, m - 1)
    pin_depth = None
    if rho.zero_tail:
        ones = [i for i, r in enumerate(rho.bits, start=1) if r]
        pin_depth = max((ones[-1] if ones else 0) - 1, 0)

    def dbit(i: int) -> int:
        return d.bits[i] if i < len(d.bits) else d.bits[-1]

    def rho_at(i: int) -> int:
        return rho.rho(i)

    recurrence, lefts, rights = [], [], []
    signed = 0.0
    prefix = 0  # rho_1 + ... + rho_{n}
    residual = 0.0
    length = 1.0
    converged = exact = False
    diagnostic = None
    value = float(dbit(1))

    def choose(n, left, right, mid):
        return dbit(n + 1) if n <= last_depth else None

    try:
        for cell in walk(g, choose, strategy, max_depth=last_depth):
            n = cell.n
            length = cell.right - cell.left
            direct = cell.right if cell.bit else cell.left
            if n == 0:
                a = float(dbit(1))
                signed = float(rho_at(1))
            else:
                a = recurrence[-1] + (-1) ** dbit(n) * rot(dbit(n), dbit(n + 1)) * length
                prefix += rho_at(n)
                signed += (-1) ** prefix * rho_at(n + 1) * length
            residual = max(residual, abs(a - signed), abs(a - direct))
            recurrence.append(a)
            lefts.append(cell.left)
            rights.append(cell.right)
            value = direct
            if pin_depth is not None and n >= pin_depth:
                exact = converged = True
                break
            if length <= tol:
                converged = True
                break
    except MidpointError as exc:
        diagnostic = f"descent stopped: {exc}"
        if length > tol * 1e3:
            diagnostic += f"; cell length {length:.3g} has stalled, preimages of 0 may not be dense for this map"
    if residual > CROSSCHECK_TOL:
        raise ArithmeticError(f"partial sums disagree by {residual:.3g} (> {CROSSCHECK_TOL})")
    if not converged and diagnostic is None and last_depth < max_depth:
        diagnostic = (f"digits exhausted at depth {len(recurrence) - 1} with cell length {length:.3g} "
                      f"above tol {tol:.3g}")
    elif not converged and diagnostic is None:
        diagnostic = (f"cell length {length:.3g} still above tol {tol:.3g} at depth {len(recurrence) - 1}; "
                      "preimages of 0 may not be dense for this map")
    return ConvergenceReport(value, recurrence, lefts, rights, length, converged, exact, tol,
                             residual, diagnostic, str(rho))


# --- skew tent closed forms

def _check_skew(v: float) -> float:
    v = float(v)
    if not 0.0 < v < 1.0:
        raise ValueError(f"critical point out of range: v={v!r}")
    return v


def skew_decode(v: float, rho: DigitSequence, n: int | None = None) -> float:
    """``rho_1 + sum_{i=2..n} rho_i v^(i-1) ((v-1)/v)^(rho_1+...+rho_{i-1})``.

    Powers are kept as a positive magnitude and a sign to avoid raising a
    negative base.
    """
    v = _check_skew(v)
    bits = rho.bits if n is None else tuple(rho.rho(i) for i in range(1, n + 1))
    if not bits:
        return 0.0
    terms = [float(bits[0])]
    scale, sign = 1.0, 1
    for prev, r in zip(bits, bits[1:]):
        if prev:
            scale *= 1.0 - v
            sign = -sign
        else:
            scale *= v
        if r:
            terms.append(sign * scale)
    return math.fsum(terms)


def skew_interval_length(v: float, rho: DigitSequence, n: int) -> float:
    """Length of the depth-``n`` cell of a point of ``f_v`` with digits ``rho``:
    ``(1-v)^s v^(n-s)`` with ``s = rho_1 + ... + rho_n``."""
    v = _check_skew(v)
    s = sum(rho.rho(i) for i in range(1, n + 1))
    return (1.0 - v) ** s * v ** (n - s)


def skew_endpoint_series(v: float, rho: DigitSequence, n: int) -> tuple[float, float, float]:
    """``(left, right, midpoint)`` of the depth-``n`` cell, as digit series."""
    v = _check_skew(v)
    w = 1.0 - v
    left, right, mid = [], [1.0], [v]
    s_prev = 0
    for i in range(1, n + 1):
        s = s_prev + rho.rho(i)
        length = w ** s_prev * v ** (i - 1 - s_prev)
        left.append(rot(s, 0) * rot(s_prev, v) * length)
        right.append(-rot(1 + s, 0) * rot(1 + s_prev, v) * length)
        mid.append((-1) ** (1 + s) * w ** (1 + s) * v ** (i - s))
        s_prev = s
    return math.fsum(left), math.fsum(right), math.fsum(mid)


def skew_endpoint_series_from_decomposition(v: float, d: GDecomposition, n: int) -> tuple[float, float, float]:
    """The same three endpoints written with decomposition bits and the length
    products ``prod_{j<i} Rot^{d_j + d_{j+1}}(v)``."""
    v = _check_skew(v)
    b = d.bits
    lengths = [1.0]
    for j in range(n):
        lengths.append(lengths[-1] * rot(b[j] + b[j + 1], v))
    left = [b[i] * rot(b[i - 1], v) * lengths[i - 1] for i in range(1, n + 1)]
    right = [1.0] + [-(1 - b[i]) * rot(1 + b[i - 1], v) * lengths[i - 1] for i in range(1, n + 1)]
    mid = [v] + [(-1) ** (b[i] + 1) * rot(2 * b[i] + 1, v) * lengths[i] for i in range(1, n + 1)]
    return math.fsum(left), math.fsum(right), math.fsum(mid)


# --- conjugacies

def source_digits(source: UnimodalMap, x: float, depth: int, coding: str = "lattice") -> DigitSequence:
    """Digits of ``x`` under ``source``.

    ``"lattice"`` reads them off the lattice descent (exact on computed lattice
    points, which then map to the target's lattice points); ``"orbit"`` uses the
    forward orbit.
    """
    if coding == "lattice":
        return digits_from_decomposition(g_decomposition(source, x, depth))
    if coding == "orbit":
        return digit_sequence(source, x, depth)
    raise ValueError(f"unknown coding {coding!r}")


def conjugate_report(source: UnimodalMap, target: UnimodalMap, x: float, tol: float = DEFAULT_TOL,
                     depth: int = DEFAULT_DEPTH, coding: str = "lattice") -> ConvergenceReport:
    return decode(target, source_digits(source, x, depth, coding), tol, depth)


def conjugate(source: UnimodalMap, target: UnimodalMap, x: float, tol: float = DEFAULT_TOL,
              depth: int = DEFAULT_DEPTH, coding: str = "lattice") -> float:
    """``h(x)`` for the conjugacy ``h`` with ``h o source = target o h``."""
    report = conjugate_report(source, target, x, tol, depth, coding)
    if not report.converged:
        raise ConvergenceError(f"h({x!r}) from {source.describe()} to {target.describe()}: {report.diagnostic}")
    return report.value


def conjugate_grid(source: UnimodalMap, target: UnimodalMap, samples: int = 257,
                   tol: float = DEFAULT_TOL, depth: int = DEFAULT_DEPTH,
                   coding: str = "lattice") -> list[tuple[float, float]]:
    """``(x, h(x))`` on a uniform grid of ``[0, 1]``; the ``h`` column must be
    strictly increasing.

    Where ``h`` is flatter than ``tol`` two neighbours can land on the same
    cell endpoint; those are re-decoded with every available digit, which only
    moves them inside their converged cells.
    """
    if samples < 2:
        raise ValueError("need at least two samples")
    xs = [float(x) for x in np.linspace(0.0, 1.0, samples)]
    hs = [conjugate(source, target, x, tol, depth, coding) for x in xs]
    ties = {i for i in range(samples - 1) if not hs[i + 1] > hs[i]}
    for i in sorted(ties | {i + 1 for i in ties}):
        hs[i] = conjugate_report(source, target, xs[i], 0.0, depth, coding).value
    rows = list(zip(xs, hs))
    for (x0, h0), (x1, h1) in zip(rows, rows[1:]):
        if not h1 > h0:
            raise ArithmeticError(f"h not increasing between x={x0!r} and x={x1!r}: {h0!r} >= {h1!r}")
    return rows


def grid_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "h_x"])
    for x, h in rows:
        w.writerow([repr(x), repr(h)])
    return buf.getvalue()


def grid_to_json(rows) -> str:
    return json.dumps([{"x": x, "h_x": h} for x, h in rows])
