"""Unimodal interval maps: construction, evaluation, iteration and branch inversion.

A unimodal map ``g`` of ``[0, 1]`` is increasing on ``[0, v]``, decreasing on
``[v, 1]`` and satisfies ``g(0) = g(1) = 0`` and ``g(v) = 1``. Branch callables
are expected to accept floats; they may also accept numpy arrays, in which case
the lattice builders use them vectorised.

All arithmetic is binary64. Forward iteration amplifies rounding by the product
of branch slopes, so for slope-2 maps ``iterate`` carries no significant digits
past roughly 50 steps. Everything deep goes through branch inverses instead.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

ENDPOINT_TOL = 1e-12
MONOTONE_SAMPLES = 1024
BISECT_TOL = 1e-13
BISECT_MAX_ITER = 200

KINDS = ("tent", "skew_tent", "logistic", "piecewise_linear", "generic")

Branch = Callable[[float], float]


class MapError(ValueError):
    """Invalid map parameters or a profile that is not unimodal."""


class DomainError(ValueError):
    """A point outside ``[0, 1]``."""


@dataclass(frozen=True, eq=False)
class UnimodalMap:
    critical_point: float
    left_branch: Branch
    right_branch: Branch
    left_inverse: Branch | None = None
    right_inverse: Branch | None = None
    kind: str = "generic"
    params: dict = field(default_factory=dict)
    # optional (y, 1 - y) -> (x, 1 - x) inverses that keep both halves accurate
    left_pair_inverse: Callable | None = None
    right_pair_inverse: Callable | None = None

    @property
    def v(self) -> float:
        return self.critical_point

    @property
    def has_analytic_inverses(self) -> bool:
        return self.left_inverse is not None and self.right_inverse is not None

    def __call__(self, t: float) -> float:
        return evaluate(self, t)

    def describe(self) -> str:
        if self.kind == "skew_tent":
            return f"skew_tent(v={self.v!r})"
        if self.kind == "piecewise_linear":
            return f"piecewise_linear({len(self.params['breakpoints'])} breakpoints)"
        name = self.params.get("name")
        return f"{self.kind}({name})" if name else self.kind


@dataclass
class ValidationEntry:
    name: str
    passed: bool
    detail: str


@dataclass
class ValidationReport:
    map_description: str
    entries: list[ValidationEntry]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def failures(self) -> list[ValidationEntry]:
        return [e for e in self.entries if not e.passed]


def _apply(f: Branch, t: np.ndarray) -> np.ndarray:
    """Evaluate ``f`` on an array, falling back to a Python loop for scalar-only callables."""
    try:
        out = np.asarray(f(t), dtype=float)
        if out.shape == t.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([float(f(float(s))) for s in t.ravel()]).reshape(t.shape)


def _check_unit(t: float) -> None:
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"point {t!r} outside [0, 1]")


def evaluate(g: UnimodalMap, t: float) -> float:
    """Return ``g(t)``; ``t == v`` routes to the left branch."""
    _check_unit(t)
    y = float(g.left_branch(t) if t <= g.critical_point else g.right_branch(t))
    return min(1.0, max(0.0, y))


def evaluate_array(g: UnimodalMap, t: np.ndarray) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if t.size and (t.min() < 0.0 or t.max() > 1.0):
        raise DomainError("array contains points outside [0, 1]")
    left = t <= g.critical_point
    out = np.empty_like(t)
    out[left] = _apply(g.left_branch, t[left])
    out[~left] = _apply(g.right_branch, t[~left])
    return np.clip(out, 0.0, 1.0)


def iterate(g: UnimodalMap, t: float, n: int) -> float:
    if n < 0:
        raise ValueError("iteration count must be non-negative")
    _check_unit(t)
    for _ in range(n):
        t = evaluate(g, t)
    return t


def orbit(g: UnimodalMap, t: float, n: int) -> list[float]:
    """The first ``n + 1`` orbit points ``t, g(t), ..., g^n(t)``."""
    _check_unit(t)
    out = [t]
    for _ in range(n):
        t = evaluate(g, t)
        out.append(t)
    return out


def _bisect(f: Branch, lo: float, hi: float, y, increasing: bool,
            tol: float = 0.0, max_iter: int = BISECT_MAX_ITER) -> np.ndarray:
    # Elementwise bisection; each element follows exactly the sequence a scalar
    # call would, so vector and scalar results agree bit for bit.
    y = np.atleast_1d(np.asarray(y, dtype=float))
    a = np.full_like(y, lo)
    b = np.full_like(y, hi)
    for _ in range(max_iter):
        m = 0.5 * (a + b)
        active = (m > a) & (m < b) & (b - a > tol)
        if not active.any():
            break
        fm = _apply(f, m)
        right = fm < y if increasing else fm > y
        a = np.where(active & right, m, a)
        b = np.where(active & ~right, m, b)
    return 0.5 * (a + b)


def invert_branch(g: UnimodalMap, side: str, y, method: str = "auto"):
    """The point ``x`` on the chosen branch with ``g(x) = y``.

    ``method`` is ``"auto"`` (analytic inverse when attached), ``"analytic"`` or
    ``"bisect"``. Accepts a scalar or an array. ``y = 1`` maps to ``v`` and
    ``y = 0`` to the branch's outer endpoint exactly.
    """
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', not {side!r}")
    scalar = np.ndim(y) == 0
    inverse = g.left_inverse if side == "left" else g.right_inverse
    if method == "analytic" and inverse is None:
        raise ValueError(f"{g.describe()} has no analytic {side} inverse")
    v = g.critical_point
    if scalar and inverse is not None and method != "bisect":
        # hot path for the localisation descent; same result as the array path
        y = float(y)
        _check_unit(y)
        if y == 1.0:
            return v
        if y == 0.0:
            return 0.0 if side == "left" else 1.0
        x = float(inverse(y))
        return min(max(x, 0.0), v) if side == "left" else min(max(x, v), 1.0)
    ya = np.atleast_1d(np.asarray(y, dtype=float))
    if ya.size and (ya.min() < 0.0 or ya.max() > 1.0):
        raise DomainError("branch inversion needs y in [0, 1]")
    if inverse is not None and method != "bisect":
        x = np.asarray(_apply(inverse, ya), dtype=float)
    elif side == "left":
        x = _bisect(g.left_branch, 0.0, v, ya, increasing=True)
    else:
        x = _bisect(g.right_branch, v, 1.0, ya, increasing=False)
    x = np.where(ya == 1.0, v, x)
    x = np.where(ya == 0.0, 0.0 if side == "left" else 1.0, x)
    if side == "left":
        x = np.clip(x, 0.0, v)
    else:
        x = np.clip(x, v, 1.0)
    return float(x[0]) if scalar else x


def invert_pair(g: UnimodalMap, side: str, y, c):
    """Branch inverse on a value carried together with its complement ``c = 1 - y``.

    Returns ``(x, 1 - x)``. Maps with a quadratic peak lose ``1 - y`` to rounding
    when ``y`` is near 1, which caps how finely cells next to ``v`` resolve;
    carrying the complement avoids that. Scalars or arrays.
    """
    pair = g.left_pair_inverse if side == "left" else g.right_pair_inverse
    if pair is None:
        x = invert_branch(g, side, y)
        return x, 1.0 - x
    if np.ndim(y) == 0:
        if c == 0.0:
            return g.critical_point, 1.0 - g.critical_point
        if y == 0.0:
            return (0.0, 1.0) if side == "left" else (1.0, 0.0)
        x, cx = pair(y, c)
        return float(x), float(cx)
    x, cx = pair(np.asarray(y, dtype=float), np.asarray(c, dtype=float))
    top, bottom = c == 0.0, y == 0.0
    x = np.where(top, g.critical_point, np.where(bottom, 0.0 if side == "left" else 1.0, x))
    cx = np.where(top, 1.0 - g.critical_point, np.where(bottom, 1.0 if side == "left" else 0.0, cx))
    return x, cx


def validate(g: UnimodalMap) -> ValidationReport:
    v = g.critical_point
    entries = []
    entries.append(ValidationEntry("critical point in (0,1)", 0.0 < v < 1.0, f"v={v!r}"))
    if not 0.0 < v < 1.0:
        return ValidationReport(g.describe(), entries)
    try:
        g0 = float(g.left_branch(0.0))
        g1 = float(g.right_branch(1.0))
        gl = float(g.left_branch(v))
        gr = float(g.right_branch(v))
    except Exception as exc:  # user callables may raise anything
        entries.append(ValidationEntry("branches evaluable", False, repr(exc)))
        return ValidationReport(g.describe(), entries)
    entries.append(ValidationEntry("g(0) = 0", abs(g0) <= ENDPOINT_TOL, f"g(0)={g0!r}"))
    entries.append(ValidationEntry("g(1) = 0", abs(g1) <= ENDPOINT_TOL, f"g(1)={g1!r}"))
    entries.append(ValidationEntry("g(v) = 1", abs(gl - 1.0) <= ENDPOINT_TOL, f"g(v)={gl!r}"))
    entries.append(ValidationEntry("continuity at v", abs(gl - gr) <= ENDPOINT_TOL,
                                   f"left={gl!r} right={gr!r}"))
    for name, lo, hi, f, sign in (("left branch increasing", 0.0, v, g.left_branch, 1.0),
                                  ("right branch decreasing", v, 1.0, g.right_branch, -1.0)):
        grid = np.linspace(lo, hi, MONOTONE_SAMPLES)
        steps = sign * np.diff(_apply(f, grid))
        bad = int(np.count_nonzero(steps <= 0.0))
        entries.append(ValidationEntry(name, bad == 0, f"{bad} non-monotone steps"))
    return ValidationReport(g.describe(), entries)


def _finish(g: UnimodalMap) -> UnimodalMap:
    report = validate(g)
    if not report.passed:
        failed = "; ".join(f"{e.name} ({e.detail})" for e in report.failures())
        raise MapError(f"not a unimodal map: {failed}")
    return g


def _check_v(v: float) -> float:
    v = float(v)
    if not 0.0 < v < 1.0:
        raise MapError(f"critical point out of range: v={v!r} must lie in (0, 1)")
    return v


def tent_map() -> UnimodalMap:
    return _finish(UnimodalMap(
        0.5,
        lambda t: 2.0 * t,
        lambda t: 2.0 * (1.0 - t),
        lambda y: 0.5 * y,
        lambda y: 1.0 - 0.5 * y,
        kind="tent",
    ))


def skew_tent_map(v: float) -> UnimodalMap:
    v = _check_v(v)
    w = 1.0 - v
    return _finish(UnimodalMap(
        v,
        lambda t: t / v,
        lambda t: (1.0 - t) / w,
        lambda y: y * v,
        lambda y: 1.0 - y * w,
        kind="skew_tent",
        params={"v": v},
        right_pair_inverse=lambda y, c: (1.0 - y * w, y * w),
    ))


def _logistic(t):
    return 4.0 * t * (1.0 - t)


def _logistic_left_inverse(y):
    # y / (2 (1 + s)) avoids cancellation in (1 - s) / 2 for small y
    return y / (2.0 * (1.0 + np.sqrt(1.0 - y)))


def _logistic_right_inverse(y):
    return 0.5 * (1.0 + np.sqrt(1.0 - y))


def _logistic_left_pair(y, c):
    s = np.sqrt(c)
    return y / (2.0 * (1.0 + s)), 0.5 * (1.0 + s)


def _logistic_right_pair(y, c):
    s = np.sqrt(c)
    return 0.5 * (1.0 + s), y / (2.0 * (1.0 + s))


def logistic_map() -> UnimodalMap:
    return _finish(UnimodalMap(0.5, _logistic, _logistic, _logistic_left_inverse,
                               _logistic_right_inverse, kind="logistic",
                               left_pair_inverse=_logistic_left_pair,
                               right_pair_inverse=_logistic_right_pair))


def piecewise_linear_map(breakpoints: Sequence[Sequence[float]]) -> UnimodalMap:
    pts = [(float(x), float(y)) for x, y in breakpoints]
    if len(pts) < 3:
        raise MapError("piecewise_linear needs at least three breakpoints")
    xs = np.array([p[0] for p in pts])
    ys = np.array([p[1] for p in pts])
    if xs[0] != 0.0 or xs[-1] != 1.0 or np.any(np.diff(xs) <= 0.0):
        raise MapError("breakpoint abscissae must increase strictly from 0 to 1")
    if ys[0] != 0.0 or ys[-1] != 0.0:
        raise MapError("breakpoint profile must start and end at 0")
    peaks = np.flatnonzero(ys == 1.0)
    if len(peaks) != 1 or not 0 < peaks[0] < len(pts) - 1:
        raise MapError("breakpoint profile must reach 1 at exactly one interior breakpoint")
    p = int(peaks[0])
    if np.any(np.diff(ys[:p + 1]) <= 0.0) or np.any(np.diff(ys[p:]) >= 0.0):
        raise MapError("breakpoint profile must increase strictly to the peak, then decrease strictly")
    v = _check_v(xs[p])
    lx, ly = xs[:p + 1], ys[:p + 1]
    rx, ry = xs[p:][::-1].copy(), ys[p:][::-1].copy()  # ascending in y
    return _finish(UnimodalMap(
        v,
        lambda t: np.interp(t, lx, ly),
        lambda t: np.interp(t, xs[p:], ys[p:]),
        lambda y: np.interp(y, ly, lx),
        lambda y: np.interp(y, ry, rx),
        kind="piecewise_linear",
        params={"breakpoints": [list(q) for q in pts]},
    ))


def generic_map(left: Branch, right: Branch, v: float, left_inverse: Branch | None = None,
                right_inverse: Branch | None = None, name: str | None = None) -> UnimodalMap:
    if not (callable(left) and callable(right)):
        raise MapError("generic maps need two callables")
    params = {"name": name} if name else {}
    return _finish(UnimodalMap(_check_v(v), left, right, left_inverse, right_inverse,
                               kind="generic", params=params))


def sine_map() -> UnimodalMap:
    """``sin(pi t)``; a smooth example without attached inverses."""
    f = lambda t: np.sin(np.pi * t)  # noqa: E731
    return generic_map(f, f, 0.5, name="sine")


def make_map(kind: str, **params) -> UnimodalMap:
    """Build and validate a map of the given kind.

    >>> make_map("skew_tent", v=1/3)(1/3)
    1.0
    """
    if kind == "tent":
        return tent_map()
    if kind == "skew_tent":
        if "v" not in params:
            raise MapError("skew_tent requires v")
        return skew_tent_map(params["v"])
    if kind == "logistic":
        return logistic_map()
    if kind == "piecewise_linear":
        if "breakpoints" not in params:
            raise MapError("piecewise_linear requires breakpoints")
        return piecewise_linear_map(params["breakpoints"])
    if kind == "generic":
        try:
            return generic_map(params["left"], params["right"], params["v"],
                               params.get("left_inverse"), params.get("right_inverse"),
                               params.get("name"))
        except KeyError as exc:
            raise MapError(f"generic map needs {exc.args[0]!r}") from None
    if kind == "sine":
        return sine_map()
    raise MapError(f"unknown map kind {kind!r}")


# --- JSON map specifications: {"kind": ..., "v": ..., "breakpoints": [[x, y], ...]}

def map_from_spec(spec: dict) -> UnimodalMap:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise MapError("map spec must be an object with a 'kind' field")
    kind = spec["kind"]
    if kind == "generic":
        raise MapError("generic maps carry callables and cannot be loaded from JSON")
    params = {k: spec[k] for k in ("v", "breakpoints") if k in spec}
    return make_map(kind, **params)


def map_to_spec(g: UnimodalMap) -> dict:
    if g.kind == "generic":
        name = g.params.get("name")
        if name == "sine":
            return {"kind": "sine"}
        raise MapError("generic maps cannot be serialised")
    spec = {"kind": g.kind}
    if g.kind == "skew_tent":
        spec["v"] = g.v
    if g.kind == "piecewise_linear":
        spec["breakpoints"] = g.params["breakpoints"]
    return spec


def load_map_spec(path: str | Path) -> UnimodalMap:
    with open(path) as fh:
        try:
            spec = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MapError(f"{path}: invalid JSON ({exc})") from None
    return map_from_spec(spec)


def parse_map_arg(text: str, v: float | None = None) -> UnimodalMap:
    """Parse a CLI map argument: ``tent``, ``logistic``, ``sine``,
    ``skew_tent:0.3`` (or ``skew_tent`` with ``v``), or ``@spec.json``."""
    if text.startswith("@"):
        return load_map_spec(text[1:])
    kind, _, arg = text.partition(":")
    if kind == "skew_tent":
        if arg:
            try:
                v = float(arg)
            except ValueError:
                raise MapError(f"bad critical point in {text!r}") from None
        if v is None:
            raise MapError("skew_tent requires v (use skew_tent:V or --v)")
        if not math.isfinite(v):
            raise MapError(f"critical point out of range: v={v!r}")
        return make_map("skew_tent", v=v)
    if arg:
        raise MapError(f"map kind {kind!r} takes no inline parameter")
    return make_map(kind)
