"""Preimage lattices of 0 and the nested-interval descent towards a point.

Level ``n`` of the lattice is the sorted set ``mu[n][0] < ... < mu[n][2**(n-1)]``
of solutions of ``g^n(x) = 0``. The depth-``n`` cell of a point ``x`` is the
level-``(n+1)`` interval ``[mu[n+1][k_n], mu[n+1][k_n + 1]]`` containing it;
its interior level-``(n+2)`` point is the *midpoint*, the unique solution of
``g^n(y) = v`` inside the cell.

Points equal to a midpoint descend left (minimal ``k_n``).
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np

from .maps import BISECT_MAX_ITER, UnimodalMap, invert_pair, iterate

LEVEL_CAP = 20
DEPTH_CEILING = 64
DEPTH_WARNING = 48


class DepthError(ValueError):
    """Requested level or depth beyond what the lattice code supports."""


class MidpointError(ArithmeticError):
    """A midpoint could not be placed strictly inside its cell."""


class DepthWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class PreimageLevel:
    n: int
    points: np.ndarray

    def __len__(self) -> int:
        return len(self.points)

    def to_json(self) -> dict:
        return {"n": self.n, "points": [float(p) for p in self.points]}


@dataclass(frozen=True)
class LocalizedInterval:
    """The depth-``n`` cell ``[left, right]`` with index ``k`` and the bit ``d_{n+1}``
    chosen inside it (0: left half, 1: right half)."""

    n: int
    k: int
    left: float
    right: float
    midpoint: float
    bit: int

    @property
    def length(self) -> float:
        return self.right - self.left

    @property
    def delta(self) -> float:
        return delta_ratio(self)

    def to_json(self) -> dict:
        return {"n": self.n, "k": self.k, "left": self.left, "right": self.right,
                "midpoint": self.midpoint, "length": self.length, "delta": self.delta,
                "bit": self.bit}


@dataclass(frozen=True)
class LocalizationPath:
    x: float | None
    intervals: tuple[LocalizedInterval, ...]
    tail: int | None = None
    diagnostic: str | None = None

    @property
    def depth(self) -> int:
        return len(self.intervals) - 1

    @property
    def truncated(self) -> bool:
        return self.diagnostic is not None

    @property
    def bits(self) -> tuple[int, ...]:
        """``d_1, ..., d_{depth+1}``."""
        return tuple(c.bit for c in self.intervals)

    @property
    def ks(self) -> tuple[int, ...]:
        return tuple(c.k for c in self.intervals)

    def __getitem__(self, n: int) -> LocalizedInterval:
        return self.intervals[n]

    def __len__(self) -> int:
        return len(self.intervals)

    def to_json(self) -> dict:
        return {"x": self.x, "tail": self.tail, "diagnostic": self.diagnostic,
                "intervals": [c.to_json() for c in self.intervals]}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def _inverse_images(g: UnimodalMap, ys: np.ndarray, cs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Both branch pullbacks of a sorted array (with complements), merged in increasing order."""
    lx, lc = invert_pair(g, "left", ys, cs)
    rx, rc = invert_pair(g, "right", ys, cs)
    return np.concatenate([lx, rx[::-1]]), np.concatenate([lc, rc[::-1]])


def preimage_level(g: UnimodalMap, n: int) -> PreimageLevel:
    """Level ``n`` of the preimage lattice of 0.

    Built by interleaving: level ``n+1`` keeps every level-``n`` point and adds
    one midpoint per level-``n`` interval, so ``mu[n+1][2k] == mu[n][k]``
    holds exactly.
    """
    if not 1 <= n <= LEVEL_CAP:
        raise DepthError(f"level {n} outside [1, {LEVEL_CAP}]")
    points = np.array([0.0, 1.0])
    mids = np.array([g.critical_point])
    comps = 1.0 - mids
    for _ in range(n - 1):
        merged = np.empty(len(points) + len(mids))
        merged[0::2] = points
        merged[1::2] = mids
        points = merged
        mids, comps = _inverse_images(g, mids, comps)
    return PreimageLevel(n, points)


def _bits_of(k: int, n: int) -> list[int]:
    return [(k >> (n - i)) & 1 for i in range(1, n + 1)]


def _word(bits: Sequence[int]) -> list[int]:
    """Branch sides visited by the cell: 0 = left, 1 = right."""
    out, prev = [], 0
    for b in bits:
        out.append(b ^ prev)
        prev = b
    return out


def _pullback(g: UnimodalMap, word: Sequence[int]) -> float:
    y = g.critical_point
    c = 1.0 - y
    for side in reversed(word):
        y, c = invert_pair(g, "right" if side else "left", y, c)
    return y


def _bisect_cell(g: UnimodalMap, n: int, increasing: bool, left: float, right: float) -> float:
    # runs to float exhaustion: an absolute 1e-13 stop would be coarser than deep cells
    v = g.critical_point
    lo, hi = left, right
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if not lo < mid < hi:
            break
        val = iterate(g, mid, n)
        if val == v:
            return mid
        if (val < v) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _resolve_strategy(g: UnimodalMap, strategy: str) -> str:
    if strategy == "auto":
        return "B" if g.has_analytic_inverses else "A"
    if strategy not in ("A", "B"):
        raise ValueError(f"unknown strategy {strategy!r}")
    return strategy


def refine_midpoint(g: UnimodalMap, n: int, k: int, left: float | None = None,
                    right: float | None = None, strategy: str = "auto") -> float:
    """The level-``(n+2)`` point inside the depth-``n`` cell with index ``k``.

    Strategy ``"B"`` pulls ``v`` back through the branch inverses along the
    cell's itinerary; strategy ``"A"`` bisects ``g^n(y) - v`` on ``[left, right]``
    (``g^n`` is increasing on the cell iff ``d_n = 0``). ``"auto"`` picks B when
    analytic inverses are attached.
    """
    if not 0 <= k < 2 ** n:
        raise ValueError(f"cell index {k} outside [0, 2**{n})")
    strategy = _resolve_strategy(g, strategy)
    bits = _bits_of(k, n)
    if strategy == "B":
        return _pullback(g, _word(bits))
    if left is None or right is None:
        raise ValueError("strategy A needs the cell endpoints")
    increasing = not bits or bits[-1] == 0
    y = _bisect_cell(g, n, increasing, left, right)
    if not left < y < right:
        raise MidpointError(f"bisection collapsed onto an endpoint of [{left!r}, {right!r}] at depth {n}")
    return y


def delta_ratio(cell: LocalizedInterval) -> float:
    length = cell.right - cell.left
    if length <= 0.0:
        raise DepthError(f"zero-length cell at depth {cell.n}")
    return (cell.midpoint - cell.left) / length


Chooser = Callable[[int, float, float, float], "int | None"]


def walk(g: UnimodalMap, choose: Chooser, strategy: str = "auto",
         max_depth: int = DEPTH_CEILING) -> Iterator[LocalizedInterval]:
    """Descend the lattice, asking ``choose(n, left, right, midpoint)`` for each bit.

    Stops when ``choose`` returns ``None`` (after yielding nothing for that
    depth) or after depth ``max_depth``. Raises :class:`MidpointError` when a
    midpoint is not strictly inside its cell.
    """
    strategy = _resolve_strategy(g, strategy)
    left, right, k = 0.0, 1.0, 0
    word: list[int] = []
    prev = 0
    for n in range(max_depth + 1):
        if strategy == "B":
            mid = _pullback(g, word)
        else:
            mid = _bisect_cell(g, n, prev == 0, left, right)
        if not left < mid < right:
            raise MidpointError(f"midpoint {mid!r} not inside [{left!r}, {right!r}] at depth {n}")
        bit = choose(n, left, right, mid)
        if bit is None:
            return
        yield LocalizedInterval(n, k, left, right, mid, bit)
        if bit:
            left = mid
        else:
            right = mid
        k = 2 * k + bit
        word.append(bit ^ prev)
        prev = bit


def _check_depth(depth: int, max_depth: int = DEPTH_CEILING) -> None:
    if depth < 0 or depth > max_depth:
        raise DepthError(f"depth {depth} outside [0, {max_depth}]")
    if depth > DEPTH_WARNING:
        warnings.warn(f"depth {depth} exceeds {DEPTH_WARNING}; cells may fall below binary64 resolution",
                      DepthWarning, stacklevel=3)


def localize(g: UnimodalMap, x: float, depth: int, strategy: str = "auto",
             stop_at_pin: bool = False, max_depth: int = DEPTH_CEILING) -> LocalizationPath:
    """Cells of ``x`` at depths ``0..depth``.

    ``tail`` is set once ``x`` coincides with an endpoint of the chosen child
    cell: all further bits are then constant (0 at a left endpoint, 1 at a right
    one). With ``stop_at_pin`` the descent stops there. A midpoint failure
    truncates the path and records a diagnostic.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"point {x!r} outside [0, 1]")
    _check_depth(depth, max_depth)
    state = {"tail": None}

    def choose(n, left, right, mid):
        if n > depth or (stop_at_pin and state["tail"] is not None):
            return None
        bit = 0 if x <= mid else 1
        if state["tail"] is None:
            if (bit == 0 and x == left) or (bit == 1 and x == right):
                state["tail"] = bit
            elif x == mid:
                state["tail"] = 1 - bit  # x is the right end of its new (left) child
        return bit

    cells: list[LocalizedInterval] = []
    diagnostic = None
    try:
        for cell in walk(g, choose, strategy, max_depth=depth):
            cells.append(cell)
    except MidpointError as exc:
        diagnostic = str(exc)
    return LocalizationPath(x, tuple(cells), state["tail"], diagnostic)


def follow_bits(g: UnimodalMap, bits: Sequence[int], strategy: str = "auto") -> LocalizationPath:
    """The path guided by ``d_1, d_2, ...`` instead of by a point."""
    cells: list[LocalizedInterval] = []
    diagnostic = None

    def choose(n, left, right, mid):
        return bits[n] if n < len(bits) else None

    try:
        for cell in walk(g, choose, strategy, max_depth=len(bits)):
            cells.append(cell)
    except MidpointError as exc:
        diagnostic = str(exc)
    return LocalizationPath(None, tuple(cells), None, diagnostic)


def index_window(bits, i: int, j: int) -> int:
    """``k_{i,j} = sum_{t=i..j} d_t 2^(j-t)`` over a decomposition ``d_0, d_1, ...``."""
    d = getattr(bits, "bits", bits)
    if not 0 <= i <= j < len(d):
        raise IndexError(f"window [{i}, {j}] outside 0..{len(d) - 1}")
    k = 0
    for t in range(i, j + 1):
        k = 2 * k + d[t]
    return k
