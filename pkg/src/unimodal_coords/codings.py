"""The three (0,1)-style codings of a point and the conversions among them.

* :class:`GDecomposition` ``d_0 d_1 ... d_N`` -- the left/right choices of the
  lattice descent (``k_n = sum d_i 2^(n-i)``), with ``d_0 = 0``.
* :class:`DigitSequence` ``rho_1 ... rho_N`` -- ``rho_n = 0`` iff ``g^(n-1)(x) <= v``.
* :class:`InvariantCoordinates` ``theta_0 ... theta_N`` -- running products of
  the signs ``eps(g^i(x))`` (+1 left of ``v``, 0 at ``v``, -1 right of it).

The first two determine each other through prefix parities:
``rho_i = d_i xor d_{i-1}`` and ``d_i = (rho_1 + ... + rho_i) mod 2``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .lattice import localize
from .maps import UnimodalMap, evaluate, orbit

TIE_TOL = 1e-12


def _check_bits(bits: Iterable[int], what: str) -> tuple[int, ...]:
    out = tuple(int(b) for b in bits)
    if any(b not in (0, 1) for b in out):
        raise ValueError(f"{what} must be 0/1 valued")
    return out


@dataclass(frozen=True)
class GDecomposition:
    """``bits = (d_0, d_1, ..., d_N)``. ``tail`` is the confirmed constant value of
    every bit past the window, when known."""

    bits: tuple[int, ...]
    tail: int | None = None
    diagnostic: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "bits", _check_bits(self.bits, "decomposition bits"))
        if not self.bits or self.bits[0] != 0:
            raise ValueError("a decomposition starts with d_0 = 0")
        if self.tail not in (None, 0, 1):
            raise ValueError("tail must be None, 0 or 1")

    @classmethod
    def from_bits(cls, bits: Sequence[int], tail: int | None = None) -> "GDecomposition":
        """Build from ``d_1, ..., d_N`` (``d_0 = 0`` is prepended)."""
        return cls((0, *bits), tail)

    @property
    def depth(self) -> int:
        return len(self.bits) - 1

    def __getitem__(self, i: int) -> int:
        return self.bits[i]

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits[1:]))


@dataclass(frozen=True)
class DigitSequence:
    """``bits = (rho_1, ..., rho_N)``; note the 1-based convention of the digits
    themselves. ``zero_tail`` confirms that every digit past the window is 0."""

    bits: tuple[int, ...]
    zero_tail: bool = False

    def __post_init__(self):
        object.__setattr__(self, "bits", _check_bits(self.bits, "digits"))

    @classmethod
    def parse(cls, text: str) -> "DigitSequence":
        if not text or any(c not in "01" for c in text):
            raise ValueError(f"digit string must be non-empty and contain only 0/1: {text!r}")
        return cls(tuple(int(c) for c in text))

    @property
    def depth(self) -> int:
        return len(self.bits)

    def rho(self, i: int) -> int:
        """``rho_i`` for ``i >= 1``; confirmed tails extend past the window."""
        if i < 1:
            raise IndexError("digits are indexed from 1")
        if i > len(self.bits):
            if self.zero_tail:
                return 0
            raise IndexError(f"digit {i} beyond depth {len(self.bits)}")
        return self.bits[i - 1]

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


@dataclass(frozen=True)
class InvariantCoordinates:
    values: tuple[int, ...]
    unconfirmed_tail: bool = False

    def __post_init__(self):
        vals = tuple(int(t) for t in self.values)
        if any(t not in (-1, 0, 1) for t in vals):
            raise ValueError("invariant coordinates take values in {-1, 0, 1}")
        object.__setattr__(self, "values", vals)

    @property
    def depth(self) -> int:
        return len(self.values) - 1

    def __getitem__(self, i: int) -> int:
        return self.values[i]

    def __len__(self) -> int:
        return len(self.values)

    def __str__(self) -> str:
        return "".join({1: "+", 0: "0", -1: "-"}[t] for t in self.values)


# --- Rot algebra

def rot(exponent, t):
    """``Rot^e(t)``: ``t`` for even ``e``, ``1 - t`` for odd ``e``.

    Integer ``t`` stays integer, so nested uses such as ``rot(rot(a, b), t)``
    keep an exact exponent.
    """
    e = int(exponent)
    if e != exponent or e < 0:
        raise ValueError(f"Rot exponent must be a non-negative integer, got {exponent!r}")
    return t if e % 2 == 0 else 1 - t


def rot_index(n: int, t: int) -> int:
    """``Rot_n(t) = 2^n - t - 1``, the index reversal of an ``n``-bit window."""
    if not 0 <= t < 2 ** n:
        raise ValueError(f"index {t} outside [0, 2**{n})")
    return 2 ** n - t - 1


# --- direct codings of a point

def epsilon(g: UnimodalMap, t: float, tol: float = TIE_TOL) -> int:
    v = g.critical_point
    if abs(t - v) <= tol:
        return 0
    return 1 if t < v else -1


def g_decomposition(g: UnimodalMap, x: float, depth: int, strategy: str = "auto") -> GDecomposition:
    """Bits of the lattice descent of ``x``; a pinned tail is filled in without
    further descent."""
    if depth == 0:
        return GDecomposition((0,), None)
    path = localize(g, x, depth - 1, strategy=strategy, stop_at_pin=True)
    bits = list(path.bits)
    if path.tail is not None:
        bits += [path.tail] * (depth - len(bits))
    return GDecomposition((0, *bits), path.tail, path.diagnostic)


def digit_sequence(g: UnimodalMap, x: float, depth: int, tol: float = TIE_TOL) -> DigitSequence:
    """``rho_n = 0`` iff ``g^(n-1)(x) <= v`` (within ``tol``), from the forward orbit."""
    v = g.critical_point
    pts = orbit(g, x, max(depth - 1, 0))[:depth]
    bits = tuple(0 if t <= v + tol else 1 for t in pts)
    zero_tail = any(t == 0.0 for t in pts) and evaluate(g, 0.0) == 0.0
    return DigitSequence(bits, zero_tail)


def invariant_coordinates(g: UnimodalMap, x: float, depth: int, tol: float = TIE_TOL) -> InvariantCoordinates:
    """``theta_n = prod_{i<=n} eps(g^i(x))`` for ``n = 0..depth``."""
    out, prod = [], 1
    for t in orbit(g, x, depth):
        prod *= epsilon(g, t, tol)
        out.append(prod)
    return InvariantCoordinates(tuple(out))


# --- conversions

def digits_from_decomposition(d: GDecomposition) -> DigitSequence:
    """``rho_i = Rot^{d_{i-1}}(d_i)``."""
    b = d.bits
    return DigitSequence(tuple(rot(b[i - 1], b[i]) for i in range(1, len(b))), d.tail is not None)


def decomposition_from_digits(rho: DigitSequence) -> GDecomposition:
    """``d_i = Rot^{rho_1 + ... + rho_i}(0)``."""
    out, s = [0], 0
    for r in rho.bits:
        s += r
        out.append(rot(s, 0))
    return GDecomposition(tuple(out), out[-1] if rho.zero_tail else None)


def mt_from_decomposition(d: GDecomposition) -> InvariantCoordinates:
    """``theta_{i-1}`` from ``d_i``: 1 if ``d_i = 1``; -1 if ``d_i = 0`` and a later
    bit is 1; 0 if every bit from ``i`` on is 0.

    Whether the bits past the window are zero is only known when ``d.tail`` is
    set; otherwise an all-zero end of the window yields 0 and the result is
    flagged ``unconfirmed_tail``.
    """
    b = d.bits
    n = len(b) - 1
    later_one = [False] * (n + 2)
    later_one[n + 1] = d.tail == 1
    for i in range(n, 0, -1):
        later_one[i] = later_one[i + 1] or b[i] == 1
    out, unconfirmed = [], False
    for i in range(1, n + 1):
        if b[i] == 1:
            out.append(1)
        elif later_one[i + 1]:
            out.append(-1)
        else:
            out.append(0)
            unconfirmed = unconfirmed or d.tail is None
    return InvariantCoordinates(tuple(out), unconfirmed)


def decomposition_from_mt(theta: InvariantCoordinates) -> GDecomposition:
    """``d_{i+1} = 1`` iff ``theta_i = 1``."""
    bits = tuple(1 if t == 1 else 0 for t in theta.values)
    tail = 0 if bits and theta.values[-1] == 0 and not theta.unconfirmed_tail else None
    return GDecomposition((0, *bits), tail)


def lex_compare(a: Sequence[int], b: Sequence[int]) -> int:
    """Lexicographic comparison over the common prefix with ``-1 < 0 < 1``.

    Returns -1, 0 or 1; sequences equal on the common prefix compare equal.
    """
    a = getattr(a, "values", a)
    b = getattr(b, "values", b)
    for s, t in zip(a, b):
        if s != t:
            return -1 if s < t else 1
    return 0
