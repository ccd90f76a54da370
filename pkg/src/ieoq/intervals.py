"""Checked arithmetic and ordering on closed real intervals.

The model only ever needs intervals with nonnegative endpoints, so the
operations here implement that special case and treat anything outside
their domain as a caller error. Undefined cases raise structured
exceptions instead of clamping: silently repaired bounds would leak into
cost allocations that are supposed to be exact.

Every function is pure and every value immutable, so the module is safe
to use from concurrent code.
"""

import math
from dataclasses import dataclass

__all__ = [
    "GUARD_SLACK",
    "Interval",
    "IntervalError",
    "NegativeOperand",
    "NegativeScalar",
    "OrderViolation",
    "WidthViolation",
    "ZERO",
    "ZeroDenominator",
    "add",
    "div_checked",
    "length",
    "mul_nonneg",
    "scale",
    "sqrt_interval",
    "sub_checked",
    "weakly_geq",
    "weakly_leq",
]

# Relative slack for definedness guards. Analytically tight cases (equal
# widths, proportional bounds) must not be rejected over float rounding,
# whatever the magnitude of the operands.
GUARD_SLACK = 1e-12


def _slack(*magnitudes: float) -> float:
    return GUARD_SLACK * max(1.0, *map(abs, magnitudes))


class IntervalError(ValueError):
    """An interval operation was applied outside its domain."""


class NegativeScalar(IntervalError):
    """Scaling is defined for nonnegative factors only."""


class WidthViolation(IntervalError):
    """Subtraction needs the minuend at least as wide as the subtrahend."""


class NegativeOperand(IntervalError):
    """The operation requires intervals with nonnegative endpoints."""


class ZeroDenominator(IntervalError):
    """Division requires both denominator endpoints to be nonzero."""


class OrderViolation(IntervalError):
    """Division is undefined: the quotient bounds would come out reversed."""


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] of reals. Unit-free; callers attach units."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        lo = float(self.lo)
        hi = float(self.hi)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        if not lo <= hi:  # also rejects NaN endpoints
            raise ValueError(f"interval bounds out of order: [{lo}, {hi}]")

    @classmethod
    def point(cls, value: float) -> "Interval":
        """Degenerate interval [value, value]."""
        return cls(value, value)

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    def __str__(self) -> str:
        return f"[{self.lo:g}, {self.hi:g}]"


ZERO = Interval(0.0, 0.0)


def add(x: Interval, y: Interval) -> Interval:
    """Endpoint-wise sum."""
    return Interval(x.lo + y.lo, x.hi + y.hi)


def scale(beta: float, x: Interval) -> Interval:
    """Multiply both endpoints by a nonnegative scalar."""
    if beta < 0:
        raise NegativeScalar(f"scale factor must be nonnegative, got {beta}")
    return Interval(beta * x.lo, beta * x.hi)


def length(x: Interval) -> float:
    """Width hi - lo; zero exactly for degenerate intervals."""
    return x.hi - x.lo


def sub_checked(x: Interval, y: Interval) -> Interval:
    """Endpoint-wise difference, defined only when length(x) >= length(y).

    Under that guard the result is a valid interval; without it the bounds
    would cross. Equal widths give a degenerate result.
    """
    if (x.hi - x.lo) < (y.hi - y.lo) - _slack(x.hi, y.hi):
        raise WidthViolation(
            f"cannot subtract wider interval {y} from narrower {x}"
        )
    lo = x.lo - y.lo
    hi = x.hi - y.hi
    if hi < lo:  # widths equal up to the slack; snap the rounding residue
        hi = lo
    return Interval(lo, hi)


def mul_nonneg(x: Interval, y: Interval) -> Interval:
    """Product of intervals with nonnegative endpoints: [lo*lo, hi*hi]."""
    if x.lo < 0 or y.lo < 0:
        raise NegativeOperand(f"product needs nonnegative intervals, got {x} * {y}")
    return Interval(x.lo * y.lo, x.hi * y.hi)


def sqrt_interval(x: Interval) -> Interval:
    """Endpoint-wise square root of a nonnegative interval."""
    if x.lo < 0:
        raise NegativeOperand(f"square root needs a nonnegative interval, got {x}")
    return Interval(math.sqrt(x.lo), math.sqrt(x.hi))


def div_checked(x: Interval, y: Interval) -> Interval:
    """Endpoint-wise quotient [x.lo/y.lo, x.hi/y.hi].

    Defined only when both denominator endpoints are nonzero and
    x.lo * y.hi <= x.hi * y.lo, which is exactly the condition for the
    quotient bounds to come out in order.
    """
    if y.lo == 0 or y.hi == 0:
        raise ZeroDenominator(f"division by interval with a zero endpoint: {y}")
    if x.lo * y.hi > x.hi * y.lo + _slack(x.lo * y.hi, x.hi * y.lo):
        raise OrderViolation(
            f"quotient {x} / {y} undefined: bound ratios out of order"
        )
    lo = x.lo / y.lo
    hi = x.hi / y.hi
    if hi < lo:  # guard held within the slack; snap the rounding residue
        hi = lo
    return Interval(lo, hi)


def weakly_geq(x: Interval, y: Interval) -> bool:
    """Weak interval order: x >= y on both endpoints."""
    return x.lo >= y.lo and x.hi >= y.hi


def weakly_leq(x: Interval, y: Interval) -> bool:
    """Weak interval order: x <= y on both endpoints."""
    return weakly_geq(y, x)
