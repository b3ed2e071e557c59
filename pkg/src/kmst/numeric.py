"""Exact rationals and linear functions of the budget parameter.

Every cost, dual value and event time is carried as a :class:`LinearForm`
``a + b*lam`` with :class:`fractions.Fraction` coefficients.  A concrete run
simply evaluates the forms at a fixed ``lam``; the slope is what lets ties be
broken as if ``lam`` were perturbed by an infinitesimal amount.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence, Union

Rational = Fraction
RationalLike = Union[Fraction, int, str]

_ZERO = Fraction(0)


def as_rational(value: RationalLike) -> Fraction:
    """Coerce ints, Fractions and ``"p/q"`` / ``"p"`` strings to a Fraction.

    Floats are rejected: they would smuggle rounding into an exact pipeline.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def format_rational(q: Fraction) -> str:
    """Render ``q`` as ``"p/q"``, or ``"p"`` when the denominator is 1."""
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


class LinearForm:
    """The affine function ``constant + slope * lam``.

    Instances are immutable; arithmetic returns new forms.
    """

    __slots__ = ("a", "b")

    def __init__(self, constant: RationalLike = 0, slope: RationalLike = 0) -> None:
        self.a = as_rational(constant)
        self.b = as_rational(slope)

    @classmethod
    def _raw(cls, a: Fraction, b: Fraction) -> "LinearForm":
        f = object.__new__(cls)
        f.a = a
        f.b = b
        return f

    @property
    def constant(self) -> Fraction:
        return self.a

    @property
    def slope(self) -> Fraction:
        return self.b

    def __call__(self, lam: Fraction) -> Fraction:
        return self.a + self.b * lam

    def __add__(self, other: "LinearForm") -> "LinearForm":
        return LinearForm._raw(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return LinearForm._raw(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "LinearForm":
        return LinearForm._raw(-self.a, -self.b)

    def scale(self, c: Fraction) -> "LinearForm":
        return LinearForm._raw(self.a * c, self.b * c)

    def half(self) -> "LinearForm":
        return LinearForm._raw(self.a / 2, self.b / 2)

    def is_constant(self) -> bool:
        return self.b == 0

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, LinearForm):
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __repr__(self) -> str:
        return f"LinearForm({format_rational(self.a)}, {format_rational(self.b)})"

    def __str__(self) -> str:
        if self.b == 0:
            return format_rational(self.a)
        if self.a == 0:
            return f"{format_rational(self.b)}*lam"
        return f"{format_rational(self.a)} + {format_rational(self.b)}*lam"


ZERO = LinearForm._raw(_ZERO, _ZERO)
LAM = LinearForm._raw(_ZERO, Fraction(1))


def const(c: RationalLike) -> LinearForm:
    return LinearForm._raw(as_rational(c), _ZERO)


def eval_form(f: LinearForm, lam: RationalLike) -> Fraction:
    return f(as_rational(lam))


def intersect(f: LinearForm, g: LinearForm) -> Optional[Fraction]:
    """The unique ``lam`` where ``f`` and ``g`` agree, or None if parallel."""
    if f.b == g.b:
        return None
    return (g.a - f.a) / (f.b - g.b)


def _right_winner(forms: Sequence[LinearForm], at: Fraction) -> int:
    # minimum just to the right of ``at``: value, then slope, then index
    return min(range(len(forms)), key=lambda i: (forms[i](at), forms[i].b, i))


def first_crossing(
    forms: Sequence[LinearForm], lo: Fraction, hi: Fraction
) -> tuple[int, Optional[Fraction], Optional[int]]:
    """Winner of the lower envelope on ``(lo, lo+eps)`` and its first change.

    Returns ``(winner, crossing, successor)``: ``crossing`` is the smallest
    ``lam`` in the open interval where some other form drops below the
    winner, and ``successor`` the envelope winner just after it.
    """
    w = _right_winner(forms, lo)
    fw = forms[w]
    best: Optional[Fraction] = None
    for i, g in enumerate(forms):
        if g.b >= fw.b:
            continue
        x = (g.a - fw.a) / (fw.b - g.b)
        if lo < x < hi and (best is None or x < best):
            best = x
    if best is None:
        return w, None, None
    return w, best, _right_winner(forms, best)


def min_on_interval(
    forms: Sequence[LinearForm], lo: RationalLike, hi: RationalLike
) -> tuple[int, int, Optional[Fraction]]:
    """Lower-envelope summary of ``forms`` over ``[lo, hi]``.

    Returns the minimising index at ``lo`` and at ``hi`` (ties go to the
    smallest index) and the earliest interior point where the envelope
    changes winner, if any.
    """
    lo, hi = as_rational(lo), as_rational(hi)
    if not forms:
        raise ValueError("forms must be nonempty")
    if not lo < hi:
        raise ValueError("need lo < hi")
    at_lo = min(range(len(forms)), key=lambda i: (forms[i](lo), i))
    at_hi = min(range(len(forms)), key=lambda i: (forms[i](hi), i))
    _, crossing, _ = first_crossing(forms, lo, hi)
    return at_lo, at_hi, crossing
