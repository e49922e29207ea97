"""Exact values of the point-count bound formulas.

``theta(q, s) = (q**(s+1) - 1) / (q - 1)`` is kept as an exact rational for
every integer ``s``; it is the number of points of P^s(F_q) when ``s >= 0``
and takes values such as ``theta(q, -2) == -1/q`` below that.
"""
from __future__ import annotations

from fractions import Fraction


class BoundValue(Fraction):
    """Reduced rational with an integer accessor that refuses to round."""

    def as_int(self) -> int:
        if self.denominator != 1:
            raise ValueError(f"bound value {self} is not an integer")
        return self.numerator


def theta(q: int, s: int) -> BoundValue:
    if q < 2:
        raise ValueError("q must be >= 2")
    return BoundValue(Fraction(q) ** (s + 1) - 1, q - 1)


def sziklai_bound(d: int, q: int) -> int:
    """``(d - 1) q + 1``, the bound for plane curves with no F_q-line component."""
    if d < 1:
        raise ValueError("degree must be >= 1")
    return (d - 1) * q + 1


def main_bound(n: int, d: int, q: int) -> int:
    """``(d-1)(q^(n-1) + 1) + (d-2)(theta(q, n-3) - 1)`` for hypersurfaces in P^n."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if d < 1:
        raise ValueError("degree must be >= 1")
    value = (d - 1) * (Fraction(q) ** (n - 1) + 1) + (d - 2) * (theta(q, n - 3) - 1)
    return BoundValue(value).as_int()


def subset_section_bound(delta: int, n: int, q: int) -> int:
    """Largest size of S in P^n(F_q) allowed when every hyperplane meets S in <= delta points.

    ``(delta - 1) q + 1 + floor((delta - 1) / theta(q, n - 2))``, floor toward -inf.
    """
    if delta < 1:
        raise ValueError("delta must be >= 1")
    if n < 2:
        raise ValueError("n must be >= 2")
    ratio = Fraction(delta - 1) / theta(q, n - 2)
    return (delta - 1) * q + 1 + (ratio.numerator // ratio.denominator)


def induction_step_check(n: int, d: int, q: int) -> bool:
    """Replay the induction arithmetic from sections in P^(n-1) to P^n.

    With ``delta = main_bound(n-1, d, q)`` this checks that the floor term is
    exactly ``d - 2`` and that ``subset_section_bound(delta, n, q)`` lands on
    ``main_bound(n, d, q)``.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    if not 2 <= d <= q + 1:
        raise ValueError("need 2 <= d <= q + 1")
    delta = main_bound(n - 1, d, q)
    t = theta(q, n - 2)
    # delta - 1 = (d-2)(q^(n-2) + theta(q, n-4)) + q^(n-2) <= (d-2) theta(q, n-2) + q^(n-2)
    if delta - 1 != (d - 2) * (q ** (n - 2) + theta(q, n - 4)) + q ** (n - 2):
        return False
    if not q ** (n - 2) < t:
        return False
    if (delta - 1) // t != d - 2:
        return False
    chain = ((d - 1) * q ** (n - 2) + (d - 2) * theta(q, n - 4)) * q + d - 1
    return subset_section_bound(delta, n, q) == chain == main_bound(n, d, q)
