"""f-expansions x = f(a_1 + f(a_2 + f(…))) and greedy β-expansions."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, Optional

import mpmath

from .engine import DEFAULT_PRECISION, check_precision, to_mp
from .errors import DigitOverflow, DomainError


class Direction(str, enum.Enum):
    DECREASING = "decreasing"  # f(1) = 1, f(∞) = 0; digits >= 1
    INCREASING = "increasing"  # f(0) = 0, f(p) = 1; digits 0..p-1


@dataclass(frozen=True)
class FExpansionSystem:
    """A digit system: f with its inverse, the admissible x interval and digit range.

    exact_inverse, when given, maps Fractions to Fractions and enables exact
    expansion of rational inputs. contraction is (C, λ) with the truncation
    error after n digits at most C·λ^n.
    """

    name: str
    direction: Direction
    f: Callable[[Any], Any]
    f_inverse: Callable[[Any], Any]
    domain: tuple
    digit_range: tuple
    contraction: tuple
    exact_inverse: Optional[Callable[[Fraction], Fraction]] = None
    p: Any = None

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))

    def in_domain(self, x) -> bool:
        lo, hi = self.domain
        if self.direction is Direction.DECREASING:
            return lo < x <= hi
        return lo <= x < hi

    def digit_ok(self, d: int) -> bool:
        lo, hi = self.digit_range
        return d >= lo and (hi is None or d <= hi)


@dataclass(frozen=True)
class FDigits:
    digits: tuple
    residual: Any
    terminated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))

    def dump(self) -> str:
        """Same layout as the cotangent digit dump: one integer per line, then the residual."""
        lines = [str(d) for d in self.digits]
        if not self.terminated:
            lines.append(f"residual {mpmath.nstr(to_mp(self.residual), 30)}")
        return "\n".join(lines) + "\n"


def reciprocal_system() -> FExpansionSystem:
    """f(t) = 1/t: the regular continued fraction of x ∈ (0, 1]."""
    phi = (1 + math.sqrt(5)) / 2
    return FExpansionSystem(
        "reciprocal",
        Direction.DECREASING,
        lambda t: 1 / t,
        lambda x: 1 / x,
        (0, 1),
        (1, None),
        (phi**2, phi**-2),  # |x - p_n/q_n| < 1/q_n² and q_n >= φ^(n-1)
        exact_inverse=lambda x: 1 / x,
    )


def decimal_system(p: int = 10) -> FExpansionSystem:
    """f(t) = t/p: radix-p digits of x ∈ [0, 1)."""
    if int(p) != p or p < 2:
        raise ValueError("radix must be an integer >= 2")
    p = int(p)
    return FExpansionSystem(
        f"decimal-{p}",
        Direction.INCREASING,
        lambda t: t / p,
        lambda x: x * p,
        (0, 1),
        (0, p - 1),
        (1, 1 / p),
        exact_inverse=lambda x: x * p,
        p=p,
    )


def beta_system(beta) -> FExpansionSystem:
    """f(t) = t/β on [0, β]: the greedy β-expansion as an increasing f-expansion."""
    b = to_mp(beta)
    if not b > 1:
        raise DomainError("β must exceed 1")
    return FExpansionSystem(
        f"beta-{mpmath.nstr(b, 12)}",
        Direction.INCREASING,
        lambda t: t / b,
        lambda x: x * b,
        (0, 1),
        (0, int(mpmath.ceil(b)) - 1),
        (1, 1 / float(b)),
        p=b,
    )


SYSTEMS = {"reciprocal": reciprocal_system, "decimal": decimal_system, "beta": beta_system}


def _encode_exact(system: FExpansionSystem, x: Fraction, n: int) -> FDigits:
    digits = []
    r = x
    for _ in range(n):
        y = system.exact_inverse(r)
        a = math.floor(y)
        digits.append(a)
        r = y - a
        if r == 0 and system.direction is Direction.DECREASING:
            return FDigits(tuple(digits), Fraction(0), True)
    return FDigits(tuple(digits), r, system.direction is Direction.INCREASING and r == 0)


def f_encode(system: FExpansionSystem, x, n: int, precision: int = DEFAULT_PRECISION) -> FDigits:
    """n digits by inversion: y = f⁻¹(x), a = ⌊y⌋, continue with the fractional part y - a.

    Rational inputs (int or Fraction) use exact arithmetic when the system
    provides an exact inverse. Otherwise the expansion runs at the given
    precision; a value within 2^(-precision/2) of an integer counts as that
    integer, which ends a continued-fraction-type expansion.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    check_precision(precision)
    if isinstance(x, (int, Fraction)) and system.exact_inverse is not None:
        xf = Fraction(x)
        if not system.in_domain(xf):
            raise DomainError(f"x = {xf} lies outside the {system.name} domain {system.domain}")
        return _encode_exact(system, xf, n)
    with mpmath.workprec(precision):
        xv = +to_mp(x)
        if not system.in_domain(xv):
            raise DomainError(f"x = {mpmath.nstr(xv, 10)} lies outside the {system.name} domain {system.domain}")
        limit = mpmath.ldexp(1, precision)
        tol = mpmath.ldexp(1, -(precision // 2))
        digits = []
        r = xv
        for _ in range(n):
            y = system.f_inverse(r)
            if not mpmath.isfinite(y) or abs(y) >= limit:
                raise DigitOverflow(f"digit {len(digits) + 1} exceeds 2^{precision}")
            a, r = _split(y, tol)
            if not system.digit_ok(a):
                raise DomainError(f"digit {a} outside the {system.name} digit range")
            digits.append(a)
            if r == 0 and system.direction is Direction.DECREASING:
                return FDigits(tuple(digits), r, True)
        return FDigits(tuple(digits), +r, r == 0)


def _split(y, tol):
    """(⌊y⌋, y - ⌊y⌋), treating values within tol·max(1,|y|) of an integer as that integer."""
    near = mpmath.nint(y)
    if abs(y - near) <= tol * max(1, abs(y)):
        return int(near), mpmath.mpf(0)
    a = int(mpmath.floor(y))
    return a, y - a


def f_decode(system: FExpansionSystem, digits: FDigits, depth: Optional[int] = None,
             precision: int = DEFAULT_PRECISION, use_residual: bool = True):
    """f(a_1 + f(a_2 + … + f(a_depth + r))) with r the residual at full depth, else 0."""
    ds = digits.digits
    depth = len(ds) if depth is None else depth
    if not 1 <= depth <= len(ds):
        raise ValueError(f"depth must lie in 1..{len(ds)}")
    check_precision(precision)
    with mpmath.workprec(precision):
        r = to_mp(digits.residual) if (use_residual and depth == len(ds)) else mpmath.mpf(0)
        if system.direction is Direction.DECREASING and r == 0:
            # f(a_depth + f(∞)) = f(a_depth)
            v = system.f(mpmath.mpf(ds[depth - 1]))
        else:
            v = system.f(ds[depth - 1] + r)
        for a in reversed(ds[: depth - 1]):
            v = system.f(a + v)
        return +v


def _as_rational(v) -> Optional[Fraction]:
    if isinstance(v, (int, Fraction)):
        return Fraction(v)
    if isinstance(v, str):
        try:
            return Fraction(v.strip())
        except ValueError:
            return None
    return None


def beta_encode(beta, x, n: int, precision: int = DEFAULT_PRECISION) -> FDigits:
    """Greedy digits d_i = ⌊β x_i⌋, x_(i+1) = β x_i - d_i; the residual is x_(n+1).

    Rational β and x (ints, Fractions or decimal strings) are expanded exactly;
    otherwise the run uses the f-expansion termination tolerance.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    check_precision(precision)
    bq, xq = _as_rational(beta), _as_rational(x)
    if bq is not None and xq is not None:
        if not bq > 1:
            raise DomainError("β must exceed 1")
        if not (0 <= xq < 1):
            raise DomainError("x must lie in [0, 1)")
        digits = []
        for _ in range(n):
            y = bq * xq
            d = math.floor(y)
            digits.append(d)
            xq = y - d
        return FDigits(tuple(digits), xq, xq == 0)
    with mpmath.workprec(precision):
        b = to_mp(beta)
        if not b > 1:
            raise DomainError("β must exceed 1")
        xv = to_mp(x)
        if not (0 <= xv < 1):
            raise DomainError("x must lie in [0, 1)")
        top = int(mpmath.ceil(b)) - 1
        tol = mpmath.ldexp(1, -(precision // 2))
        digits = []
        for _ in range(n):
            d, xv = _split(b * xv, tol)
            if d > top:  # β·x rounded onto ⌈β⌉: keep the greedy digit bound
                d, xv = top, b * xv + d - top
            digits.append(d)
        return FDigits(tuple(digits), +xv, xv == 0)


def beta_value(beta, digits, precision: int = DEFAULT_PRECISION):
    """Σ d_i β^(-i) over the listed digits."""
    with mpmath.workprec(precision):
        b = to_mp(beta)
        ds = digits.digits if isinstance(digits, FDigits) else digits
        return +mpmath.fsum(d * b ** (-(i + 1)) for i, d in enumerate(ds))


def continued_fraction_digits(p: int, q: int) -> list[int]:
    """Partial quotients a_1, a_2, … of p/q ∈ (0, 1] by the Euclidean algorithm."""
    if not (0 < p <= q):
        raise ValueError("need 0 < p <= q")
    out = []
    while p:
        a, r = divmod(q, p)
        out.append(a)
        q, p = p, r
    return out
