"""Continued cotangent expansions x = cot(arccot a_0 - arccot a_1 + arccot a_2 - …)."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional, Sequence

import mpmath

from .engine import CompositionKind, EvalRequest, TermStream, check_precision, eval_backward, to_mp
from .errors import DomainError, PrecisionExhausted

COT = CompositionKind.cotangent()
MIN_ENCODE_PRECISION = 256


@dataclass(frozen=True)
class CotangentDigits:
    digits: tuple
    terminated: bool = False
    residual: Any = None

    def __post_init__(self):
        object.__setattr__(self, "digits", tuple(int(d) for d in self.digits))
        if not self.digits:
            raise ValueError("at least one digit is required")

    def dump(self) -> str:
        """One integer per line; an unterminated expansion adds a ``residual <value>`` line."""
        lines = [str(d) for d in self.digits]
        if not self.terminated and self.residual is not None:
            lines.append(f"residual {mpmath.nstr(self.residual, 30)}")
        return "\n".join(lines) + "\n"


def encode_precision(max_digits: int) -> int:
    """Digits roughly square in size, so each one doubles the bits consumed."""
    return max(MIN_ENCODE_PRECISION, 16 * 2**max_digits)


def cot_encode(x, max_digits: int, precision: Optional[int] = None) -> CotangentDigits:
    """Greedy digits a_k = ⌊x_k⌋, x_(k+1) = (x_k a_k + 1)/(x_k - a_k).

    Stops early (terminated) when x_k is an integer at working precision.
    A running bound on the accumulated rounding error decides when the
    next digit is no longer certain; that raises PrecisionExhausted.
    """
    if int(max_digits) != max_digits or max_digits < 1:
        raise ValueError("max_digits must be a positive integer")
    prec = encode_precision(max_digits) if precision is None else check_precision(precision)
    with mpmath.workprec(prec):
        x = +to_mp(x)
        if not x > 0:
            raise DomainError("continued cotangent expansions need x > 0")
        ulp = mpmath.ldexp(1, -prec)
        err = abs(x) * ulp
        term_tol = mpmath.ldexp(1, -prec // 2)
        digits = []
        for _ in range(max_digits):
            n = int(mpmath.nint(x))
            if abs(x - n) <= err:
                if err <= term_tol * max(1, abs(x)):
                    digits.append(n)
                    return CotangentDigits(tuple(digits), True, None)
                raise PrecisionExhausted(f"digit {len(digits)} straddles an integer at {prec} bits")
            a = int(mpmath.floor(x))
            digits.append(a)
            if len(digits) == max_digits:
                break
            f = x - a
            # |d/dx (a x + 1)/(x - a)| = (a² + 1)/(x - a)²
            err = err * (a * a + 1) / (f - err) ** 2 + abs(x) * ulp
            x = (x * a + 1) / f
            err += abs(x) * ulp
        return CotangentDigits(tuple(digits), False, +x)


def _digits_of(d) -> tuple:
    return d.digits if isinstance(d, CotangentDigits) else tuple(int(v) for v in d)


def cot_decode_rational(digits, depth: Optional[int] = None, precision: int = MIN_ENCODE_PRECISION):
    """Backward recurrence with tail seed a_(depth-1): t_0∘…∘t_(depth-2)(a_(depth-1))."""
    ds = _digits_of(digits)
    depth = len(ds) if depth is None else depth
    if not 1 <= depth <= len(ds):
        raise ValueError(f"depth must lie in 1..{len(ds)}")
    terms = TermStream.from_list(list(ds[:depth]))
    return eval_backward(EvalRequest(COT, terms, depth - 1, precision=precision))


def _arccot(a: int):
    return mpmath.pi / 2 if a == 0 else mpmath.atan(mpmath.mpf(1) / a)


def cot_decode_arccot(digits, depth: Optional[int] = None, precision: int = MIN_ENCODE_PRECISION):
    """cot(Σ_k (-1)^k arccot a_k) over the first depth digits."""
    ds = _digits_of(digits)
    depth = len(ds) if depth is None else depth
    if not 1 <= depth <= len(ds):
        raise ValueError(f"depth must lie in 1..{len(ds)}")
    check_precision(precision)
    with mpmath.workprec(precision):
        angle = mpmath.fsum(_arccot(a) * (-1) ** k for k, a in enumerate(ds[:depth]))
        return +mpmath.cot(angle)


def cot_decode(digits, depth: Optional[int] = None, precision: int = MIN_ENCODE_PRECISION):
    """Rebuild x from its first depth digits; the arccot route is computed as a self-check."""
    value = cot_decode_rational(digits, depth, precision)
    other = cot_decode_arccot(digits, depth, precision)
    with mpmath.workprec(precision):
        if abs(value - other) > mpmath.ldexp(1, -precision // 2) * max(1, abs(value)):
            raise PrecisionExhausted("rational and arccot decodings disagree; raise the precision")
    return value


def check_regular(digits) -> bool:
    """True iff a_(k+1) >= a_k² + a_k + 1 for every consecutive pair."""
    ds = _digits_of(digits)
    return all(b >= a * a + a + 1 for a, b in zip(ds, ds[1:]))


def minimal_digits(n_digits: int) -> list[int]:
    """a_0 = 0, a_(k+1) = a_k² + a_k + 1: the slowest-growing regular digit string."""
    out = [0]
    while len(out) < n_digits:
        a = out[-1]
        out.append(a * a + a + 1)
    return out


def lehmer_constant(n_digits: int = 8, precision: int = MIN_ENCODE_PRECISION):
    """The value of the minimal regular expansion, decoded from n_digits digits."""
    if int(n_digits) != n_digits or n_digits < 4:
        raise ValueError("n_digits must be an integer >= 4")
    return cot_decode(minimal_digits(n_digits), n_digits, precision)


def shallit_digits(c: int, count: int) -> list[int]:
    """Digits of (c + √(c²+4))/2 by the cubic recurrence a_(k+1) = a_k³ + 3a_k, a_0 = c."""
    out = [int(c)]
    while len(out) < count:
        a = out[-1]
        out.append(a**3 + 3 * a)
    return out


def continued_fraction_error(x, n_terms: int, precision: int = MIN_ENCODE_PRECISION):
    """Error of the n-term simple continued fraction convergent of x (comparison aid)."""
    with mpmath.workprec(precision):
        x = +to_mp(x)
        y = x
        p0, q0, p1, q1 = 1, 0, int(mpmath.floor(y)), 1
        y = y - p1
        for _ in range(n_terms - 1):
            if y == 0:
                break
            y = 1 / y
            a = int(mpmath.floor(y))
            y -= a
            p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        return abs(x - mpmath.mpf(p1) / q1)


def digits_from_sequence(values: Sequence[int]) -> CotangentDigits:
    return CotangentDigits(tuple(values), True, None)
