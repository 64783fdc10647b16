"""Infinite products of finite nested radicals: π, 2/π, log x, ln 2 and the lemniscate constant."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import mpmath

from .engine import DEFAULT_PRECISION, CompositionKind, EvalRequest, TermStream, check_precision, eval_backward, to_mp
from .errors import DomainError

SQRT = CompositionKind.square_root()


@dataclass(frozen=True)
class ProductSpec:
    """A named infinite product: factor(k) for k = 1, 2, … and its target value."""

    name: str
    factor: Callable[[int], Any]
    target: Callable[[], Any]
    factor_count: int

    def partial(self, n: int | None = None, precision: int = DEFAULT_PRECISION):
        n = self.factor_count if n is None else n
        with mpmath.workprec(precision):
            prod = mpmath.mpf(1)
            for k in range(1, n + 1):
                f = to_mp(self.factor(k))
                if f == 0 or not mpmath.isfinite(f):
                    raise DomainError(f"factor {k} of {self.name} is zero or not finite")
                prod *= f
            return +prod


def _check_count(n: int, name: str = "n", minimum: int = 1) -> None:
    if int(n) != n or n < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}")


def twos_nest(m: int, precision: int = DEFAULT_PRECISION, inner=None):
    """R_m = √(2 + √(2 + … + √2)) with m twos (R_0 = 0), optionally over an inner value."""
    if m == 0:
        return mpmath.mpf(0) if inner is None else to_mp(inner)
    seed = 0 if inner is None else inner
    return eval_backward(EvalRequest(SQRT, TermStream.constant(2), m - 1, seed=seed, precision=precision))


def viete_product(n_factors: int, precision: int = DEFAULT_PRECISION):
    """Π_{k=1..n} R_k / 2 with R_k = √(2 + √(2 + … )) (k twos); decreases to 2/π."""
    _check_count(n_factors, "n_factors")
    check_precision(precision)
    with mpmath.workprec(precision + 16):
        r = mpmath.mpf(0)
        prod = mpmath.mpf(1)
        for _ in range(n_factors):
            r = mpmath.sqrt(2 + r)
            prod *= r / 2
    with mpmath.workprec(precision):
        return +prod


def viete_partials(n_factors: int, precision: int = DEFAULT_PRECISION) -> list:
    return [viete_product(k, precision) for k in range(1, n_factors + 1)]


def _two_minus_twos(m: int):
    """2 - R_m without cancellation: D_0 = 2, D_k = D_(k-1) / (2 + R_k) since R_k² = 2 + R_(k-1)."""
    r = mpmath.mpf(0)
    d = mpmath.mpf(2)
    for _ in range(m):
        r = mpmath.sqrt(2 + r)
        d = d / (2 + r)
    return d, r


def catalan_pi(n: int, precision: int = DEFAULT_PRECISION):
    """2^n √(2 - √(2 + … + √2)) with n twos in total; tends to π."""
    _check_count(n)
    check_precision(precision)
    with mpmath.workprec(precision + 16):
        d, _ = _two_minus_twos(n - 1)
        val = mpmath.ldexp(mpmath.sqrt(d), n)
    with mpmath.workprec(precision):
        return +val


def catalan_pi_naive(n: int, precision: int = DEFAULT_PRECISION):
    """Same limit by direct subtraction, for comparison; loses about 2n bits."""
    _check_count(n)
    with mpmath.workprec(precision):
        return mpmath.ldexp(mpmath.sqrt(2 - twos_nest(n - 1, precision)), n)


def candido_ratio(n: int, precision: int = DEFAULT_PRECISION):
    """2^(n-1) · √(2 - √(2 + …)) / √(2 + √(2 + …)), each nest with n-1 twos; tends to π/2."""
    _check_count(n, minimum=2)
    check_precision(precision)
    with mpmath.workprec(precision + 16):
        d, r = _two_minus_twos(n - 2)
        val = mpmath.ldexp(mpmath.sqrt(d) / mpmath.sqrt(2 + r), n - 1)
    with mpmath.workprec(precision):
        return +val


def polygon_bounds_pi(q: int, precision: int = DEFAULT_PRECISION) -> tuple:
    """Bounds on π from the inscribed and circumscribed 3·2^q-gons of the unit circle.

    With M = 2cos(π/(3·2^(q-1))) written as a nest of q-1 square roots over 1
    (M = 1, √3, √(2+√3), …), the perimeters are 3·2^q·√(2-M) and
    3·2^(q+1)·√(2-M)/√(2+M); each radical holds q square roots. Half of each
    perimeter bounds π.
    """
    _check_count(q, "q")
    check_precision(precision)
    work = precision + 2 * q + 16
    with mpmath.workprec(work):
        if q == 1:
            inner = mpmath.mpf(1)
        else:
            twos = TermStream.constant(2)
            inner = mpmath.sqrt(3) if q == 2 else eval_backward(
                EvalRequest(SQRT, twos, q - 3, seed=mpmath.sqrt(3), precision=work))
        num = mpmath.sqrt(2 - inner)
        den = mpmath.sqrt(2 + inner)
        lower = 3 * mpmath.ldexp(num, q - 1)
        upper = 3 * mpmath.ldexp(num / den, q)
    with mpmath.workprec(precision):
        return +lower, +upper


def euler_secant_product(n: int, A, precision: int = DEFAULT_PRECISION):
    """sin A / Π_{k=1..n} cos(A/2^k), which tends to A."""
    _check_count(n)
    check_precision(precision)
    with mpmath.workprec(precision + 16):
        A = to_mp(A)
        if not (0 < A < mpmath.pi):
            raise DomainError("A must lie in (0, π)")
        prod = mpmath.mpf(1)
        for k in range(1, n + 1):
            prod *= mpmath.cos(mpmath.ldexp(A, -k))
        val = mpmath.sin(A) / prod
    with mpmath.workprec(precision):
        return +val


def osler_union_product(p: int, wallis_terms: int, precision: int = DEFAULT_PRECISION):
    """Π_{k=1..p} c_k · Π_{n=1..W} (2^(p+1)n - 1)(2^(p+1)n + 1) / (2^(p+1)n)², tending to 2/π.

    c_1 = √(1/2), c_(k+1) = √(1/2 + c_k/2). p = 0 is the Wallis product.
    """
    if int(p) != p or p < 0:
        raise ValueError("p must be a nonnegative integer")
    if int(wallis_terms) != wallis_terms or wallis_terms < 0:
        raise ValueError("wallis_terms must be a nonnegative integer")
    check_precision(precision)
    with mpmath.workprec(precision + 16):
        prod = mpmath.mpf(1)
        c = None
        for _ in range(p):
            c = mpmath.sqrt(mpmath.mpf(1) / 2) if c is None else mpmath.sqrt((1 + c) / 2)
            prod *= c
        m = 2 ** (p + 1)
        for n in range(1, wallis_terms + 1):
            t = m * n
            prod *= mpmath.mpf((t - 1) * (t + 1)) / (t * t)
    with mpmath.workprec(precision):
        return +prod


def levin_lemniscate_product(n_factors: int, precision: int = DEFAULT_PRECISION):
    """Π d_k with d_1 = √(1/2), d_(k+1) = √(1/2 + (1/2)/d_k); tends to 2/L."""
    _check_count(n_factors, "n_factors")
    check_precision(precision)
    with mpmath.workprec(precision + 16):
        half = mpmath.mpf(1) / 2
        d = mpmath.sqrt(half)
        prod = d
        for _ in range(n_factors - 1):
            d = mpmath.sqrt(half + half / d)
            prod *= d
    with mpmath.workprec(precision):
        return +prod


LEMNISCATE_L = "2.6220575542"  # decimal digits as published; Γ(1/4) is not evaluated


def osler_log_product(x, n_factors: int, precision: int = DEFAULT_PRECISION):
    """(x - 1) / (√x · Π c_k) with c_1 = √(1/2 + (1+x)/(4√x)), c_(k+1) = √(1/2 + c_k/2); tends to log x."""
    _check_count(n_factors, "n_factors")
    check_precision(precision)
    with mpmath.workprec(precision + 16):
        x = to_mp(x)
        if not x > 0:
            raise DomainError("log product needs x > 0")
        if x == 1:
            raise DomainError("x = 1 gives 0/0")
        rx = mpmath.sqrt(x)
        c = mpmath.sqrt(mpmath.mpf(1) / 2 + (1 + x) / (4 * rx))
        prod = c
        for _ in range(n_factors - 1):
            c = mpmath.sqrt((1 + c) / 2)
            prod *= c
        val = (x - 1) / (rx * prod)
    with mpmath.workprec(precision):
        return +val


def hauser_ln2(n: int, precision: int = DEFAULT_PRECISION):
    """2^n √(√(2 + … + √(2 + 2.5)) - 2) with n roots over 2.5 inside; tends to ln 2."""
    _check_count(n)
    check_precision(precision)
    with mpmath.workprec(precision + 3 * n + 16):
        r = twos_nest(n, precision + 3 * n + 16, inner=mpmath.mpf("2.5"))
        val = mpmath.ldexp(mpmath.sqrt(r - 2), n)
    with mpmath.workprec(precision):
        return +val


def servi_nest(k: int, x, precision: int = DEFAULT_PRECISION):
    """√(2 - √(2 + … + √(2 + √x))) with k square roots in total (k >= 2)."""
    if int(k) != k or k < 2:
        raise ValueError("k must be an integer >= 2")
    with mpmath.workprec(precision):
        inner = twos_nest(k - 2, precision, inner=mpmath.sqrt(to_mp(x)))
        return mpmath.sqrt(2 - inner)


def servi_ratio(k: int, precision: int = DEFAULT_PRECISION):
    """R_k(2) / R_k(3); tends to 3/2. Evaluated with extra bits to absorb the 2 - R cancellation."""
    work = precision + 2 * k + 16
    with mpmath.workprec(work):
        val = servi_nest(k, 2, work) / servi_nest(k, 3, work)
    with mpmath.workprec(precision):
        return +val


PRODUCTS = {
    "viete": ProductSpec("viete", lambda k: twos_nest(k) / 2, lambda: 2 / mpmath.pi, 20),
}
