"""Registry of named constants, each computed by its defining nest, equation or limit."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable

import mpmath

from .cotangent import lehmer_constant
from .engine import (
    DEFAULT_PRECISION,
    CompositionKind,
    EvalRequest,
    TermStream,
    check_precision,
    estimate_limit,
    eval_backward,
)
from .errors import UnknownConstant
from .products import levin_lemniscate_product


@dataclass(frozen=True)
class NamedConstant:
    name: str
    compute: Callable[[int, int], Any]  # (depth, precision) -> value
    reference_digits: str
    provenance: str  # "published" or "derived"
    citation: str
    default_depth: int = 0
    description: str = ""
    erratum: str = ""  # known disagreement between the published digits and the defining procedure

    def reference(self):
        return mpmath.mpf(self.reference_digits)

    def reference_tolerance(self):
        """One unit in the last stated digit, so truncated and rounded publications both agree."""
        decimals = len(self.reference_digits.split(".")[1]) if "." in self.reference_digits else 0
        return mpmath.mpf(10) ** (-decimals)


def _limit(kind: CompositionKind, terms: TermStream, precision: int, max_depth: int = 400, seed=None):
    tol = mpmath.ldexp(1, -(precision - 8))
    value, _ = estimate_limit(EvalRequest(kind, terms, 0, seed=seed, precision=precision), tol, max_depth)
    return value


def bisect_root(g: Callable, lo, hi, precision: int):
    """Bisection to full working precision on a bracket with a sign change."""
    with mpmath.workprec(precision):
        lo, hi = mpmath.mpf(lo), mpmath.mpf(hi)
        glo = g(lo)
        if (glo > 0) == (g(hi) > 0):
            raise ValueError("bracket does not contain a sign change")
        for _ in range(precision + 8):
            mid = (lo + hi) / 2
            gm = g(mid)
            if gm == 0:
                return mid
            if (gm > 0) == (glo > 0):
                lo, glo = mid, gm
            else:
                hi = mid
        return (lo + hi) / 2


def kasner(depth: int, precision: int):
    """√(1 + √(2 + √(3 + …)))."""
    return _limit(CompositionKind.square_root(), TermStream.arithmetic(1, 1), precision)


def golden(depth: int, precision: int):
    """√(1 + √(1 + …)) = θ."""
    return _limit(CompositionKind.square_root(), TermStream.constant(1), precision, 4 * precision)


def plastic(depth: int, precision: int):
    """∛(1 + ∛(1 + …)), the real root of x³ = x + 1."""
    return _limit(CompositionKind.rth_root(3), TermStream.constant(1), precision, 4 * precision)


def paris_sequence(n: int, precision: int):
    """(θ - u_n)(2θ)^n / 2 with u_1 = 1, u_k = √(1 + u_(k-1))."""
    with mpmath.workprec(precision + 2 * n + 16):
        theta = (1 + mpmath.sqrt(5)) / 2
        u = mpmath.mpf(1)
        for _ in range(n - 1):
            u = mpmath.sqrt(1 + u)
        return (theta - u) * (2 * theta) ** n / 2


def paris(depth: int, precision: int):
    """K = lim (θ - u_n)(2θ)^n / 2; the error shrinks by 1/(2θ) per step."""
    # (2θ)^-depth <= 2^-precision needs depth >= precision / log2(2θ) ≈ 0.59·precision
    n = max(depth, int(precision * 0.6) + 8)
    with mpmath.workprec(precision):
        return +paris_sequence(n, precision)


def lehmer(depth: int, precision: int):
    """Value of the minimal regular continued cotangent 0, 1, 3, 13, 183, …"""
    with mpmath.workprec(precision):
        return +lehmer_constant(max(depth, 8), max(precision, 256))


def dence_k0(depth: int, precision: int):
    """Real root of k³ - 2k² + k - 1 = 0."""
    return bisect_root(lambda k: k**3 - 2 * k**2 + k - 1, 1, 2, precision)


def dence_a0(depth: int, precision: int):
    """√(k_0 - 3/4) - 1/2."""
    with mpmath.workprec(precision):
        return mpmath.sqrt(dence_k0(depth, precision) - mpmath.mpf(3) / 4) - mpmath.mpf(1) / 2


def dence_nest(k, depth: int, precision: int):
    """√(k - √(k + √(k - …))) to the given depth, signs alternating from the second root on."""
    terms = TermStream.from_functions(lambda i: k, sign=lambda i: -1 if i % 2 else 1, period=2)
    return eval_backward(EvalRequest(CompositionKind.square_root(), terms, depth, precision=precision))


def _self_power_residual(x):
    # x^(x-1) - (1 + x): the defining equation of both continued-power constants m and n.
    return x ** (x - 1) - 1 - x


def lim2007a(depth: int, precision: int):
    """n with n^n = n + 1: the nest ⁿ√(1 + ⁿ√(1 + …)) reproduces n."""
    return bisect_root(lambda x: x**x - x - 1, 1, 2, precision)


def lim2008_m(depth: int, precision: int):
    """Root of x^(x-1) = 1 + x in (0, 1)."""
    return bisect_root(_self_power_residual, mpmath.mpf(1) / 8, 1, precision)


def lim2008_n(depth: int, precision: int):
    """Root of x^(x-1) = 1 + x in (2, 3)."""
    return bisect_root(_self_power_residual, 2, 3, precision)


def lim2007a_nest(n, precision: int):
    """ⁿ√(1 + ⁿ√(1 + …)) for a real index n > 1."""
    return _limit(CompositionKind.rth_root(n), TermStream.constant(1), precision, 4 * precision)


def lim2008_nest(x, precision: int):
    """ˣ√(x + x·ˣ√(x + …)) for x > 0.

    For x > 1 this is a continued root. For x < 1 the root index is below one,
    so with w = x + x·v the value v = w^(1/x) solves w = x + x·w^(1/x), a
    continued power in w.
    """
    with mpmath.workprec(precision):
        x = mpmath.mpf(x)
        if x > 1:
            return _limit(CompositionKind.rth_root(x), TermStream.constant(x, x), precision, 4 * precision)
        w = _limit(CompositionKind.power(1 / x), TermStream.constant(x, x), precision, 8 * precision)
        return w ** (1 / x)


def somos(depth: int, precision: int, t: int = 2):
    """σ_t = ᵗ√(1·ᵗ√(2·ᵗ√(3⋯))) = exp(Σ_(n>=1) log(n) / t^n), summed until the tail is below 2^-precision."""
    with mpmath.workprec(precision + 16):
        t = mpmath.mpf(t)
        total = mpmath.mpf(0)
        eps = mpmath.ldexp(1, -precision)
        n = 1
        while True:
            total += mpmath.log(n) / t**n
            n += 1
            nxt = mpmath.log(n) / t**n
            rho = mpmath.log(n + 1) / mpmath.log(n) / t
            if n > 2 and rho < 1 and nxt / (1 - rho) < eps:
                break
        val = mpmath.exp(total)
    with mpmath.workprec(precision):
        return +val


def somos_nest(depth: int, precision: int, t: int = 2):
    """Direct evaluation of the product nest to the given depth with seed 1."""
    terms = TermStream.from_functions(lambda i: 0, lambda i: i + 1)
    return eval_backward(EvalRequest(CompositionKind.rth_root(t), terms, depth, seed=1, precision=precision))


def lemniscate(depth: int, precision: int):
    """L = 2 / Π d_k from the nested-radical product."""
    n = max(depth, precision // 2 + 8)  # factors approach 1 like 1 - c·4^-k
    with mpmath.workprec(precision):
        return 2 / levin_lemniscate_product(n, precision)


REGISTRY: dict[str, NamedConstant] = {
    c.name: c
    for c in (
        NamedConstant("kasner", kasner, "1.757933", "published", "Herschfeld 1935",
                      description="√(1+√(2+√(3+…)))"),
        NamedConstant("golden", golden, "1.6180339887498948482", "derived", "(1+√5)/2",
                      description="√(1+√(1+…))"),
        NamedConstant("plastic", plastic, "1.32471957", "published", "Lim 2010",
                      description="continued cube root of 1",
                      erratum="the real root of x³ = x + 1 is 1.3247179572…; the published digits drop a 7"),
        NamedConstant("paris", paris, "1.098630", "published", "Paris 1987",
                      description="lim (θ-u_n)(2θ)^n/2",
                      erratum="the limit evaluates to 1.0986419643…, 1.2e-5 above the published digits"),
        NamedConstant("lehmer", lehmer, "0.59263", "published", "Lehmer 1938",
                      description="slowest regular continued cotangent"),
        NamedConstant("dence_k0", dence_k0, "1.7548777", "published", "Dence 1983",
                      description="root of k³-2k²+k-1"),
        NamedConstant("dence_a0", dence_a0, "0.5024359", "published", "Dence 1983",
                      description="√(k_0-3/4)-1/2"),
        NamedConstant("lim2007a", lim2007a, "1.7767750401", "published", "Lim 2007",
                      description="n^n = n+1"),
        NamedConstant("lim2008_m", lim2008_m, "0.4758608124", "published", "Lim 2008",
                      description="x^(x-1) = 1+x, small root"),
        NamedConstant("lim2008_n", lim2008_n, "2.398384383", "published", "Lim 2008",
                      description="x^(x-1) = 1+x, large root"),
        NamedConstant("somos", somos, "1.661687949633594121295818922749950749964", "derived",
                      "Sondow-Hadjicostas", description="√(1·√(2·√(3⋯)))"),
        NamedConstant("lemniscate", lemniscate, "2.6220575542", "published", "Levin 2006",
                      description="2/Π d_k"),
    )
}


def get_constant(name: str) -> NamedConstant:
    try:
        return REGISTRY[name]
    except KeyError:
        raise UnknownConstant(f"unknown constant {name!r}; known: {', '.join(sorted(REGISTRY))}") from None


def compute_constant(name: str, precision: int = DEFAULT_PRECISION, depth: int | None = None):
    c = get_constant(name)
    check_precision(precision)
    return c.compute(c.default_depth if depth is None else depth, precision)
