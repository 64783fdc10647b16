"""Continued-root and fixed-point solvers for trinomials and general equations x = f(x)."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import mpmath

from .engine import DEFAULT_PRECISION, check_precision, to_mp
from .errors import DerivativeUnavailable, DomainError, NoConvergence


@dataclass(frozen=True)
class Trinomial:
    """x^m + p·x^n + q = 0 with m > n >= 1."""

    m: int
    n_exp: int
    p: Any
    q: Any

    def __post_init__(self):
        if int(self.m) != self.m or int(self.n_exp) != self.n_exp:
            raise ValueError("exponents must be integers")
        if not (self.m > self.n_exp >= 1 and self.m >= 2):
            raise ValueError("need m > n >= 1")

    def value(self, x):
        return x**self.m + to_mp(self.p) * x**self.n_exp + to_mp(self.q)

    def scale(self):
        return 1 + abs(to_mp(self.p)) + abs(to_mp(self.q))

    def hoffmann_bound(self):
        """(n|p|/m)^(1/(m-n)): the critical-point abscissa separating A roots from B roots."""
        return mpmath.root(self.n_exp * abs(to_mp(self.p)) / self.m, self.m - self.n_exp)


@dataclass
class SolveResult:
    root: Any
    iterations: int
    residual: Any
    trace: list = field(default_factory=list)
    inside_bound: Optional[bool] = None
    bound: Any = None


def real_root(v, k: int):
    """Real k-th root; odd k keeps the sign of v, even k rejects negative v."""
    if v < 0:
        if k % 2 == 0:
            raise DomainError(f"even-index root of negative radicand {mpmath.nstr(v, 8)}")
        return -mpmath.root(-v, k)
    return mpmath.root(v, k)


def _iterate(step: Callable, x, max_iter: int, tol, precision: int, trace: list):
    """Run x <- step(x) until the a-posteriori error bound q/(1-q)·|step| is within tol.

    q is the observed ratio of successive steps; returns (x, iterations).
    """
    cut = mpmath.mpf(10) ** (precision // 8)
    prev = None
    for i in range(1, max_iter + 1):
        nxt = step(x)
        if not mpmath.isfinite(nxt) or abs(nxt) > cut:
            raise NoConvergence(f"iterate {i} left the range |x| <= 10^{precision // 8}", trace)
        trace.append(+nxt)
        delta = abs(nxt - x)
        x = nxt
        if delta == 0:
            return x, i
        if prev:
            q = delta / prev
            if q < 1 and delta * q / (1 - q) <= tol * max(1, abs(x)):
                return x, i
        prev = delta
    raise NoConvergence(f"no convergence within {max_iter} iterations", trace)


def hoffmann_solve(t: Trinomial, algorithm: str = "A", x0=None, max_iter: int = 500, tol=1e-12,
                   precision: int = DEFAULT_PRECISION) -> SolveResult:
    """Continued-root iteration for x^m + p x^n + q = 0.

    A: x <- ⁿ√(-q / (p + x^(m-n))) from x_0 = 0.
    B: x <- ^(m-n)√(-p - q / x^n) from x_0 = ∞, taken as x_1 = ^(m-n)√(-p).
    """
    algorithm = algorithm.upper()
    if algorithm not in ("A", "B"):
        raise ValueError("algorithm must be 'A' or 'B'")
    check_precision(precision)
    m, n = t.m, t.n_exp
    with mpmath.workprec(precision):
        p, q, tl = to_mp(t.p), to_mp(t.q), to_mp(tol)
        trace: list = []
        if algorithm == "A":
            def step(x):
                den = p + x ** (m - n)
                if den == 0:
                    raise DomainError("Algorithm A denominator p + x^(m-n) vanished")
                return real_root(-q / den, n)

            x = mpmath.mpf(0) if x0 is None else to_mp(x0)
        else:
            def step(x):
                if x == 0:
                    raise DomainError("Algorithm B needs x != 0")
                return real_root(-p - q / x**n, m - n)

            x = real_root(-p, m - n) if x0 is None else to_mp(x0)
        trace.append(+x)
        root, its = _iterate(step, x, max_iter, tl, precision, trace)
        res = t.value(root)
        if abs(res) > tl * t.scale() * max(1, abs(root) ** m):
            raise NoConvergence(f"iteration settled with residual {mpmath.nstr(res, 5)}", trace)
        bound = t.hoffmann_bound()
        return SolveResult(+root, its, +res, trace, bool(abs(root) <= bound), +bound)


@dataclass
class AstrandResult:
    c: Any
    root: Any
    nest_value: Any
    residual: Any
    iterations: int
    trace: list = field(default_factory=list)


def astrand_transform(n: int, a, b, sign: int = 1, seed=None, max_iter: int = 2000, tol=1e-15,
                      precision: int = DEFAULT_PRECISION) -> AstrandResult:
    """Solve x^n - a x + sign·b = 0 through y^n - y + sign·c = 0, x = y·a^(1/(n-1)).

    c = b / (a·a^(1/(n-1))) and y is the constant nest ⁿ√(-sign·c + ⁿ√(-sign·c + …)),
    iterated from seed 0 unless a starting x is supplied (converted to y units).
    Which root is reached depends on the seed: only roots where the map is
    contracting are attainable.
    """
    if int(n) != n or n < 2:
        raise ValueError("n must be an integer >= 2")
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    check_precision(precision)
    with mpmath.workprec(precision):
        a, b, tl = to_mp(a), to_mp(b), to_mp(tol)
        if not a > 0:
            raise DomainError("Åstrand's substitution needs a > 0")
        s = mpmath.root(a, n - 1)
        c = b / (a * s)
        addend = -sign * c
        y = mpmath.mpf(0) if seed is None else to_mp(seed) / s
        trace = [+y]
        # tolerance in x units; y = x / s
        y, its = _iterate(lambda v: real_root(addend + v, n), y, max_iter, tl / max(1, s), precision, trace)
        x = y * s
        res = x**n - a * x + sign * b
        scale = 1 + abs(a) + abs(b)
        if abs(res) > max(tl, mpmath.ldexp(1, -precision // 2)) * scale * max(1, abs(x) ** n):
            raise NoConvergence(f"nest settled with residual {mpmath.nstr(res, 5)}", trace)
        return AstrandResult(+c, +x, +y, +res, its, trace)


@dataclass
class FixedPointResult:
    root: Any
    trace: list
    derivative_at_root: Any
    approach: str  # "monotone", "oscillating" or "exact"
    iterations: int


def _numeric_derivative(f: Callable, x, precision: int):
    h = mpmath.ldexp(1, -(precision // 3)) * max(1, abs(x))
    return (f(x + h) - f(x - h)) / (2 * h)


def classify_approach(trace: list, root) -> str:
    """Monotone when the errors x_i - root keep one sign, oscillating when they alternate."""
    errs = [v - root for v in trace]
    nz = [e for e in errs if e != 0]
    if len(nz) < 2:
        return "exact"
    # Ignore the noise floor at the end of the trace.
    floor = max(abs(e) for e in nz) * mpmath.ldexp(1, -(mpmath.mp.prec // 2))
    signif = [e for e in nz if abs(e) > floor]
    if len(signif) < 2:
        return "exact"
    flips = sum(1 for u, v in zip(signif, signif[1:]) if (u > 0) != (v > 0))
    if flips == 0:
        return "monotone"
    if flips == len(signif) - 1:
        return "oscillating"
    return "mixed"


def iterate_fixed_point(f: Callable, x0, max_iter: int = 500, tol=1e-13, df: Optional[Callable] = None,
                        newton: bool = False, precision: int = DEFAULT_PRECISION) -> FixedPointResult:
    """Iterate x <- f(x), or in Newton mode x <- (f(x) - x f'(x)) / (1 - f'(x)).

    The returned root satisfies |f(root) - root| <= tol. derivative_at_root is
    f'(root), from df when supplied, otherwise a central difference.
    """
    check_precision(precision)
    if newton and df is None:
        raise DerivativeUnavailable("Newton mode needs the derivative f'")
    with mpmath.workprec(precision):
        tl = to_mp(tol)
        x = to_mp(x0)

        if newton:
            def step(v):
                d = df(v)
                if d == 1:
                    raise DomainError("f'(x) = 1 makes the Newton form singular")
                return (f(v) - v * d) / (1 - d)
        else:
            step = f

        trace = [+x]
        cut = mpmath.mpf(10) ** (precision // 8)
        for i in range(1, max_iter + 1):
            x = step(x)
            if not mpmath.isfinite(x) or abs(x) > cut:
                raise NoConvergence(f"iterate {i} left the range |x| <= 10^{precision // 8}", trace)
            trace.append(+x)
            if abs(f(x) - x) <= tl and abs(trace[-1] - trace[-2]) <= tl:
                break
        else:
            raise NoConvergence(f"no convergence within {max_iter} iterations", trace)
        deriv = df(x) if df is not None else _numeric_derivative(f, x, precision)
        return FixedPointResult(+x, trace, +deriv, classify_approach(trace[:-1], x), i)


def kepler_map(M, e):
    """E -> M + e·sin E, whose fixed point solves Kepler's equation."""
    M, e = to_mp(M), to_mp(e)
    return (lambda E: M + e * mpmath.sin(E)), (lambda E: e * mpmath.cos(E))


def bisect(g: Callable, lo, hi, tol=1e-30, max_iter: int = 400):
    """Plain bisection for a sign change of g on [lo, hi]."""
    lo, hi = to_mp(lo), to_mp(hi)
    glo, ghi = g(lo), g(hi)
    if glo == 0:
        return lo
    if ghi == 0:
        return hi
    if (glo > 0) == (ghi > 0):
        raise DomainError("bisection needs a sign change on the bracket")
    for _ in range(max_iter):
        mid = (lo + hi) / 2
        gm = g(mid)
        if gm == 0 or hi - lo <= tol:
            return mid
        if (gm > 0) == (glo > 0):
            lo, glo = mid, gm
        else:
            hi = mid
    return (lo + hi) / 2
