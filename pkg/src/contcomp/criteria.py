"""Convergence and divergence classifiers for term streams.

Every criterion works on a finite sample of N+1 terms and decides with the
tail half (indices N//2..N). Statistics near a threshold, within a relative
band of 1e-6, yield Inconclusive rather than a guess.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import mpmath

from .engine import DEFAULT_PRECISION, TermStream, check_precision, to_mp
from .errors import (
    ExponentOutOfRange,
    HypothesisNotCertified,
    NegativeTerm,
    NoFixedPointLocated,
)

BAND = mpmath.mpf("1e-6")
MIN_SAMPLE = 8


class Verdict(str, enum.Enum):
    CONVERGES = "Converges"
    DIVERGES = "Diverges"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ConvergenceReport:
    verdict: Verdict
    criterion: str
    statistic: Any
    sample_depth: int
    notes: str = ""
    details: dict = field(default_factory=dict)

    @property
    def decisive(self) -> bool:
        return self.verdict is not Verdict.INCONCLUSIVE


@dataclass(frozen=True)
class RegionSpec:
    """Sector parameters (theta, epsilon) of the complex-term region test."""

    theta: Any
    epsilon: Any

    def __post_init__(self):
        th, eps = to_mp(self.theta), to_mp(self.epsilon)
        if not (0 < th < mpmath.pi):
            raise ValueError("theta must lie in (0, pi)")
        if not eps > 0:
            raise ValueError("epsilon must be positive")
        if not eps < min(th, self.upper_gap()):
            raise ValueError("epsilon must be below min(theta, g(theta))")

    def upper_gap(self):
        """g(theta): pi - theta/2 up to 2pi/3, then 2(pi - theta)."""
        th = to_mp(self.theta)
        if th <= 2 * mpmath.pi / 3:
            return mpmath.pi - th / 2
        return 2 * (mpmath.pi - th)

    def contains(self, a) -> bool:
        a = mpmath.mpc(to_mp(a))
        if a == 0:
            return False
        arg = mpmath.arg(a)
        th, eps = to_mp(self.theta), to_mp(self.epsilon)
        return -th + eps < arg < self.upper_gap() - eps


@dataclass(frozen=True)
class MonotoneMap:
    """A map f for the generalized nest f(p_0 + f(p_1 + ...)).

    The caller certifies the analytic hypotheses: f increasing and
    f(a x) <= a^alpha f(x) for some 0 < alpha < 1.
    """

    f: Callable
    alpha: Optional[float] = None
    monotone: bool = False
    sublinear: bool = False
    description: str = ""


@dataclass(frozen=True)
class DifferentiableMap:
    """A real map with an optional analytic derivative."""

    f: Callable
    df: Optional[Callable] = None
    description: str = ""

    def derivative(self, x, precision: int):
        if self.df is not None:
            return to_mp(self.df(x))
        h = mpmath.ldexp(1, -(precision // 3)) * max(1, abs(x))
        return (to_mp(self.f(x + h)) - to_mp(self.f(x - h))) / (2 * h)


def _check_sample(N: int) -> None:
    if int(N) != N or N < MIN_SAMPLE:
        raise ValueError(f"sample depth N must be an integer >= {MIN_SAMPLE}, got {N!r}")


def _tail_start(N: int) -> int:
    return N // 2


def _envelope(stats: list) -> tuple[Verdict, Any]:
    """Bounded-envelope verdict on a statistic sampled at n = 0..N.

    Converges when the tail-half maximum does not exceed the head maximum
    (relative band). Diverges when every tail ratio exceeds 1+band and the
    growth rate is not slowing down. Otherwise Inconclusive.
    """
    N = len(stats) - 1
    k = _tail_start(N)
    head, tail = stats[:k], stats[k:]
    tail_max = max(tail)
    if tail_max <= max(head) * (1 + BAND):
        return Verdict.CONVERGES, tail_max
    ratios = [tail[i + 1] / tail[i] for i in range(len(tail) - 1) if tail[i] > 0]
    if len(ratios) == len(tail) - 1 and all(r > 1 + BAND for r in ratios):
        if ratios[-1] - 1 >= (ratios[0] - 1) * (1 - BAND):
            return Verdict.DIVERGES, tail_max
    return Verdict.INCONCLUSIVE, tail_max


def _three_way(stat, threshold, below: Verdict, above: Verdict) -> Verdict:
    """Compare against a positive threshold with a relative Inconclusive band."""
    if stat < threshold * (1 - BAND):
        return below
    if stat > threshold * (1 + BAND):
        return above
    return Verdict.INCONCLUSIVE


def _sqrt_log_addends(terms: TermStream, N: int) -> list:
    """log of the equivalent multiplier-free addends of a square-root nest, scaled by 2^-n.

    √(a_0 + b_0√(a_1 + …)) equals the plain nest with addends
    a'_n = a_n · Π_{k<n} b_k^(2^(n-k)); returns 2^-n·log a'_n (or -inf for 0).
    """
    out = []
    carry = mpmath.mpf(0)  # Σ_{k<n} 2^-k log b_k
    for n in range(N + 1):
        rec = terms(n)
        a, b = to_mp(rec.addend), to_mp(rec.multiplier)
        if a < 0 or rec.sign < 0:
            raise NegativeTerm(f"term {n} is negative; the criterion needs nonnegative terms")
        if not b > 0:
            raise NegativeTerm(f"multiplier {n} must be positive")
        out.append(-mpmath.inf if a == 0 else mpmath.ldexp(mpmath.log(a), -n) + carry)
        carry += mpmath.ldexp(mpmath.log(b), -n)
    return out


def herschfeld_vijayaraghavan(terms: TermStream, N: int = 60, precision: int = DEFAULT_PRECISION) -> ConvergenceReport:
    """Square-root nest converges iff limsup a_n^(2^-n) is finite."""
    _check_sample(N)
    check_precision(precision)
    with mpmath.workprec(precision):
        logs = _sqrt_log_addends(terms, N)
        stats = [max(mpmath.exp(v), mpmath.mpf(1)) for v in logs]
        verdict, stat = _envelope(stats)
        return ConvergenceReport(verdict, "herschfeld", +stat, N,
                                 "statistic = tail max of max(a_n^(2^-n), 1)")


def _loglog_over_n(terms: TermStream, N: int):
    logs = _sqrt_log_addends(terms, N)
    vals = {}
    for n in range(_tail_start(N), N + 1):
        # log log a'_n with log a'_n = 2^n · logs[n]
        if logs[n] == -mpmath.inf:
            continue
        la = mpmath.ldexp(logs[n], n)
        if la > 0:
            vals[n] = mpmath.log(la) / (n + 1)
    return vals


def polya_loglog(terms: TermStream, N: int = 60, precision: int = DEFAULT_PRECISION) -> ConvergenceReport:
    """Compare the tail max of (log log a_n)/n against log 2; terms <= 1 are skipped."""
    _check_sample(N)
    check_precision(precision)
    with mpmath.workprec(precision):
        vals = _loglog_over_n(terms, N)
        if not vals:
            return ConvergenceReport(Verdict.CONVERGES, "polya", -mpmath.inf, N,
                                     "no tail term exceeds 1")
        stat = max(vals.values())
        verdict = _three_way(stat, mpmath.log(2), Verdict.CONVERGES, Verdict.DIVERGES)
        return ConvergenceReport(verdict, "polya", +stat, N, "threshold log 2")


def polya_szego_series_test(terms: TermStream, N: int = 60, tolerance=1e-9,
                            precision: int = DEFAULT_PRECISION) -> ConvergenceReport:
    """Sufficient test: Σ 2^-n a_n (a_1⋯a_n)^(-1/2) converges.

    Term n of the series uses stream index n-1. Converges when the tail-half
    mass of the partial sums is below tolerance relative to the sum; never
    returns Diverges.
    """
    _check_sample(N)
    check_precision(precision)
    with mpmath.workprec(precision):
        tol = to_mp(tolerance)
        logs = _sqrt_log_addends(terms, N - 1)
        if any(v == -mpmath.inf for v in logs):
            return ConvergenceReport(Verdict.INCONCLUSIVE, "polya-szego-series", mpmath.inf, N,
                                     "zero addend: series undefined")
        log2 = mpmath.log(2)
        summands = []
        cum = mpmath.mpf(0)
        for n in range(1, N + 1):
            la = mpmath.ldexp(logs[n - 1], n - 1)
            cum += la
            summands.append(mpmath.exp(-n * log2 + la - cum / 2))
        total = mpmath.fsum(summands)
        tail = mpmath.fsum(summands[_tail_start(N):])
        verdict = Verdict.CONVERGES if tail <= tol * max(1, total) else Verdict.INCONCLUSIVE
        return ConvergenceReport(verdict, "polya-szego-series", +tail, N,
                                 "statistic = tail-half mass of the series (sufficient test only)",
                                 {"partial_sum": +total})


def herschfeld_theorem3(terms: TermStream, N: int = 60, precision: int = DEFAULT_PRECISION) -> ConvergenceReport:
    """Nest of r_n-th roots (exponent r_n in (0,1]): limsup a_n^(r_1⋯r_n) finite iff convergent.

    Applicable once Σ r_1⋯r_n converges; that series is tested first.
    """
    _check_sample(N)
    check_precision(precision)
    with mpmath.workprec(precision):
        recs = terms.records(N + 1)
        exps = []
        for rec in recs:
            e = mpmath.mpf(1) / 2 if rec.exponent is None else to_mp(rec.exponent)
            if not (0 < e <= 1):
                raise ExponentOutOfRange(f"exponent {e} at term {rec.index} outside (0,1]")
            if to_mp(rec.addend) < 0 or rec.sign < 0:
                raise NegativeTerm(f"term {rec.index} is negative")
            if to_mp(rec.multiplier) != 1:
                raise ValueError("multipliers are not supported by this criterion")
            exps.append(e)
        products = []
        P = mpmath.mpf(1)
        for n in range(N + 1):
            if n > 0:
                P *= exps[n]
            products.append(P)
        series_tail = mpmath.fsum(products[_tail_start(N):])
        if series_tail > BAND:
            return ConvergenceReport(Verdict.INCONCLUSIVE, "herschfeld-theorem3", +series_tail, N,
                                     "product series of exponents not shown convergent",
                                     {"product_series_tail": +series_tail})
        stats = []
        for n, rec in enumerate(recs):
            a = to_mp(rec.addend)
            s = mpmath.mpf(0) if a == 0 else mpmath.exp(products[n] * mpmath.log(a))
            stats.append(max(s, mpmath.mpf(1)))
        verdict, stat = _envelope(stats)
        notes = "exponent product series converges"
        if verdict is Verdict.DIVERGES:
            notes += "; divergence per stated theorem (necessity unproved in the source)"
        return ConvergenceReport(verdict, "herschfeld-theorem3", +stat, N, notes,
                                 {"product_series_tail": +series_tail})


def _root_index(rec) -> int:
    if rec.exponent is None:
        return 2
    e = to_mp(rec.exponent)
    if not e > 0:
        raise ExponentOutOfRange(f"exponent {e} at term {rec.index} is not positive")
    r = int(mpmath.nint(1 / e))
    if r < 2 or abs(1 / e - r) > mpmath.mpf("1e-9"):
        raise ExponentOutOfRange(f"term {rec.index}: root index must be an integer > 1")
    return r


def andrushkiw(terms: TermStream, N: int = 60, precision: int = DEFAULT_PRECISION) -> ConvergenceReport:
    """Nest of integer r_n-th roots: converges if alpha < log r, diverges if alpha > log R.

    alpha = tail max of (log log a_n)/n over terms a_n > 1; r, R are the
    smallest and largest root indices in the tail.
    """
    _check_sample(N)
    check_precision(precision)
    with mpmath.workprec(precision):
        recs = terms.records(N + 1)
        indices = [_root_index(rec) for rec in recs]
        addends = [to_mp(rec.addend) for rec in recs]
        if any(a < 0 or rec.sign < 0 for a, rec in zip(addends, recs)):
            raise NegativeTerm("criterion needs nonnegative terms")
        k = _tail_start(N)
        r_lo, r_hi = min(indices[k:]), max(indices[k:])
        details = {"r": r_lo, "R": r_hi}
        if all(a <= 1 for a in addends):
            return ConvergenceReport(Verdict.CONVERGES, "andrushkiw", -mpmath.inf, N,
                                     "all sampled terms lie in [0,1]", details)
        vals = [mpmath.log(mpmath.log(addends[n])) / (n + 1) for n in range(k, N + 1) if addends[n] > 1]
        if not vals:
            return ConvergenceReport(Verdict.CONVERGES, "andrushkiw", -mpmath.inf, N,
                                     "tail terms lie in [0,1]", details)
        alpha = max(vals)
        if alpha < mpmath.log(r_lo) * (1 - BAND):
            verdict = Verdict.CONVERGES
        elif alpha > mpmath.log(r_hi) * (1 + BAND):
            verdict = Verdict.DIVERGES
        else:
            verdict = Verdict.INCONCLUSIVE
        return ConvergenceReport(verdict, "andrushkiw", +alpha, N, "alpha vs [log r, log R]", details)


def jones_power_radius(p, precision: int = DEFAULT_PRECISION):
    """R = ((p-1)^(p-1) / p^p)^(1/(p-1)), the largest constant term of a convergent continued p-th power."""
    check_precision(precision)
    with mpmath.workprec(precision):
        p = to_mp(p)
        if not p > 1:
            raise ValueError("p must exceed 1")
        return +(((p - 1) ** (p - 1) / p**p) ** (1 / (p - 1)))


def jones_power_tests(terms: TermStream, p, N: int = 60, precision: int = DEFAULT_PRECISION) -> ConvergenceReport:
    """Three tests for the continued p-th power a_0 + (a_1 + …)^p, first decisive wins.

    1. limsup a_i < R converges, liminf a_i > R diverges.
    2. a_{i+1}^p / a_i <= (p-1)^(p-1)/p^p for all tail i converges.
    3. (a_n/R)^(p^n) bounded converges.
    """
    _check_sample(N)
    check_precision(precision)
    with mpmath.workprec(precision):
        p = to_mp(p)
        R = jones_power_radius(p, precision)
        recs = terms.records(N + 1)
        a = [to_mp(rec.addend) for rec in recs]
        if any(x < 0 for x in a) or any(rec.sign < 0 for rec in recs):
            raise NegativeTerm("continued power tests need nonnegative terms")
        if any(to_mp(rec.multiplier) != 1 for rec in recs):
            raise ValueError("multipliers are not supported by these tests")
        k = _tail_start(N)
        tail = a[k:]
        hi, lo = max(tail), min(tail)
        details = {"R": R}
        if hi < R * (1 - BAND):
            return ConvergenceReport(Verdict.CONVERGES, "jones-limsup", +hi, N, "tail max below R", details)
        if lo > R * (1 + BAND):
            return ConvergenceReport(Verdict.DIVERGES, "jones-liminf", +lo, N, "tail min above R", details)
        threshold = (p - 1) ** (p - 1) / p**p
        if all(x > 0 for x in a[k:]):
            ratios = [a[i + 1] ** p / a[i] for i in range(k, N)]
            worst = max(ratios)
            if worst < threshold * (1 - BAND):
                return ConvergenceReport(Verdict.CONVERGES, "jones-ratio", +worst, N,
                                         "ratio a_(i+1)^p / a_i below (p-1)^(p-1)/p^p", details)
        stats = []
        for n, x in enumerate(a):
            s = mpmath.mpf(0) if x == 0 else mpmath.exp(p**n * mpmath.log(x / R))
            stats.append(max(s, mpmath.mpf(1)))
        verdict, stat = _envelope(stats)
        if verdict is Verdict.CONVERGES:
            return ConvergenceReport(verdict, "jones-boundedness", +stat, N,
                                     "(a_n/R)^(p^n) bounded", details)
        return ConvergenceReport(Verdict.INCONCLUSIVE, "jones-boundedness", +stat, N,
                                 "no test decisive", details)


def jones_reciprocal_root(terms: TermStream, r, N: int = 60, precision: int = DEFAULT_PRECISION) -> ConvergenceReport:
    """a_0 + 1/(a_1 + 1/(…)^(1/r))^(1/r) diverges iff limsup a_i^(p^i) < 1 with p = 1/r."""
    _check_sample(N)
    check_precision(precision)
    with mpmath.workprec(precision):
        r = to_mp(r)
        if not r > 1:
            raise ValueError("r must exceed 1")
        p = 1 / r
        stats = []
        for i in range(_tail_start(N), N + 1):
            a = to_mp(terms(i).addend)
            if not a > 0:
                raise NegativeTerm(f"term {i} must be positive")
            stats.append(mpmath.exp(p**i * mpmath.log(a)))
        stat = max(stats)
        if stat >= 1:
            verdict = Verdict.CONVERGES
        elif stat < 1 - BAND:
            verdict = Verdict.DIVERGES
        else:
            verdict = Verdict.INCONCLUSIVE
        return ConvergenceReport(verdict, "jones-reciprocal-root", +stat, N, "statistic = tail max a_i^(p^i)")


def laugwitz_general(fmap: MonotoneMap, terms: TermStream, N: int = 60,
                     precision: int = DEFAULT_PRECISION) -> ConvergenceReport:
    """Nest f(p_0 + f(p_1 + …)) converges iff limsup f^n(p_n) is finite, for certified f."""
    if not (fmap.monotone and fmap.sublinear):
        raise HypothesisNotCertified("map must be certified monotone and sublinear")
    if fmap.alpha is not None and not (0 < fmap.alpha < 1):
        raise HypothesisNotCertified("sublinearity exponent must lie in (0,1)")
    _check_sample(N)
    check_precision(precision)
    with mpmath.workprec(precision):
        stats = []
        for n in range(N + 1):
            v = to_mp(terms(n).addend)
            if v < 0:
                raise NegativeTerm(f"term {n} is negative")
            for _ in range(n):
                v = to_mp(fmap.f(v))
            stats.append(max(v, mpmath.mpf(1)))
        verdict, stat = _envelope(stats)
        return ConvergenceReport(verdict, "laugwitz", +stat, N, "statistic = tail max of f^n(p_n)")


def schuske_thron_region(region: RegionSpec, terms: TermStream, N: int = 60,
                         precision: int = DEFAULT_PRECISION) -> ConvergenceReport:
    """Complex-term square-root nest: sector membership plus bounded |a_n|^(2^-n)."""
    _check_sample(N)
    check_precision(precision)
    with mpmath.workprec(precision):
        stats = []
        for n in range(N + 1):
            a = to_mp(terms(n).addend)
            if not region.contains(a):
                return ConvergenceReport(Verdict.INCONCLUSIVE, "schuske-thron", mpmath.mpf(n), N,
                                         f"term {n} lies outside the region", {"failed_index": n})
            stats.append(max(mpmath.exp(mpmath.ldexp(mpmath.log(abs(a)), -n)), mpmath.mpf(1)))
        verdict, stat = _envelope(stats)
        if verdict is not Verdict.CONVERGES:
            verdict = Verdict.INCONCLUSIVE  # sufficient condition only
        return ConvergenceReport(verdict, "schuske-thron", +stat, N,
                                 "all sampled terms in region; statistic = tail max |a_n|^(2^-n)")


def isenkrahe_fixed_point(fmap: DifferentiableMap, fixed_point_guess, precision: int = DEFAULT_PRECISION,
                          max_iter: int = 200) -> ConvergenceReport:
    """Locate a fixed point and classify it by |f'(xi)|.

    The root is refined with the Newton-form map (f(x) - x f'(x)) / (1 - f'(x)),
    which converges to repelling fixed points as well. |f'| < 1 means
    iteration converges there, monotonically if f' > 0 and oscillating if f' < 0.
    """
    check_precision(precision)
    with mpmath.workprec(precision + 32):
        x = to_mp(fixed_point_guess)
        eps = mpmath.ldexp(1, -precision + 8)
        for _ in range(max_iter):
            fx = to_mp(fmap.f(x))
            d = fmap.derivative(x, precision)
            if d == 1:
                raise NoFixedPointLocated("derivative equals 1; Newton step undefined")
            nxt = (fx - x * d) / (1 - d)
            if abs(nxt - x) <= eps * max(1, abs(x)):
                x = nxt
                break
            x = nxt
        else:
            raise NoFixedPointLocated(f"no fixed point located from {fixed_point_guess} in {max_iter} steps")
        if abs(to_mp(fmap.f(x)) - x) > mpmath.ldexp(1, -precision // 2) * max(1, abs(x)):
            raise NoFixedPointLocated("refinement stalled away from a fixed point")
        d = fmap.derivative(x, precision)
        slope = abs(d)
        verdict = _three_way(slope, mpmath.mpf(1), Verdict.CONVERGES, Verdict.DIVERGES)
        approach = "monotone" if d > 0 else ("oscillating" if d < 0 else "superattracting")
    with mpmath.workprec(precision):
        return ConvergenceReport(verdict, "isenkrahe", +slope, 0, f"approach {approach}",
                                 {"fixed_point": +x, "derivative": +d, "approach": approach})


CRITERIA = {
    "herschfeld": herschfeld_vijayaraghavan,
    "polya": polya_loglog,
    "polya-szego-series": polya_szego_series_test,
    "herschfeld-theorem3": herschfeld_theorem3,
    "andrushkiw": andrushkiw,
}
