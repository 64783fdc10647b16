"""Core types and backward/forward evaluation of continued compositions.

A continued composition is t_0∘t_1∘…∘t_n(c) for a family of maps t_i built
from indexed term records. Evaluation happens in mpmath at a caller-chosen
binary precision; domain exits raise instead of producing NaN.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence

import mpmath
from mpmath import mp

from .errors import DomainError, EvaluationOverflow, ExponentOutOfRange, NoConvergence

DEFAULT_PRECISION = 128
MIN_PRECISION = 53
# Magnitudes above 2**MAX_LOG2_MAGNITUDE count as overflow.
MAX_LOG2_MAGNITUDE = 2**32

INF = mpmath.inf


def check_precision(precision: int) -> int:
    if int(precision) != precision or precision < MIN_PRECISION:
        raise ValueError(f"precision must be an integer >= {MIN_PRECISION}, got {precision!r}")
    return int(precision)


def to_mp(value: Any):
    """Convert ints, floats, decimal strings, fractions and complex values to mpmath numbers."""
    if isinstance(value, (mpmath.mpf, mpmath.mpc)):
        return value
    if isinstance(value, complex):
        return mpmath.mpc(value.real, value.imag)
    if hasattr(value, "numerator") and hasattr(value, "denominator") and not isinstance(value, (int, float)):
        return mpmath.mpf(value.numerator) / value.denominator
    return mpmath.mpmathify(value)


def is_complex(value: Any) -> bool:
    return isinstance(value, (complex, mpmath.mpc))


class Family(str, enum.Enum):
    SQUARE_ROOT = "sqrt"
    RTH_ROOT = "root"
    POWER = "power"
    RECIPROCAL_ROOT = "recip-root"
    COTANGENT = "cot"
    LOGARITHM = "log"
    FRACTION = "fraction"


ROOT_FAMILIES = (Family.SQUARE_ROOT, Family.RTH_ROOT)
INFINITE_SEED_FAMILIES = (Family.RECIPROCAL_ROOT, Family.FRACTION, Family.COTANGENT)


@dataclass(frozen=True)
class CompositionKind:
    """Map family plus its parameter (root index r, power p or logarithm base)."""

    family: Family
    parameter: Optional[float] = None

    def __post_init__(self):
        fam = Family(self.family)
        object.__setattr__(self, "family", fam)
        needs = {
            Family.RTH_ROOT: "r",
            Family.POWER: "p",
            Family.RECIPROCAL_ROOT: "r",
            Family.LOGARITHM: "base",
        }
        if fam in needs:
            if self.parameter is None or not to_mp(self.parameter) > 1:
                raise ValueError(f"{fam.value} requires {needs[fam]} > 1, got {self.parameter!r}")
        elif self.parameter is not None:
            raise ValueError(f"{fam.value} takes no parameter")

    @classmethod
    def square_root(cls) -> CompositionKind:
        return cls(Family.SQUARE_ROOT)

    @classmethod
    def rth_root(cls, r) -> CompositionKind:
        return cls(Family.RTH_ROOT, r)

    @classmethod
    def power(cls, p) -> CompositionKind:
        return cls(Family.POWER, p)

    @classmethod
    def reciprocal_root(cls, r) -> CompositionKind:
        return cls(Family.RECIPROCAL_ROOT, r)

    @classmethod
    def cotangent(cls) -> CompositionKind:
        return cls(Family.COTANGENT)

    @classmethod
    def logarithm(cls, base) -> CompositionKind:
        return cls(Family.LOGARITHM, base)

    @classmethod
    def fraction(cls) -> CompositionKind:
        return cls(Family.FRACTION)

    def default_exponent(self):
        """Exponent used when a term record does not override it (None if unused)."""
        fam = self.family
        if fam is Family.SQUARE_ROOT:
            return mpmath.mpf(1) / 2
        if fam in (Family.RTH_ROOT, Family.RECIPROCAL_ROOT):
            return 1 / to_mp(self.parameter)
        if fam is Family.POWER:
            return to_mp(self.parameter)
        return None

    def default_seed(self):
        if self.family in INFINITE_SEED_FAMILIES:
            return INF
        if self.family is Family.LOGARITHM:
            return mpmath.mpf(1)
        return mpmath.mpf(0)


@dataclass(frozen=True)
class TermRecord:
    """One term t_i: addend a_i, multiplier b_i, sign ε_i and optional exponent override."""

    index: int
    addend: Any
    multiplier: Any = 1
    sign: int = 1
    exponent: Any = None

    def __post_init__(self):
        if int(self.index) != self.index or self.index < 0:
            raise ValueError(f"term index must be a nonnegative integer, got {self.index!r}")
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
        for name in ("addend", "multiplier"):
            v = to_mp(getattr(self, name))
            if not mpmath.isfinite(v):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)!r}")


def _validate_exponent(kind: CompositionKind, e) -> None:
    fam = kind.family
    if fam in ROOT_FAMILIES and not (0 < e <= 1):
        raise ExponentOutOfRange(f"root exponent must lie in (0,1], got {e}")
    if fam is Family.RECIPROCAL_ROOT and not (0 < e < 1):
        raise ExponentOutOfRange(f"reciprocal-root exponent must lie in (0,1), got {e}")
    if fam is Family.POWER and not e >= 1:
        raise ExponentOutOfRange(f"power exponent must be >= 1, got {e}")


@dataclass(frozen=True)
class TermStream:
    """Deterministic index -> TermRecord source, optionally periodic."""

    generator: Callable[[int], TermRecord]
    period: Optional[int] = None
    description: str = ""

    def __post_init__(self):
        if self.period is not None and (int(self.period) != self.period or self.period < 1):
            raise ValueError(f"period must be a positive integer, got {self.period!r}")

    def __call__(self, index: int) -> TermRecord:
        rec = self.generator(index)
        if rec.index != index:
            raise ValueError(f"generator returned index {rec.index} for request {index}")
        return rec

    def records(self, count: int) -> list[TermRecord]:
        return [self(i) for i in range(count)]

    def shift(self, offset: int) -> TermStream:
        """Stream whose term i is this stream's term i + offset."""

        def gen(i: int) -> TermRecord:
            rec = self(i + offset)
            return TermRecord(i, rec.addend, rec.multiplier, rec.sign, rec.exponent)

        return TermStream(gen, self.period, f"{self.description} shifted by {offset}")

    @classmethod
    def from_functions(
        cls,
        addend: Callable[[int], Any],
        multiplier: Optional[Callable[[int], Any]] = None,
        sign: Optional[Callable[[int], int]] = None,
        exponent: Optional[Callable[[int], Any]] = None,
        period: Optional[int] = None,
        description: str = "",
    ) -> TermStream:
        def gen(i: int) -> TermRecord:
            return TermRecord(
                i,
                addend(i),
                1 if multiplier is None else multiplier(i),
                1 if sign is None else sign(i),
                None if exponent is None else exponent(i),
            )

        return cls(gen, period, description)

    @classmethod
    def constant(cls, addend, multiplier=1, sign=1, exponent=None) -> TermStream:
        return cls(
            lambda i: TermRecord(i, addend, multiplier, sign, exponent),
            1,
            f"constant a={addend}",
        )

    @classmethod
    def arithmetic(cls, start, step, multiplier=1) -> TermStream:
        return cls.from_functions(
            lambda i: to_mp(start) + i * to_mp(step),
            lambda i: multiplier,
            description=f"arithmetic start={start} step={step}",
        )

    @classmethod
    def from_list(
        cls,
        addends: Sequence[Any],
        multipliers: Optional[Sequence[Any]] = None,
        signs: Optional[Sequence[int]] = None,
        exponents: Optional[Sequence[Any]] = None,
        cyclic: bool = False,
    ) -> TermStream:
        """Finite list of terms; with cyclic=True the list repeats with period len(addends)."""
        n = len(addends)
        if n == 0:
            raise ValueError("empty term list")
        for seq in (multipliers, signs, exponents):
            if seq is not None and len(seq) != n:
                raise ValueError("parallel term lists must have equal length")

        def gen(i: int) -> TermRecord:
            j = i % n if cyclic else i
            if j >= n:
                raise IndexError(f"term list exhausted at index {i} (length {n})")
            return TermRecord(
                i,
                addends[j],
                1 if multipliers is None else multipliers[j],
                1 if signs is None else signs[j],
                None if exponents is None else exponents[j],
            )

        return cls(gen, n if cyclic else None, f"list of {n} terms")

    @classmethod
    def with_signs(cls, signs: Callable[[int], int], addend=2, multiplier=1, period=None) -> TermStream:
        return cls.from_functions(
            lambda i: addend, lambda i: multiplier, signs, period=period,
            description=f"signed nest of {addend}",
        )


@dataclass(frozen=True)
class EvalRequest:
    kind: CompositionKind
    terms: TermStream
    depth: int
    seed: Any = None
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        if int(self.depth) != self.depth or self.depth < 0:
            raise ValueError(f"depth must be a nonnegative integer, got {self.depth!r}")
        check_precision(self.precision)

    def resolved_seed(self):
        return self.kind.default_seed() if self.seed is None else to_mp(self.seed)


@dataclass
class ApproximantTrace:
    """Approximants by depth; deltas[d] = |values[d] - values[d-1]| with deltas[0] = None."""

    values: list = field(default_factory=list)
    deltas: list = field(default_factory=list)
    converged_at: Optional[int] = None
    tolerance_used: Any = None
    seed: Any = None
    direction: str = "backward"

    def append(self, value) -> None:
        self.deltas.append(None if not self.values else abs(value - self.values[-1]))
        self.values.append(value)


def _guard(value):
    if isinstance(value, mpmath.mpc):
        if not (mpmath.isfinite(value.real) and mpmath.isfinite(value.imag)):
            raise EvaluationOverflow("intermediate value is not finite")
        mag = mpmath.mag(abs(value)) if value != 0 else 0
    else:
        if mpmath.isnan(value):
            raise DomainError("intermediate value is undefined")
        if mpmath.isinf(value):
            raise EvaluationOverflow("intermediate value is infinite")
        mag = mpmath.mag(value) if value != 0 else 0
    if mag > MAX_LOG2_MAGNITUDE:
        raise EvaluationOverflow(f"intermediate magnitude about 2^{mag} exceeds range")
    return value


def apply_term(kind: CompositionKind, rec: TermRecord, x):
    """Evaluate t_i(x) for one term record at the current mpmath precision."""
    fam = kind.family
    a = to_mp(rec.addend)
    b = to_mp(rec.multiplier)
    s = rec.sign
    x_inf = not isinstance(x, mpmath.mpc) and mpmath.isinf(x)

    if fam in ROOT_FAMILIES:
        e = kind.default_exponent() if rec.exponent is None else to_mp(rec.exponent)
        _validate_exponent(kind, e)
        if x_inf:
            raise EvaluationOverflow("root map applied to an infinite seed")
        rad = a + b * x
        if isinstance(rad, mpmath.mpc):
            if fam is not Family.SQUARE_ROOT or e != mpmath.mpf(1) / 2:
                raise DomainError("complex radicands are only defined for square roots")
            val = mpmath.sqrt(rad)  # principal branch: Re >= 0, i·√|r| on the negative axis
        else:
            if rad < 0:
                raise DomainError(f"negative radicand {mpmath.nstr(rad, 8)} at term {rec.index}")
            val = mpmath.sqrt(rad) if e == mpmath.mpf(1) / 2 else (rad**e if rad != 0 else mpmath.mpf(0))
        return _guard(s * val)

    if fam is Family.POWER:
        e = kind.default_exponent() if rec.exponent is None else to_mp(rec.exponent)
        _validate_exponent(kind, e)
        if x_inf:
            raise EvaluationOverflow("power map applied to an infinite seed")
        if x < 0 and e != int(e):
            raise DomainError(f"negative base {mpmath.nstr(x, 8)} with non-integer power {e}")
        return _guard(a + s * b * x**e)

    if fam is Family.RECIPROCAL_ROOT:
        e = kind.default_exponent() if rec.exponent is None else to_mp(rec.exponent)
        _validate_exponent(kind, e)
        if x_inf:
            return _guard(a)
        if x <= 0:
            raise DomainError(f"reciprocal root of nonpositive value at term {rec.index}")
        return _guard(a + s * b * x ** (-e))

    if fam is Family.FRACTION:
        if x_inf:
            return _guard(a)
        if x == 0:
            raise DomainError(f"division by zero at term {rec.index}")
        return _guard(a + s * b / x)

    if fam is Family.COTANGENT:
        if x_inf:
            return _guard(a)
        if x == a:
            raise DomainError(f"cotangent map pole x = a = {mpmath.nstr(a, 8)} at term {rec.index}")
        return _guard((a * x + 1) / (x - a))

    if fam is Family.LOGARITHM:
        if x_inf or x <= 0:
            raise DomainError(f"logarithm of nonpositive or infinite value at term {rec.index}")
        return _guard(a + s * b * mpmath.log(x, to_mp(kind.parameter)))

    raise ValueError(f"unknown family {fam!r}")


def _backward(kind: CompositionKind, terms: TermStream, depth: int, seed):
    v = seed
    for i in range(depth, -1, -1):
        v = apply_term(kind, terms(i), v)
    return v


def _forward(kind: CompositionKind, terms: TermStream, depth: int, seed):
    v = seed
    for i in range(depth + 1):
        v = apply_term(kind, terms(i), v)
    return v


def eval_backward(req: EvalRequest):
    """t_0∘t_1∘…∘t_depth(seed), evaluated right to left."""
    with mpmath.workprec(req.precision):
        return +_backward(req.kind, req.terms, req.depth, req.resolved_seed())


def eval_forward(req: EvalRequest):
    """t_depth∘…∘t_1∘t_0(seed), the forward recurrence u_n = t_n(u_{n-1})."""
    with mpmath.workprec(req.precision):
        return +_forward(req.kind, req.terms, req.depth, req.resolved_seed())


def estimate_limit(
    req: EvalRequest,
    tolerance=1e-12,
    max_depth: int = 64,
    direction: str = "backward",
):
    """Deepen until two consecutive deltas are within tolerance.

    Backward approximants are recomputed from scratch at every depth, except
    for period-1 streams where all maps coincide and the forward recurrence
    gives the same numbers. Returns (value, trace); raises NoConvergence with
    the trace attached when max_depth is exhausted or the values blow up.
    """
    if direction not in ("backward", "forward"):
        raise ValueError(f"direction must be 'backward' or 'forward', got {direction!r}")
    if max_depth < 2:
        raise ValueError("max_depth must be at least 2")
    with mpmath.workprec(req.precision):
        tol = to_mp(tolerance)
        if not tol > 0:
            raise ValueError("tolerance must be positive")
        seed = req.resolved_seed()
        trace = ApproximantTrace(tolerance_used=tol, seed=seed, direction=direction)
        incremental = direction == "forward" or req.terms.period == 1
        v = seed
        try:
            for d in range(max_depth + 1):
                if incremental:
                    v = apply_term(req.kind, req.terms(d), v)
                else:
                    v = _backward(req.kind, req.terms, d, seed)
                trace.append(+v)
                if d >= 2 and trace.deltas[d] <= tol and trace.deltas[d - 1] <= tol:
                    trace.converged_at = d
                    return trace.values[-1], trace
        except EvaluationOverflow as exc:
            raise NoConvergence(f"approximants diverged at depth {len(trace.values)}: {exc}", trace) from exc
        raise NoConvergence(
            f"no convergence within depth {max_depth} (last delta {mpmath.nstr(trace.deltas[-1], 5)})",
            trace,
        )


def closed_form_constant_sqrt(a, precision: int = DEFAULT_PRECISION):
    """Limit (1 + √(1+4a))/2 of the constant nest √(a + √(a + …)).

    Complex a uses the principal square root; a real a < -1/4 yields the
    value on the positive imaginary branch.
    """
    check_precision(precision)
    with mpmath.workprec(precision):
        a = to_mp(a)
        if not mpmath.isfinite(a):
            raise DomainError("addend must be finite")
        disc = 1 + 4 * a
        if not isinstance(disc, mpmath.mpc) and disc < 0:
            disc = mpmath.mpc(disc, 0)
        return +((1 + mpmath.sqrt(disc)) / 2)
