"""Continued square roots: closed forms, sign codecs, digit systems and an identity corpus."""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Sequence

import mpmath

from .engine import (
    DEFAULT_PRECISION,
    CompositionKind,
    EvalRequest,
    Family,
    TermStream,
    check_precision,
    eval_backward,
    eval_forward,
    to_mp,
)
from . import products
from .errors import DomainError
from .specs import evaluate, parse_params, parse_terms

SQRT = CompositionKind.square_root()


@dataclass(frozen=True)
class SignSequence:
    """Signs ε_0, ε_1, … with an optional (preperiod, period) rule extending them."""

    signs: tuple
    periodic_tail: Optional[tuple] = None

    def __post_init__(self):
        object.__setattr__(self, "signs", tuple(self.signs))
        if not self.signs:
            raise ValueError("sign sequence must be nonempty")
        if any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +1 or -1")
        if self.periodic_tail is not None:
            pre, per = self.periodic_tail
            if per < 1 or pre < 0 or pre + per > len(self.signs):
                raise ValueError("periodic tail must fit inside the listed signs")
            object.__setattr__(self, "periodic_tail", (int(pre), int(per)))

    @classmethod
    def periodic(cls, pre: Sequence[int], period: Sequence[int]) -> SignSequence:
        return cls(tuple(pre) + tuple(period), (len(pre), len(period)))

    def __getitem__(self, i: int) -> int:
        if i < len(self.signs):
            return self.signs[i]
        if self.periodic_tail is None:
            raise IndexError(f"sign {i} not defined (only {len(self.signs)} listed, no periodic tail)")
        pre, per = self.periodic_tail
        return self.signs[pre + (i - pre) % per]

    def prefix(self, count: int) -> list[int]:
        return [self[i] for i in range(count)]

    def to_text(self) -> str:
        return "".join("+" if s > 0 else "-" for s in self.signs)


@dataclass(frozen=True)
class SignNestValue:
    direct: Any
    series: Any

    @property
    def discrepancy(self):
        return abs(self.direct - self.series)


@dataclass(frozen=True)
class SizerDigits:
    head: int
    tail: tuple
    residual: Any

    def __post_init__(self):
        object.__setattr__(self, "tail", tuple(self.tail))
        if self.head < 0:
            raise ValueError("head digit must be nonnegative")
        if any(d not in (0, 1, 2) for d in self.tail):
            raise ValueError("tail digits must be 0, 1 or 2")


def nyblom_closed_form(x, k: int, variant: str = "plus", precision: int = DEFAULT_PRECISION):
    """Closed forms φ^(1/2^k) ± φ^(-1/2^k), φ = (x + √(x²-4))/2.

    plus:  √(2 + √(2 + … + √(2 + x)))   with k roots
    minus: √(√(2 + … + √(2 + x)) - 2)  with k roots
    """
    check_precision(precision)
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    if variant not in ("plus", "minus"):
        raise ValueError("variant must be 'plus' or 'minus'")
    with mpmath.workprec(precision + 16):
        x = to_mp(x)
        if x < 2:
            raise DomainError("closed form needs x >= 2")
        phi = (x + mpmath.sqrt(x * x - 4)) / 2
        # φ^(1/2^k) via repeated square roots keeps the exponent exact.
        u = phi
        for _ in range(k):
            u = mpmath.sqrt(u)
        val = u + 1 / u if variant == "plus" else u - 1 / u
    with mpmath.workprec(precision):
        return +val


def nyblom_nest(x, k: int, variant: str = "plus", precision: int = DEFAULT_PRECISION):
    """Direct evaluation of the finite nest matching nyblom_closed_form."""
    addend = -2 if variant == "minus" else 2
    terms = TermStream.from_functions(lambda i: addend if i == 0 else 2)
    return eval_backward(EvalRequest(SQRT, terms, k - 1, seed=x, precision=precision))


def sign_nest_value(signs: SignSequence, depth: int, precision: int = DEFAULT_PRECISION) -> SignNestValue:
    """ε_0√(2 + ε_1√(2 + … + ε_depth√2)) evaluated directly and via 2 sin(π/4 · Σ ε_0⋯ε_j / 2^j)."""
    check_precision(precision)
    eps = signs.prefix(depth + 1)
    terms = TermStream.from_functions(lambda i: 2, sign=lambda i: eps[i])
    direct = eval_backward(EvalRequest(SQRT, terms, depth, precision=precision))
    with mpmath.workprec(precision):
        total = mpmath.mpf(0)
        prod = 1
        for j, s in enumerate(eps):
            prod *= s
            total += mpmath.ldexp(prod, -j)
        series = 2 * mpmath.sin(mpmath.pi / 4 * total)
    return SignNestValue(direct, +series)


def encode_sign_nest(x, depth: int, precision: int = DEFAULT_PRECISION) -> SignSequence:
    """Signs ε_0..ε_depth whose nest approximates x ∈ [-2, 2].

    Digit extraction on S = (4/π)·arcsin(x/2) = Σ P_j 2^-j with P_j = ±1
    chosen greedily by the sign of the remainder; ε_j = P_j / P_(j-1).
    Truncation error is at most (π/2)·2^-depth. Each digit doubles the
    input error, so x must carry more than depth accurate bits.
    """
    check_precision(precision)
    with mpmath.workprec(max(precision, depth + 64)):
        x = to_mp(x)
        if abs(x) > 2:
            raise DomainError("sign nests represent only x in [-2, 2]")
        s = 4 / mpmath.pi * mpmath.asin(x / 2)
        out = []
        prev = 1
        for _ in range(depth + 1):
            p = 1 if s >= 0 else -1
            out.append(p * prev)
            prev = p
            s = 2 * (s - p)
    return SignSequence(tuple(out))


def detect_sign_periodicity(signs: SignSequence, max_period: int) -> Optional[tuple]:
    """Least (preperiod, period) consistent with the listed signs, or None.

    Preperiods are searched while at least two full blocks of the longest
    allowed period remain in view.
    """
    s = signs.signs
    n = len(s)
    max_pre = n - 2 * max_period
    for pre in range(max(max_pre, 0) + 1):
        for per in range(1, max_period + 1):
            if n - pre < 2 * per:
                break
            if all(s[i] == s[i + per] for i in range(pre, n - per)):
                return pre, per
    return None


def sizer_encode(x, depth: int, precision: int = DEFAULT_PRECISION) -> SizerDigits:
    """Digits with x = √(a_0 + √(a_1 + … + √(a_depth + residual))), a_i ∈ {0,1,2} for i ≥ 1.

    a_0 = max(0, ⌈x²⌉ - 2) keeps the first remainder in [0, 2]. For a remainder
    y >= 1 the next digit is clamp(⌊y²⌋ - 1, 0, 2), which keeps y in [1, 2]; there
    √(a + y) contracts by at least 1/2, so for x >= 1 the digits alone fix x to
    within 2^-depth (decode with seed=1). Below 1 the digits are 0 and only the
    residual carries the value.
    """
    check_precision(precision)
    with mpmath.workprec(precision + 2 * depth + 32):
        x = to_mp(x)
        if x < 0:
            raise DomainError("Sizer digits represent nonnegative reals only")
        sq = x * x
        head = max(0, int(mpmath.ceil(sq)) - 2)
        y = sq - head
        tail = []
        for _ in range(depth):
            y2 = y * y
            d = min(max(int(mpmath.floor(y2)) - 1, 0), 2) if y >= 1 else 0
            tail.append(d)
            y = y2 - d
        return SizerDigits(head, tuple(tail), +y)


def sizer_decode(d: SizerDigits, precision: int = DEFAULT_PRECISION, seed=None):
    """Rebuild x from digits; the residual is the seed unless one is given.

    The residual seed reproduces x up to rounding. seed=1 decodes from the
    digits alone.
    """
    addends = [d.head, *d.tail]
    terms = TermStream.from_list(addends)
    seed = d.residual if seed is None else seed
    return eval_backward(EvalRequest(SQRT, terms, len(addends) - 1, seed=seed, precision=precision))


def _nonterminating_binary(x, count: int) -> list[int]:
    """First binary digits of x ∈ (0,1], dyadic values ending in …0111."""
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        digits = []
        for _ in range(count):
            x *= 2
            d = 1 if x > 1 else 0
            digits.append(d)
            x -= d
        return digits
    digits = []
    x = to_mp(x)
    for _ in range(count):
        x = 2 * x  # exact in binary floating point
        d = 1 if x > 1 else 0
        digits.append(d)
        x -= d
    return digits


def binary_signed_nest(x, k, depth: int, precision: int = DEFAULT_PRECISION):
    """f_depth(x) = √(k + α_1√(k + … + α_depth√k)) with α_n = (-1)^(a_n), a_n the binary digits of x."""
    check_precision(precision)
    with mpmath.workprec(precision):
        kk = to_mp(k)
        if not kk > 2 + mpmath.sqrt(2):
            raise DomainError("limit existence needs k > 2 + √2")
        xv = x if isinstance(x, (int, Fraction)) else to_mp(x)
        if not (0 < xv <= 1):
            raise DomainError("x must lie in (0, 1]")
    bits = _nonterminating_binary(x, depth)
    signs = [1] + [-1 if b else 1 for b in bits]
    terms = TermStream.from_functions(lambda i: kk, sign=lambda i: signs[i])
    return eval_backward(EvalRequest(SQRT, terms, depth, precision=precision))


def cipolla_formula(signs: Sequence[int], precision: int = DEFAULT_PRECISION):
    """2cos((2^(n-1)λ_1 + … + 2λ_(n-1) + 1)·π / 2^(n+1)) for inner signs i_1..i_(n-1).

    λ_j = (1 - i_1⋯i_j)/2; it equals √(2 + i_1√(2 + … + i_(n-1)√2)) with n twos.
    """
    n = len(signs) + 1
    lam = []
    prod = 1
    for s in signs:
        prod *= s
        lam.append((1 - prod) // 2)
    num = sum(2 ** (n - j) * lam[j - 1] for j in range(1, n)) + 1
    with mpmath.workprec(precision):
        return +(2 * mpmath.cos(num * mpmath.pi / 2 ** (n + 1)))


# ---------------------------------------------------------------- identity corpus


@dataclass(frozen=True)
class IdentityRecord:
    id: str
    kind: str
    rhs: str
    tol: Any
    source: str = ""
    terms: str = ""
    depth: int = 0
    seed: Optional[str] = None
    scale: str = "1"
    direction: str = "backward"
    params: str = ""
    precision: int = DEFAULT_PRECISION

    def __post_init__(self):
        if not to_mp(self.tol) > 0:
            raise ValueError(f"{self.id}: tolerance must be positive")


@dataclass(frozen=True)
class IdentityResult:
    id: str
    passed: bool
    value: Any
    rhs: Any
    error: Any
    tol: Any
    message: str = ""


@dataclass
class CorpusReport:
    results: list = field(default_factory=list)

    @property
    def passed(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def total(self) -> int:
        return len(self.results)

    @property
    def all_passed(self) -> bool:
        return self.passed == self.total


_KIND_PREFIXES = {f.value for f in Family}


def parse_kind(text: str) -> CompositionKind:
    """``sqrt``, ``root:r=3``, ``power:p=2``, ``recip-root:r=2``, ``cot``, ``log:base=10``, ``fraction``."""
    name, _, rest = text.strip().partition(":")
    fam = Family(name.strip())
    params = parse_params(rest)
    if fam in (Family.RTH_ROOT, Family.RECIPROCAL_ROOT):
        return CompositionKind(fam, evaluate(params["r"]))
    if fam is Family.POWER:
        return CompositionKind(fam, evaluate(params["p"]))
    if fam is Family.LOGARITHM:
        return CompositionKind(fam, evaluate(params.get("base", "e")))
    return CompositionKind(fam)


FIELDS = ("id", "kind", "terms", "depth", "seed", "scale", "direction", "params", "rhs", "tol", "source", "precision")


def parse_corpus(text: str) -> list[IdentityRecord]:
    """Records are blocks of ``field: value`` lines separated by blank lines; ``#`` starts a comment."""
    records = []
    block: dict[str, str] = {}

    def flush():
        if not block:
            return
        missing = {"id", "kind", "rhs", "tol"} - block.keys()
        if missing:
            raise ValueError(f"corpus record {block.get('id', '?')} lacks {sorted(missing)}")
        kw: dict[str, Any] = dict(block)
        kw["depth"] = int(kw.get("depth", 0))
        kw["precision"] = int(kw.get("precision", DEFAULT_PRECISION))
        records.append(IdentityRecord(**kw))
        block.clear()

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            flush()
            continue
        key, sep, value = line.partition(":")
        key = key.strip()
        if not sep or key not in FIELDS:
            raise ValueError(f"line {lineno}: expected 'field: value' with a known field, got {raw!r}")
        if key in block:
            raise ValueError(f"line {lineno}: duplicate field {key!r}")
        block[key] = value.strip()
    flush()
    return records


def load_corpus(path: Optional[str | Path] = None) -> list[IdentityRecord]:
    """Load a corpus file; with no path, the shipped identities.corpus."""
    if path is None:
        text = resources.files("contcomp").joinpath("data/identities.corpus").read_text()
    else:
        text = Path(path).read_text()
    return parse_corpus(text)


def _szego_exhaustive(max_length: int, precision: int):
    worst = mpmath.mpf(0)
    for length in range(1, max_length + 1):
        for pattern in itertools.product((1, -1), repeat=length):
            v = sign_nest_value(SignSequence(pattern), length - 1, precision)
            worst = max(worst, v.discrepancy)
    return worst


def _cipolla_exhaustive(max_n: int, precision: int):
    worst = mpmath.mpf(0)
    for n in range(1, max_n + 1):
        for inner in itertools.product((1, -1), repeat=n - 1):
            v = sign_nest_value(SignSequence((1,) + inner), n - 1, precision).direct
            worst = max(worst, abs(v - cipolla_formula(inner, precision)))
    return worst


def _nyblom_random(count: int, seed: int, precision: int):
    rng = random.Random(seed)
    worst = mpmath.mpf(0)
    for _ in range(count):
        x = mpmath.mpf(rng.uniform(2, 10))
        k = rng.randint(1, 12)
        variant = rng.choice(("plus", "minus"))
        closed = nyblom_closed_form(x, k, variant, precision)
        direct = nyblom_nest(x, k, variant, precision)
        with mpmath.workprec(precision):
            worst = max(worst, abs(closed - direct) / abs(closed))
    return worst


def _lhs(rec: IdentityRecord):
    prec = rec.precision
    params = parse_params(rec.params)
    kind = rec.kind.strip()
    if kind == "szego-exhaustive":
        return _szego_exhaustive(int(params["max_length"]), prec)
    if kind == "cipolla-exhaustive":
        return _cipolla_exhaustive(int(params["max_n"]), prec)
    if kind == "nyblom-random":
        return _nyblom_random(int(params["count"]), int(params["seed"]), prec)
    if kind == "hauser":
        return products.hauser_ln2(int(params["n"]), prec)
    if kind == "servi":
        return products.servi_ratio(int(params["k"]), prec)
    if kind == "binary-signed":
        with mpmath.workprec(prec):
            x = Fraction(params["x"]) if "/" in params["x"] else evaluate(params["x"])
            k = evaluate(params["k"])
        return binary_signed_nest(x, k, rec.depth, prec)
    if kind.split(":")[0] in _KIND_PREFIXES:
        with mpmath.workprec(prec):
            ck = parse_kind(kind)
            seed = None if rec.seed is None else evaluate(rec.seed)
            scale = evaluate(rec.scale)
        terms = parse_terms(rec.terms, prec)
        req = EvalRequest(ck, terms, rec.depth, seed=seed, precision=prec)
        value = eval_forward(req) if rec.direction == "forward" else eval_backward(req)
        with mpmath.workprec(prec):
            return scale * value
    raise ValueError(f"unknown corpus kind {kind!r}")


def run_identity_corpus(corpus: Sequence[IdentityRecord]) -> CorpusReport:
    """Evaluate each record's left side and compare with its right side."""
    report = CorpusReport()
    for rec in corpus:
        try:
            value = _lhs(rec)
            with mpmath.workprec(rec.precision):
                rhs = evaluate(rec.rhs)
                tol = evaluate(rec.tol)
                err = abs(value - rhs)
            report.results.append(IdentityResult(rec.id, bool(err <= tol), value, rhs, err, tol))
        except Exception as exc:  # a failing record must not stop the run
            report.results.append(
                IdentityResult(rec.id, False, None, None, None, rec.tol, f"{type(exc).__name__}: {exc}")
            )
    return report
