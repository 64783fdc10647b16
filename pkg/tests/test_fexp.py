from __future__ import annotations

import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from contcomp.errors import DigitOverflow, DomainError
from contcomp.fexp import (
    FDigits,
    beta_encode,
    beta_system,
    beta_value,
    continued_fraction_digits,
    decimal_system,
    f_decode,
    f_encode,
    reciprocal_system,
)

mp = mpmath.mpf
REC = reciprocal_system()
DEC = decimal_system(10)


def test_inverse_golden_ratio_is_all_ones():
    x = (mpmath.sqrt(5) - 1) / 2
    assert set(f_encode(REC, x, 30).digits) == {1}


def test_sqrt_two_minus_one_is_all_twos():
    assert set(f_encode(REC, mpmath.sqrt(2) - 1, 30).digits) == {2}


def test_decimal_eighth():
    d = f_encode(DEC, mp("0.125"), 5)
    assert d.digits == (1, 2, 5, 0, 0)
    assert f_decode(DEC, d, 3) == mp("0.125")


def test_decode_all_ones():
    v = f_decode(REC, FDigits((1,) * 80, 0), use_residual=False)
    assert abs(v - (mpmath.sqrt(5) - 1) / 2) < mp("1e-30")


def test_round_trip_fifty_random():
    rng = random.Random(8)
    for _ in range(50):
        x = mp(rng.uniform(1e-3, 1))
        d = f_encode(REC, x, 20)
        assert abs(f_decode(REC, d, 20) - x) < mp("1e-10")


def test_continued_fraction_cross_check():
    rng = random.Random(13)
    for _ in range(100):
        q = rng.randint(1, 10**4)
        p = rng.randint(1, q)
        d = f_encode(REC, Fraction(p, q), 64)
        assert d.terminated
        assert list(d.digits) == continued_fraction_digits(p, q)


def _truncation_error(system, x, n):
    d = f_encode(system, x, n)  # may stop early when the expansion terminates
    return abs(f_decode(system, d, len(d.digits), use_residual=False) - mp(x))


@given(st.floats(1e-6, 1, exclude_max=True), st.integers(1, 25))
def test_reciprocal_contraction(x, n):
    C, lam = REC.contraction
    assert _truncation_error(REC, x, n) <= mp(C) * mp(lam) ** n


@given(st.floats(0, 1, exclude_max=True), st.integers(1, 25), st.integers(2, 16))
def test_decimal_contraction(x, n, p):
    system = decimal_system(p)
    C, lam = system.contraction
    assert _truncation_error(system, x, n) <= mp(C) * mp(lam) ** n * (1 + mp("1e-20"))


@given(st.floats(0, 1, exclude_max=True), st.integers(1, 25), st.floats(1.1, 7.5))
def test_beta_contraction_and_digit_bound(x, n, beta):
    d = beta_encode(beta, x, n)
    assert all(0 <= a < beta + 1 for a in d.digits)
    C, lam = beta_system(beta).contraction
    assert abs(beta_value(beta, d) - mp(x)) <= mp(C) * mp(lam) ** n * (1 + mp("1e-9"))


def test_beta_binary():
    assert beta_encode(2, 0.625, 3).digits == (1, 0, 1)


def test_beta_decimal_string_is_exact():
    d = beta_encode(10, "0.3", 4)
    assert d.digits == (3, 0, 0, 0) and d.terminated


def test_golden_beta_has_no_adjacent_ones():
    phi = (1 + mpmath.sqrt(5)) / 2
    digits = beta_encode(phi, mp(1) / 2, 60).digits
    assert set(digits) <= {0, 1}
    assert all(not (a == 1 and b == 1) for a, b in zip(digits, digits[1:]))


def test_domain_checks():
    with pytest.raises(DomainError):
        f_encode(REC, mp(2), 3)
    with pytest.raises(DomainError):
        f_encode(DEC, mp(1), 3)
    with pytest.raises(DomainError):
        beta_encode(1, 0.5, 3)
    with pytest.raises(ValueError):
        decimal_system(1)


def test_digit_overflow():
    with pytest.raises(DigitOverflow):
        f_encode(REC, mp("1e-60"), 3, precision=128)


def test_inverse_is_identity():
    for system in (REC, DEC, beta_system(3.5)):
        for x in (mp("0.2"), mp("0.77")):
            assert abs(system.f(system.f_inverse(x)) - x) < mp("1e-60")


def test_dump_layout():
    d = f_encode(REC, mpmath.sqrt(2) - 1, 3)
    lines = d.dump().splitlines()
    assert lines[:3] == ["2", "2", "2"] and lines[3].startswith("residual ")
