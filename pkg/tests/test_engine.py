from __future__ import annotations

import mpmath
import pytest
from hypothesis import given
from hypothesis import strategies as st

from contcomp.engine import (
    CompositionKind,
    EvalRequest,
    TermRecord,
    TermStream,
    apply_term,
    closed_form_constant_sqrt,
    estimate_limit,
    eval_backward,
    eval_forward,
)
from contcomp.errors import DomainError, ExponentOutOfRange, NoConvergence

SQRT = CompositionKind.square_root()
mp = mpmath.mpf


def hp(fn):
    """Evaluate an oracle expression at 256 bits."""
    with mpmath.workprec(256):
        return +fn()


def ramanujan1911_terms():
    return TermStream.from_functions(lambda i: 1, lambda i: i + 2)


@pytest.mark.parametrize(
    "terms, depth, expected, tol",
    [
        (TermStream.constant(4), 0, mp(2), 0),
        (TermStream.constant(2), 2, hp(lambda: mpmath.sqrt(2 + mpmath.sqrt(2 + mpmath.sqrt(2)))), mp("1e-35")),
        (ramanujan1911_terms(), 30, mp(3), mp("1e-6")),
        (TermStream.constant(6), 40, mp(3), mp("1e-9")),
    ],
)
def test_eval_backward_examples(terms, depth, expected, tol):
    v = eval_backward(EvalRequest(SQRT, terms, depth))
    assert abs(v - expected) <= tol


def test_depth_two_digits():
    v = eval_backward(EvalRequest(SQRT, TermStream.constant(2), 2))
    assert mpmath.nstr(v, 10) == "1.961570561"


@pytest.mark.parametrize(
    "terms, tol, expected, within",
    [
        (TermStream.constant(1), "1e-12", hp(lambda: (1 + mpmath.sqrt(5)) / 2), mp("1e-11")),
        (TermStream.arithmetic(1, 1), "1e-6", mp("1.757933"), mp("1e-6")),
    ],
)
def test_estimate_limit_examples(terms, tol, expected, within):
    v, trace = estimate_limit(EvalRequest(SQRT, terms, 0), tol, 200)
    assert abs(v - expected) <= within
    d = trace.converged_at
    assert trace.deltas[d] <= trace.tolerance_used and trace.deltas[d - 1] <= trace.tolerance_used
    # least such depth
    assert not any(
        trace.deltas[k] <= trace.tolerance_used and trace.deltas[k - 1] <= trace.tolerance_used
        for k in range(2, d)
    )


def test_power_above_radius_has_no_limit():
    # x = 0.3 + x² has negative discriminant 1 - 4·0.3
    with pytest.raises(NoConvergence) as info:
        estimate_limit(EvalRequest(CompositionKind.power(2), TermStream.constant(0.3), 0), 1e-12, 500)
    assert info.value.trace is not None


def test_power_below_radius_matches_fixed_point():
    v, _ = estimate_limit(EvalRequest(CompositionKind.power(2), TermStream.constant(0.2), 0), 1e-20, 500)
    # smaller root of x = 0.2 + x²
    assert abs(v - hp(lambda: (1 - mpmath.sqrt(1 - 4 * mp(0.2))) / 2)) < mp("1e-18")


@pytest.mark.parametrize("a, expected", [(2, mp(2)), (6, mp(3)), (1, hp(lambda: (1 + mpmath.sqrt(5)) / 2))])
def test_closed_form_constant_sqrt(a, expected):
    assert abs(closed_form_constant_sqrt(a) - expected) < mp("1e-35")


def test_left_radical_with_converging_addends():
    # u_n = √(a_n + u_(n-1)) with a_n -> 2 tends to the constant-nest value 2
    terms = TermStream.from_functions(lambda i: 2 + mp(2) ** -i)
    v, _ = estimate_limit(EvalRequest(SQRT, terms, 0), 1e-15, 400, direction="forward")
    assert abs(v - closed_form_constant_sqrt(2)) < mp("1e-12")


def test_reciprocal_seed_is_infinity():
    kind = CompositionKind.reciprocal_root(2)
    req = EvalRequest(kind, TermStream.constant(1), 0)
    assert req.resolved_seed() == mpmath.inf
    # t_0(∞) = a_0 + 0
    assert eval_backward(req) == 1


def test_reciprocal_nest_fixed_point():
    # x = 1 + 1/√x
    v, _ = estimate_limit(EvalRequest(CompositionKind.reciprocal_root(2), TermStream.constant(1), 0), 1e-20, 500)
    assert abs(v - 1 - 1 / mpmath.sqrt(v)) < mp("1e-18")


def test_cotangent_kind_decodes_integer():
    v = eval_backward(EvalRequest(CompositionKind.cotangent(), TermStream.from_list([5]), 0))
    assert v == 5


def test_negative_radicand_is_domain_error():
    terms = TermStream.from_functions(lambda i: -5)
    with pytest.raises(DomainError):
        eval_backward(EvalRequest(SQRT, terms, 3))


@pytest.mark.parametrize("depth, precision", [(-1, 128), (1.5, 128), (3, 52)])
def test_request_validation(depth, precision):
    with pytest.raises(ValueError):
        EvalRequest(SQRT, TermStream.constant(1), depth, precision=precision)


def test_root_exponent_out_of_range():
    rec = TermRecord(0, 1, 1, 1, 2)
    with pytest.raises(ExponentOutOfRange):
        apply_term(SQRT, rec, mp(1))


def test_term_record_rejects_bad_sign():
    with pytest.raises(ValueError):
        TermRecord(0, 1, 1, 0, None)


def test_periodic_stream_repeats():
    ts = TermStream.from_list([1, 2, 3], cyclic=True)
    assert ts.period == 3
    for i in range(12):
        assert ts(i).addend == ts(i + 3).addend


def test_values_length_and_trace():
    _, trace = estimate_limit(EvalRequest(SQRT, TermStream.constant(3), 0), 1e-10, 100)
    assert len(trace.values) == len(trace.deltas) == trace.converged_at + 1
    assert trace.deltas[0] is None


@given(st.floats(0, 100), st.integers(0, 40))
def test_backward_equals_forward_for_constant_terms(a, depth):
    req = EvalRequest(SQRT, TermStream.constant(a), depth)
    assert eval_backward(req) == eval_forward(req)


@given(st.lists(st.floats(0, 1e6), min_size=2, max_size=25))
def test_monotone_in_depth(addends):
    terms = TermStream.from_list(addends)
    vals = [eval_backward(EvalRequest(SQRT, terms, d)) for d in range(len(addends))]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


@given(st.lists(st.floats(0, 50), min_size=3, max_size=20), st.data())
def test_tail_seeding_consistency(addends, data):
    terms = TermStream.from_list(addends)
    total = len(addends) - 1
    n = data.draw(st.integers(0, total - 1))
    m = total - n - 1
    inner = eval_backward(EvalRequest(SQRT, terms.shift(n + 1), m))
    outer = eval_backward(EvalRequest(SQRT, terms, n, seed=inner))
    full = eval_backward(EvalRequest(SQRT, terms, total))
    assert abs(outer - full) <= mp(2) ** -120 * max(1, abs(full))


@given(st.floats(0.01, 20), st.integers(1, 30))
def test_precision_scaling_keeps_stable_digits(a, depth):
    lo = eval_backward(EvalRequest(SQRT, TermStream.arithmetic(a, 1), depth, precision=64))
    hi = eval_backward(EvalRequest(SQRT, TermStream.arithmetic(a, 1), depth, precision=128))
    assert abs(lo - hi) <= mp(2) ** -58 * abs(hi)
