"""Continued compositions: nested radicals, powers, cotangents and related expansions at arbitrary precision."""

from __future__ import annotations

from .constants import compute_constant
from .cotangent import CotangentDigits, check_regular, cot_decode, cot_encode, lehmer_constant
from .criteria import ConvergenceReport, Verdict
from .engine import (
    ApproximantTrace,
    CompositionKind,
    EvalRequest,
    Family,
    TermRecord,
    TermStream,
    closed_form_constant_sqrt,
    estimate_limit,
    eval_backward,
    eval_forward,
)
from .errors import (
    ContCompError,
    DerivativeUnavailable,
    DigitOverflow,
    DomainError,
    EvaluationOverflow,
    ExponentOutOfRange,
    HypothesisNotCertified,
    NegativeTerm,
    NoConvergence,
    NoFixedPointLocated,
    PrecisionExhausted,
    UnknownConstant,
)
from .fexp import FDigits, FExpansionSystem, beta_encode, f_decode, f_encode
from .solver import Trinomial, astrand_transform, hoffmann_solve, iterate_fixed_point

__version__ = "0.1.0"
