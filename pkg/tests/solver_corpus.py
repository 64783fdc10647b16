"""Randomized trinomials x^m - P·x^n + q with P, q > 0 for the Hoffmann interval rule."""

from __future__ import annotations

import random
from dataclasses import dataclass

from contcomp.errors import ContCompError
from contcomp.solver import Trinomial, hoffmann_solve


@dataclass
class IntervalRuleReport:
    draws: int
    both_converged: int
    violations: list


def interval_rule_corpus(seed: int = 11, draws: int = 600) -> IntervalRuleReport:
    rng = random.Random(seed)
    both, violations = 0, []
    for _ in range(draws):
        m = rng.randint(2, 7)
        n = rng.randint(1, m - 1)
        t = Trinomial(m, n, -rng.uniform(0.5, 10), rng.uniform(0.05, 10))
        try:
            a = hoffmann_solve(t, "A", precision=96)
            b = hoffmann_solve(t, "B", precision=96)
        except (ContCompError, ValueError, ArithmeticError):
            continue
        both += 1
        if not a.inside_bound or b.inside_bound:
            violations.append((t, a.root, b.root, a.bound))
    return IntervalRuleReport(draws, both, violations)
