"""Shared test helpers: random LP instances and scenario shorthands."""

from __future__ import annotations

import numpy as np

from sdexit import (
    LpProblem,
    ProblemSpec,
    ProblemVariant,
    acc_model,
    scenario_barrier,
)


def random_lp(rng: np.random.Generator) -> LpProblem:
    """Random small LP with a mix of box patterns (incl. fixed and free vars)."""
    d = int(rng.integers(1, 6))
    r = int(rng.integers(0, 9))
    rows = rng.normal(size=(r, d)) * float(rng.choice([0.5, 1.0, 3.0]))
    rhs = 2.0 * rng.normal(size=r)
    lo = np.full(d, -np.inf)
    hi = np.full(d, np.inf)
    for j in range(d):
        kind = int(rng.integers(0, 5))
        vals = np.sort(rng.normal(scale=3.0, size=2))
        if kind == 0:
            lo[j], hi[j] = vals
        elif kind == 1:
            lo[j] = vals[0]
        elif kind == 2:
            hi[j] = vals[1]
        elif kind == 3:
            lo[j] = hi[j] = vals[0]
        # kind == 4: free variable
    return LpProblem(objective=rng.normal(size=d), rows=rows, rhs=rhs, lo=lo, hi=hi)


def scenario_spec(index: int, w: float, delta: float = 10.0, **kw) -> ProblemSpec:
    variant = ProblemVariant.PROBLEM_II if index == 3 else ProblemVariant.PROBLEM_I
    return ProblemSpec(
        variant=variant,
        barrier=scenario_barrier(index),
        weight_w=w,
        delta=delta,
        **kw,
    )


def acc() -> "object":
    return acc_model()


# one verdict line per acceptance criterion, emitted after capture ends so
# the lines always appear in the terminal output (and in tee'd logs)
acceptance_verdicts: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if acceptance_verdicts:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_verdicts:
            terminalreporter.write_line(line)
