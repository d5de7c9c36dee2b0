"""Monte Carlo estimation of target-hit probabilities.

Paths are independent and individually seeded (see sim.derive_path_seed),
so the estimate depends only on (master_seed, n_paths) and not on chunking
or worker count: tallies are order-independent integer sums.  Uncertainty is
reported as a Wilson score interval, by default at z = 3.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .model import SdeModel
from .sim import _CODE_TARGET, _CODE_TIMEOUT, _CODE_UNSAFE, derive_path_seed, run_paths
from .synthesis import ProblemSpec

__all__ = ["McSummary", "wilson_interval", "estimate_exit_probability"]


@dataclass(frozen=True)
class McSummary:
    n_paths: int
    n_target: int
    n_unsafe: int
    n_timeout: int
    estimate: float
    ci_lo: float
    ci_hi: float
    z: float
    master_seed: int


def wilson_interval(successes: int, n: int, z: float) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n < 1:
        raise DomainError("n must be at least 1")
    if not 0 <= successes <= n:
        raise DomainError(f"successes {successes} outside [0, {n}]")
    if not (math.isfinite(z) and z > 0):
        raise DomainError("z must be positive and finite")
    p = successes / n
    z2n = z * z / n
    denom = 1.0 + z2n
    center = (p + 0.5 * z2n) / denom
    half = (z / denom) * math.sqrt(p * (1.0 - p) / n + z * z / (4.0 * n * n))
    # pin the algebraically exact edges and keep p inside despite roundoff
    lo = 0.0 if successes == 0 else max(0.0, min(center - half, p))
    hi = 1.0 if successes == n else min(1.0, max(center + half, p))
    return (lo, hi)


def estimate_exit_probability(
    model: SdeModel,
    spec: ProblemSpec,
    x0: np.ndarray,
    dt: float,
    horizon: float,
    n_paths: int,
    master_seed: int,
    *,
    z: float = 3.0,
    chunk_size: int = 2048,
    workers: int = 1,
) -> McSummary:
    """Estimate P(hit target within horizon) over n_paths seeded paths."""
    if n_paths < 1:
        raise DomainError("n_paths must be at least 1")
    if chunk_size < 1:
        raise DomainError("chunk_size must be at least 1")
    ranges = [(lo, min(lo + chunk_size, n_paths)) for lo in range(0, n_paths, chunk_size)]

    def tally(bounds: tuple[int, int]) -> np.ndarray:
        lo, hi = bounds
        seeds = [derive_path_seed(master_seed, i) for i in range(lo, hi)]
        res = run_paths(model, spec, x0, dt, horizon, seeds, record=False)
        return np.array(
            [
                int(np.sum(res.kind == _CODE_TARGET)),
                int(np.sum(res.kind == _CODE_UNSAFE)),
                int(np.sum(res.kind == _CODE_TIMEOUT)),
            ]
        )

    if workers > 1 and len(ranges) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            counts = sum(pool.map(tally, ranges))
    else:
        counts = sum(tally(r) for r in ranges)

    n_target, n_unsafe, n_timeout = (int(v) for v in counts)
    estimate = n_target / n_paths
    ci_lo, ci_hi = wilson_interval(n_target, n_paths, z)
    return McSummary(
        n_paths=n_paths,
        n_target=n_target,
        n_unsafe=n_unsafe,
        n_timeout=n_timeout,
        estimate=estimate,
        ci_lo=ci_lo,
        ci_hi=ci_hi,
        z=z,
        master_seed=int(master_seed),
    )
