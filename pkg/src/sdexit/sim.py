"""Stopped Euler-Maruyama simulation under per-step synthesized control.

Each path integrates dx = (f1 + f2 u) dt + sigma dW on a uniform grid,
re-synthesizing the control at every step.  After each step the state is
classified against closed conditions (variant I: h >= 1 target, h <= 0
unsafe; variant II: g >= 1 target); on the first hit the path freezes: the
state, control and certificate are carried forward unchanged to the end of
the grid, mirroring the stopped process whose generator vanishes on the
boundary.

Noise is reproducible per path: a 64-bit path seed feeds PCG64, and the
whole (n_steps, k) standard-normal block is drawn in one call (numpy fills
such arrays sequentially, so shorter horizons see a prefix of longer ones,
which couples estimates across horizons).  Monte Carlo path seeds derive
from (master_seed, path_index) via a splitmix64-style mix; see
``derive_path_seed``.

A non-finite state after a step marks the path as an unsafe-equivalent
failure with the ``blowup`` flag set and freezes it at the last finite state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError
from .model import BarrierFunction, SdeModel
from .synthesis import ProblemSpec, ProblemVariant, certificate_solve

__all__ = [
    "INTERIOR",
    "HIT_TARGET",
    "HIT_UNSAFE",
    "EXITED_TARGET",
    "EXITED_UNSAFE",
    "TIMEOUT",
    "ExitOutcome",
    "Trajectory",
    "BatchOutcomes",
    "classify_state",
    "euler_maruyama_step",
    "derive_path_seed",
    "simulate_path",
    "run_paths",
]

INTERIOR = "Interior"
HIT_TARGET = "HitTarget"
HIT_UNSAFE = "HitUnsafe"

EXITED_TARGET = "ExitedTarget"
EXITED_UNSAFE = "ExitedUnsafe"
TIMEOUT = "Timeout"

_CODE_TIMEOUT, _CODE_TARGET, _CODE_UNSAFE = 0, 1, 2
_KIND_NAMES = {_CODE_TIMEOUT: TIMEOUT, _CODE_TARGET: EXITED_TARGET, _CODE_UNSAFE: EXITED_UNSAFE}

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class ExitOutcome:
    kind: str
    exit_time: float | None  # None for Timeout
    final_state: np.ndarray
    blowup: bool = False


@dataclass(frozen=True)
class Trajectory:
    """One simulated path on the full time grid (frozen rows included)."""

    times: np.ndarray  # (S+1,)
    states: np.ndarray  # (S+1, n)
    controls: np.ndarray  # (S+1, m)
    cert_a: np.ndarray  # (S+1,), NaN on fallback steps
    cert_b: np.ndarray  # (S+1,)
    cert_feasible: np.ndarray  # (S+1,) bool
    outcome: ExitOutcome


@dataclass(frozen=True)
class BatchOutcomes:
    """Vectorized result for a batch of paths; trajectories only if recorded."""

    kind: np.ndarray  # (P,) int8 codes, see kind_name()
    exit_time: np.ndarray  # (P,), NaN for Timeout
    blowup: np.ndarray  # (P,) bool
    times: np.ndarray | None = None
    states: np.ndarray | None = None  # (P, S+1, n)
    controls: np.ndarray | None = None
    cert_a: np.ndarray | None = None
    cert_b: np.ndarray | None = None
    cert_feasible: np.ndarray | None = None

    @staticmethod
    def kind_name(code: int) -> str:
        return _KIND_NAMES[int(code)]


def classify_state(variant: ProblemVariant, barrier: BarrierFunction, x: np.ndarray) -> str:
    """Closed-condition classification of a single state."""
    x = np.asarray(x, dtype=float)
    if x.shape != (barrier.n,):
        raise DimensionError(f"state shape {x.shape}, expected {(barrier.n,)}")
    value = float(barrier.value(x))
    if value >= 1.0:
        return HIT_TARGET
    if variant == ProblemVariant.PROBLEM_I and value <= 0.0:
        return HIT_UNSAFE
    return INTERIOR


def euler_maruyama_step(
    model: SdeModel, x: np.ndarray, u: np.ndarray, dt: float, dw: np.ndarray
) -> np.ndarray:
    """One explicit step x + (f1 + f2 u) dt + sigma dw; dw is already dt-scaled."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    dw = np.asarray(dw, dtype=float)
    if x.shape != (model.n,):
        raise DimensionError(f"state shape {x.shape}, expected {(model.n,)}")
    if u.shape != (model.m,):
        raise DimensionError(f"control shape {u.shape}, expected {(model.m,)}")
    if dw.shape != (model.k,):
        raise DimensionError(f"noise shape {dw.shape}, expected {(model.k,)}")
    if dt <= 0:
        raise DomainError("dt must be positive")
    drift = np.asarray(model.f1(x), dtype=float) + np.asarray(model.f2(x), dtype=float) @ u
    return x + drift * dt + np.asarray(model.sigma(x), dtype=float) @ dw


def derive_path_seed(master_seed: int, path_index: int) -> int:
    """Deterministic 64-bit stream seed for one Monte Carlo path.

    splitmix64 finalizing mix over master_seed advanced by golden-ratio
    increments of (path_index + 1); distinct indices give distinct streams.
    """
    z = (int(master_seed) + (int(path_index) + 1) * 0x9E3779B97F4A7C15) & _MASK64
    z ^= z >> 30
    z = (z * 0xBF58476D1CE4E5B9) & _MASK64
    z ^= z >> 27
    z = (z * 0x94D049BB133111EB) & _MASK64
    z ^= z >> 31
    return z


def _grid_steps(horizon: float, dt: float) -> int:
    if not (math.isfinite(dt) and dt > 0):
        raise DomainError(f"dt must be positive and finite, got {dt}")
    if not math.isfinite(horizon) or horizon < 0:
        raise DomainError(f"horizon must be finite and nonnegative, got {horizon}")
    ratio = horizon / dt
    nearest = round(ratio)
    if abs(ratio - nearest) <= 1e-9 * max(1.0, ratio):
        return int(nearest)
    return int(math.ceil(ratio))  # horizon not a grid multiple: round the grid up


def _eval_batch(model: SdeModel, barrier: BarrierFunction, xs: np.ndarray):
    """Barrier value/derivatives and model fields for a batch of states."""
    if model.vectorized and barrier.vectorized:
        return (
            np.asarray(barrier.value(xs), dtype=float),
            np.asarray(barrier.gradient(xs), dtype=float),
            np.asarray(barrier.hessian(xs), dtype=float),
            np.asarray(model.f1(xs), dtype=float),
            np.asarray(model.f2(xs), dtype=float),
            np.asarray(model.sigma(xs), dtype=float),
        )
    rows = [
        (
            float(barrier.value(x)),
            np.asarray(barrier.gradient(x), dtype=float),
            np.asarray(barrier.hessian(x), dtype=float),
            np.asarray(model.f1(x), dtype=float),
            np.asarray(model.f2(x), dtype=float),
            np.asarray(model.sigma(x), dtype=float),
        )
        for x in xs
    ]
    return tuple(np.stack([r[i] for r in rows]) for i in range(6))


def _barrier_values(barrier: BarrierFunction, xs: np.ndarray) -> np.ndarray:
    if barrier.vectorized:
        return np.asarray(barrier.value(xs), dtype=float)
    return np.array([float(barrier.value(x)) for x in xs])


def run_paths(
    model: SdeModel,
    spec: ProblemSpec,
    x0: np.ndarray,
    dt: float,
    horizon: float,
    path_seeds,
    record: bool = False,
) -> BatchOutcomes:
    """Simulate one path per seed in vectorized lockstep.

    Every path is a deterministic function of its own seed, so results are
    identical however the seeds are grouped into batches.  With record=True
    the full per-path grids (states, controls, certificates) are returned;
    frozen rows repeat the exit state and the last synthesized values.
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (model.n,):
        raise DimensionError(f"x0 shape {x0.shape}, expected {(model.n,)}")
    if spec.barrier.n != model.n:
        raise DimensionError("barrier dimension does not match the model")
    if classify_state(spec.variant, spec.barrier, x0) != INTERIOR:
        raise DomainError("x0 must lie in the open domain (strictly between the level sets)")
    steps = _grid_steps(horizon, dt)
    seeds = [int(s) & _MASK64 for s in path_seeds]
    n_paths = len(seeds)
    if n_paths == 0:
        raise DomainError("at least one path seed is required")
    variant_i = spec.variant == ProblemVariant.PROBLEM_I
    box = model.control_box
    n, m, k = model.n, model.m, model.k

    states = np.repeat(x0[None, :], n_paths, axis=0)
    alive = np.ones(n_paths, dtype=bool)
    kind = np.full(n_paths, _CODE_TIMEOUT, dtype=np.int8)
    exit_time = np.full(n_paths, np.nan)
    blowup = np.zeros(n_paths, dtype=bool)

    noise = np.empty((n_paths, steps, k))
    for i, seed in enumerate(seeds):
        gen = np.random.Generator(np.random.PCG64(seed))
        noise[i] = gen.standard_normal((steps, k))
    noise *= math.sqrt(dt)

    if record:
        rec_states = np.empty((n_paths, steps + 1, n))
        rec_states[:, 0] = states
        rec_controls = np.zeros((n_paths, steps + 1, m))
        rec_a = np.full((n_paths, steps + 1), np.nan)
        rec_b = np.full((n_paths, steps + 1), np.nan)
        rec_feas = np.zeros((n_paths, steps + 1), dtype=bool)

    for i in range(steps + 1):
        live = np.where(alive)[0]
        if live.size:
            xs = states[live]
            v, grad, hess, f1v, f2v, sgv = _eval_batch(model, spec.barrier, xs)
            c0 = np.einsum("pn,pn->p", grad, f1v)
            c0 += 0.5 * np.einsum("pik,pij,pjk->p", sgv, hess, sgv)
            cvec = np.einsum("pn,pnm->pm", grad, f2v)
            u, a, b, feas = certificate_solve(v, c0, cvec, box, spec)
            if record:
                rec_controls[live, i] = u
                rec_a[live, i] = a
                rec_b[live, i] = b
                rec_feas[live, i] = feas
        if record and i > 0:
            frozen = np.where(~alive)[0]
            if frozen.size:
                rec_controls[frozen, i] = rec_controls[frozen, i - 1]
                rec_a[frozen, i] = rec_a[frozen, i - 1]
                rec_b[frozen, i] = rec_b[frozen, i - 1]
                rec_feas[frozen, i] = rec_feas[frozen, i - 1]
        if i == steps:
            break
        if live.size:
            drift = f1v + np.einsum("pnm,pm->pn", f2v, u)
            x_new = xs + drift * dt + np.einsum("pnk,pk->pn", sgv, noise[live, i])
            finite = np.isfinite(x_new).all(axis=1)
            v_new = np.full(live.size, np.nan)
            if finite.any():
                v_new[finite] = _barrier_values(spec.barrier, x_new[finite])
            hit_target = finite & (v_new >= 1.0)
            hit_unsafe = finite & (v_new <= 0.0) if variant_i else np.zeros(live.size, bool)
            blew = ~finite
            ok = finite
            states[live[ok]] = x_new[ok]
            done = hit_target | hit_unsafe | blew
            if done.any():
                kind[live[hit_target]] = _CODE_TARGET
                kind[live[hit_unsafe]] = _CODE_UNSAFE
                kind[live[blew]] = _CODE_UNSAFE
                blowup[live[blew]] = True
                exit_time[live[done]] = (i + 1) * dt
                alive[live[done]] = False
        if record:
            rec_states[:, i + 1] = states
        elif not alive.any():
            break

    if record:
        times = np.arange(steps + 1) * dt
        return BatchOutcomes(
            kind=kind,
            exit_time=exit_time,
            blowup=blowup,
            times=times,
            states=rec_states,
            controls=rec_controls,
            cert_a=rec_a,
            cert_b=rec_b,
            cert_feasible=rec_feas,
        )
    return BatchOutcomes(kind=kind, exit_time=exit_time, blowup=blowup)


def simulate_path(
    model: SdeModel,
    spec: ProblemSpec,
    x0: np.ndarray,
    dt: float,
    horizon: float,
    path_seed: int,
) -> Trajectory:
    """Simulate a single path; identical arguments give identical output."""
    res = run_paths(model, spec, x0, dt, horizon, [path_seed], record=True)
    code = int(res.kind[0])
    timeout = code == _CODE_TIMEOUT
    outcome = ExitOutcome(
        kind=BatchOutcomes.kind_name(code),
        exit_time=None if timeout else float(res.exit_time[0]),
        final_state=res.states[0, -1].copy(),
        blowup=bool(res.blowup[0]),
    )
    return Trajectory(
        times=res.times,
        states=res.states[0],
        controls=res.controls[0],
        cert_a=res.cert_a[0],
        cert_b=res.cert_b[0],
        cert_feasible=res.cert_feasible[0],
        outcome=outcome,
    )
