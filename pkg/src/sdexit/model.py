"""Controlled diffusion models and barrier functions.

A model is the data of the controlled SDE

    dx = (f1(x) + f2(x) u) dt + sigma(x) dW,      u in a box U,

given by three evaluators: the uncontrolled drift ``f1`` (n,), the control
matrix ``f2`` (n, m), and the diffusion matrix ``sigma`` (n, k).  States and
controls are plain numpy arrays.  All built-in evaluators broadcast over a
leading batch axis (input (..., n) gives outputs (..., n), (..., n, m),
(..., n, k)), which the batched simulator relies on; models marked
``vectorized=False`` are evaluated one state at a time instead.

A barrier is a twice continuously differentiable scalar function with
analytic gradient and Hessian.  Region semantics (safe set, target level set)
are owned by the synthesis layer, not by the barrier itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionError, DomainError

__all__ = [
    "ControlBox",
    "SdeModel",
    "BarrierFunction",
    "acc_model",
    "deterministic_1d_model",
    "linear_model",
    "scenario_barrier",
    "quadratic_barrier",
    "validate_model",
    "check_barrier_derivatives",
]


@dataclass(frozen=True)
class ControlBox:
    """Box control set: lo <= u <= hi componentwise, both finite."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lo, dtype=float))
        hi = np.atleast_1d(np.asarray(self.hi, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise DimensionError(f"control box shapes {lo.shape} vs {hi.shape}")
        if not (np.isfinite(lo).all() and np.isfinite(hi).all()):
            raise DomainError("control box bounds must be finite")
        if np.any(lo > hi):
            raise DomainError("control box has lo > hi")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def m(self) -> int:
        return self.lo.shape[0]


@dataclass(frozen=True)
class SdeModel:
    """Controlled SDE with box-constrained input.

    f1, f2, sigma map a state (n,) to arrays of shape (n,), (n, m), (n, k).
    """

    n: int
    m: int
    k: int
    f1: Callable[[np.ndarray], np.ndarray]
    f2: Callable[[np.ndarray], np.ndarray]
    sigma: Callable[[np.ndarray], np.ndarray]
    control_box: ControlBox
    vectorized: bool = True
    name: str = ""

    def __post_init__(self):
        if self.control_box.m != self.m:
            raise DimensionError(
                f"control box has {self.control_box.m} inputs, model declares {self.m}"
            )


@dataclass(frozen=True)
class BarrierFunction:
    """Scalar C^2 function with analytic first and second derivatives."""

    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    n: int
    vectorized: bool = True
    name: str = ""


def validate_model(model: SdeModel, x: np.ndarray | None = None) -> None:
    """Smoke-evaluate the model at one state and check declared shapes.

    Raises DimensionError or DomainError on shape mismatch or non-finite
    output.  Factories call this once at construction time.
    """
    if x is None:
        x = np.zeros(model.n)
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise DimensionError(f"state shape {x.shape}, expected {(model.n,)}")
    outs = [
        ("f1", model.f1(x), (model.n,)),
        ("f2", model.f2(x), (model.n, model.m)),
        ("sigma", model.sigma(x), (model.n, model.k)),
    ]
    for label, arr, want in outs:
        arr = np.asarray(arr)
        if arr.shape != want:
            raise DimensionError(f"{label}(x) has shape {arr.shape}, expected {want}")
        if not np.isfinite(arr).all():
            raise DomainError(f"{label}(x) is not finite at {x}")


# ---------------------------------------------------------------------------
# Built-in models


def acc_model(
    f0: float = 0.1,
    f1: float = 5.0,
    f2: float = 0.25,
    mass: float = 1650.0,
    lead_velocity: float = 0.5,
    u_lo: float = -1.0,
    u_hi: float = 1.0,
) -> SdeModel:
    """Reduced two-state adaptive cruise control model.

    State (x1, x3): x1 the ego-lead relative velocity surrogate and x3 the
    headway coordinate.  Rolling resistance F_r(x1) = f0 + f1*x1 + f2*x1^2
    acts against the engine input u (scaled by 1/mass); the headway changes
    at lead_velocity - x1.  Unit diffusion on both coordinates.
    """
    if mass <= 0:
        raise DomainError("mass must be positive")
    inv_m = 1.0 / mass

    def drift(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        v = x[..., 0]
        out = np.empty_like(x)
        out[..., 0] = -(f0 + f1 * v + f2 * v * v) * inv_m
        out[..., 1] = lead_velocity - v
        return out

    def control_mat(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape[:-1] + (2, 1))
        out[..., 0, 0] = inv_m
        return out

    def diffusion(x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.eye(2), x.shape[:-1] + (2, 2)).copy()

    model = SdeModel(
        n=2,
        m=1,
        k=2,
        f1=drift,
        f2=control_mat,
        sigma=diffusion,
        control_box=ControlBox(np.array([u_lo]), np.array([u_hi])),
        name="acc",
    )
    validate_model(model)
    return model


def deterministic_1d_model(rate: float = 1.0) -> SdeModel:
    """One-dimensional noiseless drift dx = rate dt; control has no effect.

    Used for exact, grid-predictable simulator tests.
    """

    def drift(x):
        x = np.asarray(x, dtype=float)
        return np.full_like(x, rate)

    def control_mat(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (1, 1))

    def diffusion(x):
        x = np.asarray(x, dtype=float)
        return np.zeros(x.shape[:-1] + (1, 1))

    model = SdeModel(
        n=1,
        m=1,
        k=1,
        f1=drift,
        f2=control_mat,
        sigma=diffusion,
        control_box=ControlBox(np.array([-1.0]), np.array([1.0])),
        name="deterministic_1d",
    )
    validate_model(model)
    return model


def linear_model(
    a_mat: np.ndarray,
    d_vec: np.ndarray,
    b_mat: np.ndarray,
    sigma_mat: np.ndarray,
    u_lo: np.ndarray,
    u_hi: np.ndarray,
) -> SdeModel:
    """Constant-coefficient model dx = (A x + d + B u) dt + S dW."""
    a_mat = np.atleast_2d(np.asarray(a_mat, dtype=float))
    d_vec = np.atleast_1d(np.asarray(d_vec, dtype=float))
    b_mat = np.atleast_2d(np.asarray(b_mat, dtype=float))
    sigma_mat = np.atleast_2d(np.asarray(sigma_mat, dtype=float))
    n = d_vec.shape[0]
    if a_mat.shape != (n, n):
        raise DimensionError(f"A has shape {a_mat.shape}, expected {(n, n)}")
    if b_mat.shape[0] != n or sigma_mat.shape[0] != n:
        raise DimensionError("B and sigma must have n rows")
    m = b_mat.shape[1]
    k = sigma_mat.shape[1]
    for arr, label in ((a_mat, "A"), (d_vec, "d"), (b_mat, "B"), (sigma_mat, "sigma")):
        if not np.isfinite(arr).all():
            raise DomainError(f"{label} contains non-finite entries")

    def drift(x):
        # einsum keeps per-row float ops identical across batch shapes
        x = np.asarray(x, dtype=float)
        return np.einsum("...i,ji->...j", x, a_mat) + d_vec

    def control_mat(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(b_mat, x.shape[:-1] + (n, m)).copy()

    def diffusion(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(sigma_mat, x.shape[:-1] + (n, k)).copy()

    model = SdeModel(
        n=n,
        m=m,
        k=k,
        f1=drift,
        f2=control_mat,
        sigma=diffusion,
        control_box=ControlBox(np.asarray(u_lo, dtype=float), np.asarray(u_hi, dtype=float)),
        name="linear",
    )
    validate_model(model)
    return model


# ---------------------------------------------------------------------------
# Barriers


def quadratic_barrier(
    q_mat: np.ndarray | None,
    c_vec: np.ndarray,
    d: float,
    name: str = "quadratic",
) -> BarrierFunction:
    """Barrier v(x) = x'Qx + c'x + d with Q symmetric (or None for affine)."""
    c_vec = np.atleast_1d(np.asarray(c_vec, dtype=float))
    n = c_vec.shape[0]
    if q_mat is None:
        q_mat = np.zeros((n, n))
    q_mat = np.atleast_2d(np.asarray(q_mat, dtype=float))
    if q_mat.shape != (n, n):
        raise DimensionError(f"Q has shape {q_mat.shape}, expected {(n, n)}")
    if not (np.isfinite(q_mat).all() and np.isfinite(c_vec).all() and np.isfinite(d)):
        raise DomainError("barrier coefficients must be finite")
    # symmetrize so gradient/Hessian formulas below are exact
    q_mat = 0.5 * (q_mat + q_mat.T)
    hess_const = 2.0 * q_mat

    # einsum, not @: BLAS picks different kernels (and ulps) by batch shape,
    # which would break bit-reproducibility of batched vs single evaluation
    def value(x):
        x = np.asarray(x, dtype=float)
        quad = np.einsum("...i,ij,...j->...", x, q_mat, x)
        return quad + np.einsum("...i,i->...", x, c_vec) + d

    def gradient(x):
        x = np.asarray(x, dtype=float)
        return 2.0 * np.einsum("...i,ij->...j", x, q_mat) + c_vec

    def hessian(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(hess_const, x.shape[:-1] + (n, n)).copy()

    return BarrierFunction(value=value, gradient=gradient, hessian=hessian, n=n, name=name)


def scenario_barrier(index: int) -> BarrierFunction:
    """Built-in two-state benchmark barriers.

    1: h(x) = (x3 - 1.8 x1) / 4          (affine; safe-approach certificate)
    2: h(x) = (x1^2 + x3^2 - 1) / 8      (annular; leave the unit disk)
    3: g(x) = ((x1-10)^2 + (x3-10)^2)/64 (reach the radius-8 circle around (10,10))
    """
    if index == 1:
        return quadratic_barrier(None, np.array([-0.45, 0.25]), 0.0, name="scenario1")
    if index == 2:
        return quadratic_barrier(np.eye(2) / 8.0, np.zeros(2), -1.0 / 8.0, name="scenario2")
    if index == 3:
        center = np.array([10.0, 10.0])
        q = np.eye(2) / 64.0
        c = -2.0 * center / 64.0
        d = float(center @ center) / 64.0
        return quadratic_barrier(q, c, d, name="scenario3")
    raise DomainError(f"unknown scenario barrier index {index}")


def check_barrier_derivatives(
    barrier: BarrierFunction,
    x: np.ndarray,
    step: float = 1e-5,
    tol: float = 1e-5,
) -> dict:
    """Central-difference consistency check of gradient and Hessian.

    Compares the analytic gradient against central differences of the value,
    and the analytic Hessian against central differences of the gradient.
    Relative error uses max(1, |analytic|) in the denominator so zero entries
    are compared absolutely.  Returns a dict with the two max errors and an
    overall 'ok' flag (both below tol, Hessian symmetric to 1e-12).
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (barrier.n,):
        raise DimensionError(f"state shape {x.shape}, expected {(barrier.n,)}")
    grad = np.asarray(barrier.gradient(x), dtype=float)
    hess = np.asarray(barrier.hessian(x), dtype=float)

    grad_fd = np.empty(barrier.n)
    hess_fd = np.empty((barrier.n, barrier.n))
    for i in range(barrier.n):
        e = np.zeros(barrier.n)
        e[i] = step
        grad_fd[i] = (barrier.value(x + e) - barrier.value(x - e)) / (2 * step)
        hess_fd[:, i] = (
            np.asarray(barrier.gradient(x + e)) - np.asarray(barrier.gradient(x - e))
        ) / (2 * step)

    grad_err = float(np.max(np.abs(grad_fd - grad) / np.maximum(1.0, np.abs(grad))))
    hess_err = float(np.max(np.abs(hess_fd - hess) / np.maximum(1.0, np.abs(hess))))
    sym_err = float(np.max(np.abs(hess - hess.T))) if barrier.n > 0 else 0.0
    return {
        "grad_err": grad_err,
        "hess_err": hess_err,
        "sym_err": sym_err,
        "ok": grad_err < tol and hess_err < tol and sym_err < 1e-12,
    }
