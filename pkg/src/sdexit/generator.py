"""Infinitesimal generator of a barrier along a controlled diffusion.

For dx = (f1(x) + f2(x) u) dt + sigma(x) dW and a C^2 function v, the
generator applied to v at x is affine in the control:

    L_v(x, u) = grad_v(x) . (f1(x) + f2(x) u)
                + 0.5 tr(sigma(x)' hess_v(x) sigma(x))
              = c0(x) + c(x) . u

The decomposition (c0, c) is what the per-state synthesis LP consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError
from .model import BarrierFunction, SdeModel

__all__ = ["GeneratorDecomposition", "generator_decompose", "generator_value"]


@dataclass(frozen=True)
class GeneratorDecomposition:
    """Affine generator coefficients at one state: L(u) = c0 + c . u."""

    c0: float
    c: np.ndarray


def generator_decompose(
    model: SdeModel, barrier: BarrierFunction, x: np.ndarray
) -> GeneratorDecomposition:
    """Decompose the generator of `barrier` at state `x` into c0 + c.u."""
    x = np.asarray(x, dtype=float)
    if x.shape != (model.n,):
        raise DimensionError(f"state shape {x.shape}, expected {(model.n,)}")
    if barrier.n != model.n:
        raise DimensionError(f"barrier dimension {barrier.n} != model dimension {model.n}")
    grad = np.asarray(barrier.gradient(x), dtype=float)
    hess = np.asarray(barrier.hessian(x), dtype=float)
    sig = np.asarray(model.sigma(x), dtype=float)
    c0 = float(grad @ np.asarray(model.f1(x), dtype=float))
    c0 += 0.5 * float(np.einsum("ik,ij,jk->", sig, hess, sig))
    c = grad @ np.asarray(model.f2(x), dtype=float)
    return GeneratorDecomposition(c0=c0, c=np.asarray(c, dtype=float))


def generator_value(decomp: GeneratorDecomposition, u: np.ndarray) -> float:
    """Evaluate the generator at a control using a precomputed decomposition."""
    u = np.asarray(u, dtype=float)
    if u.shape != decomp.c.shape:
        raise DimensionError(f"control shape {u.shape}, expected {decomp.c.shape}")
    return decomp.c0 + float(decomp.c @ u)
