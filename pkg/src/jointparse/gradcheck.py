"""Central finite-difference checks for the autodiff engine."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .tensor import Tensor


def rel_error(a: np.ndarray, b: np.ndarray, floor: float = 1e-4) -> float:
    """||a - b|| / max(||a||, ||b||, floor).

    The floor keeps gradients that are zero in exact arithmetic (e.g. terms
    that cancel under a softmax) from turning finite-difference noise,
    around 1e-9 in absolute terms, into a relative error of 1. Below the
    floor the check is absolute: an error of 1e-8 still scores 1e-4.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = max(np.linalg.norm(a), np.linalg.norm(b), floor)
    return float(np.linalg.norm(a - b) / scale)


def numeric_grad(f: Callable[[], float], x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Entrywise central differences of ``f`` w.r.t. ``x`` (perturbed in place)."""
    grad = np.zeros_like(x, dtype=np.float64)
    flat = x.reshape(-1)
    g = grad.reshape(-1)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + eps
        up = f()
        flat[k] = orig - eps
        down = f()
        flat[k] = orig
        g[k] = (up - down) / (2 * eps)
    return grad


def analytic_grads(loss_fn: Callable[[], Tensor], params: Sequence[Tensor]) -> list[np.ndarray]:
    for p in params:
        p.grad = None
    loss = loss_fn()
    loss.backward()
    return [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]


def check_entrywise(loss_fn: Callable[[], Tensor], params: Sequence[Tensor], eps: float = 1e-6) -> list[float]:
    """Relative error per parameter between backprop and finite differences."""
    grads = analytic_grads(loss_fn, params)
    f = lambda: float(loss_fn().data)
    return [rel_error(g, numeric_grad(f, p.data, eps)) for p, g in zip(params, grads)]


def check_directional(loss_fn: Callable[[], Tensor], params: Sequence[Tensor], rng: np.random.Generator,
                      eps: float = 1e-6) -> list[float]:
    """Per-parameter check along one random direction: grad . v vs (f(x+ev) - f(x-ev)) / 2e."""
    grads = analytic_grads(loss_fn, params)
    errors = []
    for p, g in zip(params, grads):
        v = rng.standard_normal(p.shape)
        v /= max(np.linalg.norm(v), 1e-12)
        orig = p.data.copy()
        p.data = orig + eps * v
        up = float(loss_fn().data)
        p.data = orig - eps * v
        down = float(loss_fn().data)
        p.data = orig
        numeric = (up - down) / (2 * eps)
        analytic = float(np.sum(g * v))
        errors.append(rel_error(np.array([analytic]), np.array([numeric])))
    return errors
