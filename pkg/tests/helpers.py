"""Shared independent oracles used to derive expected values by brute force."""

from __future__ import annotations

import numpy as np


def grid_prox_abs(mu: float, x: float, lam: float, points: int = 1_000_001) -> float:
    """Dense-grid argmin of ``mu*|t| + (t - x)^2 / (2 lam)``.

    The minimizer lies between 0 and x, so the padded interval is safe.
    """
    lo = min(0.0, x) - 0.1
    hi = max(0.0, x) + 0.1
    t = np.linspace(lo, hi, points)
    vals = mu * np.abs(t) + (t - x) ** 2 / (2.0 * lam)
    return float(t[np.argmin(vals)])


def grid_coordinate_min(
    tau: float, g: float, center: float, mu: float, points: int = 1_000_001, pad: float = 0.5
) -> float:
    """Dense-grid argmin of ``g*(t-c) + tau/2*(t-c)^2 + mu*|t|`` for one coordinate.

    The quadratic part has its vertex at ``c - g/tau``; adding the convex
    absolute value pulls the minimizer toward 0, so it stays inside
    ``[min(0, vertex), max(0, vertex)]``.
    """
    vertex = center - g / tau
    lo = min(0.0, vertex) - pad
    hi = max(0.0, vertex) + pad
    t = np.linspace(lo, hi, points)
    vals = g * (t - center) + 0.5 * tau * (t - center) ** 2 + mu * np.abs(t)
    return float(t[np.argmin(vals)])


class DirectionalCubic:
    """Cubic test oracle ``a + <g,x> + x'Qx/2 + sum_j c_j/6 (v_j'x)^3``.

    The Hessian is ``Q + sum_j c_j (v_j'x) v_j v_j'`` with unit ``v_j``, so
    ``sum_j |c_j|`` is a valid Hessian-Lipschitz constant (exact when there is
    a single direction). Analytic derivatives are exact, which makes this a
    self-contained oracle for finite-difference error bounds.
    """

    def __init__(self, rng: np.random.Generator, n: int, n_dirs: int = 1):
        self.n = n
        self.a = float(rng.uniform(-1, 1))
        self.g = rng.uniform(-2, 2, n)
        B = rng.uniform(-1, 1, (n, n))
        self.Q = 0.5 * (B + B.T)
        signs = rng.choice((-1.0, 1.0), n_dirs)
        self.c = signs * rng.uniform(0.5, 3.0, n_dirs)
        V = rng.standard_normal((n_dirs, n))
        self.V = V / np.linalg.norm(V, axis=1, keepdims=True)
        self.lipschitz = float(np.sum(np.abs(self.c)))

    def __call__(self, x: np.ndarray) -> float:
        s = self.V @ x
        return self.a + float(self.g @ x) + 0.5 * float(x @ (self.Q @ x)) + float(
            np.sum(self.c / 6.0 * s**3)
        )

    def grad(self, x: np.ndarray) -> np.ndarray:
        s = self.V @ x
        return self.g + self.Q @ x + (self.c / 2.0 * s**2) @ self.V

    def hess_diag(self, x: np.ndarray) -> np.ndarray:
        s = self.V @ x
        return np.diag(self.Q) + (self.c * s) @ (self.V**2)


class RandomQuadratic:
    """Random positive-definite quadratic with exact analytic derivatives."""

    def __init__(self, rng: np.random.Generator, n: int):
        B = rng.standard_normal((n, n)) / np.sqrt(n)
        self.Q = B @ B.T + float(rng.uniform(0.5, 2.0)) * np.eye(n)
        self.g = rng.standard_normal(n)
        self.a = float(rng.uniform(-1, 1))

    def __call__(self, x: np.ndarray) -> float:
        return self.a + float(self.g @ x) + 0.5 * float(x @ (self.Q @ x))

    def grad(self, x: np.ndarray) -> np.ndarray:
        return self.g + self.Q @ x

    def hess_diag(self, x: np.ndarray) -> np.ndarray:
        return np.diag(self.Q).copy()


class CountingBlackbox:
    """Wraps a function and keeps its own call ledger for counter cross-checks."""

    def __init__(self, fn):
        self.fn = fn
        self.calls = 0

    def __call__(self, x):
        self.calls += 1
        return self.fn(x)
