"""Regularizers and their proximal mappings.

A regularizer is a convex, proper, lower-semicontinuous function whose
proximal mapping ``prox(x, lam)`` returns the unique minimizer of

    r(y) + ||y - x||^2 / (2 * lam),       lam > 0.

Separable regularizers additionally expose coordinate-wise proximal steps,
which is what makes the diagonal subproblem solvable in closed form.
"""

from __future__ import annotations

from typing import Callable, Protocol, Sequence

import numpy as np

from .errors import InvalidParameterError


def soft_threshold(x, threshold):
    """Shrink towards zero by ``threshold``; the dead zone maps to exactly 0."""
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


def _check_lam(lam: float) -> float:
    lam = float(lam)
    if not np.isfinite(lam) or lam <= 0.0:
        raise InvalidParameterError(f"prox parameter must be positive, got {lam}")
    return lam


def _check_lams(x, lams) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    lams = np.asarray(lams, dtype=float)
    if lams.shape != x.shape:
        raise InvalidParameterError("per-coordinate parameters must match the point shape")
    if not np.all(np.isfinite(lams)) or np.any(lams <= 0.0):
        raise InvalidParameterError("per-coordinate prox parameters must be positive")
    return x, lams


class ScalarPiece(Protocol):
    """One coordinate of a separable regularizer."""

    def value(self, t: float) -> float: ...

    def prox(self, t: float, lam: float) -> float: ...


class AbsoluteValue:
    """``weight * |t|``, the scalar building block of the l1 norm."""

    def __init__(self, weight: float):
        if weight < 0:
            raise InvalidParameterError("absolute-value weight must be nonnegative")
        self.weight = float(weight)

    def value(self, t: float) -> float:
        return self.weight * abs(t)

    def prox(self, t: float, lam: float) -> float:
        lam = _check_lam(lam)
        cut = lam * self.weight
        if t > cut:
            return t - cut
        if t < -cut:
            return t + cut
        return 0.0


def prox_scalar(piece: ScalarPiece, x: float, lam: float) -> float:
    """Scalar proximal step for one separable piece."""
    _check_lam(lam)
    return float(piece.prox(float(x), float(lam)))


class Regularizer:
    """Base interface: a value map plus its proximal mapping."""

    separable: bool = False

    def value(self, x) -> float:
        raise NotImplementedError

    def prox(self, x, lam: float) -> np.ndarray:
        raise NotImplementedError


class SeparableRegularizer(Regularizer):
    """Regularizer of the form ``r(x) = sum_i r_i(x_i)``."""

    separable = True

    def piece(self, i: int) -> ScalarPiece:
        raise NotImplementedError

    def value(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(sum(self.piece(i).value(float(t)) for i, t in enumerate(x)))

    def prox(self, x, lam: float) -> np.ndarray:
        lam = _check_lam(lam)
        x = np.asarray(x, dtype=float)
        return self.prox_each(x, np.full(x.shape[0], lam))

    def prox_each(self, x, lams) -> np.ndarray:
        """Coordinate-wise prox with a per-coordinate parameter vector."""
        x, lams = _check_lams(x, lams)
        out = np.empty_like(x)
        for i in range(x.shape[0]):
            out[i] = self.piece(i).prox(float(x[i]), float(lams[i]))
        return out


class L1(SeparableRegularizer):
    """Weighted l1 norm ``mu * sum_i |x_i|`` with soft-thresholding prox."""

    def __init__(self, mu: float):
        if mu < 0:
            raise InvalidParameterError("l1 weight must be nonnegative")
        self.mu = float(mu)

    def piece(self, i: int) -> AbsoluteValue:
        return AbsoluteValue(self.mu)

    def value(self, x) -> float:
        return self.mu * float(np.sum(np.abs(np.asarray(x, dtype=float))))

    def prox(self, x, lam: float) -> np.ndarray:
        lam = _check_lam(lam)
        return soft_threshold(np.asarray(x, dtype=float), lam * self.mu)

    def prox_each(self, x, lams) -> np.ndarray:
        x, lams = _check_lams(x, lams)
        return soft_threshold(x, lams * self.mu)

    def __repr__(self) -> str:
        return f"L1(mu={self.mu})"


class Zero(SeparableRegularizer):
    """The identically zero regularizer; its prox is the identity."""

    def piece(self, i: int) -> ScalarPiece:
        return _ZeroPiece()

    def value(self, x) -> float:
        return 0.0

    def prox(self, x, lam: float) -> np.ndarray:
        _check_lam(lam)
        return np.asarray(x, dtype=float).copy()

    def prox_each(self, x, lams) -> np.ndarray:
        x, _ = _check_lams(x, lams)
        return x.copy()

    def __repr__(self) -> str:
        return "Zero()"


class _ZeroPiece:
    def value(self, t: float) -> float:
        return 0.0

    def prox(self, t: float, lam: float) -> float:
        return t


class SeparablePieces(SeparableRegularizer):
    """Separable regularizer assembled from an explicit list of scalar pieces."""

    def __init__(self, pieces: Sequence[ScalarPiece]):
        if not pieces:
            raise InvalidParameterError("at least one scalar piece is required")
        self.pieces = list(pieces)

    def piece(self, i: int) -> ScalarPiece:
        return self.pieces[i]


class CustomRegularizer(Regularizer):
    """Non-separable regularizer defined by user-supplied value and prox callables.

    The prox callable is trusted to be exact; ``check_nonexpansive`` offers a
    probabilistic sanity check for debugging.
    """

    def __init__(
        self,
        value_fn: Callable[[np.ndarray], float],
        prox_fn: Callable[[np.ndarray, float], np.ndarray],
    ):
        self._value = value_fn
        self._prox = prox_fn

    def value(self, x) -> float:
        return float(self._value(np.asarray(x, dtype=float)))

    def prox(self, x, lam: float) -> np.ndarray:
        lam = _check_lam(lam)
        return np.asarray(self._prox(np.asarray(x, dtype=float), lam), dtype=float)


def check_nonexpansive(
    reg: Regularizer,
    dim: int,
    rng: np.random.Generator,
    trials: int = 100,
    lam_range: tuple[float, float] = (1e-3, 10.0),
    scale: float = 5.0,
    tol: float = 1e-10,
) -> None:
    """Spot-check ``||prox(u) - prox(v)|| <= ||u - v||`` on random pairs.

    Raises ``InvalidParameterError`` on the first violation; intended for
    validating custom regularizers in debug runs.
    """
    lo, hi = lam_range
    for _ in range(trials):
        lam = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
        u = scale * rng.standard_normal(dim)
        v = scale * rng.standard_normal(dim)
        lhs = float(np.linalg.norm(reg.prox(u, lam) - reg.prox(v, lam)))
        rhs = float(np.linalg.norm(u - v))
        if lhs > rhs + tol:
            raise InvalidParameterError(
                f"prox is expansive: ||prox(u)-prox(v)||={lhs:.3e} > ||u-v||={rhs:.3e}"
            )
