"""Central-difference derivative estimates built from a single trial batch.

From the ``2n + 1`` values of one :class:`~zoprox.oracle.TrialBatch` we form

* the gradient estimate   ``g_i = (f(x + d e_i) - f(x - d e_i)) / (2 d)``
* the curvature estimate  ``h_i = (f(x + d e_i) + f(x - d e_i) - 2 f(x)) / d^2``

Both are exact on quadratics up to floating-point rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NumericalError
from .oracle import TrialBatch

# Radii below this make the squared-delta division amplify rounding noise in
# double precision faster than the schedule gains accuracy.
DELTA_MIN = 1e-6

# Default cap for curvature entries; keeps the shifted diagonal positive on
# pathological oracles without affecting well-behaved problems.
DEFAULT_CURVATURE_CAP = 1e8


@dataclass(frozen=True)
class DerivativeEstimates:
    """Gradient and Hessian-diagonal estimates from one batch.

    ``clamped`` counts curvature entries that were clipped into
    ``[-cap, cap]`` when the estimates were assembled.
    """

    grad: np.ndarray
    hess_diag: np.ndarray
    delta: float
    clamped: int = 0


def estimate_gradient(batch: TrialBatch) -> np.ndarray:
    """Central-difference gradient estimate (raw, no smooth-term correction)."""
    g = (batch.values_plus - batch.values_minus) / (2.0 * batch.delta)
    if not np.all(np.isfinite(g)):
        raise NumericalError("gradient estimate has non-finite entries")
    return g


def estimate_hess_diag(batch: TrialBatch) -> np.ndarray:
    """Second central difference per axis, estimating the Hessian diagonal."""
    d2 = batch.delta * batch.delta
    h = (batch.values_plus + batch.values_minus - 2.0 * batch.value_center) / d2
    if not np.all(np.isfinite(h)):
        raise NumericalError("curvature estimate has non-finite entries")
    return h


def build_estimates(batch: TrialBatch, cap: float = DEFAULT_CURVATURE_CAP) -> DerivativeEstimates:
    """Assemble both estimates, clipping curvature entries into ``[-cap, cap]``."""
    if not cap > 0:
        raise InvalidParameterError(f"curvature cap must be positive, got {cap}")
    grad = estimate_gradient(batch)
    hess = estimate_hess_diag(batch)
    clipped = np.clip(hess, -cap, cap)
    clamped = int(np.count_nonzero(clipped != hess))
    return DerivativeEstimates(grad=grad, hess_diag=clipped, delta=batch.delta, clamped=clamped)
