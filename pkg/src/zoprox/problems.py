"""Benchmark problems: synthetic LASSO, sigmoid-loss classification, and a
LIBSVM-format dataset parser.

Randomness is drawn from PCG64 streams, with normals produced by an explicit
Box-Muller transform over the raw uniform output, so generated instances are
reproducible bit-for-bit across platforms and numpy releases.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .errors import DatasetParseError, InvalidParameterError
from .oracle import ObjectiveModel, SquaredL2
from .prox import L1

DEFAULT_NOISE_SCALE = math.sqrt(0.001)


def seeded_rng(seed: int, stream: int = 0) -> np.random.Generator:
    """PCG64 generator for (seed, stream); distinct streams are independent."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(stream)])))


def standard_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard normals via Box-Muller on ``rng.random()`` uniforms.

    With ``u1, u2 ~ U[0, 1)`` the pair ``sqrt(-2 ln(1 - u1)) * (cos, sin)(2 pi u2)``
    is standard normal; ``1 - u1`` avoids ``log(0)``. Fixed by the PCG64 bit
    stream, unlike the generator's built-in ziggurat sampler.
    """
    shape = (shape,) if np.isscalar(shape) else tuple(shape)
    count = int(np.prod(shape)) if shape else 1
    pairs = (count + 1) // 2
    u1 = rng.random(pairs)
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log1p(-u1))
    angle = 2.0 * math.pi * u2
    z = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:count]
    return z.reshape(shape)


# ---------------------------------------------------------------------------
# Synthetic LASSO
# ---------------------------------------------------------------------------

@dataclass
class LassoInstance:
    """``min 1/2 ||A x - b||^2 + mu ||x||_1`` with the planted vector kept
    for diagnostics. The smooth part is quadratic, so its Hessian-Lipschitz
    constant is zero and the finite-difference estimates are exact on it."""

    A: np.ndarray
    b: np.ndarray
    mu: float
    ground_u: np.ndarray

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def m(self) -> int:
        return self.A.shape[0]

    def smooth_lipschitz(self) -> float:
        """Largest eigenvalue of A^T A, the gradient Lipschitz constant."""
        s = np.linalg.svd(self.A, compute_uv=False)
        return float(s[0] ** 2)

    def hess_diag_bound(self) -> float:
        """Max diagonal entry of A^T A, bounding the curvature estimates."""
        return float(np.max((self.A * self.A).sum(axis=0)))


def gen_lasso(
    n: int,
    m: int,
    mu: float,
    seed: int,
    noise_scale: float = DEFAULT_NOISE_SCALE,
) -> LassoInstance:
    """Draw ``A`` (m-by-n), a planted ``u`` and noise ``l`` i.i.d. standard
    normal, in that order from one stream, and set ``b = A u + noise_scale * l``.

    ``noise_scale=0`` plants an exactly interpolable instance, useful in tests.
    """
    if n < 1 or m < 1:
        raise InvalidParameterError("n and m must be at least 1")
    if mu < 0:
        raise InvalidParameterError("mu must be nonnegative")
    rng = seeded_rng(seed, stream=0)
    A = standard_normal(rng, (m, n))
    u = standard_normal(rng, n)
    noise = standard_normal(rng, m)
    b = A @ u + noise_scale * noise
    return LassoInstance(A=A, b=b, mu=float(mu), ground_u=u)


def lasso_blackbox(inst: LassoInstance) -> ObjectiveModel:
    """Objective model with ``1/2 ||A x - b||^2`` as the black box and an l1
    regularizer. Batch fast paths evaluate the same residual algebra."""
    A = inst.A
    b = inst.b
    col_sq = (A * A).sum(axis=0)

    def loss(x: np.ndarray) -> float:
        r = A @ x - b
        return 0.5 * float(r @ r)

    def loss_batch(points: np.ndarray) -> np.ndarray:
        R = points @ A.T - b
        return 0.5 * np.einsum("ij,ij->i", R, R)

    def loss_axes(x: np.ndarray, delta: float):
        # f(x +- d e_i) = f(x) +- d * (A^T r)_i + d^2/2 * ||a_i||^2
        r = A @ x - b
        center = 0.5 * float(r @ r)
        slope = A.T @ r
        curve = 0.5 * delta * delta * col_sq
        return center + delta * slope + curve, center - delta * slope + curve, center

    return ObjectiveModel(
        dimension=inst.n,
        blackbox=loss,
        regularizer=L1(inst.mu),
        blackbox_batch=loss_batch,
        axis_batch=loss_axes,
        concurrency_safe=True,
    )


# ---------------------------------------------------------------------------
# LIBSVM-format datasets
# ---------------------------------------------------------------------------

@dataclass
class SparseDataset:
    """Labeled sparse rows in CSR-style arrays; feature indices are 1-based
    and strictly increasing within a row, as in the text format."""

    labels: np.ndarray      # int8, entries +1 / -1
    indptr: np.ndarray      # int64, len n_samples + 1
    indices: np.ndarray     # int64, 1-based
    values: np.ndarray      # float64
    n_features: int

    @property
    def n_samples(self) -> int:
        return len(self.labels)

    def rows(self) -> Iterator[tuple[int, list[tuple[int, float]]]]:
        for i in range(self.n_samples):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            feats = [(int(j), float(v)) for j, v in zip(self.indices[lo:hi], self.values[lo:hi])]
            yield int(self.labels[i]), feats

    def serialize(self) -> str:
        """Canonical text form: ``+1 idx:value ...`` per line, LF endings,
        shortest round-trip float formatting."""
        lines = []
        for label, feats in self.rows():
            parts = ["+1" if label > 0 else "-1"]
            parts.extend(f"{j}:{repr(v)}" for j, v in feats)
            lines.append(" ".join(parts))
        return "\n".join(lines) + ("\n" if lines else "")

    def feature_matrix(self) -> sp.csr_matrix:
        """0-based scipy CSR matrix of shape (n_samples, n_features)."""
        return sp.csr_matrix(
            (self.values, self.indices - 1, self.indptr),
            shape=(self.n_samples, self.n_features),
        )


def _normalize_label(raw: float, line_number: int) -> int:
    # Binary dataset conventions: {+1, 1} -> +1 and {-1, 0} -> -1.
    if raw == 1.0:
        return 1
    if raw == -1.0 or raw == 0.0:
        return -1
    raise DatasetParseError(f"label {raw!r} is not one of +1/1/-1/0", line_number)


def parse_libsvm(source: str | Iterable[str], n_features: Optional[int] = None) -> SparseDataset:
    """Parse LIBSVM-format text: one ``label idx:val idx:val ...`` sample per
    line, whitespace separated, 1-based strictly increasing indices. Blank
    lines and trailing ``#`` comments are skipped. ``n_features`` overrides
    the max-index inference (it may not be smaller than the max index seen).
    """
    lines = source.splitlines() if isinstance(source, str) else source

    labels: list[int] = []
    indptr: list[int] = [0]
    indices: list[int] = []
    values: list[float] = []
    max_index = 0

    for line_number, line in enumerate(lines, start=1):
        hash_pos = line.find("#")
        if hash_pos >= 0:
            line = line[:hash_pos]
        tokens = line.split()
        if not tokens:
            continue
        try:
            raw_label = float(tokens[0])
        except ValueError:
            raise DatasetParseError(f"label token {tokens[0]!r} is not a number", line_number)
        labels.append(_normalize_label(raw_label, line_number))

        prev_index = 0
        for token in tokens[1:]:
            left, sep, right = token.partition(":")
            if not sep:
                raise DatasetParseError(f"feature token {token!r} lacks ':'", line_number)
            try:
                index = int(left)
            except ValueError:
                raise DatasetParseError(f"feature index {left!r} is not an integer", line_number)
            if index < 1:
                raise DatasetParseError(f"feature index {index} must be >= 1", line_number)
            if index <= prev_index:
                raise DatasetParseError(
                    f"feature indices must be strictly increasing, got {index} after {prev_index}",
                    line_number,
                )
            try:
                value = float(right)
            except ValueError:
                raise DatasetParseError(f"feature value {right!r} is not a number", line_number)
            if not math.isfinite(value):
                raise DatasetParseError(f"feature value {value!r} is not finite", line_number)
            indices.append(index)
            values.append(value)
            prev_index = index
        indptr.append(len(indices))
        max_index = max(max_index, prev_index)

    if n_features is None:
        n_features = max_index
    elif n_features < max_index:
        raise InvalidParameterError(
            f"n_features override {n_features} is below the max index seen ({max_index})"
        )

    return SparseDataset(
        labels=np.asarray(labels, dtype=np.int8),
        indptr=np.asarray(indptr, dtype=np.int64),
        indices=np.asarray(indices, dtype=np.int64),
        values=np.asarray(values, dtype=np.float64),
        n_features=int(n_features),
    )


def load_libsvm(path, n_features: Optional[int] = None) -> SparseDataset:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_libsvm(handle, n_features=n_features)


# ---------------------------------------------------------------------------
# Sigmoid-loss binary classification
# ---------------------------------------------------------------------------

@dataclass
class ClassificationInstance:
    """Average sigmoid loss over a labeled dataset plus l2 and l1 terms."""

    dataset: SparseDataset
    lam: float
    mu: float

    def __post_init__(self):
        if self.lam < 0 or self.mu < 0:
            raise InvalidParameterError("lam and mu must be nonnegative")


def sigmoid_objective(inst: ClassificationInstance, fold_l2: bool = False) -> ObjectiveModel:
    """Objective model for ``(1/m) sum_i 1 / (1 + exp(l_i <a_i, x>)) + lam ||x||^2
    + mu ||x||_1``.

    The mean sigmoid loss is the black box. With ``fold_l2=False`` the l2 term
    stays analytic (exact gradient ``2 lam x`` and constant diagonal added to
    the estimates); with ``fold_l2=True`` it is folded into the black box and
    picked up by the finite differences instead. ``expit(-z)`` evaluates
    ``1 / (1 + e^z)`` through the overflow-free branch for either sign of z.
    """
    ds = inst.dataset
    X = ds.feature_matrix()
    Xc = X.tocsc()
    y = ds.labels.astype(np.float64)
    m = ds.n_samples
    n = ds.n_features
    if m < 1 or n < 1:
        raise InvalidParameterError("classification needs at least one sample and one feature")
    lam = inst.lam

    def margins(x: np.ndarray) -> np.ndarray:
        return y * (X @ x)

    def loss(x: np.ndarray) -> float:
        base = float(np.mean(expit(-margins(x))))
        if fold_l2:
            base += lam * float(x @ x)
        return base

    def loss_batch(points: np.ndarray) -> np.ndarray:
        points = np.atleast_2d(points)
        out = np.empty(points.shape[0])
        # chunk the dense (m, chunk) score block to bound memory
        chunk = max(1, int(4_000_000 // max(m, 1)))
        for start in range(0, points.shape[0], chunk):
            block = points[start : start + chunk]
            scores = (X @ block.T) * y[:, None]
            out[start : start + chunk] = expit(-scores).mean(axis=0)
        if fold_l2:
            out += lam * np.einsum("ij,ij->i", points, points)
        return out

    def loss_axes(x: np.ndarray, delta: float):
        # Perturbing coordinate i only changes margins of rows with feature i.
        s = margins(x)
        phi = expit(-s)
        total = float(phi.sum())
        center = total / m
        vp = np.full(n, center)
        vm = np.full(n, center)
        for i in range(n):
            lo, hi = Xc.indptr[i], Xc.indptr[i + 1]
            if lo == hi:
                continue
            rows = Xc.indices[lo:hi]
            bump = delta * y[rows] * Xc.data[lo:hi]
            local = s[rows]
            old = float(phi[rows].sum())
            vp[i] = (total - old + float(expit(-(local + bump)).sum())) / m
            vm[i] = (total - old + float(expit(-(local - bump)).sum())) / m
        if fold_l2:
            sq = lam * float(x @ x)
            lin = 2.0 * lam * delta * x
            quad = lam * delta * delta
            vp = vp + sq + lin + quad
            vm = vm + sq - lin + quad
            center += sq
        return vp, vm, center

    return ObjectiveModel(
        dimension=n,
        blackbox=loss,
        regularizer=L1(inst.mu),
        known_smooth=None if fold_l2 else SquaredL2(lam),
        blackbox_batch=loss_batch,
        axis_batch=loss_axes,
        concurrency_safe=True,
    )
