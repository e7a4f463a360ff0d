"""Classical q-attention model.

The receiver spreads unit attention ``q_j`` over the channels it follows and
the multi-channel probability is the attention-weighted sum of channel
probabilities. Under homogeneous channels this is a line through the
single-channel value with a non-negative slope, flat after capacity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence

import numpy as np

from .cascade import PatternStats


class PreconditionError(ValueError):
    """Input data does not meet a fitter's requirements."""


@dataclass(frozen=True)
class ClassicalParams:
    attention: np.ndarray
    channel_probs: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.attention, dtype=float)
        p = np.asarray(self.channel_probs, dtype=float)
        object.__setattr__(self, "attention", q)
        object.__setattr__(self, "channel_probs", p)
        if q.ndim != 1 or q.shape != p.shape or q.size == 0:
            raise ValueError("attention and channel_probs must be equal-length 1-d arrays")
        if abs(q.sum() - 1.0) > 1e-12:
            raise ValueError(f"attention weights sum to {q.sum()!r}, expected 1")
        if np.any((q < 0) | (q > 1)) or np.any((p < 0) | (p > 1)):
            raise ValueError("attention weights and channel probabilities must lie in [0, 1]")

    @property
    def capacity(self) -> int:
        return self.attention.size

    @classmethod
    def homogeneous(cls, q1: float, capacity: int, p: float) -> "ClassicalParams":
        """First channel gets ``q1``, the rest share ``1 - q1`` equally; all channels have probability ``p``."""
        if capacity == 1:
            q = np.array([1.0])
        else:
            q = np.full(capacity, (1.0 - q1) / (capacity - 1))
            q[0] = q1
        return cls(q, np.full(capacity, p))


def _indices(subset: Iterable[int], size: int) -> list:
    idx = sorted(set(subset))
    if not idx:
        raise ValueError("active set must be non-empty")
    if idx[0] < 1 or idx[-1] > size:
        raise ValueError(f"channel indices must lie in 1..{size}, got {idx}")
    return [i - 1 for i in idx]


def total_probability(params: ClassicalParams, active: Iterable[int]) -> float:
    """Sum of ``q_j * P(C|A;B_j)`` over the (1-based) active channels."""
    idx = _indices(active, params.capacity)
    return math.fsum(params.attention[i] * params.channel_probs[i] for i in idx)


@dataclass(frozen=True)
class ClassicalFit:
    anchor: float
    slope: float
    n_max_fitted: int
    residual: float
    unconstrained_slope: float = 0.0
    observed: Dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.slope < 0:
            raise ValueError("slope must be non-negative")
        if self.n_max_fitted < 1:
            raise ValueError("n_max_fitted must be >= 1")

    def predict(self, n: int) -> float:
        return predict_classical(self, n)


def predict_classical(fit: ClassicalFit, n: int) -> float:
    """Anchored line ``anchor + slope*(n-1)``, constant after ``n_max_fitted``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return fit.anchor + fit.slope * (min(n, fit.n_max_fitted) - 1)


def fit_classical(stats: PatternStats, weighted: bool = False) -> ClassicalFit:
    """Least-squares slope of a line pinned at the observed P(1).

    The unconstrained optimum has a closed form; a negative optimum is
    clamped to zero, which is the constrained optimum because the objective
    is a convex parabola in the slope. With ``weighted=True`` each pattern is
    weighted by its instance count.
    """
    means = stats.means()
    if 1 not in means:
        raise PreconditionError("no data for n=1")
    if len(means) < 2:
        raise PreconditionError("need P(1) and at least one n >= 2")
    anchor = means[1]
    ns = np.array(sorted(means), dtype=float)
    ys = np.array([means[int(n)] for n in ns])
    if weighted:
        w = np.array([stats.rows[int(n)].instance_count for n in ns], dtype=float)
    else:
        w = np.ones_like(ns)
    x = ns - 1.0
    s_star = float(np.dot(w * x, ys - anchor) / np.dot(w * x, x))
    slope = max(s_star, 0.0)
    pred = anchor + slope * x
    residual = float(np.dot(w, (pred - ys) ** 2))
    return ClassicalFit(anchor, slope, int(ns[-1]), residual, s_star, dict(means))


def classical_report(fit: ClassicalFit, upto: Optional[int] = None) -> Dict[str, object]:
    """Flat key/value view: parameters plus per-n predicted vs observed."""
    out: Dict[str, object] = {
        "classical.anchor": fit.anchor,
        "classical.slope": fit.slope,
        "classical.unconstrained_slope": fit.unconstrained_slope,
        "classical.n_max_fitted": fit.n_max_fitted,
        "classical.residual": fit.residual,
    }
    for n in range(1, (upto or fit.n_max_fitted) + 1):
        out[f"classical.predicted.{n}"] = predict_classical(fit, n)
        if n in fit.observed:
            out[f"classical.observed.{n}"] = fit.observed[n]
    return out


def slope_from_params(q1: float, capacity: int, p: float) -> float:
    """Per-channel increment implied by homogeneous parameters."""
    if capacity < 2:
        return 0.0
    return (1.0 - q1) / (capacity - 1) * p


def anchored_sse(slope: float, ns: Sequence[int], ys: Sequence[float], anchor: float) -> float:
    return math.fsum((anchor + slope * (n - 1) - y) ** 2 for n, y in zip(ns, ys))
