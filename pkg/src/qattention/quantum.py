"""Quantum q-attention model.

Attention is a complex amplitude per channel and path amplitudes are summed
before squaring, so multi-channel probability is the classical sum plus
pairwise interference terms ``2|a_i a_j| cos(theta_ij)`` with
``a_j = psi_j * <C|A;B_j>``.
"""

from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

from .cascade import PatternStats
from .classical import PreconditionError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QuantumParams:
    attention: np.ndarray
    channel: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.attention, dtype=complex)
        ch = np.asarray(self.channel, dtype=complex)
        object.__setattr__(self, "attention", psi)
        object.__setattr__(self, "channel", ch)
        if psi.ndim != 1 or psi.shape != ch.shape or psi.size == 0:
            raise ValueError("attention and channel amplitudes must be equal-length 1-d arrays")
        norm = float(np.sum(np.abs(psi) ** 2))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"sum of |psi_j|^2 is {norm!r}, expected 1")
        if np.any(np.abs(ch) ** 2 > 1.0 + 1e-12):
            raise ValueError("channel amplitudes must satisfy |<C|A;B_j>|^2 <= 1")

    @property
    def size(self) -> int:
        return self.attention.size

    @property
    def paths(self) -> np.ndarray:
        """Per-channel path amplitudes ``psi_j * <C|A;B_j>``."""
        return self.attention * self.channel

    @classmethod
    def homogeneous(cls, q1: float, p: float, phases: Sequence[float]) -> "QuantumParams":
        """Real attention ``sqrt(q1)``, ``sqrt((1-q1)/(K-1))``; channels ``sqrt(p) e^{i theta_j}``."""
        k = len(phases)
        if k == 1:
            psi = np.array([1.0 + 0j])
        else:
            psi = np.full(k, math.sqrt(max(1.0 - q1, 0.0) / (k - 1)), dtype=complex)
            psi[0] = math.sqrt(q1)
        ch = math.sqrt(p) * np.exp(1j * np.asarray(phases, dtype=float))
        return cls(psi, ch)


def _indices(subset: Iterable[int], size: int) -> List[int]:
    idx = sorted(set(subset))
    if not idx:
        raise ValueError("channel set must be non-empty")
    if idx[0] < 1 or idx[-1] > size:
        raise ValueError(f"channel indices must lie in 1..{size}, got {idx}")
    return [i - 1 for i in idx]


def total_amplitude(params: QuantumParams, subset: Iterable[int]) -> complex:
    idx = _indices(subset, params.size)
    return complex(np.sum(params.paths[idx]))


def probability(params: QuantumParams, subset: Iterable[int]) -> float:
    """Squared magnitude of the summed amplitude. Not clamped; see :func:`is_physical`."""
    return abs(total_amplitude(params, subset)) ** 2


def is_physical(params: QuantumParams, subset: Iterable[int]) -> bool:
    return probability(params, subset) <= 1.0


def interference_phase(params: QuantumParams, i: int, j: int) -> float:
    """``arg(conj(psi_i) psi_j conj(<C|A;B_i>) <C|A;B_j>)``."""
    a = params.paths
    ii, jj = _indices([i], params.size)[0], _indices([j], params.size)[0]
    return cmath.phase(complex(a[ii].conjugate() * a[jj]))


def interference_term(params: QuantumParams, i: int, j: int) -> float:
    if i == j:
        raise ValueError("interference needs two distinct channels")
    a = params.paths
    ii, jj = _indices([i], params.size)[0], _indices([j], params.size)[0]
    return float(2.0 * abs(a[ii] * a[jj]) * math.cos(interference_phase(params, i, j)))


class Decomposition(NamedTuple):
    classical_part: float
    interference: np.ndarray  # symmetric, zero diagonal, ordered like sorted(subset)

    @property
    def interference_total(self) -> float:
        return float(np.sum(np.triu(self.interference, 1)))

    @property
    def total(self) -> float:
        return self.classical_part + self.interference_total


def decompose(params: QuantumParams, subset: Iterable[int]) -> Decomposition:
    idx = sorted(set(subset))
    _indices(idx, params.size)
    a = params.paths[[i - 1 for i in idx]]
    classical = float(np.sum(np.abs(a) ** 2))
    m = np.zeros((len(idx), len(idx)))
    for u in range(len(idx)):
        for v in range(u + 1, len(idx)):
            m[u, v] = m[v, u] = interference_term(params, idx[u], idx[v])
    return Decomposition(classical, m)


# -- fitting ---------------------------------------------------------------


@dataclass(frozen=True)
class QuantumFit:
    anchor: float
    q1: float
    p: float
    phases: Tuple[float, ...]  # theta_1 .. theta_K, theta_1 == 0
    residual: float
    converged: bool = True
    start_index: int = 0
    observed: Dict[int, float] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.phases)

    def params(self) -> QuantumParams:
        return QuantumParams.homogeneous(self.q1, self.p, self.phases)

    def predict(self, n: int) -> float:
        return predict_quantum(self, n)

    @property
    def attention_magnitudes(self) -> Tuple[float, float]:
        """``(sqrt(q1), sqrt((1-q1)/(K-1)))``."""
        k = self.size
        rest = math.sqrt(max(1.0 - self.q1, 0.0) / (k - 1)) if k > 1 else 0.0
        return math.sqrt(self.q1), rest


def predict_quantum(fit: QuantumFit, n: int) -> float:
    """Probability over the nested channel set ``{1..n}``."""
    if not 1 <= n <= fit.size:
        raise ValueError(f"n must lie in 1..{fit.size}")
    return probability(fit.params(), range(1, n + 1))


@dataclass(frozen=True)
class QuantumFitConfig:
    n_starts: int = 64
    max_evals: int = 2000
    penalty: float = 1e3
    seed: int = 0
    workers: int = 1
    xatol: float = 1e-12
    fatol: float = 1e-20

    def __post_init__(self):
        if self.n_starts < 1 or self.max_evals < 1 or self.workers < 1:
            raise ValueError("n_starts, max_evals and workers must be >= 1")
        if self.penalty < 0:
            raise ValueError("penalty must be non-negative")


class _Problem:
    """Homogeneous-magnitude objective over ``x = (s, theta_2..theta_K)``.

    ``s`` in [0, 1] sets the attention split: with a positive anchor
    ``q1 = anchor + (1 - anchor) s`` and ``p = anchor / q1`` (so ``q1 p`` is
    pinned and ``p <= 1``); with a zero anchor ``q1 = 0`` and ``p = s``.
    """

    def __init__(self, observed: Dict[int, float], size: int, penalty: float):
        self.size = size
        self.anchor = observed[1]
        self.penalty = penalty
        self.targets = [(n, observed[n]) for n in sorted(observed)]

    def split(self, s: float) -> Tuple[float, float]:
        s = min(max(s, 0.0), 1.0)
        if self.anchor > 0:
            q1 = self.anchor + (1.0 - self.anchor) * s
            return q1, self.anchor / q1
        return 0.0, s

    def magnitudes(self, s: float) -> Tuple[float, float]:
        """Path magnitudes of channel 1 and of each later channel."""
        q1, p = self.split(s)
        rest = (1.0 - q1) * p / (self.size - 1) if self.size > 1 else 0.0
        return math.sqrt(q1 * p), math.sqrt(max(rest, 0.0))

    def curve(self, x: Sequence[float]) -> List[float]:
        first, step = self.magnitudes(x[0])
        z = complex(first, 0.0)
        out = [abs(z) ** 2]
        for theta in x[1:]:
            z += step * cmath.exp(1j * theta)
            out.append(z.real * z.real + z.imag * z.imag)
        return out

    def residual(self, x: Sequence[float]) -> float:
        pred = self.curve(x)
        return math.fsum((pred[n - 1] - y) ** 2 for n, y in self.targets)

    def objective(self, x: Sequence[float]) -> float:
        pred = self.curve(x)
        sse = math.fsum((pred[n - 1] - y) ** 2 for n, y in self.targets)
        over = math.fsum(max(v - 1.0, 0.0) ** 2 for v in pred)
        return sse + self.penalty * over

    def constructive_phases(self, s: float, branches: Sequence[int]) -> List[float]:
        """Phase walk hitting each observed radius in turn where geometry allows.

        Each new path of fixed length either reaches the target radius
        exactly (two mirror solutions, picked by ``branches``) or points
        straight towards it.
        """
        first, step = self.magnitudes(s)
        obs = dict(self.targets)
        z = complex(first, 0.0)
        phases = []
        for n in range(2, self.size + 1):
            base = cmath.phase(z) if abs(z) > 0 else 0.0
            if n in obs and step > 0 and abs(z) > 0:
                r2 = max(obs[n], 0.0)
                c = (r2 - abs(z) ** 2 - step * step) / (2.0 * abs(z) * step)
                delta = math.acos(min(max(c, -1.0), 1.0))
            else:
                delta = math.pi / 2
            theta = base + (delta if branches[n - 2] else -delta)
            phases.append(theta)
            z += step * cmath.exp(1j * theta)
        return phases


def _start_grid(problem: _Problem, config: QuantumFitConfig) -> List[np.ndarray]:
    # even starts: constructive phase walks; odd starts: uniform random phases
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([config.seed, problem.size])))
    k = problem.size
    starts = []
    for i in range(config.n_starts):
        s = (i // 2 + rng.random()) / ((config.n_starts + 1) // 2)
        if i % 2 == 0:
            branches = rng.integers(0, 2, size=max(k - 1, 0))
            phases = problem.constructive_phases(s, branches)
        else:
            phases = list(rng.uniform(0.0, TWO_PI, size=k - 1))
        starts.append(np.array([s] + list(phases), dtype=float))
    return starts


def _polish(problem: _Problem, x0: np.ndarray, config: QuantumFitConfig):
    bounds = [(0.0, 1.0)] + [(None, None)] * (problem.size - 1)
    res = minimize(
        problem.objective,
        x0,
        method="Nelder-Mead",
        bounds=bounds,
        options={
            "maxfev": config.max_evals,
            "xatol": config.xatol,
            "fatol": config.fatol,
            "adaptive": problem.size > 3,
        },
    )
    x = np.asarray(res.x, dtype=float)
    value = problem.objective(x)
    if value > problem.objective(x0):
        x, value = x0, problem.objective(x0)
    return value, x, bool(res.success) or value == 0.0


def fit_quantum(stats: PatternStats, config: Optional[QuantumFitConfig] = None) -> QuantumFit:
    """Fit the homogeneous quantum model to an observed P(n) profile.

    ``q1 p`` is pinned to the observed P(1); the attention split and the
    phases of channels 2..K are searched with bounded Nelder-Mead from a
    seeded multi-start grid. Predictions above 1 are penalised. The winning
    start is the lowest (objective, start index), so thread count does not
    change the result.
    """
    config = config or QuantumFitConfig()
    means = stats.means()
    if 1 not in means:
        raise PreconditionError("no data for n=1")
    if len(means) < 2:
        raise PreconditionError("need P(1) and at least one n >= 2")
    size = max(means)
    problem = _Problem(means, size, config.penalty)
    starts = _start_grid(problem, config)

    def run(x0):
        return _polish(problem, x0, config)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(x0) for x0 in starts]

    best = min(range(len(results)), key=lambda i: (results[i][0], i))
    _, x, converged = results[best]
    q1, p = problem.split(float(x[0]))
    phases = (0.0,) + tuple(float(t) % TWO_PI for t in x[1:])
    fit = QuantumFit(
        anchor=problem.anchor,
        q1=q1,
        p=p,
        phases=phases,
        residual=0.0,
        converged=converged,
        start_index=best,
        observed=dict(means),
    )
    residual = math.fsum((predict_quantum(fit, n) - y) ** 2 for n, y in problem.targets)
    return QuantumFit(**{**fit.__dict__, "residual": residual})


def interference_table(fit: QuantumFit) -> Dict[Tuple[int, int], float]:
    params = fit.params()
    return {
        (i, j): interference_term(params, i, j)
        for i in range(1, fit.size + 1)
        for j in range(i + 1, fit.size + 1)
    }


def quantum_report(fit: QuantumFit) -> Dict[str, object]:
    out: Dict[str, object] = {
        "quantum.anchor": fit.anchor,
        "quantum.q1": fit.q1,
        "quantum.p": fit.p,
        "quantum.K": fit.size,
    }
    for j, theta in enumerate(fit.phases[1:], start=2):
        out[f"quantum.theta.{j}"] = theta
    out["quantum.residual"] = fit.residual
    out["quantum.converged"] = fit.converged
    out["quantum.start_index"] = fit.start_index
    for n in range(1, fit.size + 1):
        out[f"quantum.predicted.{n}"] = predict_quantum(fit, n)
        if n in fit.observed:
            out[f"quantum.observed.{n}"] = fit.observed[n]
    for (i, j), value in interference_table(fit).items():
        out[f"quantum.int.{i}.{j}"] = value
    return out
