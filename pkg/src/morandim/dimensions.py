"""Closed-form and semi-closed-form Hausdorff dimension formulas.

Covers the classical digit-frequency sets (entropy over log base for m-ary,
the fractional-part-corrected variant for beta bases), the Kinney-Pitcher
dimension of the measure making continued-fraction digits i.i.d., and the
dimension map eta -> h(eta) of a fixed family system together with its
gradient from implicit differentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import EntropyDiverges, InvalidInput
from .pressure import FrequencyVector, PressureProblem, solve_h

__all__ = [
    "dim_F_mary", "dim_F_beta", "dim_nu_eta_cf", "delta_eta", "grad_delta",
    "DimensionEstimate", "GradResult",
]


def _as_probabilities(p, size: int | None = None) -> np.ndarray:
    if isinstance(p, FrequencyVector):
        vals = p.values
    elif isinstance(p, Mapping):
        digits = sorted(p)
        vals = np.asarray([p[d] for d in digits], dtype=float)
    else:
        vals = np.asarray(list(p), dtype=float)
    if np.any(vals < 0):
        raise InvalidInput("probabilities must be nonnegative")
    if abs(float(vals.sum()) - 1.0) > 1e-12:
        raise InvalidInput("probabilities must sum to 1")
    if size is not None and vals.size != size:
        raise InvalidInput(f"expected {size} probabilities, got {vals.size}")
    return vals


def _entropy(p: np.ndarray) -> float:
    """-sum p log p in nats, with 0 log 0 = 0."""
    nz = p[p > 0]
    return float(-(nz * np.log(nz)).sum())


def dim_F_mary(m: int, p) -> float:
    """Dimension of the set of numbers whose base-m digit frequencies
    converge to p: entropy(p) / log m.  Equals 1 exactly at uniform p."""
    if int(m) < 2:
        raise InvalidInput("m must be >= 2")
    vals = _as_probabilities(p, int(m))
    return _entropy(vals) / math.log(m)


def dim_F_beta(beta, p) -> float:
    """Dimension of the beta-expansion frequency set of p over digits
    0..floor(beta): entropy(p) / (log beta - p_last * log frac(beta))."""
    b = float(beta)
    if not b > 1 or b == math.floor(b):
        raise InvalidInput("beta must be > 1 and not an integer")
    top = int(math.floor(b))
    vals = _as_probabilities(p, top + 1)
    frac = b - top
    denom = math.log(b) - float(vals[-1]) * math.log(frac)
    return _entropy(vals) / denom


# --------------------------------------------------------------------------
# Kinney-Pitcher dimension of the i.i.d.-digit continued-fraction measure
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class DimensionEstimate:
    value: float
    ci: tuple
    stderr: float
    samples: int
    entropy: float
    denominator: float


def _entropy_of_eta(eta):
    """(entropy nats, sampler(rng, size) -> digit array) for a digit law.

    Accepts a finite mapping digit -> probability, or ("geometric", q) for
    eta_k = (1-q) q^(k-1), k >= 1, whose entropy has a closed form.  A
    countable FrequencyVector with unresolved tail mass is refused: its
    entropy tail cannot be bounded by the mass alone.
    """
    if isinstance(eta, tuple) and len(eta) == 2 and eta[0] == "geometric":
        q = float(eta[1])
        if not 0 < q < 1:
            raise InvalidInput("geometric parameter must lie in (0,1)")
        ent = -math.log(1 - q) - q / (1 - q) * math.log(q)

        def sampler(rng, size):
            return rng.geometric(1 - q, size=size).astype(np.int64)

        return ent, sampler
    if isinstance(eta, FrequencyVector):
        if eta.countable and eta.tail_mass > 0:
            raise EntropyDiverges(
                "entropy of an unresolved countable tail is not certifiable")
        eta = eta.as_dict()
    if isinstance(eta, Mapping):
        digits = np.asarray(sorted(d for d in eta if eta[d] > 0), dtype=np.int64)
        if np.any(digits < 1):
            raise InvalidInput("continued-fraction digits start at 1")
        probs = np.asarray([eta[int(d)] for d in digits], dtype=float)
        if abs(probs.sum() - 1.0) > 1e-9:
            raise InvalidInput("digit law must sum to 1")
        ent = _entropy(probs)

        def sampler(rng, size):
            return rng.choice(digits, size=size, p=probs / probs.sum())

        return ent, sampler
    raise InvalidInput(f"unsupported digit law {eta!r}")


_SHARD = 4096
_CF_DEPTH = 40
_GAP_STOP = 1e13  # freeze a lane once q_n * q_{n+1} exceeds this


def _sample_abs_log_x(sampler, rng, size: int) -> np.ndarray:
    """|log X| for X = [d1, d2, ...] with i.i.d. digits.

    Convergents are exact integers carried in float64 (lanes freeze long
    before 2^53), truncated at depth 40 or once the convergent gap
    1/(q_n q_{n+1}) falls below 1e-13.
    """
    p0 = np.ones(size)
    q0 = np.zeros(size)
    p1 = np.zeros(size)
    q1 = np.ones(size)
    active = np.ones(size, dtype=bool)
    for _ in range(_CF_DEPTH):
        if not active.any():
            break
        d = sampler(rng, size).astype(float)
        p2 = d * p1 + p0
        q2 = d * q1 + q0
        upd = active
        p0 = np.where(upd, p1, p0)
        q0 = np.where(upd, q1, q0)
        p1 = np.where(upd, p2, p1)
        q1 = np.where(upd, q2, q1)
        active = active & (q0 * q1 < _GAP_STOP)
    return -np.log(p1 / q1)


def dim_nu_eta_cf(eta, mc_samples: int = 100_000, seed: int = 0) -> DimensionEstimate:
    """Dimension of the continued-fraction measure with i.i.d. digit law eta:
    entropy(eta) / (2 * E|log X|), the expectation estimated by Monte Carlo
    with a 3-sigma confidence interval.

    The generator is counter-based (Philox) and sampled in fixed shards, so
    the result is reproducible and shards could be drawn in parallel from
    (seed, shard) without changing it.
    """
    if mc_samples < 10**3:
        raise InvalidInput("mc_samples must be at least 1000")
    ent, sampler = _entropy_of_eta(eta)
    if ent == 0.0:
        return DimensionEstimate(0.0, (0.0, 0.0), 0.0, 0, 0.0, math.nan)
    chunks = []
    shard = 0
    remaining = int(mc_samples)
    while remaining > 0:
        size = min(_SHARD, remaining)
        rng = np.random.Generator(np.random.Philox(key=seed).jumped(shard))
        chunks.append(_sample_abs_log_x(sampler, rng, size))
        shard += 1
        remaining -= size
    vals = np.concatenate(chunks)
    mean = float(vals.mean())
    stderr = float(vals.std(ddof=1) / math.sqrt(vals.size))
    value = ent / (2.0 * mean)
    ci = (ent / (2.0 * (mean + 3 * stderr)), ent / (2.0 * (mean - 3 * stderr)))
    return DimensionEstimate(value, ci, stderr, int(vals.size), ent, mean)


# --------------------------------------------------------------------------
# dimension as a function of the frequency vector, with gradient
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class GradResult:
    h: float
    digits: tuple
    ambient: np.ndarray   # raw partials dh/d eta_i (gauge-dependent)
    tangent: np.ndarray   # projected onto the simplex tangent space

    def directional(self, v) -> float:
        """Derivative along v; meaningful when sum(v) = 0."""
        v = np.asarray(v, dtype=float)
        return float(self.ambient @ v)


def _problem(families: Mapping[int, object], eta) -> PressureProblem:
    fv = eta if isinstance(eta, FrequencyVector) else FrequencyVector.finite(eta)
    return PressureProblem(dict(families), fv)


def delta_eta(families: Mapping[int, object], eta, tol: float = 1e-12) -> float:
    """Hausdorff dimension h(eta) of the system: the pressure zero for the
    given families weighted by eta."""
    return solve_h(_problem(families, eta), tol).h


def grad_delta(families: Mapping[int, object], eta, tol: float = 1e-12) -> GradResult:
    """Gradient of eta -> h(eta) at fixed families, by implicit
    differentiation of sum_i eta_i log S_i(h) = 0:

        dh/d eta_i = -log S_i(h) / sum_k eta_k S_k'(h)/S_k(h)

    Raw partials are gauge-dependent on the simplex; directional
    derivatives along zero-sum directions are the invariant quantities.
    """
    prob = _problem(families, eta)
    h = solve_h(prob, tol).h
    digits = prob.eta.digits
    denom = 0.0
    logs = np.empty(len(digits))
    for idx, d in enumerate(digits):
        fam = prob.families[d]
        s = fam.series(h, math.inf).midpoint
        ds = fam.series_derivative(h, math.inf).midpoint
        logs[idx] = math.log(s)
        denom += prob.eta[d] * ds / s
    ambient = -logs / denom
    tangent = ambient - ambient.mean()
    return GradResult(h, digits, ambient, tangent)
