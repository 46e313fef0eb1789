"""One-dimensional realization of the nested interval construction, with
independent geometric dimension estimators.

Each level k uses the contraction vector of the driving symbol omega_k,
truncated to M children per node.  Children are packed left to right inside
their parent with equal gaps consuming the slack (any placement obeying the
nesting and ratio conditions has the same dimension; equal gaps keep box
counting simple).  When the truncated ratios of some level sum above one,
every level is rescaled by the maximal sum so the realization fits; the
unscaled products are kept alongside and drive the dimension fitting.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InfeasibleGeometry, InvalidInput, TreeOverflow

__all__ = [
    "MoranSpec", "MoranTree", "IntervalNode", "FitResult", "BoxCountResult",
    "realize", "mu_h_weights", "fit_dimension", "box_count",
]

NODE_CAP = 10_000_000
_DEEP_BREADTH = 16  # breadth cap beyond depth 6 (desk-scale memory)


@dataclass(frozen=True)
class MoranSpec:
    families: Mapping[int, object]
    omega: Sequence[int]
    depth: int
    M: int
    rescale: bool = True
    node_cap: int = NODE_CAP


@dataclass(frozen=True)
class IntervalNode:
    code: tuple
    left: float
    right: float
    length: float           # realized (possibly rescaled) length
    length_unscaled: float  # product of raw contraction ratios


@dataclass
class MoranTree:
    """Realized interval tree; level k arrays are ordered so that the child
    index varies fastest (row-major code order)."""
    depth: int
    breadths: list          # children per node, per level
    lefts: list             # np arrays per level (index 0 = level 1)
    rights: list
    lengths_unscaled: list
    scale: float            # 1.0 when no rescaling was needed
    ratios: list            # raw per-level contraction vectors

    def level_count(self, k: int) -> int:
        return int(self.lefts[k - 1].size)

    def nodes(self, k: int):
        if not 1 <= k <= self.depth:
            raise InvalidInput(f"level must lie in 1..{self.depth}")
        codes = itertools.product(*(range(1, self.breadths[i] + 1) for i in range(k)))
        L, R, U = self.lefts[k - 1], self.rights[k - 1], self.lengths_unscaled[k - 1]
        for idx, code in enumerate(codes):
            yield IntervalNode(code, float(L[idx]), float(R[idx]),
                               float(R[idx] - L[idx]), float(U[idx]))

    def leaves(self) -> np.ndarray:
        """(n, 2) array of deepest-level intervals [l, r)."""
        return np.column_stack([self.lefts[-1], self.rights[-1]])

    def validate(self, atol: float = 1e-12):
        """Nesting, disjointness and exact ratio checks on every level."""
        for k in range(1, self.depth + 1):
            L, R = self.lefts[k - 1], self.rights[k - 1]
            J = self.breadths[k - 1]
            if np.any(R < L - atol):
                raise AssertionError(f"inverted interval at level {k}")
            order = np.argsort(L)
            if np.any(L[order][1:] < R[order][:-1] - atol):
                raise AssertionError(f"overlapping intervals at level {k}")
            if k > 1:
                pl = np.repeat(self.lefts[k - 2], J)
                pr = np.repeat(self.rights[k - 2], J)
                if np.any(L < pl - atol) or np.any(R > pr + atol):
                    raise AssertionError(f"child escapes parent at level {k}")
                pw = pr - pl
            else:
                pw = np.ones_like(L)
            ratio = (R - L) / pw
            expect = np.tile(self.ratios[k - 1] / self.scale, ratio.size // J)
            if not np.allclose(ratio, expect, atol=atol):
                raise AssertionError(f"length ratios drift at level {k}")


def _level_ratios(spec: MoranSpec, breadth: int) -> list:
    out = []
    for k in range(spec.depth):
        symbol = spec.omega[k]
        fam = spec.families[symbol]
        trunc = fam.truncate(breadth)
        out.append(np.asarray(trunc.gammas, dtype=float))
    return out


def realize(spec: MoranSpec) -> MoranTree:
    """Build the interval tree level by level.

    Children are placed from the parent's left edge with J-1 equal gaps
    absorbing the slack (single children sit at the left edge).  Raises
    TreeOverflow past the node cap and InfeasibleGeometry when ratios
    overflow the parent and rescaling is disabled.
    """
    if spec.depth < 1:
        raise InvalidInput("depth must be >= 1")
    if len(spec.omega) < spec.depth:
        raise InvalidInput("driving sequence shorter than the depth")
    missing = sorted({s for s in spec.omega[:spec.depth]} - set(spec.families))
    if missing:
        raise InvalidInput(f"no family for symbols {missing}")
    breadth = spec.M
    if spec.depth > 6 and breadth > _DEEP_BREADTH:
        warnings.warn(f"breadth truncated from {breadth} to {_DEEP_BREADTH} "
                      f"beyond depth 6")
        breadth = _DEEP_BREADTH
    total = 0
    count = 1
    for _ in range(spec.depth):
        count *= breadth
        total += count
        if total > spec.node_cap:
            raise TreeOverflow(f"{total} nodes exceed the cap {spec.node_cap}")

    ratios = _level_ratios(spec, breadth)
    sums = [float(r.sum()) for r in ratios]
    s_max = max(sums)
    scale = 1.0
    if s_max > 1.0:
        if not spec.rescale:
            raise InfeasibleGeometry(
                f"level ratios sum to {s_max:.6g} > 1 and rescaling is off")
        scale = s_max

    lefts, rights, lengths_u = [], [], []
    pl = np.zeros(1)
    pr = np.ones(1)
    pu = np.ones(1)
    for k in range(spec.depth):
        r_scaled = ratios[k] / scale
        J = r_scaled.size
        starts = np.concatenate(([0.0], np.cumsum(r_scaled)[:-1]))
        if J > 1:
            gap = (1.0 - r_scaled.sum()) / (J - 1)
            starts = starts + gap * np.arange(J)
        w = pr - pl
        newl = (pl[:, None] + w[:, None] * starts[None, :]).ravel()
        newr = newl + (w[:, None] * r_scaled[None, :]).ravel()
        newu = (pu[:, None] * ratios[k][None, :]).ravel()
        lefts.append(newl)
        rights.append(newr)
        lengths_u.append(newu)
        pl, pr, pu = newl, newr, newu
    return MoranTree(spec.depth, [r.size for r in ratios], lefts, rights,
                     lengths_u, scale, ratios)


# --------------------------------------------------------------------------
# natural measure weights
# --------------------------------------------------------------------------

def mu_h_weights(tree: MoranTree, h: float) -> dict:
    """Weights c_sigma^h / sum_{|sigma'|=k} c_sigma'^h for every node, keyed
    by code.  Per depth they sum to one and each parent's weight equals the
    sum of its children's (Kolmogorov consistency)."""
    out: dict[tuple, float] = {}
    for k in range(1, tree.depth + 1):
        powered = tree.lengths_unscaled[k - 1] ** h
        norm = powered.sum()
        codes = itertools.product(*(range(1, tree.breadths[i] + 1) for i in range(k)))
        for idx, code in enumerate(codes):
            out[code] = float(powered[idx] / norm)
    return out


# --------------------------------------------------------------------------
# geometric dimension estimators
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FitResult:
    levels: tuple           # (level, s_level) pairs
    s_fit: float            # zero at the deepest level
    s_extrapolated: float   # Aitken acceleration of the level sequence


def _covering_zero(log_lengths: np.ndarray, xtol: float = 1e-14) -> float:
    """s with sum exp(s * log_lengths) = 1 (strictly decreasing in s)."""
    if log_lengths.size == 1:
        return 0.0

    def g(s):
        return float(np.exp(s * log_lengths).sum()) - 1.0

    lo, hi = 0.0, 1.0
    while g(hi) > 0.0:
        hi *= 2.0
        if hi > 1e6:
            raise InvalidInput("covering sum has no zero below 1e6")
    for _ in range(200):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        if g(mid) > 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def fit_dimension(tree: MoranTree) -> FitResult:
    """Per-level zeros s_k of sum |J_sigma|^s = 1 over the unscaled lengths,
    plus an Aitken-accelerated limit.  For exact self-similar trees every
    level gives the same value."""
    levels = []
    for k in range(1, tree.depth + 1):
        s_k = _covering_zero(np.log(tree.lengths_unscaled[k - 1]))
        levels.append((k, s_k))
    s_fit = levels[-1][1]
    s_ext = s_fit
    if len(levels) >= 3:
        s0, s1, s2 = (levels[-3][1], levels[-2][1], levels[-1][1])
        denom = (s2 - s1) - (s1 - s0)
        if abs(denom) > 1e-14:
            cand = s2 - (s2 - s1) ** 2 / denom
            if math.isfinite(cand):
                s_ext = cand
    return FitResult(tuple(levels), s_fit, s_ext)


@dataclass(frozen=True)
class BoxCountResult:
    epsilons: tuple
    counts: tuple
    slope: float | None     # None when undefined (some count is zero)
    intercept: float | None
    ok: bool


def _as_intervals(tree_or_intervals) -> np.ndarray:
    if isinstance(tree_or_intervals, MoranTree):
        return tree_or_intervals.leaves()
    arr = np.asarray(list(tree_or_intervals), dtype=float)
    if arr.size == 0:
        return arr.reshape(0, 2)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidInput("expected (n, 2) interval array")
    return arr


def box_count(tree_or_intervals, epsilons: Sequence[float]) -> BoxCountResult:
    """N(eps) = number of eps-grid cells meeting any leaf interval, and the
    least-squares slope of log N against log(1/eps)."""
    iv = _as_intervals(tree_or_intervals)
    eps = [float(e) for e in epsilons]
    if any(e <= 0 for e in eps):
        raise InvalidInput("epsilons must be positive")
    if iv.shape[0] == 0:
        return BoxCountResult(tuple(eps), tuple(0 for _ in eps), None, None, False)
    order = np.argsort(iv[:, 0])
    lefts, rights = iv[order, 0], iv[order, 1]
    counts = []
    for e in eps:
        first = np.floor(lefts / e).astype(np.int64)
        last = np.ceil(rights / e).astype(np.int64) - 1
        last = np.maximum(last, first)
        # drop cells already counted by earlier (left-of) intervals
        prev_last = np.concatenate(([np.int64(-2**62)],
                                    np.maximum.accumulate(last)[:-1]))
        eff_first = np.maximum(first, prev_last + 1)
        counts.append(int(np.maximum(0, last - eff_first + 1).sum()))
    ok = len(eps) >= 2 and all(c > 0 for c in counts)
    slope = intercept = None
    if ok:
        x = np.log(1.0 / np.asarray(eps))
        y = np.log(np.asarray(counts, dtype=float))
        slope_f, intercept_f = np.polyfit(x, y, 1)
        slope, intercept = float(slope_f), float(intercept_f)
    return BoxCountResult(tuple(eps), tuple(counts), slope, intercept, ok)
