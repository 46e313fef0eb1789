"""Invariant densities and digit-frequency vectors of expansion maps.

Closed forms: the Gauss measure dx/((1+x) log 2) with its digit
probabilities, and the beta-expansion invariant density, a step function
built from the forward orbit of 1 with weights beta^-n.  Everything else
goes through an Ulam discretization of the transfer operator on a uniform
grid: the matrix rows are Lebesgue transition probabilities assembled from
branch inverses, and the invariant density is the fixed point of power
iteration.

The generic equilibrium-measure route (Holder potentials) is a weighted
Ulam collocation with weights e^phi on branch inverses; its growth
conditions (summable weights over preimages, Holder modulus controlled by
the expansion) are documented requirements on the caller's potential, not
mechanically checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Mapping

import numpy as np

from .algebraic import QuadraticIrrational
from .errors import InvalidInput, NonConvergent
from .expansions import FSpec
from .pressure import FrequencyVector

__all__ = [
    "DensityApprox", "Branch", "BranchMap",
    "branch_map_mary", "branch_map_beta", "branch_map_gauss",
    "branch_map_bolyai", "branch_map_from_fspec",
    "gauss_measure", "gauss_digit_freq",
    "beta_orbit", "parry_normalizer", "parry_density", "parry_step_density",
    "beta_digit_frequencies",
    "ulam_invariant_density", "ulam_equilibrium_density", "eta_phi",
]

LOG2 = math.log(2.0)


# --------------------------------------------------------------------------
# gridded densities
# --------------------------------------------------------------------------

@dataclass
class DensityApprox:
    """Piecewise-constant probability density on a uniform grid of [0, 1)."""
    edges: np.ndarray    # N+1 cell edges
    values: np.ndarray   # N per-cell density values
    kind: str            # "closed_form" | "ulam" | "ulam_phi"

    @property
    def n_cells(self) -> int:
        return int(self.values.size)

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    def total(self) -> float:
        return float(self.values @ self.widths)

    def integral(self, a: float, b: float) -> float:
        """Exact integral of the step density over [a, b] within [0, 1]."""
        a, b = max(0.0, a), min(1.0, b)
        if b <= a:
            return 0.0
        left = np.maximum(self.edges[:-1], a)
        right = np.minimum(self.edges[1:], b)
        overlap = np.maximum(0.0, right - left)
        return float(self.values @ overlap)

    def at(self, x: float) -> float:
        i = min(np.searchsorted(self.edges, x, side="right") - 1,
                self.n_cells - 1)
        return float(self.values[max(i, 0)])

    def l1_to_function(self, fn: Callable[[np.ndarray], np.ndarray],
                       subdiv: int = 8) -> float:
        """integral |density - fn| dx by per-cell midpoint subsampling."""
        w = self.widths
        offs = (np.arange(subdiv) + 0.5) / subdiv
        xs = self.edges[:-1][:, None] + w[:, None] * offs[None, :]
        diff = np.abs(self.values[:, None] - fn(xs))
        return float((diff.mean(axis=1) * w).sum())

    @classmethod
    def from_function(cls, fn, N: int, kind: str = "closed_form"):
        edges = np.linspace(0.0, 1.0, N + 1)
        offs = (np.arange(16) + 0.5) / 16
        xs = edges[:-1][:, None] + np.diff(edges)[:, None] * offs[None, :]
        vals = np.asarray(fn(xs)).mean(axis=1)
        return cls(edges, vals, kind)


# --------------------------------------------------------------------------
# closed forms: Gauss measure
# --------------------------------------------------------------------------

def gauss_measure(a: float, b: float) -> float:
    """Gauss measure of [a, b) in [0, 1): log((1+b)/(1+a)) / log 2."""
    if not (0.0 <= a < b <= 1.0):
        raise InvalidInput("need 0 <= a < b <= 1")
    return math.log((1.0 + b) / (1.0 + a)) / LOG2


def gauss_digit_freq(k: int) -> float:
    """Asymptotic frequency of digit k in continued fractions:
    log((k+1)^2 / (k(k+2))) / log 2."""
    if k < 1:
        raise InvalidInput("continued-fraction digits start at 1")
    return math.log((k + 1.0) ** 2 / (k * (k + 2.0))) / LOG2


# --------------------------------------------------------------------------
# closed forms: beta-expansion invariant density (orbit-of-1 step function)
# --------------------------------------------------------------------------

def _orbit_exact(beta, tol: float, max_terms: int) -> list[float]:
    t = beta * 0 + 1  # one, in the arithmetic of beta
    out = []
    bf = float(beta)
    for n in range(max_terms):
        out.append(float(t))
        if bf ** (-(n + 1)) < tol:
            break
        t = beta * t
        fl = t.floor() if isinstance(t, QuadraticIrrational) else math.floor(t)
        t = t - fl
        if (t.is_zero() if isinstance(t, QuadraticIrrational) else t == 0):
            out.append(0.0)
            break
    return out


def _orbit_mpmath(beta: float, tol: float, max_terms: int) -> list[float]:
    import mpmath
    with mpmath.workprec(256):
        t = mpmath.mpf(1)
        b = mpmath.mpf(beta)
        out = []
        for n in range(max_terms):
            out.append(float(t))
            if b ** (-(n + 1)) < tol:
                break
            t = b * t
            t -= mpmath.floor(t)
            if t == 0:
                out.append(0.0)
                break
    return out


def beta_orbit(beta, tol: float = 1e-18, max_terms: int = 1000) -> list[float]:
    """Forward orbit 1, T(1), T^2(1), ... of the beta map, stopping when the
    weight beta^-n drops below tol or the orbit hits 0 (finite orbits)."""
    if isinstance(beta, (Fraction, QuadraticIrrational)):
        return _orbit_exact(beta, tol, max_terms)
    return _orbit_mpmath(float(beta), tol, max_terms)


class StepDensity:
    """The beta invariant density: (1/I) * sum_{n: x < t_n} beta^-n."""

    def __init__(self, orbit: list[float], beta: float):
        self.ts = np.asarray(orbit, dtype=float)
        self.ws = float(beta) ** -np.arange(len(orbit), dtype=float)
        self.normalizer = float(self.ws @ self.ts)

    def at(self, x: float) -> float:
        return float(self.ws[self.ts > x].sum()) / self.normalizer

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        raw = (self.ts[None, :] > x[..., None]) @ self.ws
        return raw / self.normalizer

    def integral(self, a: float, b: float) -> float:
        """nu([a,b]) exactly: sum_n w_n * max(0, min(t_n, b) - a) / I."""
        seg = np.maximum(0.0, np.minimum(self.ts, b) - a)
        return float(self.ws @ seg) / self.normalizer


def parry_step_density(beta, tol: float = 1e-18, max_terms: int = 1000) -> StepDensity:
    return StepDensity(beta_orbit(beta, tol, max_terms), float(beta))


def parry_normalizer(beta, tol: float = 1e-18, max_terms: int = 1000) -> float:
    """I(beta) = integral of the unnormalized step function
    sum_{n: x < T^n 1} beta^-n, which equals sum_n beta^-n * T^n(1)."""
    return parry_step_density(beta, tol, max_terms).normalizer


def parry_density(beta, x: float, tol: float = 1e-18, max_terms: int = 1000) -> float:
    """Invariant density of the beta map at x."""
    if not (0.0 <= x < 1.0):
        raise InvalidInput("x must lie in [0, 1)")
    return parry_step_density(beta, tol, max_terms).at(x)


def beta_digit_frequencies(beta) -> FrequencyVector:
    """eta_j = nu_beta([j/beta, (j+1)/beta) intersect [0,1)) for digits
    j = 0..floor(beta), by exact piecewise integration of the step density."""
    bf = float(beta)
    if not bf > 1 or bf == math.floor(bf):
        raise InvalidInput("beta must be > 1 and not an integer")
    dens = parry_step_density(beta)
    top = int(math.floor(bf))
    eta = {}
    for j in range(top + 1):
        a = j / bf
        b = min((j + 1) / bf, 1.0)
        eta[j] = dens.integral(a, b)
    total = sum(eta.values())
    eta = {j: v / total for j, v in eta.items()}  # remove float roundoff
    return FrequencyVector.finite(eta)


# --------------------------------------------------------------------------
# branch maps for Ulam discretization
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Branch:
    digit: int
    domain: tuple        # x-interval (u, v) the branch acts on
    image: tuple         # y-interval T(domain), inside [0, 1]
    inverse: Callable    # vectorized y -> x on the image interval


@dataclass(frozen=True)
class BranchMap:
    branches: tuple
    label: str
    truncated: bool = False  # countable family cut at finitely many branches

    def intervals(self) -> dict[int, tuple]:
        return {b.digit: b.domain for b in self.branches}


def branch_map_mary(m: int) -> BranchMap:
    if m < 2:
        raise InvalidInput("m must be >= 2")
    branches = [Branch(d, (d / m, (d + 1) / m), (0.0, 1.0),
                       (lambda d: lambda y: (np.asarray(y) + d) / m)(d))
                for d in range(m)]
    return BranchMap(tuple(branches), f"mary({m})")


def branch_map_beta(beta) -> BranchMap:
    b = float(beta)
    if not b > 1 or b == math.floor(b):
        raise InvalidInput("beta must be > 1 and not an integer")
    top = int(math.floor(b))
    branches = []
    for d in range(top):
        branches.append(Branch(d, (d / b, (d + 1) / b), (0.0, 1.0),
                               (lambda d: lambda y: (np.asarray(y) + d) / b)(d)))
    branches.append(Branch(top, (top / b, 1.0), (0.0, b - top),
                           (lambda d: lambda y: (np.asarray(y) + d) / b)(top)))
    return BranchMap(tuple(branches), f"beta({b:.12g})")


def branch_map_gauss(max_digit: int = 200) -> BranchMap:
    if max_digit < 1:
        raise InvalidInput("need at least one branch")
    branches = [Branch(k, (1.0 / (k + 1), 1.0 / k), (0.0, 1.0),
                       (lambda k: lambda y: 1.0 / (k + np.asarray(y)))(k))
                for k in range(1, max_digit + 1)]
    return BranchMap(tuple(branches), f"gauss(k<={max_digit})", truncated=True)


def branch_map_bolyai(m: int) -> BranchMap:
    if m < 2:
        raise InvalidInput("m must be >= 2")
    branches = []
    for d in range(2 ** m - 1):
        u = (d + 1.0) ** (1.0 / m) - 1.0
        v = (d + 2.0) ** (1.0 / m) - 1.0
        branches.append(Branch(d, (u, min(v, 1.0)), (0.0, 1.0),
                               (lambda d: lambda y: (np.asarray(y) + d + 1.0) ** (1.0 / m) - 1.0)(d)))
    return BranchMap(tuple(branches), f"bolyai({m})")


def branch_map_from_fspec(fspec: FSpec, max_digit: int = 200) -> BranchMap:
    """Branches of T(x) = frac(f^{-1}(x)) via the forward map x = f(d + y).

    Uses fspec.branch_intervals for the domains when provided, else derives
    them from the inverse map; the forward map is inverted by bisection
    when no closed form is available."""
    finv = fspec.inverse_map
    increasing = fspec.monotonicity == "increasing"
    if fspec.digit_range is not None:
        digits = list(range(fspec.digit_range)) if increasing \
            else list(range(1, fspec.digit_range + 1))
    else:
        digits = list(range(1, max_digit + 1)) if not increasing \
            else list(range(max_digit))

    def forward(target):  # solve finv(x) = target on [0, 1]
        lo = np.zeros_like(np.asarray(target, dtype=float))
        hi = np.ones_like(lo)
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            val = np.asarray(finv(mid), dtype=float)
            go_right = (val < target) if increasing else (val > target)
            lo = np.where(go_right, mid, lo)
            hi = np.where(go_right, hi, mid)
        return 0.5 * (lo + hi)

    branches = []
    for pos, d in enumerate(digits):
        if fspec.branch_intervals is not None:
            lo, hi = fspec.branch_intervals[pos]
        else:
            lo, hi = float(forward(float(d))), float(forward(float(d + 1)))
        dom = (max(min(lo, hi), 0.0), min(max(lo, hi), 1.0))
        if dom[1] <= dom[0]:
            continue
        e0 = float(finv(dom[0] + 1e-12)) - d
        e1 = float(finv(dom[1] - 1e-12)) - d
        img = (max(min(e0, e1), 0.0), min(max(e0, e1), 1.0))
        if img[1] - img[0] > 0.999:
            img = (0.0, 1.0)
        branches.append(Branch(d, dom, img,
                               (lambda d: lambda y: forward(np.asarray(y) + d))(d)))
    truncated = fspec.digit_range is None
    return BranchMap(tuple(branches), f"fspec({fspec.name})", truncated=truncated)


# --------------------------------------------------------------------------
# Ulam discretization
# --------------------------------------------------------------------------

def _assemble_ulam(branch_map: BranchMap, N: int) -> np.ndarray:
    """Row-stochastic matrix P[i, j] ~ P(cell_i -> cell_j) under the map.

    P[i, j] = lebesgue(cell_i intersect g_b(cell_j)) / width, accumulated
    over branches.  Rows left uncovered by the truncated branch set are
    folded to the uniform distribution; partially covered rows are
    renormalized.
    """
    edges = np.linspace(0.0, 1.0, N + 1)
    w = 1.0 / N
    P = np.zeros((N, N))
    for br in branch_map.branches:
        c, d = br.image
        yl = np.maximum(edges[:-1], c)
        yr = np.minimum(edges[1:], d)
        valid = np.nonzero(yr > yl)[0]
        if valid.size == 0:
            continue
        xa = np.asarray(br.inverse(yl[valid]), dtype=float)
        xb = np.asarray(br.inverse(yr[valid]), dtype=float)
        xl = np.minimum(xa, xb)
        xr = np.maximum(xa, xb)
        il = np.clip(np.searchsorted(edges, xl, side="right") - 1, 0, N - 1)
        ir = np.clip(np.searchsorted(edges, xr, side="left") - 1, 0, N - 1)
        same = il == ir
        j_same = valid[same]
        np.add.at(P, (il[same], j_same), (xr[same] - xl[same]) / w)
        for idx in np.nonzero(~same)[0]:
            j = valid[idx]
            lo_i, hi_i = il[idx], ir[idx]
            P[lo_i, j] += (edges[lo_i + 1] - xl[idx]) / w
            P[hi_i, j] += (xr[idx] - edges[hi_i]) / w
            if hi_i - lo_i > 1:
                P[lo_i + 1:hi_i, j] += 1.0
    sums = P.sum(axis=1)
    uncovered = sums < 1e-12
    if uncovered.any():
        P[uncovered, :] = 1.0 / N
        sums[uncovered] = 1.0
    P /= sums[:, None]
    return P


def ulam_invariant_density(branch_map: BranchMap, N: int = 1024,
                           max_iterations: int = 10000,
                           residual: float = 1e-13) -> DensityApprox:
    """Invariant density of the map by Ulam's method: assemble the
    row-stochastic cell-transition matrix and power-iterate the mass vector
    to its fixed point (dominant eigenvalue 1 by construction)."""
    if N < 64:
        raise InvalidInput("grid too coarse, need N >= 64")
    P = _assemble_ulam(branch_map, N)
    v = np.full(N, 1.0 / N)
    for _ in range(max_iterations):
        v_next = v @ P
        v_next /= v_next.sum()
        err = float(np.abs(v_next - v).sum())
        v = v_next
        if err < residual:
            break
    else:
        raise NonConvergent(
            f"power iteration stalled above residual {residual:g} "
            "(map may violate the expansiveness conditions)")
    edges = np.linspace(0.0, 1.0, N + 1)
    return DensityApprox(edges, v * N, "ulam")


def ulam_fixed_point_defect(branch_map: BranchMap, density: DensityApprox) -> float:
    """L1 defect of the density under one more application of the
    discretized operator."""
    P = _assemble_ulam(branch_map, density.n_cells)
    v = density.values / density.n_cells
    return float(np.abs(v @ P - v).sum())


def ulam_equilibrium_density(branch_map: BranchMap, phi: Callable, N: int = 512,
                             max_iterations: int = 20000,
                             residual: float = 1e-12, subdiv: int = 4):
    """Weighted-Ulam approximation of the equilibrium state of a potential.

    Collocation of the weighted transfer operator (weights e^phi at branch
    inverses of cell sample points, deposited with linear cell weights to
    suppress grid aliasing); the equilibrium measure's cell masses are the
    product of the right eigenvector (eigenfunction) and the left
    eigenvector (eigenmeasure), normalized.  Returns (DensityApprox,
    eigenvalue estimate).  N and subdiv are the accuracy knobs; no
    spectral-gap certification is attempted, and the summable-weight and
    Holder growth conditions on phi are the caller's responsibility.
    """
    edges = np.linspace(0.0, 1.0, N + 1)
    offs = (np.arange(subdiv) + 0.5) / subdiv
    ys = (edges[:-1][:, None] + np.diff(edges)[:, None] * offs[None, :]).ravel()
    rows = np.repeat(np.arange(N), subdiv)
    B = np.zeros((N, N))
    for br in branch_map.branches:
        c, d = br.image
        inside = (ys >= c) & (ys <= d)
        if not inside.any():
            continue
        x = np.asarray(br.inverse(ys[inside]), dtype=float)
        weight = np.exp(np.asarray(phi(x), dtype=float)) / subdiv
        # cloud-in-cell deposit: split each sample between adjacent cells
        pos = np.clip(x * N - 0.5, 0.0, N - 1.0)
        i0 = np.floor(pos).astype(int)
        f1 = pos - i0
        i1 = np.minimum(i0 + 1, N - 1)
        r = rows[inside]
        np.add.at(B, (r, i0), weight * (1.0 - f1))
        np.add.at(B, (r, i1), weight * f1)
    f = np.ones(N)
    lam = 1.0
    for _ in range(max_iterations):
        f_next = B @ f
        lam = float(np.abs(f_next).sum() / np.abs(f).sum())
        f_next = f_next / np.abs(f_next).sum() * N
        err = float(np.abs(f_next - f).sum() / N)
        f = f_next
        if err < residual:
            break
    else:
        raise NonConvergent("weighted power iteration did not settle")
    g = np.ones(N)
    for _ in range(max_iterations):
        g_next = g @ B
        g_next = g_next / np.abs(g_next).sum() * N
        if float(np.abs(g_next - g).sum() / N) < residual:
            g = g_next
            break
        g = g_next
    masses = f * g
    masses = np.maximum(masses, 0.0)
    masses /= masses.sum()
    return DensityApprox(edges, masses * N, "ulam_phi"), lam


# --------------------------------------------------------------------------
# frequency vectors from densities
# --------------------------------------------------------------------------

def eta_phi(density: DensityApprox, branch_intervals) -> FrequencyVector:
    """Digit-frequency vector eta_i = measure(I_i) of a density over branch
    intervals; for truncated countable branch sets the missing mass is
    recorded as the tail bound."""
    if abs(density.total() - 1.0) > 1e-6:
        raise InvalidInput("density is not normalized")
    truncated = False
    if isinstance(branch_intervals, BranchMap):
        truncated = branch_intervals.truncated
        branch_intervals = branch_intervals.intervals()
    if not isinstance(branch_intervals, Mapping):
        branch_intervals = {i: iv for i, iv in enumerate(branch_intervals)}
    eta = {d: density.integral(lo, hi) for d, (lo, hi) in branch_intervals.items()}
    if truncated:
        return FrequencyVector.countable_vector(eta)
    total = sum(eta.values())
    return FrequencyVector.finite({d: v / total for d, v in eta.items()})
