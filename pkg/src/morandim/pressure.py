"""Pressure function of a non-stationary Moran construction and its zero.

P(t) = sum_i eta_i * log S_i(t), where S_i is the contraction series of the
family attached to digit i and eta is a stochastic frequency vector.  P is
strictly decreasing, convex and continuous on (theta, infinity) and has a
unique zero h, which is the Hausdorff dimension of the associated interval
fractal.  This module evaluates P with propagated error bounds, locates h
(bracket scan, bisection, one Newton polish), builds the finite-truncation
ladder h_M, evaluates truncated covering sums in product form, and solves
the finite digit-driven dimension equation delta(x; k, n).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .errors import (
    Divergent, InsufficientDepth, InvalidInput, NoZero, UnboundedLogBound,
)
from .expansions import DigitSequence, DigitStats
from .families import ExplicitFamily, SeriesValue

__all__ = [
    "FrequencyVector", "PressureProblem", "PressureValue", "SolveResult",
    "pressure", "truncated_c_k", "solve_h", "solve_h_M", "ladder",
    "covering_sum", "solve_delta_kn", "solve_delta_certified",
]

_SUM_TOL = 1e-12


class FrequencyVector:
    """Stochastic vector of digit frequencies.

    Finite mode: the recorded entries sum to one.  Countable mode: the
    recorded entries cover digits up to an index K and tail_mass bounds the
    frequency mass beyond them.
    """

    def __init__(self, entries: Mapping[int, float], countable: bool = False,
                 tail_mass: float = 0.0):
        items = sorted((int(d), float(v)) for d, v in dict(entries).items())
        if not items:
            raise InvalidInput("frequency vector is empty")
        self.digits = tuple(d for d, _ in items)
        self.values = np.asarray([v for _, v in items], dtype=float)
        if np.any(self.values < 0):
            raise InvalidInput("frequencies must be nonnegative")
        total = float(self.values.sum())
        self.countable = bool(countable)
        self.tail_mass = float(tail_mass)
        if not countable:
            if abs(total - 1.0) > _SUM_TOL:
                raise InvalidInput(f"frequencies sum to {total}, not 1")
            if tail_mass:
                raise InvalidInput("finite vectors carry no tail mass")
        else:
            if total > 1.0 + _SUM_TOL:
                raise InvalidInput(f"recorded frequencies sum to {total} > 1")
            if self.tail_mass + _SUM_TOL < 1.0 - total:
                raise InvalidInput(
                    "tail_mass does not cover the missing frequency mass")

    @classmethod
    def finite(cls, eta) -> "FrequencyVector":
        """From a mapping digit -> frequency or a sequence over 0..m-1."""
        if isinstance(eta, Mapping):
            return cls(eta)
        return cls({i: v for i, v in enumerate(eta)})

    @classmethod
    def countable_vector(cls, eta: Mapping[int, float], tail_mass: float | None = None):
        total = float(sum(eta.values()))
        if tail_mass is None:
            tail_mass = max(0.0, 1.0 - total)
        return cls(eta, countable=True, tail_mass=tail_mass)

    @property
    def m(self) -> int:
        return len(self.digits)

    @property
    def support(self) -> tuple:
        return tuple(d for d, v in zip(self.digits, self.values) if v > 0)

    def as_dict(self) -> dict[int, float]:
        return {d: float(v) for d, v in zip(self.digits, self.values)}

    def __getitem__(self, digit: int) -> float:
        try:
            return float(self.values[self.digits.index(digit)])
        except ValueError:
            return 0.0

    def __repr__(self):
        head = ", ".join(f"{d}: {v:.6g}" for d, v in list(self.as_dict().items())[:6])
        extra = f", tail<= {self.tail_mass:.3g}" if self.countable else ""
        return f"FrequencyVector({{{head}}}{extra})"


@dataclass(frozen=True)
class PressureValue:
    t: float
    value: float
    error_bound: float


@dataclass(frozen=True)
class SolveResult:
    h: float
    iterations: int
    residual: float
    degenerate: bool = False
    bracket: tuple = ()

    def __float__(self):
        return self.h


class PressureProblem:
    """Families plus frequency vector (plus optional driving sequence).

    Countable-frequency problems additionally need one of:
      * tail_family: a family assumed for every digit beyond the recorded
        ones, which makes the tail contribution exact, or
      * log_S_bound: an explicit uniform bound M on |log S_i(t)|, which
        turns the tail into an error term tail_mass * M.
    """

    def __init__(self, families: Mapping[int, object], eta: FrequencyVector,
                 omega=None, tail_family=None, log_S_bound: float | None = None):
        self.families = dict(families)
        self.eta = eta
        self.omega = tuple(omega.digits if isinstance(omega, DigitSequence) else omega) \
            if omega is not None else None
        self.tail_family = tail_family
        self.log_S_bound = log_S_bound
        missing = [d for d in eta.support if d not in self.families]
        if missing:
            raise InvalidInput(f"no contraction family for digits {missing}")
        if self.omega is not None:
            unknown = sorted({d for d in self.omega if d not in self.families})
            if unknown:
                raise InvalidInput(f"driving sequence uses digits {unknown} "
                                   "with no contraction family")

    @property
    def theta(self) -> float:
        fams = [self.families[d] for d in self.eta.support]
        if self.tail_family is not None:
            fams.append(self.tail_family)
        return max(f.abscissa().theta for f in fams) if fams else 0.0

    def support_families(self):
        for d in self.eta.support:
            yield d, self.eta[d], self.families[d]

    def is_degenerate(self) -> bool:
        """True when every inner series reduces to a single power gamma^t,
        which forces the pressure zero to t = 0."""
        for _, _, fam in self.support_families():
            if not (isinstance(fam, ExplicitFamily) and len(fam) == 1):
                return False
        return self.tail_family is None or (
            isinstance(self.tail_family, ExplicitFamily) and len(self.tail_family) == 1)

    def truncated(self, M: int) -> "PressureProblem":
        fams = {d: f.truncate(M) for d, f in self.families.items()}
        tail = self.tail_family.truncate(M) if self.tail_family is not None else None
        return PressureProblem(fams, self.eta, self.omega, tail, self.log_S_bound)


# --------------------------------------------------------------------------
# pressure evaluation
# --------------------------------------------------------------------------

def _log_series(sv: SeriesValue) -> tuple[float, float]:
    """(midpoint, half-width) of log of an enclosed series value."""
    if sv.value <= 0.0:
        return -math.inf, 0.0
    lo = math.log(sv.value)
    hi = math.log(sv.value + sv.tail_bound)
    return 0.5 * (lo + hi), 0.5 * (hi - lo)


def pressure(problem: PressureProblem, t: float, tol: float = 1e-12) -> PressureValue:
    """P(t) with a certified error bound.

    The finite part carries propagated series-tail errors kept below tol;
    countable problems add the exact tail-family contribution or an error
    term tail_mass * M from the uniform log bound.
    """
    if t <= problem.theta:
        raise Divergent(f"pressure needs t > theta = {problem.theta}")
    value = 0.0
    err = 0.0
    for _, eta_i, fam in problem.support_families():
        sv = fam.series(t, tol)
        mid, half = _log_series(sv)
        if mid == -math.inf:
            return PressureValue(t, -math.inf, 0.0)
        value += eta_i * mid
        err += eta_i * half
    if problem.eta.countable:
        w_tail = max(0.0, 1.0 - float(problem.eta.values.sum()))
        if w_tail > 0.0:
            if problem.tail_family is not None:
                mid, half = _log_series(problem.tail_family.series(t, tol))
                if mid == -math.inf:
                    return PressureValue(t, -math.inf, 0.0)
                value += w_tail * mid
                err += w_tail * half
            elif problem.log_S_bound is not None:
                err += problem.eta.tail_mass * problem.log_S_bound
            else:
                raise UnboundedLogBound(
                    "countable frequency vector without tail family or "
                    "uniform |log S| bound")
    err += 1e-15 * (1.0 + abs(value))
    return PressureValue(t, value, err)


def _pressure_derivative(problem: PressureProblem, t: float) -> float:
    """P'(t) = sum eta_i S_i'(t) / S_i(t) (midpoints; used for polishing)."""
    acc = 0.0
    for _, eta_i, fam in problem.support_families():
        s = fam.series(t, math.inf)
        ds = fam.series_derivative(t, math.inf)
        acc += eta_i * ds.midpoint / s.midpoint
    if problem.eta.countable and problem.tail_family is not None:
        w_tail = max(0.0, 1.0 - float(problem.eta.values.sum()))
        if w_tail > 0:
            s = problem.tail_family.series(t, math.inf)
            ds = problem.tail_family.series_derivative(t, math.inf)
            acc += w_tail * ds.midpoint / s.midpoint
    return acc


def _omega_counts(problem: PressureProblem, k: int) -> dict[int, int]:
    if problem.omega is None:
        raise InvalidInput("problem carries no driving sequence")
    if len(problem.omega) < k:
        raise InsufficientDepth(
            f"driving sequence has {len(problem.omega)} digits, need {k}")
    counts: dict[int, int] = {}
    for d in problem.omega[:k]:
        counts[d] = counts.get(d, 0) + 1
    return counts


def truncated_c_k(problem: PressureProblem, t: float, k: int,
                  tol: float = 1e-12) -> float:
    """c_k(t) = (1/k) log sum_{|sigma|=k} c_sigma^t, via the product form
    with the empirical digit counts of the driving sequence at depth k."""
    if t <= problem.theta:
        raise Divergent(f"needs t > theta = {problem.theta}")
    counts = _omega_counts(problem, k)
    acc = 0.0
    for d, cnt in counts.items():
        mid, _ = _log_series(problem.families[d].series(t, tol))
        acc += (cnt / k) * mid
    return acc


def covering_sum(problem: PressureProblem, t: float, n: int,
                 tol: float = 1e-12) -> float:
    """sum over depth-n codes of c_sigma^t, computed as exp(n * c_n(t));
    the code tree is never enumerated."""
    return math.exp(n * truncated_c_k(problem, t, n, tol))


# --------------------------------------------------------------------------
# zero finding
# --------------------------------------------------------------------------

_BRACKET_EPS = 1e-6
_MAX_DOUBLINGS = 1 << 10


def _solve_zero(f, t_low: float, t_high: float, xtol: float) -> tuple[float, int]:
    """Bisection for a strictly decreasing f with f(t_low) > 0 > f(t_high)."""
    lo, hi = t_low, t_high
    iters = 0
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        iters += 1
        if f(mid) > 0.0:
            lo = mid
        else:
            hi = mid
        if iters > 200:
            break
    return 0.5 * (lo + hi), iters


def solve_h(problem: PressureProblem, tol: float = 1e-12) -> SolveResult:
    """Unique zero of the pressure function, strictly inside (theta, inf).

    Bracket scan upward from theta + 1e-6 doubling t_high until P < 0, then
    bisection to width tol and one Newton polish with the analytic series
    derivative.  Degenerate single-power problems (every series one term)
    report h = 0 with a warning instead of searching.
    """
    if problem.is_degenerate():
        warnings.warn("all contraction series reduce to a single power; "
                      "the pressure zero degenerates to h = 0")
        return SolveResult(0.0, 0, 0.0, degenerate=True)
    theta = problem.theta
    t_low = theta + _BRACKET_EPS
    p_low = pressure(problem, t_low, tol)
    if not p_low.value > 0.0:
        raise NoZero(
            f"P({t_low}) = {p_low.value:.3g} <= 0: no positive pressure on "
            "the searchable range (summability assumption violated)")
    t_high = max(1.0, 2.0 * t_low)
    doublings = 0
    while pressure(problem, t_high, tol).value >= 0.0:
        t_high *= 2.0
        doublings += 1
        if doublings > _MAX_DOUBLINGS:
            raise NoZero("pressure never became negative while doubling t")

    def f(t):
        return pressure(problem, t, tol).value

    h, iters = _solve_zero(f, t_low, t_high, tol)
    # one Newton step sharpens the bisection midpoint to machine precision
    try:
        deriv = _pressure_derivative(problem, h)
        if deriv < 0.0 and math.isfinite(deriv):
            step = -f(h) / deriv
            if abs(step) < max(1e-3, 10 * tol):
                h = min(max(h + step, t_low), t_high)
                iters += 1
    except (Divergent, OverflowError):
        pass
    residual = abs(f(h))
    return SolveResult(h, iters, residual, bracket=(t_low, t_high))


def solve_h_M(problem: PressureProblem, M: int, tol: float = 1e-12) -> SolveResult:
    """Zero h_M of the M-term truncated pressure (families cut to their
    first M contractions).  h_M is nondecreasing in M and converges to h."""
    if M < 1:
        raise InvalidInput("M must be >= 1")
    return solve_h(problem.truncated(M), tol)


def ladder(problem: PressureProblem, M_list: Sequence[int],
           tol: float = 1e-12) -> list[tuple[int, SolveResult]]:
    """h_M for each M in M_list (sorted ascending)."""
    return [(int(M), solve_h_M(problem, int(M), tol)) for M in sorted(M_list)]


# --------------------------------------------------------------------------
# finite digit-driven dimension equations
# --------------------------------------------------------------------------

def _delta_digits(eta, k: int) -> list[tuple[int, float]]:
    if hasattr(eta, "as_dict"):
        eta = eta.as_dict()
    items = sorted((int(d), float(v)) for d, v in dict(eta).items() if v > 0)
    if len(items) < k:
        raise InvalidInput(f"only {len(items)} positive frequencies, need k={k}")
    return items[:k]


def _solve_decreasing(f, label: str, xtol: float = 1e-13) -> SolveResult:
    t_low = 1e-9
    v_low = f(t_low)
    if v_low < 0.0:
        raise NoZero(f"{label}: negative at t = {t_low:.1e}, no zero on (0, inf)")
    t_high = 1.0
    doublings = 0
    while f(t_high) >= 0.0:
        t_high *= 2.0
        doublings += 1
        if doublings > 64:
            raise NoZero(f"{label}: never became negative")
    root, iters = _solve_zero(f, t_low, t_high, xtol)
    return SolveResult(root, iters, abs(f(root)), bracket=(t_low, t_high))


def solve_delta_kn(stats: DigitStats, eta_phi, k: int, n: int) -> SolveResult:
    """Zero of the ((k, n)-truncated) digit-driven dimension equation:

        sum_{i<=k} eta_i log sum_{j<=n} (eta_i/N_i * 2^(-R_i(j)))^t = 0

    over the first k positive-frequency digits, with counts and
    stabilization indices read from the recorded sequence.
    """
    stats.require_depth(n)
    items = _delta_digits(eta_phi, k)
    rows = []
    for digit, eta_i in items:
        N_i = stats.stabilization_index(digit, eta_i)
        c = eta_i / N_i
        R = stats.R(digit)[:n]
        rows.append((eta_i, math.log(c) - R * math.log(2.0)))
    if n == 1:
        warnings.warn("single-term inner sums: the truncated dimension "
                      "equation degenerates to delta = 0")
        return SolveResult(0.0, 0, 0.0, degenerate=True)

    def f(t):
        acc = 0.0
        for eta_i, log_gamma in rows:
            acc += eta_i * math.log(np.exp(t * log_gamma).sum())
        return acc

    return _solve_decreasing(f, f"delta(x; k={k}, n={n})")


def solve_delta_certified(stats: DigitStats, eta_phi, k: int) -> tuple[float, float]:
    """Enclosure of the full-series digit-driven dimension delta(x; k).

    The inner series use the whole recorded prefix plus the certified
    geometric tail majorant; the returned pair brackets the true zero
    (lower zero from series lower bounds, upper zero from upper bounds).
    """
    items = _delta_digits(eta_phi, k)
    fams = []
    for digit, eta_i in items:
        N_i = stats.stabilization_index(digit, eta_i)
        if N_i >= stats.n:
            raise InsufficientDepth(
                f"digit {digit} not stabilized within recorded depth")
        from .families import DigitDrivenFamily
        fams.append((eta_i, DigitDrivenFamily(stats.R(digit), digit,
                                              "phi_scaled", eta_i, N_i)))

    def f_low(t):
        return sum(e * math.log(f.series(t, math.inf).value) for e, f in fams)

    def f_high(t):
        return sum(e * math.log(f.series(t, math.inf).upper) for e, f in fams)

    lo = _solve_decreasing(f_low, "delta lower").h
    hi = _solve_decreasing(f_high, "delta upper").h
    return lo, hi
