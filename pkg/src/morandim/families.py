"""Infinite positive contraction vectors and their power series.

A family represents gamma_1, gamma_2, ... with sup_j gamma_j < 1 and
sum_j gamma_j < infinity.  The quantity everything else is built on is
S(t) = sum_j gamma_j^t, evaluated with a certified bound on the omitted
tail: geometric families in closed form (no tail), explicit finite vectors
exactly, and digit-driven families by summing the recorded prefix and
majorizing the tail through the frequency-stabilization guarantee
R_i(j) > j*eta_i/2 beyond the stabilization index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import Divergent, InsufficientDepth, InvalidInput, TailNotCertifiable
from .expansions import DigitStats

__all__ = [
    "SeriesValue", "Abscissa", "ExplicitFamily", "GeometricFamily",
    "DigitDrivenFamily", "series_S", "series_S_derivative", "abscissa",
    "build_tilde_family", "phi_scaled_sum_bound",
]

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class SeriesValue:
    """Enclosure of an infinite series: the true sum lies in
    [value, value + tail_bound]."""
    value: float
    tail_bound: float
    terms_used: int

    @property
    def upper(self) -> float:
        return self.value + self.tail_bound

    @property
    def midpoint(self) -> float:
        return self.value + 0.5 * self.tail_bound


@dataclass(frozen=True)
class Abscissa:
    theta: float
    case: str | None  # "C1": series diverges at theta, "C2": converges


class ExplicitFamily:
    """A finite contraction vector gamma_1..gamma_J."""

    def __init__(self, gammas):
        g = np.asarray(list(gammas), dtype=float)
        if g.size == 0:
            raise InvalidInput("family needs at least one contraction")
        if np.any(g <= 0):
            raise InvalidInput("contractions must be positive")
        if np.any(g >= 1):
            raise InvalidInput("contractions must be < 1")
        self.gammas = g
        self._log = np.log(g)

    def __len__(self):
        return int(self.gammas.size)

    @property
    def sup_gamma(self) -> float:
        return float(self.gammas.max())

    def series(self, t: float, tol: float = 1e-12) -> SeriesValue:
        if t <= 0:
            raise Divergent("finite families are evaluated on t > 0 only")
        return SeriesValue(float(np.exp(t * self._log).sum()), 0.0, len(self))

    def series_derivative(self, t: float, tol: float = 1e-12) -> SeriesValue:
        if t <= 0:
            raise Divergent("finite families are evaluated on t > 0 only")
        val = float((np.exp(t * self._log) * self._log).sum())
        return SeriesValue(val, 0.0, len(self))

    def abscissa(self) -> Abscissa:
        return Abscissa(0.0, "C2")

    def sum_gamma(self) -> SeriesValue:
        return self.series(1.0)

    def truncate(self, M: int) -> "ExplicitFamily":
        return ExplicitFamily(self.gammas[:M])

    def gamma(self, j: int) -> float:
        return float(self.gammas[j - 1])

    def __repr__(self):
        return f"ExplicitFamily({list(np.round(self.gammas, 6))})"


class GeometricFamily:
    """gamma_j = a * r^j for j >= 1; series in closed form with zero tail."""

    def __init__(self, a: float, r: float):
        if not (a > 0):
            raise InvalidInput("a must be positive")
        if not (0 < r < 1):
            raise InvalidInput("r must lie in (0, 1)")
        if a * r >= 1:
            raise InvalidInput("sup gamma = a*r must be < 1")
        self.a = float(a)
        self.r = float(r)

    @property
    def sup_gamma(self) -> float:
        return self.a * self.r

    def series(self, t: float, tol: float = 1e-12) -> SeriesValue:
        if t <= 0:
            raise Divergent("geometric series diverges for t <= 0")
        one_minus_u = -math.expm1(t * math.log(self.r))
        # (a*r)**t, not a**t * r**t: the latter is inf*0 for huge t
        val = (self.a * self.r) ** t / one_minus_u
        return SeriesValue(val, 0.0, 0)

    def series_derivative(self, t: float, tol: float = 1e-12) -> SeriesValue:
        if t <= 0:
            raise Divergent("geometric series diverges for t <= 0")
        ln_a, ln_r = math.log(self.a), math.log(self.r)
        u = self.r ** t
        s = self.series(t).value
        val = s * ln_a + (self.a * self.r) ** t * ln_r / (1.0 - u) ** 2
        return SeriesValue(val, 0.0, 0)

    def abscissa(self) -> Abscissa:
        return Abscissa(0.0, "C1")

    def sum_gamma(self) -> SeriesValue:
        return self.series(1.0)

    def truncate(self, M: int) -> ExplicitFamily:
        return ExplicitFamily(self.a * self.r ** np.arange(1, M + 1))

    def gamma(self, j: int) -> float:
        return self.a * self.r ** j

    def __repr__(self):
        return f"GeometricFamily(a={self.a}, r={self.r})"


class DigitDrivenFamily:
    """Contractions read off a digit prefix: gamma_j = c * 2^(-R_i(j)).

    scheme "simple" uses c = 1/2 (a count-penalized rate for digit i);
    scheme "phi_scaled" uses c = eta_i / N_i, the frequency of digit i over
    its stabilization index.  Beyond the recorded depth n the entries are
    unknown but bounded by c * 2^(-j*eta_i/2), valid once j exceeds the
    stabilization index; series tails are certified through that majorant
    and refused when N_i >= n.
    """

    def __init__(self, counts, digit: int, scheme: str = "simple",
                 eta_i: float | None = None, N_i: int | None = None):
        R = np.asarray(counts, dtype=np.int64)
        if R.size == 0:
            raise InvalidInput("empty count sequence")
        if np.any(np.diff(R) < 0) or R[0] < 0:
            raise InvalidInput("counts must be nondecreasing and nonnegative")
        if scheme not in ("simple", "phi_scaled"):
            raise InvalidInput("scheme must be 'simple' or 'phi_scaled'")
        if scheme == "phi_scaled":
            if eta_i is None or N_i is None:
                raise InvalidInput("phi_scaled needs eta_i and N_i")
            if not (0 < eta_i <= 1):
                raise InvalidInput("eta_i must lie in (0, 1]")
            if N_i < 2:
                raise InvalidInput("N_i must be >= 2")
        self.R = R
        self.n = int(R.size)
        self.digit = int(digit)
        self.scheme = scheme
        self.eta_i = None if eta_i is None else float(eta_i)
        self.N_i = None if N_i is None else int(N_i)
        self.c = 0.5 if scheme == "simple" else self.eta_i / self.N_i
        self._log_gamma = math.log(self.c) - R * _LN2

    @property
    def sup_gamma(self) -> float:
        return float(np.exp(self._log_gamma.max()))

    def gamma(self, j: int) -> float:
        if not 1 <= j <= self.n:
            raise InvalidInput(f"recorded depth is {self.n}")
        return float(np.exp(self._log_gamma[j - 1]))

    def _tail_rate(self, t: float) -> float:
        """q with gamma_j^t <= c^t q^j for j beyond max(N_i, n)."""
        return 2.0 ** (-t * self.eta_i / 2.0)

    def _require_certifiable(self):
        if self.eta_i is None:
            raise TailNotCertifiable(
                "no target frequency recorded; tail majorant unavailable")
        if self.N_i is not None and self.N_i >= self.n:
            raise TailNotCertifiable(
                f"stabilization index {self.N_i} >= recorded depth {self.n}")

    def series(self, t: float, tol: float = 1e-12) -> SeriesValue:
        if t <= 0:
            raise Divergent("digit-driven series diverges for t <= 0")
        self._require_certifiable()
        val = float(np.exp(t * self._log_gamma).sum())
        q = self._tail_rate(t)
        tail = self.c ** t * q ** (self.n + 1) / (1.0 - q)
        if tail > tol:
            raise TailNotCertifiable(
                f"tail bound {tail:.3g} exceeds tol {tol:.3g} at depth {self.n}")
        return SeriesValue(val, tail, self.n)

    def series_derivative(self, t: float, tol: float = 1e-12) -> SeriesValue:
        if t <= 0:
            raise Divergent("digit-driven series diverges for t <= 0")
        self._require_certifiable()
        val = float((np.exp(t * self._log_gamma) * self._log_gamma).sum())
        q = self._tail_rate(t)
        n = self.n
        # sum_{j>n} q^j and sum_{j>n} j q^j in closed form
        s0 = q ** (n + 1) / (1.0 - q)
        s1 = q ** (n + 1) * ((n + 1) - n * q) / (1.0 - q) ** 2
        tail = self.c ** t * (abs(math.log(self.c)) * s0 + _LN2 * s1)
        return SeriesValue(val, tail, n)

    def abscissa(self) -> Abscissa:
        return Abscissa(0.0, "C1")

    def sum_gamma(self) -> SeriesValue:
        self._require_certifiable()
        val = float(np.exp(self._log_gamma).sum())
        q = self._tail_rate(1.0)
        tail = self.c * q ** (self.n + 1) / (1.0 - q)
        return SeriesValue(val, tail, self.n)

    def truncate(self, M: int) -> ExplicitFamily:
        if M > self.n:
            raise InsufficientDepth(
                f"cannot truncate to {M} terms, only {self.n} recorded")
        return ExplicitFamily(np.exp(self._log_gamma[:M]))

    def __repr__(self):
        return (f"DigitDrivenFamily(digit={self.digit}, scheme={self.scheme!r}, "
                f"depth={self.n})")


ContractionFamily = (ExplicitFamily, GeometricFamily, DigitDrivenFamily)


# --------------------------------------------------------------------------
# spec-facing operation wrappers
# --------------------------------------------------------------------------

def series_S(family, t: float, tol: float = 1e-12) -> SeriesValue:
    """S(t) = sum_j gamma_j^t with a certified tail bound <= tol."""
    if tol <= 0:
        raise InvalidInput("tol must be positive")
    return family.series(t, tol)


def series_S_derivative(family, t: float, tol: float = 1e-12) -> SeriesValue:
    """d/dt S(t) = sum_j gamma_j^t log gamma_j (negative on t > 0)."""
    return family.series_derivative(t, tol)


def abscissa(family) -> Abscissa:
    """Convergence abscissa theta plus the divergence case at theta."""
    return family.abscissa()


def phi_scaled_sum_bound(eta_i: float) -> float:
    """Upper bound for sum_j gamma_ij of a phi-scaled family:
    eta_i + 2*eta_i / (2^(eta_i/2) - 1)."""
    return eta_i + 2.0 * eta_i / (2.0 ** (eta_i / 2.0) - 1.0)


def build_tilde_family(stats: DigitStats, digit: int, scheme: str = "simple",
                       eta_i: float | None = None) -> DigitDrivenFamily:
    """Digit-driven family for one digit of a recorded sequence.

    The target frequency comes from stats.target_eta unless given
    explicitly.  The stabilization index is computed from the prefix;
    InsufficientDepth when the frequency has not stabilized within the
    recorded depth.  For the phi-scaled scheme the construction also checks
    the closed-form summability bound.
    """
    if eta_i is None and stats.target_eta is not None:
        eta_i = stats.target_eta.get(digit)
    N_i = None
    if eta_i is not None:
        if eta_i <= 0:
            raise InvalidInput("target frequency must be positive")
        N_i = stats.stabilization_index(digit, eta_i)
        if N_i >= stats.n:
            raise InsufficientDepth(
                f"digit {digit} frequency not stabilized on the prefix "
                f"(N={N_i}, depth={stats.n})")
    elif scheme == "phi_scaled":
        raise InvalidInput("phi_scaled scheme needs a target frequency")
    fam = DigitDrivenFamily(stats.R(digit), digit, scheme, eta_i, N_i)
    if scheme == "phi_scaled":
        total = fam.sum_gamma()
        bound = phi_scaled_sum_bound(eta_i)
        if total.upper > bound + 1e-9:
            raise InvalidInput(
                f"sum of contractions {total.upper:.6g} violates the "
                f"summability bound {bound:.6g}")
    return fam
