"""Digit expansions of real numbers and their frequency statistics.

Five schemes are supported: m-ary, beta (greedy), continued fraction,
Bolyai-Renyi, and generic f-expansions given by a monotone inverse map.
All of them iterate the same recursion: apply the inverse map to the
current remainder, split off the integer part as the next digit, keep the
fractional part.

Extraction is exact whenever the inputs allow it (rational x, quadratic
bases); otherwise it runs in fixed-point interval arithmetic and certifies
every floor, doubling the working precision up to a cap before giving up.
The recursions are exponentially unstable, so plain floating point is
never used to produce digits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence, Union

import numpy as np

from .algebraic import QuadraticIrrational
from .errors import InsufficientDepth, InvalidInput, PrecisionExhausted

__all__ = [
    "MAry", "Beta", "ContinuedFraction", "BolyaiRenyi", "GenericF", "FSpec",
    "ExpansionKind", "DigitSequence", "DigitStats",
    "expand", "digit_stats", "synthesize_quasinormal",
]


# --------------------------------------------------------------------------
# expansion kinds
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class FSpec:
    """Description of a generic f-expansion.

    inverse_map evaluates y -> f^{-1}(y) and must be strictly monotone on
    [0, 1); digit_range is the number of digit values for a finite-range
    expansion or None for countably many.  The contraction condition on f
    (a Lipschitz factor below one away from the first branch) is assumed,
    not checked.
    """
    inverse_map: Callable
    monotonicity: str = "increasing"
    digit_range: int | None = None
    branch_intervals: tuple | None = None
    name: str = "generic"

    def __post_init__(self):
        if self.monotonicity not in ("increasing", "decreasing"):
            raise InvalidInput("monotonicity must be 'increasing' or 'decreasing'")


@dataclass(frozen=True)
class MAry:
    m: int

    def __post_init__(self):
        if int(self.m) < 2:
            raise InvalidInput("m-ary expansion needs m >= 2")

    def label(self):
        return f"mary({self.m})"


@dataclass(frozen=True)
class Beta:
    beta: object  # Fraction, QuadraticIrrational, float or int-free decimal

    def __post_init__(self):
        b = float(self.beta)
        if not b > 1.0:
            raise InvalidInput("beta expansion needs beta > 1")
        if b == math.floor(b):
            raise InvalidInput("beta must not be an integer")

    def label(self):
        return f"beta({float(self.beta):.12g})"


@dataclass(frozen=True)
class ContinuedFraction:
    def label(self):
        return "cf"


@dataclass(frozen=True)
class BolyaiRenyi:
    m: int

    def __post_init__(self):
        if int(self.m) < 2:
            raise InvalidInput("Bolyai-Renyi expansion needs m >= 2")

    def label(self):
        return f"bolyai({self.m})"


@dataclass(frozen=True)
class GenericF:
    fspec: FSpec

    def label(self):
        return f"generic({self.fspec.name})"


ExpansionKind = Union[MAry, Beta, ContinuedFraction, BolyaiRenyi, GenericF]


def kind_to_json(kind: ExpansionKind) -> dict:
    if isinstance(kind, MAry):
        return {"type": "mary", "m": kind.m}
    if isinstance(kind, Beta):
        return {"type": "beta", "beta": _decimal_str(kind.beta)}
    if isinstance(kind, ContinuedFraction):
        return {"type": "cf"}
    if isinstance(kind, BolyaiRenyi):
        return {"type": "bolyai", "m": kind.m}
    if isinstance(kind, GenericF):
        return {"type": "generic", "name": kind.fspec.name}
    raise InvalidInput(f"unknown expansion kind {kind!r}")


# --------------------------------------------------------------------------
# digit sequences
# --------------------------------------------------------------------------

def _decimal_str(x, digits: int = 36) -> str:
    """Decimal rendering used only for serialization."""
    if isinstance(x, Fraction):
        den = x.denominator
        while den % 2 == 0:
            den //= 2
        while den % 5 == 0:
            den //= 5
        if den == 1:  # terminating decimal, render exactly
            from decimal import Decimal, localcontext
            with localcontext() as ctx:
                ctx.prec = 80
                return str(Decimal(x.numerator) / Decimal(x.denominator))
    import mpmath
    with mpmath.workprec(200):
        if isinstance(x, QuadraticIrrational):
            v = (mpmath.mpf(int(x.p)) + mpmath.mpf(int(x.q)) * mpmath.sqrt(x.D)) / int(x.r)
        elif isinstance(x, Fraction):
            v = mpmath.mpf(x.numerator) / mpmath.mpf(x.denominator)
        else:
            v = mpmath.mpf(x)
        return mpmath.nstr(v, digits)


@dataclass(frozen=True)
class DigitSequence:
    """A finite prefix of an expansion, with the remainders that produced it.

    remainders[k] is r_k (one more entry than digits).  Entries are exact
    values (Fraction or QuadraticIrrational) on the exact path and midpoint
    Fractions on the interval path.  terminated means some remainder hit
    exactly zero, after which all further digits are the absorbing digit
    (emitted normally) except for 1/x maps, where the sequence simply ends.
    """
    kind: ExpansionKind
    x: object
    digits: tuple
    remainders: tuple
    terminated: bool
    precision_bits: int
    method: str = "exact"

    def __len__(self):
        return len(self.digits)

    def to_json(self) -> dict:
        return {
            "kind": kind_to_json(self.kind),
            "x": _decimal_str(self.x),
            "digits": [int(d) for d in self.digits],
            "terminated": self.terminated,
            "precision_bits": self.precision_bits,
        }

    def reconstruct(self):
        """Exact reconstruction of x from digits plus the last remainder.

        Only meaningful for m-ary and beta expansions, where
        x = sum d_k b^-k + r_n b^-n holds identically.
        """
        if isinstance(self.kind, MAry):
            base = Fraction(self.kind.m)
        elif isinstance(self.kind, Beta):
            base = self.kind.beta
        else:
            raise InvalidInput("reconstruct is defined for m-ary and beta kinds")
        inv = 1 / base if isinstance(base, Fraction) else base.inverse()
        acc = Fraction(0) if isinstance(base, Fraction) else base * 0
        scale = inv * 0 + 1
        for k, d in enumerate(self.digits):
            scale = scale * inv
            acc = acc + scale * d
        if not self.terminated and len(self.remainders) == len(self.digits) + 1:
            acc = acc + scale * self.remainders[-1]
        return acc


# --------------------------------------------------------------------------
# exact extraction path
# --------------------------------------------------------------------------

def _floor_of(v) -> int:
    if isinstance(v, QuadraticIrrational):
        return v.floor()
    return math.floor(v)


def _is_zero(v) -> bool:
    if isinstance(v, QuadraticIrrational):
        return v.is_zero()
    return v == 0


def _exact_step(kind, r):
    """One digit step; returns (digit, next remainder) or None at a dead end."""
    if isinstance(kind, MAry):
        y = r * kind.m
    elif isinstance(kind, Beta):
        y = _coerce_field(kind.beta) * r
    elif isinstance(kind, ContinuedFraction):
        y = r.inverse() if isinstance(r, QuadraticIrrational) else 1 / r
    elif isinstance(kind, BolyaiRenyi):
        u = r + 1
        y = u
        for _ in range(kind.m - 1):
            y = y * u
        y = y - 1
    else:
        raise InvalidInput("generic f-expansions have no exact path")
    d = _floor_of(y)
    return d, y - d


def _coerce_field(beta):
    if isinstance(beta, (int, float)):
        return Fraction(beta)
    return beta


def _exact_eligible(kind, x) -> bool:
    if isinstance(kind, GenericF):
        return False
    if isinstance(x, QuadraticIrrational):
        if isinstance(kind, Beta) and isinstance(kind.beta, QuadraticIrrational) \
                and kind.beta.D != x.D and x.q != 0:
            return False
        return True
    if isinstance(x, (Fraction, int)) or isinstance(x, float):
        return True
    return False


def _promote(kind, x):
    """Lift x into the arithmetic domain required by the kind."""
    if isinstance(x, float):
        x = Fraction(x)
    if isinstance(kind, Beta) and isinstance(kind.beta, QuadraticIrrational):
        if isinstance(x, Fraction):
            return QuadraticIrrational.from_fraction(x, kind.beta.D)
    return x


def _expand_exact(kind, x, n, precision_bits):
    r = _promote(kind, x)
    digits, remainders = [], [r]
    terminated = _is_zero(r)
    for _ in range(n):
        # the recursion stays well defined at r = 0 except for 1/x maps,
        # where a zero remainder ends the sequence (no padding)
        if isinstance(kind, ContinuedFraction) and _is_zero(r):
            terminated = True
            break
        d, r = _exact_step(kind, r)
        digits.append(int(d))
        remainders.append(r)
        if _is_zero(r):
            terminated = True
    return DigitSequence(kind, x, tuple(digits), tuple(remainders),
                         terminated, precision_bits, method="exact")


# --------------------------------------------------------------------------
# certified interval path (fixed point: value ~ [lo, hi] * 2^-prec)
# --------------------------------------------------------------------------

class _Uncertified(Exception):
    pass


def _ceil_div(a, b):
    return -((-a) // b)


def _scaled_input(x, prec):
    one = 1 << prec
    if isinstance(x, float):
        x = Fraction(x)
    if isinstance(x, Fraction):
        lo = (x.numerator * one) // x.denominator
        hi = lo if (x.numerator * one) % x.denominator == 0 else lo + 1
        return lo, hi
    if isinstance(x, QuadraticIrrational):
        return x.scaled_bounds(prec)
    if isinstance(x, str):
        import mpmath
        with mpmath.workprec(prec + 16):
            v = mpmath.mpf(x)
            lo = int(mpmath.floor(v * one))
        return lo, lo + 1
    raise InvalidInput(f"unsupported x of type {type(x)!r}")


def _beta_bounds(beta, prec):
    one = 1 << prec
    if isinstance(beta, QuadraticIrrational):
        return beta.scaled_bounds(prec)
    b = Fraction(beta)
    lo = (b.numerator * one) // b.denominator
    hi = lo if (b.numerator * one) % b.denominator == 0 else lo + 1
    return lo, hi


def _interval_step(kind, lo, hi, prec, consts):
    one = 1 << prec
    if isinstance(kind, MAry):
        return lo * kind.m, hi * kind.m
    if isinstance(kind, Beta):
        blo, bhi = consts
        return (lo * blo) >> prec, _ceil_div(hi * bhi, one)
    if isinstance(kind, ContinuedFraction):
        if lo <= 0:
            raise _Uncertified("remainder interval touches zero")
        sq = one * one
        return sq // hi, _ceil_div(sq, lo)
    if isinstance(kind, BolyaiRenyi):
        ulo, uhi = lo + one, hi + one
        m = kind.m
        scale = one ** (m - 1)
        return (ulo ** m) // scale - one, _ceil_div(uhi ** m, scale) - one
    if isinstance(kind, GenericF):
        return _generic_interval(kind.fspec, lo, hi, prec)
    raise InvalidInput(f"unknown expansion kind {kind!r}")


def _generic_interval(fspec, lo, hi, prec):
    """Enclosure of f^{-1} over [lo, hi]*2^-prec via monotone endpoint
    evaluation in mpmath, padded by a few ulps to absorb the callable's own
    rounding.  Sound only for genuinely monotone inverse maps."""
    import mpmath
    one = 1 << prec
    with mpmath.workprec(prec + 32):
        e0 = mpmath.mpf(fspec.inverse_map(mpmath.mpf(lo) / one))
        e1 = mpmath.mpf(fspec.inverse_map(mpmath.mpf(hi) / one))
        a, b = (e0, e1) if fspec.monotonicity == "increasing" else (e1, e0)
        ylo = int(mpmath.floor(a * one)) - 2
        yhi = int(mpmath.ceil(b * one)) + 2
    return ylo, yhi


def _expand_interval_once(kind, x, n, prec):
    lo, hi = _scaled_input(x, prec)
    one = 1 << prec
    if lo < 0 or hi > one:
        raise InvalidInput("x must lie in [0, 1)")
    consts = _beta_bounds(kind.beta, prec) if isinstance(kind, Beta) else None
    digits = []
    remainders = [(lo, hi)]
    terminated = hi == 0
    for _ in range(n):
        if isinstance(kind, ContinuedFraction) and hi == 0:
            terminated = True
            break
        ylo, yhi = _interval_step(kind, lo, hi, prec, consts)
        d = ylo >> prec
        if d != (yhi >> prec):
            raise _Uncertified("floor straddles a digit boundary")
        lo, hi = ylo - (d << prec), yhi - (d << prec)
        digits.append(int(d))
        remainders.append((lo, hi))
        if hi == 0:
            terminated = True
    rem = tuple(Fraction(a + b, 2 * one) for a, b in remainders)
    return digits, rem, terminated


def _expand_interval(kind, x, n, precision_bits, max_precision_bits):
    prec = max(8, precision_bits)
    while True:
        try:
            digits, rem, terminated = _expand_interval_once(kind, x, n, prec)
            return DigitSequence(kind, x, tuple(digits), rem, terminated,
                                 precision_bits, method="interval")
        except _Uncertified as exc:
            if prec * 2 > max_precision_bits:
                raise PrecisionExhausted(
                    f"digit floor not certifiable at {prec} bits "
                    f"(cap {max_precision_bits}): {exc}") from exc
            prec *= 2


# --------------------------------------------------------------------------
# public extraction API
# --------------------------------------------------------------------------

def _check_unit_interval(x):
    if isinstance(x, QuadraticIrrational):
        if x.sign() < 0 or x.compare(1) >= 0:
            raise InvalidInput("x must lie in [0, 1)")
    else:
        xf = float(Fraction(x)) if not isinstance(x, str) else float(x)
        if not (0.0 <= xf < 1.0):
            raise InvalidInput("x must lie in [0, 1)")


def expand(kind: ExpansionKind, x, n: int, precision_bits: int = 64,
           method: str = "auto", max_precision_bits: int = 1 << 15) -> DigitSequence:
    """Extract the first n digits of x under the given expansion scheme.

    x may be a Fraction, float (taken at its exact binary value),
    QuadraticIrrational, or decimal string.  Digits are produced by exact
    field arithmetic when possible, otherwise by certified fixed-point
    interval arithmetic starting at precision_bits and doubling on failure
    up to max_precision_bits (then PrecisionExhausted).  Two runs with the
    same arguments produce identical digits.

    Terminating expansions (a remainder hitting an endpoint) return fewer
    than n digits with terminated=True; nothing is padded.
    """
    if n < 1:
        raise InvalidInput("n must be >= 1")
    _check_unit_interval(x)
    if method not in ("auto", "exact", "interval"):
        raise InvalidInput("method must be one of auto/exact/interval")
    use_exact = _exact_eligible(kind, x) if method == "auto" else (method == "exact")
    if use_exact:
        if not _exact_eligible(kind, x):
            raise InvalidInput("inputs do not admit the exact path")
        return _expand_exact(kind, x, n, precision_bits)
    return _expand_interval(kind, x, n, precision_bits, max_precision_bits)


# --------------------------------------------------------------------------
# digit statistics
# --------------------------------------------------------------------------

class DigitStats:
    """Counting statistics of a digit prefix.

    R(i) is the cumulative count sequence j -> Card{k <= j : d_k = i}.
    When a target frequency vector is supplied, stabilization_index(i)
    returns the minimal N >= 2 such that R_i(j) > j*eta_i/2 for every
    recorded j > N.
    """

    def __init__(self, digits: Sequence[int], target_eta: Mapping[int, float] | None = None):
        arr = np.asarray(list(digits), dtype=np.int64)
        if arr.size == 0:
            raise InvalidInput("digit sequence is empty")
        self.digits = arr
        self.n = int(arr.size)
        self.target_eta = dict(target_eta) if target_eta is not None else None
        self._count_cache: dict[int, np.ndarray] = {}

    @classmethod
    def from_sequence(cls, seq, target_eta=None):
        digits = seq.digits if isinstance(seq, DigitSequence) else seq
        return cls(digits, target_eta)

    def R(self, i: int) -> np.ndarray:
        """Cumulative counts of digit i along the prefix (length n)."""
        if i not in self._count_cache:
            self._count_cache[i] = np.cumsum(self.digits == i)
        return self._count_cache[i]

    @property
    def support(self) -> list[int]:
        return sorted(int(v) for v in np.unique(self.digits))

    @property
    def counts(self) -> dict[int, np.ndarray]:
        return {i: self.R(i) for i in self.support}

    @property
    def final_counts(self) -> dict[int, int]:
        vals, cnt = np.unique(self.digits, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, cnt)}

    @property
    def empirical_frequencies(self) -> dict[int, float]:
        return {i: c / self.n for i, c in self.final_counts.items()}

    def stabilization_index(self, i: int, eta_i: float | None = None) -> int:
        """Minimal N >= 2 with R_i(j) > j*eta_i/2 for all recorded j > N."""
        if eta_i is None:
            if self.target_eta is None or i not in self.target_eta:
                raise InvalidInput(f"no target frequency known for digit {i}")
            eta_i = self.target_eta[i]
        if eta_i <= 0:
            raise InvalidInput("stabilization needs a positive target frequency")
        j = np.arange(1, self.n + 1)
        bad = np.nonzero(self.R(i) <= j * (eta_i / 2.0))[0]
        return 2 if bad.size == 0 else max(2, int(bad[-1]) + 1)

    @property
    def stabilization_indices(self) -> dict[int, int]:
        if self.target_eta is None:
            return {}
        return {i: self.stabilization_index(i)
                for i, e in self.target_eta.items() if e > 0}

    def require_depth(self, n: int):
        if self.n < n:
            raise InsufficientDepth(f"need {n} digits, have {self.n}")


def digit_stats(seq, target_eta: Mapping[int, float] | None = None) -> DigitStats:
    """Counting statistics of a DigitSequence or plain digit iterable."""
    if target_eta is not None and hasattr(target_eta, "as_dict"):
        target_eta = target_eta.as_dict()
    return DigitStats.from_sequence(seq, target_eta)


# --------------------------------------------------------------------------
# quasinormal synthesis
# --------------------------------------------------------------------------

def synthesize_quasinormal(alphabet: Iterable[int], eta: Sequence[float], n: int,
                           seed: int | None = None) -> list[int]:
    """Deterministic digit sequence whose empirical frequencies converge to
    eta at rate O(support/n).

    Low-discrepancy quota scheme: at step k, emit the digit with the largest
    deficit k*eta_i - R_i(k-1); equal deficits go to the lowest digit value.
    A seed adds fixed uniform phase offsets to the deficits, which yields
    distinct sequences with the same limit frequencies; seed=None uses zero
    phases (the canonical scheme).
    """
    digits = [int(a) for a in alphabet]
    if sorted(digits) != digits:
        order = np.argsort(digits, kind="stable")
        digits = [digits[i] for i in order]
        eta = [eta[i] for i in order]
    eta_arr = np.asarray(eta, dtype=float)
    if eta_arr.size != len(digits):
        raise InvalidInput("alphabet and eta sizes differ")
    if np.any(eta_arr < 0) or abs(eta_arr.sum() - 1.0) > 1e-12:
        raise InvalidInput("eta must be a stochastic vector")
    if n < 1:
        raise InvalidInput("n must be >= 1")
    phases = np.zeros_like(eta_arr)
    if seed is not None:
        phases = np.random.default_rng(seed).random(eta_arr.size)
    counts = np.zeros(eta_arr.size, dtype=np.int64)
    out = np.empty(n, dtype=np.int64)
    values = np.asarray(digits, dtype=np.int64)
    for k in range(1, n + 1):
        j = int(np.argmax(k * eta_arr - counts + phases))
        counts[j] += 1
        out[k - 1] = values[j]
    return [int(v) for v in out]
