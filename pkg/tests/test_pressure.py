import math

import numpy as np
import pytest

from morandim.errors import Divergent, InsufficientDepth, InvalidInput, NoZero, UnboundedLogBound
from morandim.expansions import digit_stats, synthesize_quasinormal
from morandim.families import ExplicitFamily, GeometricFamily, build_tilde_family
from morandim.pressure import (
    FrequencyVector, PressureProblem, pressure, truncated_c_k, solve_h,
    solve_h_M, ladder, covering_sum, solve_delta_kn, solve_delta_certified,
)

LOG2_LOG3 = 0.6309297535714574  # log 2 / log 3
H_49 = 0.3939424555129349       # zero of 4^-h + 9^-h = 1 (mpmath findroot)
H_2 = 0.4380178794859424        # log(golden)/log 3 (mpmath)
P_AT_1 = -1.5890269151739728    # (log(1/3) + log(1/8)) / 2 (mpmath)
DELTA_3 = 0.3790324208933168    # zero of sum_{j<=3}(0.20752*2^-j)^t = 1 (mpmath)


def two_thirds_problem(eta=(0.5, 0.5)):
    fams = {0: GeometricFamily(1.0, 1 / 3), 1: GeometricFamily(1.0, 1 / 3)}
    return PressureProblem(fams, FrequencyVector.finite(list(eta)))


def geo_49_problem(omega=None):
    fams = {0: GeometricFamily(1.0, 0.25), 1: GeometricFamily(1.0, 1 / 9)}
    return PressureProblem(fams, FrequencyVector.finite([0.5, 0.5]), omega=omega)


# ---------------------------------------------------------------------------
# pressure values
# ---------------------------------------------------------------------------

def test_pressure_zero_at_log2_log3():
    pv = pressure(two_thirds_problem(), LOG2_LOG3, 1e-12)
    assert pv.value == pytest.approx(0.0, abs=1e-12)
    assert pv.error_bound <= 1e-10


def test_pressure_single_symbol_explicit():
    prob = PressureProblem({0: ExplicitFamily([0.25, 0.25])},
                           FrequencyVector.finite([1.0]))
    assert pressure(prob, 0.5).value == pytest.approx(0.0, abs=1e-15)


def test_pressure_mixed_geometrics_at_one():
    assert pressure(geo_49_problem(), 1.0).value == pytest.approx(P_AT_1, abs=1e-12)


def test_pressure_requires_t_above_theta():
    with pytest.raises(Divergent):
        pressure(two_thirds_problem(), 0.0)


def test_pressure_countable_with_tail_family():
    # recorded digits 1..4 with geometric frequencies; every deeper digit
    # shares one tail family, so the tail contribution is exact
    eta = FrequencyVector.countable_vector({i: 2.0 ** (-i) for i in range(1, 5)})
    fam = GeometricFamily(1.0, 1 / 3)
    prob = PressureProblem({i: fam for i in range(1, 5)}, eta, tail_family=fam)
    pv = pressure(prob, LOG2_LOG3)
    assert pv.value == pytest.approx(0.0, abs=1e-12)
    h = solve_h(prob)
    assert h.h == pytest.approx(LOG2_LOG3, abs=1e-10)


def test_pressure_countable_with_log_bound():
    eta = FrequencyVector.countable_vector({1: 0.6, 2: 0.3}, tail_mass=0.1)
    fams = {1: GeometricFamily(1.0, 0.25), 2: GeometricFamily(1.0, 1 / 9)}
    bound = 5.0
    prob = PressureProblem(fams, eta, log_S_bound=bound)
    pv = pressure(prob, 1.0, 1e-12)
    assert pv.error_bound >= 0.1 * bound
    exact = 0.9 * (0.6 / 0.9 * math.log(1 / 3) + 0.3 / 0.9 * math.log(1 / 8))
    assert abs(pv.value - exact) <= pv.error_bound


def test_pressure_countable_without_bound_raises():
    eta = FrequencyVector.countable_vector({1: 0.6, 2: 0.3}, tail_mass=0.1)
    fams = {1: GeometricFamily(1.0, 0.25), 2: GeometricFamily(1.0, 1 / 9)}
    with pytest.raises(UnboundedLogBound):
        pressure(PressureProblem(fams, eta), 1.0)


def test_frequency_vector_validation():
    with pytest.raises(InvalidInput):
        FrequencyVector.finite([0.5, 0.6])
    with pytest.raises(InvalidInput):
        FrequencyVector.finite([1.2, -0.2])
    with pytest.raises(InvalidInput):
        FrequencyVector({1: 0.6, 2: 0.3}, countable=True, tail_mass=0.01)
    with pytest.raises(InvalidInput):
        PressureProblem({0: GeometricFamily(1.0, 0.5)},
                        FrequencyVector.finite([0.5, 0.5]))


# ---------------------------------------------------------------------------
# truncated sequence and covering sums
# ---------------------------------------------------------------------------

def test_c_k_identical_families():
    prob = two_thirds_problem()
    prob = PressureProblem(prob.families, prob.eta, omega=[0, 1, 0, 1])
    from morandim.families import series_S
    want = math.log(series_S(prob.families[0], 0.8).value)
    assert truncated_c_k(prob, 0.8, 4) == pytest.approx(want, abs=1e-12)


def test_c_k_weighted():
    prob = geo_49_problem(omega=[0, 0, 1])
    sa = math.log(pressure(PressureProblem({0: prob.families[0]},
                                           FrequencyVector.finite({0: 1.0})), 0.7).value + 0.0) \
        if False else math.log((0.25 ** 0.7) / (1 - 0.25 ** 0.7))
    sb = math.log(((1 / 9) ** 0.7) / (1 - (1 / 9) ** 0.7))
    want = (2 / 3) * sa + (1 / 3) * sb
    assert truncated_c_k(prob, 0.7, 3) == pytest.approx(want, abs=1e-12)


def test_c_k_golden_cf_single_digit():
    fams = {1: GeometricFamily(1.0, 0.3)}
    prob = PressureProblem(fams, FrequencyVector.finite({1: 1.0}), omega=[1] * 10)
    want = math.log((0.3 ** 1.2) / (1 - 0.3 ** 1.2))
    for k in (1, 4, 10):
        assert truncated_c_k(prob, 1.2, k) == pytest.approx(want, abs=1e-12)


def test_c_k_needs_depth():
    prob = geo_49_problem(omega=[0, 1])
    with pytest.raises(InsufficientDepth):
        truncated_c_k(prob, 1.0, 5)


def test_covering_sum_identity_and_product():
    prob = two_thirds_problem()
    prob = PressureProblem(prob.families, prob.eta, omega=[0, 1] * 8)
    h = solve_h(prob).h
    for n in (2, 8, 16):
        assert covering_sum(prob, h, n) == pytest.approx(1.0, abs=1e-10)
    prob2 = geo_49_problem(omega=[0, 1])
    sa = (0.25 ** 0.7) / (1 - 0.25 ** 0.7)
    sb = ((1 / 9) ** 0.7) / (1 - (1 / 9) ** 0.7)
    assert covering_sum(prob2, 0.7, 2) == pytest.approx(sa * sb, rel=1e-12)


def test_covering_sum_alternating_at_h():
    prob = geo_49_problem(omega=[0, 1] * 10)
    h = solve_h(prob).h
    for n in (2, 10, 20):
        assert covering_sum(prob, h, n) == pytest.approx(1.0, abs=1e-9)


# ---------------------------------------------------------------------------
# zero finding
# ---------------------------------------------------------------------------

def test_solve_h_log2_log3():
    res = solve_h(two_thirds_problem())
    assert res.h == pytest.approx(LOG2_LOG3, abs=1e-12)
    assert res.residual <= 1e-12


def test_solve_h_invariant_under_eta_for_identical_families():
    for eta in ([0.5, 0.5], [0.9, 0.1], [0.25, 0.75]):
        assert solve_h(two_thirds_problem(eta)).h == pytest.approx(LOG2_LOG3, abs=1e-12)


def test_solve_h_two_geometrics():
    res = solve_h(geo_49_problem())
    assert res.h == pytest.approx(H_49, abs=1e-11)


def test_solve_h_explicit_half():
    prob = PressureProblem({0: ExplicitFamily([0.25, 0.25])},
                           FrequencyVector.finite([1.0]))
    assert solve_h(prob).h == pytest.approx(0.5, abs=1e-12)


def test_solve_h_permutation_invariance():
    fams = {0: GeometricFamily(1.0, 0.25), 1: GeometricFamily(1.0, 1 / 9)}
    swapped = {0: fams[1], 1: fams[0]}
    a = solve_h(PressureProblem(fams, FrequencyVector.finite([0.3, 0.7]))).h
    b = solve_h(PressureProblem(swapped, FrequencyVector.finite([0.7, 0.3]))).h
    assert a == b


def test_solve_h_zero_frequency_padding():
    fams = {0: GeometricFamily(1.0, 0.25), 1: GeometricFamily(1.0, 1 / 9)}
    base = solve_h(PressureProblem(fams, FrequencyVector.finite([0.5, 0.5]))).h
    fams2 = dict(fams)
    fams2[7] = GeometricFamily(1.0, 0.9)
    padded = solve_h(PressureProblem(
        fams2, FrequencyVector.finite({0: 0.5, 1: 0.5, 7: 0.0}))).h
    assert padded == base


def test_solve_h_no_zero():
    # a dominant one-term family drags the zero below the searchable range,
    # so the solver must report the violated summability assumption
    prob = PressureProblem(
        {0: ExplicitFamily([0.5]), 1: ExplicitFamily([0.4, 0.4])},
        FrequencyVector.finite([1.0 - 1e-9, 1e-9]))
    with pytest.raises(NoZero):
        solve_h(prob)


def test_solve_h_M_degenerate_single_term():
    prob = two_thirds_problem()
    with pytest.warns(UserWarning):
        res = solve_h_M(prob, 1)
    assert res.h == 0.0
    assert res.degenerate


def test_solve_h_M_two_terms():
    res = solve_h_M(two_thirds_problem(), 2)
    assert res.h == pytest.approx(H_2, abs=1e-11)


def test_ladder_monotone_to_h():
    prob = two_thirds_problem()
    rungs = ladder(prob, [2, 4, 8, 16, 32, 64])
    hs = [r.h for _, r in rungs]
    assert all(a <= b + 1e-13 for a, b in zip(hs, hs[1:]))
    assert hs[-1] == pytest.approx(LOG2_LOG3, abs=1e-6)
    assert abs(solve_h(prob).h - hs[-1]) < 1e-6


# ---------------------------------------------------------------------------
# pressure shape invariants
# ---------------------------------------------------------------------------

def _random_problem(rng, m=None):
    m = m or int(rng.integers(2, 4))
    fams = {i: GeometricFamily(float(rng.uniform(0.5, 1.0)),
                               float(rng.uniform(0.2, 0.6))) for i in range(m)}
    w = rng.random(m) + 0.1
    eta = FrequencyVector.finite(list(w / w.sum()))
    return PressureProblem(fams, eta)


def test_pressure_strictly_decreasing_and_convex_on_grid():
    rng = np.random.default_rng(42)
    for _ in range(5):
        prob = _random_problem(rng)
        ts = np.linspace(0.05, 3.0, 60)
        vals = [pressure(prob, float(t)).value for t in ts]
        assert all(a > b for a, b in zip(vals, vals[1:]))
        for i in range(len(ts) - 2):
            mid = pressure(prob, float(0.5 * (ts[i] + ts[i + 2]))).value
            assert mid <= 0.5 * (vals[i] + vals[i + 2]) + 1e-12


def test_pressure_lipschitz_logc_bound():
    rng = np.random.default_rng(1)
    prob = _random_problem(rng)
    log_c = math.log(max(f.sup_gamma for f in prob.families.values()))
    for t in (0.3, 0.8, 1.5):
        for d in (0.1, 0.5):
            lhs = pressure(prob, t + d).value
            assert lhs <= pressure(prob, t).value + d * log_c + 1e-10


def test_c_k_converges_to_pressure():
    eta = [0.5, 0.5]
    omega = synthesize_quasinormal([0, 1], eta, 5000, seed=9)
    fams = {0: GeometricFamily(1.0, 0.25), 1: GeometricFamily(1.0, 1 / 9)}
    prob = PressureProblem(fams, FrequencyVector.finite(eta), omega=omega)
    t = 0.8
    target = pressure(prob, t).value
    errs = [abs(truncated_c_k(prob, t, k) - target) for k in (10, 100, 1000, 5000)]
    assert errs[-1] < 1e-3
    assert errs[-1] <= errs[0]


# ---------------------------------------------------------------------------
# finite digit-driven dimension equations
# ---------------------------------------------------------------------------

def test_delta_kn_golden_cf():
    st = digit_stats([1] * 50, target_eta={1: 0.41504})
    res = solve_delta_kn(st, {1: 0.41504}, k=1, n=3)
    assert res.h == pytest.approx(DELTA_3, abs=1e-10)


def test_delta_kn_degenerate_single_term():
    st = digit_stats([1, 1], target_eta={1: 1.0})
    with pytest.warns(UserWarning):
        res = solve_delta_kn(st, {1: 1.0}, k=1, n=1)
    assert res.h == 0.0 and res.degenerate


def test_delta_kn_nondecreasing_in_n():
    eta = {1: 0.5, 2: 0.3, 3: 0.2}
    digits = synthesize_quasinormal([1, 2, 3], [0.5, 0.3, 0.2], 400, seed=4)
    st = digit_stats(digits, target_eta=eta)
    vals = [solve_delta_kn(st, eta, k=3, n=n).h for n in (5, 20, 80, 320)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_delta_kn_requires_depth():
    st = digit_stats([1, 2, 1, 2], target_eta={1: 0.5, 2: 0.5})
    with pytest.raises(InsufficientDepth):
        solve_delta_kn(st, {1: 0.5, 2: 0.5}, k=2, n=10)


def test_delta_certified_encloses_truncated_limit():
    eta = {1: 0.5, 2: 0.3, 3: 0.2}
    digits = synthesize_quasinormal([1, 2, 3], [0.5, 0.3, 0.2], 3000, seed=8)
    st = digit_stats(digits, target_eta=eta)
    lo, hi = solve_delta_certified(st, eta, k=3)
    assert lo <= hi
    assert hi - lo < 1e-6
    # deep truncation lands inside (or within a hair of) the enclosure
    mid = solve_delta_kn(st, eta, k=3, n=3000).h
    assert lo - 1e-9 <= mid <= hi + 1e-9
