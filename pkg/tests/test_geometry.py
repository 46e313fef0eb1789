import math

import numpy as np
import pytest

from morandim.errors import InfeasibleGeometry, InvalidInput, TreeOverflow
from morandim.families import ExplicitFamily, GeometricFamily
from morandim.geometry import (
    MoranSpec, box_count, fit_dimension, mu_h_weights, realize,
)
from morandim.pressure import FrequencyVector, PressureProblem, solve_h, solve_h_M

LOG2_LOG3 = 0.6309297535714574

QUARTER = {0: ExplicitFamily([0.25, 0.25])}


def quarter_tree(depth):
    return realize(MoranSpec(QUARTER, [0] * depth, depth, M=2))


def test_realize_depth_one_placement():
    tree = quarter_tree(1)
    nodes = list(tree.nodes(1))
    assert [(n.left, n.right) for n in nodes] == [(0.0, 0.25), (0.75, 1.0)]
    assert [n.code for n in nodes] == [(1,), (2,)]


def test_realize_depth_two_lengths():
    tree = quarter_tree(2)
    nodes = list(tree.nodes(2))
    assert len(nodes) == 4
    for n in nodes:
        assert n.length == pytest.approx(1 / 16, abs=1e-15)
    tree.validate()


def test_realize_alternating_families_ratio_follows_omega():
    fams = {0: ExplicitFamily([0.25, 0.25]), 1: ExplicitFamily([0.2, 0.1])}
    tree = realize(MoranSpec(fams, [0, 1, 0], 3, M=2))
    tree.validate()
    # level 2 uses the symbol omega_2 = 1 ratios (0.2, 0.1)
    lv1 = list(tree.nodes(1))
    lv2 = list(tree.nodes(2))
    assert lv2[0].length / lv1[0].length == pytest.approx(0.2, abs=1e-15)
    assert lv2[1].length / lv1[0].length == pytest.approx(0.1, abs=1e-15)


def test_realize_single_child_left_aligned():
    tree = realize(MoranSpec({0: ExplicitFamily([0.5])}, [0, 0], 2, M=1))
    nodes = list(tree.nodes(2))
    assert nodes[0].left == 0.0
    assert nodes[0].right == pytest.approx(0.25)


def test_realize_rescales_oversized_levels():
    fams = {0: ExplicitFamily([0.7, 0.6])}  # sums to 1.3 > 1
    tree = realize(MoranSpec(fams, [0, 0], 2, M=2))
    assert tree.scale == pytest.approx(1.3)
    tree.validate()
    # unscaled lengths keep the raw ratio products
    assert list(tree.nodes(1))[0].length_unscaled == pytest.approx(0.7)
    with pytest.raises(InfeasibleGeometry):
        realize(MoranSpec(fams, [0, 0], 2, M=2, rescale=False))


def test_realize_node_cap():
    fams = {0: GeometricFamily(1.0, 0.4)}
    with pytest.raises(TreeOverflow):
        realize(MoranSpec(fams, [0] * 10, 10, M=16, node_cap=10_000))


def test_realize_breadth_warning_beyond_depth_six():
    fams = {0: GeometricFamily(1.0, 0.2)}
    with pytest.warns(UserWarning):
        tree = realize(MoranSpec(fams, [0] * 7, 7, M=20))
    assert tree.breadths[0] == 16


def test_realize_validation_errors():
    with pytest.raises(InvalidInput):
        realize(MoranSpec(QUARTER, [0], 2, M=2))  # omega too short
    with pytest.raises(InvalidInput):
        realize(MoranSpec(QUARTER, [0, 1], 2, M=2))  # symbol without family


# ---------------------------------------------------------------------------
# natural measure weights
# ---------------------------------------------------------------------------

def test_mu_h_weights_symmetric():
    tree = quarter_tree(2)
    w = mu_h_weights(tree, 0.5)
    assert w[(1,)] == pytest.approx(0.5, abs=1e-15)
    assert w[(2,)] == pytest.approx(0.5, abs=1e-15)
    for code in [(1, 1), (1, 2), (2, 1), (2, 2)]:
        assert w[code] == pytest.approx(0.25, abs=1e-15)


def test_mu_h_weights_asymmetric_normalized_at_h():
    fams = {0: ExplicitFamily([0.25, 1 / 9])}
    prob = PressureProblem(fams, FrequencyVector.finite({0: 1.0}))
    h = solve_h(prob).h
    tree = realize(MoranSpec(fams, [0], 1, M=2))
    w = mu_h_weights(tree, h)
    assert w[(1,)] == pytest.approx(0.25 ** h, abs=1e-9)
    assert w[(2,)] == pytest.approx((1 / 9) ** h, abs=1e-9)


def test_mu_h_weights_consistency():
    fams = {0: ExplicitFamily([0.3, 0.2]), 1: ExplicitFamily([0.25, 0.25])}
    tree = realize(MoranSpec(fams, [0, 1, 0], 3, M=2))
    w = mu_h_weights(tree, 0.7)
    for k in (1, 2):
        total = sum(v for c, v in w.items() if len(c) == k)
        assert total == pytest.approx(1.0, abs=1e-12)
    for code in [c for c in w if len(c) < 3]:
        kids = [v for c, v in w.items() if len(c) == len(code) + 1 and c[:len(code)] == code]
        assert sum(kids) == pytest.approx(w[code], abs=1e-12)


# ---------------------------------------------------------------------------
# dimension fitting
# ---------------------------------------------------------------------------

def test_fit_dimension_exact_self_similar():
    tree = quarter_tree(6)
    fit = fit_dimension(tree)
    for _, s in fit.levels:
        assert s == pytest.approx(0.5, abs=1e-12)
    assert fit.s_fit == pytest.approx(0.5, abs=1e-12)


def test_fit_dimension_matches_moran_equation_root():
    # stationary single family: the root of sum c_j^s = 1
    fams = {0: ExplicitFamily([0.5, 0.25])}
    tree = realize(MoranSpec(fams, [0] * 5, 5, M=2))
    golden = (1 + math.sqrt(5)) / 2
    s_true = math.log(golden) / math.log(2)  # 2^-s + 4^-s = 1
    assert fit_dimension(tree).s_fit == pytest.approx(s_true, abs=1e-9)


def test_fit_dimension_geometric_truncation_agrees_with_ladder():
    fams = {0: GeometricFamily(1.0, 1 / 3), 1: GeometricFamily(1.0, 1 / 4)}
    eta = FrequencyVector.finite([0.5, 0.5])
    prob = PressureProblem(fams, eta)
    h4 = solve_h_M(prob, 4).h
    tree = realize(MoranSpec(fams, [0, 1] * 4, 8, M=4))
    fit = fit_dimension(tree)
    assert abs(fit.s_fit - h4) <= 1e-2
    # exact alternating frequencies at even depth: the deepest level zero
    # coincides with the truncated pressure zero
    assert fit.s_fit == pytest.approx(h4, abs=1e-9)


# ---------------------------------------------------------------------------
# box counting
# ---------------------------------------------------------------------------

def test_box_count_full_interval():
    for k in (4, 10, 100):
        res = box_count([(0.0, 1.0)], [1.0 / k])
        assert res.counts == (k,)
    res = box_count([(0.0, 1.0)], [1 / 4, 1 / 16, 1 / 64])
    assert res.slope == pytest.approx(1.0, abs=1e-12)


def test_box_count_middle_thirds():
    fams = {0: ExplicitFamily([1 / 3, 1 / 3])}
    tree = realize(MoranSpec(fams, [0] * 10, 10, M=2))
    eps = [3.0 ** -j for j in range(1, 9)]
    res = box_count(tree, eps)
    assert res.ok
    assert res.counts[0] == 2 and res.counts[1] == 4
    assert res.slope == pytest.approx(LOG2_LOG3, abs=0.05)


def test_box_count_empty_flag():
    res = box_count([], [0.1, 0.01])
    assert res.counts == (0, 0)
    assert res.slope is None
    assert not res.ok


def test_box_count_validation():
    with pytest.raises(InvalidInput):
        box_count([(0.0, 1.0)], [0.1, -0.2])


def test_box_count_close_to_fit_dimension():
    fams = {0: ExplicitFamily([0.3, 0.25])}
    tree = realize(MoranSpec(fams, [0] * 9, 9, M=2))
    fit = fit_dimension(tree)
    eps = [2.0 ** -j for j in range(2, 11)]
    res = box_count(tree, eps)
    assert res.ok
    assert abs(res.slope - fit.s_fit) <= 0.05
