"""Group element algebra, chart sampling, and Haar-weight checks."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st

from conewave import DiagonalGroup, ShearletGroup, SimilitudeGroup
from conewave.groups import (
    cap_area_fraction,
    random_rotation,
    rotation_onto,
    rotation_with_image,
    sample_cap_directions,
)

INV_TOL = 1e-12


def _groups():
    return [
        SimilitudeGroup(2),
        SimilitudeGroup(3),
        DiagonalGroup(2),
        DiagonalGroup(3),
        ShearletGroup(2, [0.5]),
        ShearletGroup(3, [0.5, 0.75]),
    ]


def _random_element(group, rng):
    if group.kind == "similitude":
        return group.element((math.exp(rng.uniform(-2, 2)), random_rotation(group.dim, rng)))
    if group.kind == "diagonal":
        a = np.exp(rng.uniform(-2, 2, size=group.dim)) * rng.choice([-1.0, 1.0], size=group.dim)
        return group.element(tuple(a))
    b = rng.uniform(-1.5, 1.5, size=group.dim - 1)
    return group.element((int(rng.choice([-1, 1])), math.exp(rng.uniform(-2, 2)), tuple(b)))


def test_element_inverse_identity():
    rng = np.random.default_rng(101)
    for group in _groups():
        for _ in range(50):
            h = _random_element(group, rng)
            err = np.abs(h.matrix @ h.inv_matrix - np.eye(group.dim)).max()
            assert err < INV_TOL * max(1.0, np.abs(h.matrix).max())
            assert np.array_equal(h.inv_transpose, h.inv_matrix.T)
            assert h.det != 0


def test_shearlet_matrix_layout_and_determinant():
    group = ShearletGroup(2, [0.5])
    h = group.element((1, 0.25, (0.3,)))
    assert np.allclose(h.matrix, [[0.25, 0.3], [0.0, 0.5]])
    assert np.isclose(h.det, 0.25**1.5)
    neg = group.element((-1, 0.25, (0.3,)))
    assert np.allclose(neg.matrix, -h.matrix)
    assert np.isclose(abs(neg.det), 0.25 ** (1.0 + 0.5))


def test_shearlet_inverse_closed_form():
    group = ShearletGroup(3, [0.5, 0.75])
    h = group.element((-1, 0.4, (0.2, -0.7)))
    direct = np.linalg.inv(h.matrix)
    assert np.abs(h.inv_matrix - direct).max() < 1e-13


def test_params_round_trip():
    rng = np.random.default_rng(7)
    for group in _groups():
        for _ in range(20):
            h = _random_element(group, rng)
            again = group.from_matrix(h.matrix)
            assert np.abs(again.matrix - h.matrix).max() < 1e-10


def test_rotation_onto_is_special_orthogonal():
    rng = np.random.default_rng(11)
    for d in (2, 3, 5):
        for _ in range(30):
            v = rng.standard_normal(d)
            R = rotation_onto(v)
            assert np.abs(R.T @ R - np.eye(d)).max() < 1e-12
            assert np.linalg.det(R) > 0
            assert np.allclose(R[:, 0], v / np.linalg.norm(v))


def test_rotation_with_image_near_degenerate_targets():
    # regression: targets almost parallel to the anchor must not lose
    # orthogonality to cancellation in the basis completion
    rng = np.random.default_rng(13)
    for d in (2, 3, 4):
        anchor = np.zeros(d)
        anchor[0] = 1.0
        for ang in (1e-5, 1e-7, 1e-9, 0.0):
            x = anchor.copy()
            x[1] = math.tan(ang) if ang else 0.0
            x /= np.linalg.norm(x)
            R = rotation_with_image(anchor, x, rng)
            assert np.abs(R.T @ R - np.eye(d)).max() < 1e-12
            assert np.abs(R @ anchor - x).max() < 1e-9


def test_sample_cap_directions_stay_in_cap():
    rng = np.random.default_rng(17)
    for d in (2, 3, 4):
        center = np.zeros(d)
        center[-1] = 1.0
        ang = 0.4
        xs = sample_cap_directions(center, ang, 500, rng)
        assert np.allclose(np.linalg.norm(xs, axis=1), 1.0, atol=1e-12)
        assert np.all(xs @ center > math.cos(ang) - 1e-9)


def test_cap_area_fraction_matches_montecarlo():
    rng = np.random.default_rng(19)
    for d in (2, 3, 4):
        ang = 0.8
        x = rng.standard_normal((40000, d))
        x /= np.linalg.norm(x, axis=1, keepdims=True)
        hit = np.mean(x[:, 0] > math.cos(ang))
        assert abs(cap_area_fraction(d, ang) - hit) < 0.01


def test_transporter_moves_point_to_target():
    rng = np.random.default_rng(23)
    for group in _groups():
        base = group.orbit().base_point
        for _ in range(25):
            target = _random_element(group, rng).matrix.T @ base
            h = group.transporter(base, target)
            assert np.abs(h.matrix.T @ base - target).max() < 1e-9 * max(
                1.0, np.abs(target).max()
            )


def test_orbit_membership_predicates():
    sim = SimilitudeGroup(2).orbit()
    assert sim.contains(np.array([0.3, -0.1]))
    assert not sim.contains(np.array([0.0, 0.0]))
    sh = ShearletGroup(2, [0.5]).orbit()
    assert sh.contains(np.array([-0.2, 5.0]))
    assert not sh.contains(np.array([0.0, 1.0]))
    dia = DiagonalGroup(3).orbit()
    assert dia.contains(np.array([1.0, -2.0, 0.5]))
    assert not dia.contains(np.array([1.0, 0.0, 0.5]))
    for group in _groups():
        orb = group.orbit()
        assert orb.contains(orb.base_point)


def test_scalar_dilation_flags():
    assert SimilitudeGroup(2).contains_positive_scalar_dilations()
    assert DiagonalGroup(3).contains_positive_scalar_dilations()
    assert not ShearletGroup(2, [0.5]).contains_positive_scalar_dilations()
    assert ShearletGroup(2, [1.0]).contains_positive_scalar_dilations()


def test_shearlet_compose_matches_matrix_product():
    group = ShearletGroup(2, [0.5])
    rng = np.random.default_rng(29)
    for _ in range(40):
        g = _random_element(group, rng)
        h = _random_element(group, rng)
        gh = group.compose(g, h)
        assert np.abs(gh.matrix - g.matrix @ h.matrix).max() < 1e-10


def _box_indicator_mass(group, box, mat_pred, n, rng):
    """MC estimate of the Haar mass of {h in box : mat_pred(h)}."""
    els, w = group.sample_chart(n, rng, box)
    w = np.broadcast_to(np.asarray(w, dtype=float), (n,))
    vals = np.fromiter((float(mat_pred(h)) for h in els), dtype=float, count=n)
    terms = w * vals
    return float(terms.mean()), float(terms.std(ddof=1) / math.sqrt(n))


def test_haar_weights_left_invariant_similitude():
    # mass of g*S computed in the shifted chart equals the mass of S
    group = SimilitudeGroup(2)
    rng = np.random.default_rng(31)

    def in_s(h):
        return 1.0 <= h.params[0] <= 2.0

    def in_gs(h):
        return 1.0 <= (h.params[0] / 1.7) <= 2.0

    direct, s1 = _box_indicator_mass(group, (-0.5, 1.2), in_s, 30000, rng)
    shifted, s2 = _box_indicator_mass(group, (-0.5 + math.log(1.7), 1.2 + math.log(1.7)), in_gs, 30000, rng)
    assert abs(direct - shifted) < 4 * math.hypot(s1, s2) + 1e-12


def test_haar_weights_left_invariant_shearlet():
    group = ShearletGroup(2, [0.5])
    rng = np.random.default_rng(37)
    g = group.element((1, 1.5, (0.3,)))

    def in_s(h):
        _, a, b = h.params
        return (0.8 <= a <= 1.6) and abs(b[0]) <= 0.5

    def in_gs(h):
        # g^{-1} h in S, tested on the matrix directly
        m = np.linalg.solve(g.matrix, h.matrix)
        return (0.8 <= m[0, 0] <= 1.6) and abs(m[0, 1]) <= 0.5

    box_s = (math.log(0.7), math.log(1.8), np.array([1.0]), (1,))
    box_gs = (math.log(0.7 * 1.5), math.log(1.8 * 1.5), np.array([1.6]), (1,))
    direct, s1 = _box_indicator_mass(group, box_s, in_s, 40000, rng)
    shifted, s2 = _box_indicator_mass(group, box_gs, in_gs, 40000, rng)
    assert abs(direct - shifted) < 4 * math.hypot(s1, s2)


def test_haar_weights_left_invariant_diagonal():
    group = DiagonalGroup(2)
    rng = np.random.default_rng(41)

    def in_s(h):
        a = np.asarray(h.params)
        return bool(np.all((1.0 <= a) & (a <= 2.0)))

    def in_gs(h):
        a = np.asarray(h.params) / np.array([1.5, 0.7])
        return bool(np.all((1.0 <= a) & (a <= 2.0)))

    lo, hi = np.full(2, -0.3), np.full(2, 1.1)
    shift = np.log(np.array([1.5, 0.7]))
    direct, s1 = _box_indicator_mass(group, (lo, hi, [(1, 1)]), in_s, 30000, rng)
    shifted, s2 = _box_indicator_mass(group, (lo + shift, hi + shift, [(1, 1)]), in_gs, 30000, rng)
    assert abs(direct - shifted) < 4 * math.hypot(s1, s2) + 1e-12


def test_diagonal_exact_box_mass():
    # Haar mass of {1 <= a_i <= 2} is (ln 2)^d exactly; the chart box fits it
    group = DiagonalGroup(2)
    rng = np.random.default_rng(43)
    lo, hi = np.zeros(2), np.full(2, math.log(2.0))
    els, w = group.sample_chart(4000, rng, (lo, hi, [(1, 1)]))
    w = np.broadcast_to(np.asarray(w, dtype=float), (4000,))
    assert np.allclose(w.mean(), math.log(2.0) ** 2, rtol=1e-12)


def test_aligned_element_with_norm():
    rng = np.random.default_rng(47)
    for group in _groups():
        base = group.orbit().base_point
        for _ in range(10):
            xi = _random_element(group, rng).matrix.T @ base
            xi /= np.linalg.norm(xi)
            h = group.aligned_element_with_norm(xi, 0.125)
            assert np.isclose(h.op_norm, 0.125, rtol=1e-9)
            img = h.inv_transpose @ base
            cos = img @ xi / np.linalg.norm(img)
            assert cos > 0.999999


@seed(2026)
@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(min_value=0.05, max_value=20.0),
    theta=st.floats(min_value=-math.pi, max_value=math.pi),
)
def test_similitude_norm_product_is_one(a, theta):
    h = SimilitudeGroup(2).element((a, theta))
    assert abs(h.op_norm * h.inv_op_norm - 1.0) < 1e-10


@seed(2026)
@settings(max_examples=60, deadline=None)
@given(
    a=st.floats(min_value=0.05, max_value=20.0),
    b=st.floats(min_value=-3.0, max_value=3.0),
)
def test_shearlet_norms_bound_determinant(a, b):
    h = ShearletGroup(2, [0.5]).element((1, a, (b,)))
    # |det h| <= |h|^d and |h^{-1}|^{-d} <= |det h|
    d = 2
    assert abs(h.det) <= h.op_norm**d * (1 + 1e-12)
    assert h.inv_op_norm ** (-d) <= abs(h.det) * (1 + 1e-12)


def test_element_validation_errors():
    with pytest.raises(ValueError):
        SimilitudeGroup(2).element((-1.0, 0.0))
    with pytest.raises(ValueError):
        DiagonalGroup(2).element((1.0, 0.0))
    with pytest.raises(ValueError):
        ShearletGroup(2, [0.5]).element((2, 1.0, (0.0,)))
    with pytest.raises(ValueError):
        ShearletGroup(2, [1.5])
