import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import rk4_flow
from tameflows.complex import ComplexError, simplex, simplex_boundary
from tameflows.flow import (
    BarycentricPoint, FlowError, OrderedCarrier, asymptotic_pair_sample, complex_flow,
    flow_coords, flow_limits, lyapunov_value, normal_slice_intersection, parallelism_check,
    scalar_flow, simplex_flow, slice_graph_crossings, slice_threshold, trajectory,
    vertex_linearization, wpm_faces,
)
from tameflows.orientation import OrientationError, orientation_from_order, validate_orientation

times = st.floats(-30.0, 30.0)


def simplex_points(m):
    return st.lists(st.floats(0.01, 1.0), min_size=m + 1, max_size=m + 1).map(
        lambda w: np.array(w) / sum(w))


def test_scalar_flow_closed_form_values():
    assert scalar_flow(0.5, 0.0) == 0.5
    assert scalar_flow(0.5, math.log(3)) == pytest.approx(0.25, abs=1e-15)
    assert scalar_flow(0.5, -math.log(3)) == pytest.approx(0.75, abs=1e-15)
    assert scalar_flow(0.0, 5.0) == 0.0 and scalar_flow(1.0, -5.0) == 1.0
    assert scalar_flow(0.3, 800.0) == 0.0
    assert scalar_flow(0.3, -800.0) == 1.0
    with pytest.raises(FlowError):
        scalar_flow(1.5, 0.0)
    with pytest.raises(FlowError):
        scalar_flow(0.5, math.inf)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 1 - 1e-6), times, st.floats(0.01, 5.0))
def test_scalar_flow_decreases_in_time(a, t, dt):
    assert scalar_flow(a, t + dt) <= scalar_flow(a, t)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 0.5), st.floats(0.0, 0.5), st.floats(-10.0, 10.0))
def test_scalar_flow_increases_in_start(a, da, t):
    assert scalar_flow(a, t) <= scalar_flow(min(a + da, 1.0), t)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 0.99), st.floats(-10.0, 10.0))
def test_scalar_flow_solves_the_ode(a, t):
    h = 1e-6
    x = scalar_flow(a, t)
    deriv = (scalar_flow(a, t + h) - scalar_flow(a, t - h)) / (2 * h)
    assert deriv == pytest.approx(x * (x - 1), abs=1e-7)


def test_flow_on_edge_matches_scalar_flow():
    out = flow_coords([0.4, 0.6], 1.3)
    assert out[1] == pytest.approx(scalar_flow(0.6, 1.3), abs=1e-15)
    assert out.sum() == pytest.approx(1.0, abs=1e-15)


def test_barycenter_of_triangle_at_log3():
    # top coordinate 1/3 -> 1/7, the shadow (1/2, 1/2) -> (3/4, 1/4) scaled by 6/7
    out = flow_coords([1 / 3, 1 / 3, 1 / 3], math.log(3))
    assert out == pytest.approx([9 / 14, 3 / 14, 1 / 7], abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(simplex_points(3), st.floats(-5, 5), st.floats(-5, 5))
def test_group_law(c, s, t):
    lhs = flow_coords(c, s + t)
    rhs = flow_coords(flow_coords(c, t), s)
    assert np.max(np.abs(lhs - rhs)) < 1e-9


@settings(max_examples=200, deadline=None)
@given(simplex_points(4), times)
def test_flow_stays_on_the_simplex(c, t):
    out = flow_coords(c, t)
    assert np.all(out >= 0)
    assert out.sum() == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(simplex_points(4), st.lists(st.booleans(), min_size=5, max_size=5), st.floats(-20, 20))
def test_zero_coordinates_stay_zero(c, mask, t):
    c = np.where(mask, 0.0, c)
    if c.sum() == 0:
        c[2] = 1.0
    c = c / c.sum()
    out = flow_coords(c, t)
    assert np.all(out[c == 0] == 0)
    # at moderate times positive coordinates stay positive
    if abs(t) < 5:
        assert np.all(out[c > 0] > 0)


@settings(max_examples=50, deadline=None)
@given(simplex_points(3))
def test_limits_are_extreme_vertices_of_the_support(c):
    assert flow_coords(c, 40.0)[0] == pytest.approx(1.0, abs=1e-12)
    assert flow_coords(c, -40.0)[3] == pytest.approx(1.0, abs=1e-12)


def test_flow_matches_rk4_on_tetrahedron():
    rng = np.random.default_rng(7)
    c0 = rng.dirichlet(np.ones(4), 20)
    final, samples = rk4_flow(c0, 3.0, h=1e-3, sample_every=500)
    for t, c in samples:
        ref = np.array([flow_coords(x, t) for x in c0])
        assert np.max(np.abs(ref - c)) < 1e-9


def test_points_validate():
    with pytest.raises(FlowError):
        BarycentricPoint(("a", "b"), (0.5, 0.6))
    with pytest.raises(FlowError):
        BarycentricPoint(("a", "b"), (-0.1, 1.1))
    with pytest.raises(FlowError):
        BarycentricPoint(("a", "a"), (0.5, 0.5))
    p = BarycentricPoint.barycenter(("a", "b", "c"))
    assert p.coord("b") == pytest.approx(1 / 3)
    assert p.coord("z") == 0.0
    with pytest.raises(FlowError):
        BarycentricPoint(("a", "b"), (0.0, 1.0)).require_open()


def test_complex_flow_uses_the_orientation():
    K = simplex_boundary(2)
    O = orientation_from_order(K, ["v0", "v1", "v2"])
    p = BarycentricPoint(("v1", "v2"), (0.5, 0.5))
    q = complex_flow(K, O, p, math.log(3))
    assert q.coord("v1") == pytest.approx(0.75)
    assert flow_limits(K, O, p) == ("v1", "v2")
    with pytest.raises(ComplexError):
        complex_flow(simplex_boundary(2), O, BarycentricPoint.barycenter(("v0", "v1", "v2")), 1.0)


def test_simplex_flow_carrier_mismatch():
    with pytest.raises(FlowError):
        simplex_flow(BarycentricPoint.barycenter(("a", "b")), OrderedCarrier(("a", "c")), 1.0)
    with pytest.raises(FlowError):
        OrderedCarrier(("a", "a"))


def test_trajectory_rows():
    K = simplex(2)
    O = orientation_from_order(K, ["v0", "v1", "v2"])
    rows = trajectory(K, O, BarycentricPoint.barycenter(("v0", "v1", "v2")), [0, 1, 2])
    assert rows.shape == (3, 4)
    assert np.all(np.diff(rows[:, 1]) > 0)  # sink coordinate grows


def test_orientation_rejects_cycles_and_bad_edges():
    K = simplex(2)
    with pytest.raises(OrientationError):
        validate_orientation(K, [("v0", "v1"), ("v1", "v2"), ("v2", "v0")])
    with pytest.raises(OrientationError):
        validate_orientation(K, [("v0", "v1"), ("v1", "v2")])
    with pytest.raises(OrientationError):
        validate_orientation(K, [("v0", "v1"), ("v1", "v0"), ("v1", "v2"), ("v0", "v2")])


def test_cyclic_orientation_of_a_hollow_triangle_is_allowed():
    O = validate_orientation(simplex_boundary(2), [("v0", "v1"), ("v1", "v2"), ("v2", "v0")])
    assert O.flows_to("v2", "v0")


def test_linearization_spectrum_at_each_vertex():
    K = simplex(3)
    O = orientation_from_order(K, K.vertices)
    for l, v in enumerate(K.vertices):
        lin = vertex_linearization(K, O, v)
        assert lin.rank == l
        assert np.max(np.abs(lin.eigenvalues - lin.expected())) < 1e-3


def test_lyapunov_decreases():
    K = simplex(3)
    order = OrderedCarrier(K.vertices)
    lam = dict(zip(K.vertices, [0.0, 1.0, 2.5, 4.0]))
    p = BarycentricPoint.barycenter(K.vertices)
    vals = [lyapunov_value(simplex_flow(p, order, t), lam) for t in np.linspace(-3, 3, 31)]
    assert np.all(np.diff(vals) < 0)
    with pytest.raises(FlowError):
        lyapunov_value(p, dict(zip(K.vertices, [3.0, 1.0, 2.0, 4.0])), order)
    with pytest.raises(FlowError):
        lyapunov_value(p, dict(zip(K.vertices, [1.0, 1.0, 2.0, 4.0])))


def test_stable_and_unstable_strata():
    Wp, Wm = wpm_faces(3, 1)
    assert Wp.zero == (0,) and Wm.zero == (2, 3)
    assert Wp.contains([0, 0.2, 0.3, 0.5]) and not Wp.contains([0.1, 0.2, 0.3, 0.4])
    assert str(Wm) == "{t_i=0 for i in 2..3, t_1>0}"
    with pytest.raises(FlowError):
        wpm_faces(2, 3)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.data())
def test_strata_are_the_limit_sets(m, data):
    k = data.draw(st.integers(0, m))
    Wp, Wm = wpm_faces(m, k)
    c = data.draw(simplex_points(m))
    cp = c.copy()
    cp[list(Wp.zero)] = 0
    cp /= cp.sum()
    assert np.argmax(flow_coords(cp, 60.0)) == k
    cm = c.copy()
    cm[list(Wm.zero)] = 0
    cm /= cm.sum()
    assert np.argmax(flow_coords(cm, -60.0)) == k


def test_parallelism_on_matched_pairs():
    rng = np.random.default_rng(1)
    for m in (2, 3, 4):
        for _ in range(20):
            top = rng.uniform(0.1, 0.6)
            p = np.r_[(1 - top) * rng.dirichlet(np.ones(m)), top]
            q = np.r_[(1 - top) * rng.dirichlet(np.ones(m)), top]
            assert parallelism_check(p, q, rng.uniform(-3, 3))
    with pytest.raises(FlowError):
        parallelism_check([0.2, 0.3, 0.5], [0.3, 0.3, 0.4], 1.0)


def test_chord_is_not_parallel_to_the_unflowed_shadow_chord_in_higher_dimension():
    # the flowed chord follows the flowed shadows, not the original ones, once m >= 3
    p = np.array([0.1, 0.2, 0.3, 0.4])
    q = np.array([0.3, 0.2, 0.1, 0.4])
    res = parallelism_check(p, q, 1.0, detail=True)
    assert res.ok and res.chord_residual < 1e-12
    assert res.initial_chord_residual > 1e-3


def test_normal_slice_round_trip():
    rng = np.random.default_rng(3)
    m, k = 3, 1
    for _ in range(10):
        wp = np.r_[0.0, rng.dirichlet(np.ones(m))]
        wm = np.r_[rng.dirichlet(np.ones(k + 1)), 0.0, 0.0]
        thr = slice_threshold(wp, wm, k)
        r = normal_slice_intersection(wp, wm, k, max(8.0, thr + 1))
        assert r.graph_residual < 1e-8
        assert np.all(r.x >= 0) and r.x.sum() == pytest.approx(1.0)


def test_normal_slice_below_threshold_is_rejected():
    wp = np.array([0.0, 0.2, 0.8])
    wm = np.array([0.7, 0.3, 0.0])
    thr = slice_threshold(wp, wm, 1)
    with pytest.raises(FlowError):
        normal_slice_intersection(wp, wm, 1, thr - 0.5)
    with pytest.raises(FlowError):
        normal_slice_intersection(np.array([0.1, 0.2, 0.7]), wm, 1, thr + 1)


def test_slice_crossing_is_unique():
    rng = np.random.default_rng(4)
    for _ in range(5):
        wp = np.r_[0.0, rng.dirichlet(np.ones(3))]
        wm = np.r_[rng.dirichlet(np.ones(2)), 0.0, 0.0]
        t = max(8.0, slice_threshold(wp, wm, 1) + 1)
        assert len(slice_graph_crossings(wp, wm, t)) == 1


def test_asymptotic_sample_on_an_edge_and_tetrahedron():
    rep = asymptotic_pair_sample(1, 200, seed=0)
    assert set(rep.histogram) <= {(0, 0), (1, 0), (1, 1)}
    assert rep.violations == 0
    rep3 = asymptotic_pair_sample(3, 200, seed=1)
    assert rep3.violations == 0 and rep3.ties == 0
    with pytest.raises(FlowError):
        asymptotic_pair_sample(2, 10, T=5)
