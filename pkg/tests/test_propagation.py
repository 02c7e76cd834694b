import json

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from exactsme import geometry as geo
from exactsme.errors import ConePrecondition, DegenerateFront, EmptyFront
from exactsme.instances import random_run
from exactsme.oracle import ProblemHistory, exact_step, solve_estimator
from exactsme.plant import System, validate_plant
from exactsme.propagation import (Front, Quadruple, compute_M, critical_points, partition_R, propagate_front,
                                  propagate_point, propagate_point_set, propagate_zero_dual, quadruple_in_M,
                                  seed_front, successor_interval)

DEMO = System.from_coefficients([0.0, 1.0], [1.0, -0.5])
S1 = Front.from_polytope(geo.interval(-1.0, 1.0), 1, [0.0])


def _cone(x, *gens):
    return geo.SupportCone(np.atleast_1d(np.asarray(x, dtype=float)), np.array(gens, dtype=float))


def test_compute_M_examples():
    res = compute_M(1.0, 1.0, 0.0, DEMO.plant)
    assert res.kind == "finite"
    assert res.quadruples == (Quadruple(1.0, 1.0, 2.0, 0.0),)
    assert compute_M(2.5, 1.0, 0.0, DEMO.plant).kind == "empty"


def test_compute_M_interior_line_has_unique_element():
    # line y = 0.2 + 0.5 v stays strictly inside the output band, so y* = 0 and v* = -t / d_last
    p = validate_plant([0.5, 1.0], [1.0, -0.5])
    res = compute_M(0.2, 1.0, 0.0, p)
    assert res.quadruples == (Quadruple(1.0, 0.7, 2.0, 0.0),)


def test_compute_M_segment_needs_zero_t():
    res = compute_M(0.3, 0.0, 0.0, DEMO.plant)
    assert res.kind == "segment" and res.v_range == (-1.0, 1.0)
    assert compute_M(0.3, 0.5, 0.0, DEMO.plant).kind != "segment"


def test_partition_examples():
    tag, rep = partition_R(_cone([1, 1], [1, 0], [0, 1]))
    assert tag == "R1"
    np.testing.assert_array_equal(rep, [0.0, 1.0])
    assert partition_R(_cone([1.0], [1.0])) == ("R2", pytest.approx(np.array([1.0])))
    assert partition_R(_cone([-1.0], [-1.0]))[0] == "R3"
    tag, rep = partition_R(_cone([0, 0], [1, 1], [-1, 1]))
    assert tag == "R1" and rep[0] == 0.0 and rep[1] > 0
    with pytest.raises(ConePrecondition):
        partition_R(geo.SupportCone(np.zeros(2), np.zeros((0, 2))))


def test_successor_interval_examples():
    assert successor_interval([0.3], 0.0, DEMO.plant, DEMO.est) == (-1.0, 1.0)
    assert successor_interval([2.5], 0.0, DEMO.plant, DEMO.est) is None
    diag = System.from_coefficients([1.0, 0.0], [1.0, 0.3])
    # C = -0.3 here, so x_prev = 0 gives the line y = v through the square's diagonal
    assert successor_interval([0.0], 0.0, diag.plant, diag.est) == (-1.0, 1.0)


def test_propagate_point_examples():
    res = propagate_point([1.0], _cone([1.0], [1.0]), 0.0, DEMO)
    assert [(p.x.tolist(), p.x_star.tolist()) for p in res.pairs] == [([1.5], [2.0])]
    res = propagate_point([-1.0], _cone([-1.0], [-1.0]), 0.0, DEMO)
    assert [(p.x.tolist(), p.x_star.tolist()) for p in res.pairs] == [([-1.5], [-2.0])]
    assert propagate_point([2.5], _cone([2.5], [1.0]), 0.0, DEMO).pairs == ()


@pytest.mark.parametrize("z2, lo, hi", [(0.0, -1.5, 1.5), (1.5, -0.75, 1.5)])
def test_propagate_front_first_order_examples(z2, lo, hi):
    nxt = propagate_front(S1, z2, DEMO)
    assert abs(nxt.polytope.vertices.min() - lo) <= 1e-12
    assert abs(nxt.polytope.vertices.max() - hi) <= 1e-12


def test_propagate_front_inconsistent_measurement():
    with pytest.raises(EmptyFront) as info:
        propagate_front(S1, 10.0, DEMO)
    assert info.value.k == 2


def test_propagate_front_refuses_degenerate_input():
    flat = Front(geo.convex_hull(np.array([[0.0], [0.0]])), [], 1, [0.0])
    with pytest.raises(DegenerateFront):
        propagate_front(flat, 0.0, DEMO)


def test_first_order_interior_precursor_reaches_an_endpoint():
    # x_1 = 0.5 lies inside S_1 = [-1, 1], yet its successor -0.75 is the lower
    # endpoint of S_2, whose face along -B* is a single point
    assert successor_interval([0.5], 1.5, DEMO.plant, DEMO.est) == (-1.0, 1.0)
    assert 0.5 * 0.5 - 1.0 == -0.75
    Fp, Fm, in_relint = geo.faces_F(geo.interval(-0.75, 1.5), DEMO.reg.B_star)
    assert not Fm.has_relint and not in_relint(np.array([-0.75]))
    # only the zero-direction route from the critical point reaches it
    crit = critical_points(S1.polytope, 1.5, DEMO, 1e-12)
    assert any(abs(x[0] - 0.5) < 1e-15 for x, _ in crit)
    zero = propagate_zero_dual([0.5], 1.5, DEMO)
    assert any(abs(p.x[0] + 0.75) < 1e-15 for p in zero.pairs)


def test_point_set_seeding_matches_first_set():
    recs = propagate_point_set([0.0], 0.0, DEMO)
    xs = sorted(p.x[0] for r in recs for p in r.pairs)
    assert xs == [-1.0, 1.0]


def test_front_json_round_trip():
    run = random_run(4, 2, 4)
    front, _ = seed_front(run.system, run.x0, run.z)
    front = propagate_front(front, run.z[front.k], run.system)
    data = json.loads(json.dumps(front.to_dict()))
    back = Front.from_dict(data)
    np.testing.assert_array_equal(back.polytope.vertices, front.polytope.vertices)
    assert back.k == front.k and back.z_history == front.z_history
    for (x1, c1), (x2, c2) in zip(front.boundary_points, back.boundary_points):
        np.testing.assert_array_equal(x1, x2)
        np.testing.assert_array_equal(c1.generators, c2.generators)


scalars = st.floats(-3, 3, allow_nan=False)


@settings(max_examples=300, deadline=None)
@given(scalars, scalars, scalars, st.floats(-2, 2), st.floats(0.1, 3), st.floats(-3, 3))
def test_canonical_quadruples_belong_to_M(s, t, z, n1, n_last, d_last):
    assume(abs(d_last) > 0.05)
    p = validate_plant([n1, n_last], [1.0, d_last]) if abs(n1 * d_last - n_last) > 1e-3 else None
    assume(p is not None)
    res = compute_M(s, t, z, p)
    for q in res.quadruples:
        assert quadruple_in_M(q, s, t, z, p)
    if res.kind == "segment":
        assert t == 0.0
    if abs(s - z) > abs(p.n1) + 1 + 1e-9:
        assert res.kind == "empty"


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 5_000), st.data())
def test_successor_set_is_representative_invariant(seed, data):
    run = random_run(seed, 2, 5)
    front, _ = seed_front(run.system, run.x0, run.z)
    assume(front.k < 5)
    z = run.z[front.k]
    idx = data.draw(st.integers(0, len(front.boundary_points) - 1))
    x, cone = front.boundary_points[idx]
    tag, rep = partition_R(cone)
    G = cone.generators
    base = {tuple(np.round(p.x, 9)) for p in propagate_point(x, cone, z, run.system).pairs}
    for _ in range(3):
        if tag == "R1":
            other = rep * data.draw(st.floats(0.1, 10))
        else:
            w = np.array(data.draw(st.lists(st.floats(0.05, 1), min_size=len(G), max_size=len(G))))
            other = w @ G
        got = propagate_point(x, cone, z, run.system, representative=other)
        assert {tuple(np.round(p.x, 9)) for p in got.pairs} == base


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 5_000))
def test_rebuilt_cones_support_the_new_set(seed):
    run = random_run(seed, 2, 6)
    front, _ = seed_front(run.system, run.x0, run.z)
    S = front.polytope
    while front.k < 6:
        z = run.z[front.k]
        S = exact_step(S, run.system, z)
        front = propagate_front(front, z, run.system)
        P = front.polytope
        for x, cone in front.boundary_points:
            assert geo.distance_to_boundary(P, x) <= 1e-12 * P.scale
            for g in cone.generators:
                assert float(g @ x) == pytest.approx(geo.support(P, g)[0], abs=1e-9 * P.scale)
        assert geo.hausdorff_polytopes(P, S) <= 1e-9 * S.diameter
        assert P.contains(run.trajectory.x[front.k], 1e-9)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 5_000))
def test_zero_direction_pairs_are_sound(seed):
    run = random_run(seed, 2, 5)
    front, _ = seed_front(run.system, run.x0, run.z)
    assume(front.k < 5)
    z = run.z[front.k]
    nxt = propagate_front(front, z, run.system)
    h = ProblemHistory(run.system, run.x0, run.z[:front.k + 1])
    for x, x_star, source in nxt.diagnostics.pairs:
        if "zero-dual" not in source:
            continue
        u = x_star / np.linalg.norm(x_star)
        value = solve_estimator(h, u)[0].value
        assert abs(u @ x - value) <= 1e-7
