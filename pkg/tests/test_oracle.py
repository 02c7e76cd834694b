import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from exactsme import geometry as geo
from exactsme.errors import EmptySet, Infeasible, NotFeasible, Unbounded
from exactsme.instances import random_run
from exactsme.oracle import (ProblemHistory, aligned, check_alignment_optimality, dp_truncation_check,
                             exact_set_recursion, regulator_multipliers_state, regulator_standard_form,
                             solve_estimator, solve_regulator)
from exactsme.plant import System

DEMO = System.from_coefficients([0.0, 1.0], [1.0, -0.5])


def _h(z, x0=(0.0,)):
    return ProblemHistory(DEMO, np.array(x0), np.array(z, dtype=float))


def test_aligned_examples():
    assert aligned(1.0, 1.0, 0.5, 2.0, 0.0)
    assert aligned(0.0, 0.0, 0.0, 0.0, 0.0)
    assert not aligned(0.0, 0.5, 0.0, 1.0, 0.0)
    assert not aligned(0.5, 1.0, 1.0, 0.0, 0.0)  # y* > 0 needs y at the upper band edge
    assert aligned(-1.0, -1.0, -3.0, -1.0, 0.0)


@pytest.mark.parametrize("x_star, terminal", [(1.0, 1.0), (-1.0, -1.0)])
def test_estimator_examples(x_star, terminal):
    sol, x_term = solve_estimator(_h([0.0]), [x_star])
    assert sol.value == pytest.approx(1.0)
    assert x_term[0] == pytest.approx(terminal)


def test_estimator_zero_direction():
    sol, x_term = solve_estimator(_h([0.0]), [0.0])
    assert sol.value == 0.0
    assert -1.0 - 1e-12 <= x_term[0] <= 1.0 + 1e-12


def test_estimator_infeasible_history():
    with pytest.raises(Infeasible):
        solve_estimator(_h([0.0, 10.0]), [1.0])


def test_regulator_examples():
    assert solve_regulator(_h([0.0]), [1.0]).value == pytest.approx(1.0)
    zero = solve_regulator(_h([0.0]), [0.0])
    assert zero.value == pytest.approx(0.0)
    np.testing.assert_allclose(zero.primal, 0.0)


def test_regulator_unbounded_when_set_is_empty():
    with pytest.raises(Unbounded):
        solve_regulator(_h([0.0, 10.0]), [1.0])


def test_regulator_needs_horizon_at_least_order():
    sysm = System.from_coefficients([0.0, 0.0, 1.0], [1.0, 0.0, -0.25])
    with pytest.raises(ValueError):
        regulator_standard_form(ProblemHistory(sysm, np.zeros(2), np.zeros(1)), [1.0, 0.0])


def test_alignment_examples_on_demo():
    h = _h([0.0, 0.0])
    est, _ = solve_estimator(h, [1.0])
    reg = solve_regulator(h, [1.0])
    assert check_alignment_optimality(est.split(), reg.split(), h, [1.0])
    y, v = est.split()
    ys, vs = reg.split()
    # frozen optimum: v = (1, 1), v* = (0, 1); n_1 = 0 so moving v_2 keeps y feasible
    np.testing.assert_allclose(v, [1.0, 1.0])
    np.testing.assert_allclose(vs, [0.0, 1.0])
    v_bad = v.copy()
    v_bad[1] = 0.5
    assert not check_alignment_optimality((y, v_bad), (ys, vs), h, [1.0])
    with pytest.raises(NotFeasible):
        check_alignment_optimality((y, v), (ys + 1.0, vs), h, [1.0])


def test_vacuous_alignment_with_zero_duals():
    h = _h([0.0, 0.0])
    y, v = np.zeros(2), np.zeros(2)
    assert check_alignment_optimality((y, v), (np.zeros(2), np.zeros(2)), h, [0.0])


@pytest.mark.parametrize("z, expected", [([0.0], [[-1.0, 1.0]]),
                                         ([0.0, 0.0], [[-1.0, 1.0], [-1.5, 1.5]]),
                                         ([0.0, 1.5], [[-1.0, 1.0], [-0.75, 1.5]])])
def test_exact_recursion_closed_forms(z, expected):
    sets = exact_set_recursion(_h(z))
    for S, (lo, hi) in zip(sets, expected):
        assert abs(S.vertices.min() - lo) <= 1e-12 and abs(S.vertices.max() - hi) <= 1e-12


def test_exact_recursion_reports_failing_step():
    with pytest.raises(EmptySet) as info:
        exact_set_recursion(_h([0.0, 10.0]))
    assert info.value.step == 2


def test_dp_truncation_examples():
    assert dp_truncation_check(_h([0.0, 0.0]), [1.0])
    assert dp_truncation_check(_h([0.0, 0.0]), [0.0])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 2), st.integers(2, 12))
def test_duality_and_support_consistency(seed, m, k):
    run = random_run(seed, m, max(k, m))
    h = ProblemHistory(run.system, run.x0, run.z)
    x_star = np.random.default_rng(seed).normal(size=m)
    est, x_term = solve_estimator(h, x_star)
    reg = solve_regulator(h, x_star)
    scale = 1.0 + abs(est.value)
    assert abs(est.value - reg.value) <= 1e-7 * scale
    assert check_alignment_optimality(est.split(), reg.split(), h, x_star)
    S = exact_set_recursion(h)[-1]
    assert abs(geo.support(S, x_star)[0] - est.value) <= 1e-7 * scale
    assert geo.distance_to_boundary(S, x_term) <= 1e-7 * S.scale
    lam = regulator_multipliers_state(h, reg)
    assert abs(lam @ x_star - est.value) <= 1e-7 * scale
    np.testing.assert_allclose(lam, x_term, atol=1e-6 * S.scale)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 2), st.integers(3, 8))
def test_dp_truncation_property(seed, m, k):
    run = random_run(seed, m, k)
    h = ProblemHistory(run.system, run.x0, run.z)
    assert dp_truncation_check(h, np.random.default_rng(seed).normal(size=m))
