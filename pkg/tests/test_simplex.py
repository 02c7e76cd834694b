import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog as scipy_linprog

from exactsme.simplex import format_tableau, linprog, simplex_standard


def test_textbook_problem():
    # max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18
    res = linprog([3, 5], A_ub=[[1, 0], [0, 2], [3, 2]], b_ub=[4, 12, 18], maximize=True)
    assert res.status == "optimal"
    assert res.value == pytest.approx(36.0)
    np.testing.assert_allclose(res.x, [2.0, 6.0])


def test_infeasible_and_unbounded():
    assert linprog([1, 1], A_eq=[[1, 1]], b_eq=[3], bounds=[(0, 1), (0, 1)]).status == "infeasible"
    assert linprog([-1, 0], A_ub=[[0, 1]], b_ub=[1]).status == "unbounded"


def test_duals_certify_optimality():
    c = np.array([2.0, 3.0, 0.0, 0.0])
    A = np.array([[1.0, 1.0, -1.0, 0.0], [1.0, 2.0, 0.0, -1.0]])
    b = np.array([2.0, 3.0])
    res = simplex_standard(c, A, b)
    assert res.status == "optimal"
    assert res.duals @ b == pytest.approx(res.value)
    assert np.all(A.T @ res.duals <= c + 1e-9)


def test_redundant_equalities_are_dropped():
    A = np.array([[1.0, 1.0], [2.0, 2.0]])
    res = simplex_standard([1.0, 2.0], A, [1.0, 2.0])
    assert res.status == "optimal" and res.value == pytest.approx(1.0)


def test_degenerate_optimum_is_flagged():
    res = simplex_standard([1.0, 1.0], [[1.0, 1.0]], [1.0])
    assert res.degenerate_columns
    assert "may not be unique" in res.basis_note


def test_tableau_dump_is_plain_text():
    text = format_tableau([1, 2], [[1, 1]], [3])
    assert text.startswith("# standard form")
    assert len(text.strip().splitlines()) == 3


@settings(max_examples=120, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 6), st.integers(1, 8))
def test_agrees_with_reference_solver(seed, rows, cols):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(rows, cols))
    x_feas = rng.uniform(0, 2, cols)
    b = A @ x_feas if rng.random() < 0.8 else rng.normal(size=rows)
    c = rng.normal(size=cols)
    bounds = [(float(lo), float(lo + w)) for lo, w in zip(-rng.uniform(0, 1, cols), rng.uniform(1, 4, cols))]
    ref = scipy_linprog(c, A_eq=A, b_eq=b, bounds=bounds, method="highs")
    ours = linprog(c, A_eq=A, b_eq=b, bounds=bounds)
    if ref.status == 2:
        assert ours.status == "infeasible"
    else:
        assert ref.status == 0
        assert ours.status == "optimal"
        assert ours.value == pytest.approx(ref.fun, rel=1e-7, abs=1e-7)
        assert np.abs(A @ ours.x - b).max() <= 1e-7 * max(1.0, np.abs(b).max())
