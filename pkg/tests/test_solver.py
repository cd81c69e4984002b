import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from superpose.errors import DimensionMismatch, SingularSystem
from superpose.netlist import parse_netlist
from superpose.solver import PIVOT_RTOL, factor, relative_residual, solve
from superpose.tableau import assemble


def well_conditioned(seed, n):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n))
    return a + n * np.eye(n) * np.sign(rng.standard_normal(n)), rng.standard_normal(n)


def test_identity_factors():
    f = factor(np.eye(4))
    np.testing.assert_array_equal(f.lu, np.eye(4))
    assert f.smallest_pivot_magnitude == 1.0
    u = np.array([1.0, -2.0, 3.5, 0.0])
    np.testing.assert_array_equal(solve(f, u), u)


def test_zero_rhs_gives_exact_zero():
    a, _ = well_conditioned(0, 6)
    x = solve(factor(a), np.zeros(6))
    assert np.all(x == 0.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 30))
def test_matches_lapack_and_residual_bound(seed, n):
    a, rhs = well_conditioned(seed, n)
    f = factor(a)
    x = solve(f, rhs)
    assert relative_residual(a, x, rhs) <= 1e-9
    np.testing.assert_allclose(x, np.linalg.solve(a, rhs), rtol=1e-10, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 25))
def test_factors_reconstruct_permuted_matrix(seed, n):
    a = np.random.default_rng(seed).standard_normal((n, n))
    f = factor(a)
    err = np.abs(f.permutation_matrix() @ a - f.lower() @ f.upper()).max()
    assert err <= 1e-12 * np.abs(a).sum(axis=1).max()
    assert f.smallest_pivot_magnitude == np.abs(np.diag(f.upper())).min()


def test_partial_pivoting_handles_zero_leading_entry():
    a = np.array([[0.0, 1.0], [1.0, 0.0]])
    x = solve(factor(a), [2.0, 3.0])
    np.testing.assert_array_equal(x, [3.0, 2.0])


def test_many_right_hand_sides_share_one_factorization():
    a, _ = well_conditioned(3, 8)
    f = factor(a)
    rhs = np.random.default_rng(4).standard_normal((8, 5))
    x = solve(f, rhs)
    for k in range(5):
        np.testing.assert_allclose(x[:, k], solve(f, rhs[:, k]), rtol=1e-13, atol=1e-15)


def test_ccvs_tableau_is_nonsingular():
    g = parse_netlist("R1 1 2 1\nR2 2 3 1\nV1 1 0 6\nI1 0 2 1\nH1 3 0 R1 1")
    L = assemble(g).L
    assert abs(np.linalg.det(L)) > 1e-6
    f = factor(L)
    assert f.smallest_pivot_magnitude > PIVOT_RTOL * np.abs(L).max()


def test_parallel_voltage_sources_are_singular():
    sys = assemble(parse_netlist("V1 1 0 1\nV2 1 0 2"))
    with pytest.raises(SingularSystem) as info:
        factor(sys.L, labels=sys.col_labels)
    assert info.value.matrix == "L"
    assert "column" in str(info.value)


def test_critical_gain_is_singular():
    # i[R1] = 1 + g * i[R1]: no solution at g = 1
    text = "I1 0 1 1\nR1 1 0 1\nF1 0 1 R1 {}"
    with pytest.raises(SingularSystem):
        factor(assemble(parse_netlist(text.format(1.0))).L)
    factor(assemble(parse_netlist(text.format(1.001))).L)


def test_singular_reports_pivot_step():
    a = np.array([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [0.0, 0.0, 1.0]])
    with pytest.raises(SingularSystem) as info:
        factor(a)
    assert info.value.pivot_index == 1


@pytest.mark.parametrize("a", [np.zeros((2, 3)), np.zeros(3)])
def test_non_square_rejected(a):
    with pytest.raises(DimensionMismatch):
        factor(a)


def test_rhs_length_checked():
    with pytest.raises(DimensionMismatch):
        solve(factor(np.eye(3)), np.ones(4))


def test_deterministic_bits():
    a, rhs = well_conditioned(9, 12)
    x1 = solve(factor(a), rhs)
    x2 = solve(factor(a.copy()), rhs.copy())
    assert x1.tobytes() == x2.tobytes()
