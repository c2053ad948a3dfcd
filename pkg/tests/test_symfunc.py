import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import count_syt, h_monomials, schur_ssyt
from orbital_ergodic.symfunc import (
    Partition,
    complete_homogeneous,
    complete_homogeneous_all,
    content_product,
    dim_sym,
    partitions,
    power_sum,
    schur_bialternant,
    schur_jacobi_trudi,
    series_exp,
    series_log,
    series_product_minor,
)


def test_partition_normalizes_trailing_zeros():
    assert Partition((3, 1, 0, 0)).parts == (3, 1)
    assert Partition(()).weight == 0


@pytest.mark.parametrize("bad", [(1, 2), (2, -1), (0, 1)])
def test_partition_rejects_bad_input(bad):
    with pytest.raises(ValueError):
        Partition(bad)


def test_partition_counts():
    # p(m) for m = 0..10
    assert [sum(1 for _ in partitions(m)) for m in range(11)] == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]
    assert [mu.parts for mu in partitions(4)] == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    assert all(mu.length <= 2 for mu in partitions(7, max_length=2))


def test_conjugate_and_hooks():
    mu = Partition((4, 2, 1))
    assert mu.conjugate().parts == (3, 2, 1, 1)
    assert mu.conjugate().conjugate() == mu
    assert sorted(mu.hooks()) == sorted([6, 4, 2, 1, 3, 1, 1])
    assert mu.hook(1, 1) == 6


@pytest.mark.parametrize("m", range(1, 9))
def test_dim_sym_matches_tableau_count(m):
    for mu in partitions(m):
        assert dim_sym(mu) == count_syt(mu.parts)


def test_dim_sym_sum_of_squares_is_factorial():
    from math import factorial
    for m in range(1, 10):
        assert sum(dim_sym(mu) ** 2 for mu in partitions(m)) == factorial(m)


def test_dim_sym_budget():
    with pytest.raises(OverflowError):
        dim_sym((41,))


def test_content_product():
    # (n)(n+1)(n-1) for the shape (2, 1)
    assert content_product((2, 1), 5) == 5 * 6 * 4
    with pytest.raises(ValueError):
        content_product((1, 1, 1), 2)


def test_complete_homogeneous_matches_monomials():
    rng = np.random.default_rng(3)
    x = rng.normal(size=4) + 1j * rng.normal(size=4)
    h = complete_homogeneous_all(6, x)
    for m in range(7):
        assert abs(h[m] - h_monomials(m, x)) < 1e-10
    assert complete_homogeneous(-1, x) == 0


@pytest.mark.parametrize("shape", [(1,), (2,), (1, 1), (2, 1), (3, 1), (2, 2), (2, 1, 1), (3, 2, 1)])
def test_schur_routes_match_tableaux(shape):
    rng = np.random.default_rng(sum(shape))
    x = rng.uniform(-1, 1, 4)
    ref = schur_ssyt(shape, x)
    assert abs(schur_jacobi_trudi(shape, x) - ref) < 1e-12
    assert abs(schur_bialternant(shape, x) - ref) < 1e-10


def test_schur_length_exceeding_variables():
    with pytest.raises(ValueError):
        schur_jacobi_trudi((1, 1, 1), [1.0, 2.0])


def test_bialternant_rejects_coincident_values():
    with pytest.raises(ValueError):
        schur_bialternant((2, 1), [1.0, 1.0, 0.5])
    # Jacobi-Trudi has no such restriction
    assert abs(schur_jacobi_trudi((2, 1), [1.0, 1.0, 0.5]) - schur_ssyt((2, 1), [1.0, 1.0, 0.5])) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-2, 2), min_size=1, max_size=5), st.integers(1, 6))
def test_power_sum_expansion_in_schur(xs, m):
    # p_1^m = sum_{|mu| = m} dim(mu) s_mu
    lhs = power_sum(1, xs) ** m
    rhs = sum(dim_sym(mu) * schur_jacobi_trudi(mu, xs) for mu in partitions(m, len(xs)))
    assert abs(lhs - rhs) <= 1e-9 * max(1.0, abs(lhs))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False, allow_infinity=False), min_size=2, max_size=8))
def test_series_exp_log_roundtrip(coeffs):
    l = np.concatenate([[0], coeffs])
    back = series_log(series_exp(l))
    assert np.allclose(back[1:], l[1:], atol=1e-9)


def test_series_exp_of_linear_is_exponential():
    from math import factorial
    c = series_exp([0, 2.0, 0, 0, 0, 0])
    assert np.allclose(c, [2.0 ** m / factorial(m) for m in range(6)])


def test_series_product_minor_gives_schur_coefficients():
    # prod_p 1/(1 - x a_p) = sum_mu s_mu(a) h-type minors; with c_m = x^m the minor
    # det[c_{mu_i - i + j}] vanishes unless mu has one row
    c = [0.5 ** m for m in range(10)]
    assert abs(series_product_minor(c, (3,), 2) - 0.125) < 1e-14
    assert abs(series_product_minor(c, (2, 1), 2)) < 1e-14
