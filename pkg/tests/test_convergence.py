import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orbital_ergodic.convergence import (
    DivergenceError,
    UnreliableEvaluationError,
    actual_tail,
    estimate_limits,
    explicit_family,
    extrapolate_power,
    gaussian_family,
    linear_family,
    read_manifest,
    scaled_moments,
    tail_control,
    verify_convergence,
    wishart_family,
)
from orbital_ergodic.ergodic import ErgodicParams

SIZES = [25, 50, 100, 200]


def test_families_have_right_shape():
    s = linear_family([0.8, -0.5])(10)
    assert s.n == 10 and s.eigenvalues[0] == 8.0 and s.eigenvalues[-1] == -5.0
    g = gaussian_family(1.0)(9)
    assert sum(v > 0 for v in g.eigenvalues) == 4 and sum(v < 0 for v in g.eigenvalues) == 5
    w = wishart_family(0.5, 0.1)(50)
    assert sum(v != 0 for v in w.eigenvalues) == 5
    assert abs(scaled_moments(w, 1) - 0.5) < 1e-14
    with pytest.raises(ValueError):
        linear_family([1, 2, 3])(2)
    with pytest.raises(ValueError):
        gaussian_family(-1.0)


def test_scaled_moments():
    s = [2.0, -1.0, 1.0, 0.0]
    assert scaled_moments(s, 1) == 0.5
    assert scaled_moments(s, 2) == (4 + 1 + 1) / 16
    with pytest.raises(ValueError):
        scaled_moments(s, 0)


def test_extrapolate_power_recovers_limits():
    ns = [50, 100, 200]
    for alpha in (0.5, 1.0, 2.0):
        vals = [0.3 + 1.7 * n ** -alpha for n in ns]
        assert abs(extrapolate_power(ns, vals) - 0.3) < 1e-10
    assert extrapolate_power(ns, [1.0, 1.0, 1.0]) == 1.0
    # oscillating data has no power-law limit
    assert extrapolate_power(ns, [1.0, 2.0, 1.0]) is None


def test_estimate_linear_family():
    est = estimate_limits(linear_family([0.8, -0.5]), SIZES)
    assert est.x_pos_est == [0.8] and est.x_neg_est == [-0.5]
    assert abs(est.gamma1_est - 0.3) < 1e-12
    assert abs(est.gamma2_est) < 1e-12
    assert all(est.converged.values())
    p = est.to_params()
    assert (p.x_pos, p.x_neg, p.gamma2) == ((0.8,), (-0.5,), 0.0)


def test_estimate_gaussian_family():
    est = estimate_limits(gaussian_family(1.0), SIZES)
    assert est.x_pos_est == [] and est.x_neg_est == []
    assert abs(est.gamma1_est) < 1e-12 and abs(est.gamma2_est - 1) < 1e-9
    assert all(est.converged.values())
    # raw finite-n extremes stay in the history
    assert abs(est.history[-1]["x_pos"][0] - np.sqrt(1 / 200)) < 1e-14


def test_estimate_wishart_family_is_dirac_limit():
    est = estimate_limits(wishart_family(0.7, 0.1), SIZES)
    assert est.x_pos_est == [] and est.x_neg_est == []
    assert abs(est.gamma1_est - 0.7) < 1e-12 and abs(est.gamma2_est) < 1e-3


def test_estimate_needs_three_sizes():
    with pytest.raises(ValueError):
        estimate_limits(linear_family([0.5]), [10, 20])
    with pytest.raises(ValueError):
        estimate_limits(linear_family([0.5]), [10, 20, 40], tol=0)


def test_divergence_detected():
    # eigenvalues growing like n^2 make sup p2 + p1^2 infinite
    seq = explicit_family({n: [float(n * n)] + [0.0] * (n - 1) for n in (10, 20, 40)})
    with pytest.raises(DivergenceError):
        estimate_limits(seq, seq.sizes)


def test_no_divergence_for_bounded_growth():
    seq = explicit_family({n: [0.5 * n * (1 + 1 / n)] + [0.0] * (n - 1) for n in (10, 20, 40)})
    est = estimate_limits(seq, seq.sizes)
    assert abs(est.x_pos_est[0] - 0.5) < 1e-3


def test_manifest_reading(tmp_path):
    path = tmp_path / "m.txt"
    path.write_text("# spectra\n1, 2, 3\n\n1 2 3 4 5  # five\n")
    spectra = read_manifest(path)
    assert spectra == {3: (1.0, 2.0, 3.0), 5: (1.0, 2.0, 3.0, 4.0, 5.0)}
    empty = tmp_path / "e.txt"
    empty.write_text("# nothing\n")
    with pytest.raises(ValueError):
        read_manifest(empty)


def test_explicit_family_missing_size():
    seq = explicit_family({3: [1, 2, 3]})
    with pytest.raises(KeyError):
        seq(4)


def test_verify_convergence_errors_decrease():
    seq = linear_family([0.8, -0.5])
    p = estimate_limits(seq, SIZES).to_params()
    errs = verify_convergence(seq, p, SIZES, np.linspace(-2, 2, 21))
    assert errs[-1] < errs[0] and errs[-1] < 0.05


def test_verify_convergence_multivariate_points():
    seq = gaussian_family(1.0)
    p = ErgodicParams(0.0, 1.0)
    errs = verify_convergence(seq, p, [10, 40], [0.0], order=40, points=[(0.3, -0.2)])
    assert errs[1] < errs[0] < 0.05


def test_verify_convergence_refuses_unreliable_series():
    seq = linear_family([3.0])
    with pytest.raises(UnreliableEvaluationError):
        verify_convergence(seq, ErgodicParams.from_signed(3.0, 0, [3.0]), [20], [0.0], order=10, points=[(2.0, 1.0)])


@settings(max_examples=30, deadline=None)
@given(st.integers(5, 60), st.integers(1, 5), st.integers(3, 8), st.integers(0, 1000))
def test_tail_control_bounds_actual_tail(n, N, m, seed):
    rng = np.random.default_rng(seed)
    spec = rng.normal(scale=n / 3, size=n)
    for side in ("pos", "neg"):
        assert actual_tail(spec, N, m, side) <= tail_control(spec, N, m, side) * (1 + 1e-12) + 1e-15


def test_tail_control_arguments():
    with pytest.raises(ValueError):
        tail_control([1.0, 2.0], 1, 2)
    with pytest.raises(ValueError):
        tail_control([1.0, 2.0], 0, 3)
