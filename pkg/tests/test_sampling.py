import json

import numpy as np
import pytest
from scipy import stats

from orbital_ergodic.ergodic import ErgodicParams, charfn_f
from orbital_ergodic.sampling import (
    HermitianSample,
    SamplerSpec,
    empirical_charfn,
    haar_unitary,
    orbital_diagonal_entry,
    sample_dirichlet_projection,
    sample_elementary,
    sample_orbital,
    split_seeds,
)


def test_haar_is_unitary():
    u = haar_unitary(6, seed=1, count=50)
    eye = np.eye(6)
    assert np.max(np.abs(np.conj(np.swapaxes(u, 1, 2)) @ u - eye)) < 1e-12
    single = haar_unitary(4, seed=2)
    assert single.shape == (4, 4)
    with pytest.raises(ValueError):
        haar_unitary(0)


def test_haar_n1_is_uniform_phase():
    u = haar_unitary(1, seed=3, count=20000)[:, 0, 0]
    assert np.allclose(np.abs(u), 1)
    assert stats.kstest((np.angle(u) + np.pi) / (2 * np.pi), "uniform").pvalue > 1e-3


def test_haar_entry_modulus_beta_law():
    # |u_11|^2 ~ Beta(1, n - 1) and arg u_11 is uniform
    n = 4
    u = haar_unitary(n, seed=4, count=40000)
    assert stats.kstest(np.abs(u[:, 0, 0]) ** 2, stats.beta(1, n - 1).cdf).pvalue > 1e-3
    assert stats.kstest((np.angle(u[:, 0, 0]) + np.pi) / (2 * np.pi), "uniform").pvalue > 1e-3


def test_uncorrected_qr_is_not_haar():
    # without the phase correction the Q factor fails both the phase law and E|tr U|^2 = 1
    n = 4
    rng = np.random.default_rng(4)
    z = (rng.standard_normal((40000, n, n)) + 1j * rng.standard_normal((40000, n, n))) / np.sqrt(2)
    q, _ = np.linalg.qr(z)
    assert stats.kstest((np.angle(q[:, 0, 0]) + np.pi) / (2 * np.pi), "uniform").pvalue < 1e-6
    assert np.mean(np.abs(np.trace(q, axis1=1, axis2=2)) ** 2) > 1.5


def test_haar_trace_second_moment():
    u = haar_unitary(5, seed=5, count=100_000)
    t = np.abs(np.trace(u, axis1=1, axis2=2)) ** 2
    assert abs(t.mean() - 1) < 3 * t.std() / np.sqrt(t.size)


def test_haar_left_invariance():
    rng = np.random.default_rng(6)
    v = haar_unitary(3, seed=rng)
    u = haar_unitary(3, seed=7, count=40000)
    left = v @ u
    a = np.abs(u[:, 0, 1]) ** 2
    b = np.abs(left[:, 0, 1]) ** 2
    assert stats.ks_2samp(a, b).pvalue > 1e-3


def test_seeding_is_deterministic():
    a = sample_orbital([1.0, 0.0, -1.0], seed=9, count=5)
    b = sample_orbital([1.0, 0.0, -1.0], seed=9, count=5)
    assert np.array_equal(a.entries, b.entries)
    kids = split_seeds(9, 3)
    draws = [np.random.default_rng(k).random() for k in kids]
    assert len(set(draws)) == 3
    assert draws == [np.random.default_rng(k).random() for k in split_seeds(9, 3)]


def test_orbital_samples_preserve_spectrum():
    lam = np.array([2.0, 0.5, 0.5, -1.0])
    s = sample_orbital(lam, seed=1, count=100)
    assert s.is_hermitian()
    assert np.max(np.abs(s.spectrum() - np.sort(lam))) < 1e-10
    assert np.all(s.diagonal() >= lam.min() - 1e-12) and np.all(s.diagonal() <= lam.max() + 1e-12)


def test_scalar_orbit_is_scalar_matrix():
    s = sample_orbital([0.7, 0.7, 0.7], seed=2, count=3)
    assert np.allclose(s.entries, 0.7 * np.eye(3), atol=1e-14)


def test_orbital_diagonal_entry_matches_full_sample():
    lam = [1.0, -0.5, 0.2]
    a = orbital_diagonal_entry(lam, seed=3, count=1000)
    b = sample_orbital(lam, seed=3, count=1000).diagonal()[:, 0]
    assert np.allclose(a, b, atol=1e-12)


def test_hermitian_sample_accessors(tmp_path):
    s = sample_elementary(SamplerSpec("gaussian", (1.0,), 4), count=3, seed=1)
    assert len(s) == 3 and s.n == 4 and s.corner(2).shape == (3, 2, 2)
    assert s.is_hermitian()
    with pytest.raises(ValueError):
        s.corner(5)
    s.to_csv(tmp_path / "s.csv")
    lines = (tmp_path / "s.csv").read_text().splitlines()
    assert lines[0].split(",")[:4] == ["re_1_1", "im_1_1", "re_1_2", "im_1_2"]
    assert len(lines) == 4 and len(lines[1].split(",")) == 2 * 10
    s.to_json(tmp_path / "s.json")
    summary = json.loads((tmp_path / "s.json").read_text())
    assert summary["count"] == 3 and len(summary["corner_eigenvalues"][0]) == 3
    with pytest.raises(ValueError):
        HermitianSample(np.zeros((2, 3)))


def test_sampler_spec_validation():
    with pytest.raises(ValueError):
        SamplerSpec("gaussian", (-1.0,), 3)
    with pytest.raises(ValueError):
        SamplerSpec("wigner", (1.0,), 3)
    with pytest.raises(ValueError):
        SamplerSpec("finite_rank", (0.1,), 3)
    with pytest.raises(ValueError):
        SamplerSpec("orbital", (1.0, 2.0), 3)


def test_dirac_sampler():
    s = sample_elementary(SamplerSpec("dirac", (0.4,), 3), count=2)
    assert np.array_equal(s.entries[0], 0.4 * np.eye(3))


def test_gaussian_sampler_variances_and_invariance():
    g = 2.0
    s = sample_elementary(SamplerSpec("gaussian", (g,), 3), count=100_000, seed=11)
    b = s.entries
    assert abs(b[:, 0, 0].real.var() - g) < 0.05
    assert abs(b[:, 0, 1].real.var() - g / 2) < 0.03
    assert abs(b[:, 0, 1].imag.var() - g / 2) < 0.03
    # invariance: a non-diagonal test matrix gives prod F over its eigenvalues
    A = np.array([[0.3, 0.2 - 0.1j, 0], [0.2 + 0.1j, -0.1, 0.25], [0, 0.25, 0.2]])
    z = np.exp(1j * np.einsum("ij,kji->k", A, b).real)
    se = z.std() / np.sqrt(z.size)
    ref = charfn_f(ErgodicParams(0, g), np.linalg.eigvalsh(A))
    assert abs(z.mean() - ref) < 3.5 * se


def test_rank_one_mean_zero_and_diagonal_independence():
    s = sample_elementary(SamplerSpec("rank_one", (0.8,), 3), count=100_000, seed=12)
    b = s.entries
    se = b[:, 0, 0].real.std() / np.sqrt(len(s))
    assert abs(b[:, 0, 0].real.mean()) < 3.5 * se
    assert abs(b[:, 0, 1].mean()) < 3.5 * np.abs(b[:, 0, 1]).std() / np.sqrt(len(s))
    r = np.corrcoef(b[:, 0, 0].real, b[:, 1, 1].real)[0, 1]
    assert abs(r) < 3.5 / np.sqrt(len(s))


def test_gaussian_diagonal_independence():
    s = sample_elementary(SamplerSpec("gaussian", (1.0,), 2), count=100_000, seed=13)
    r = np.corrcoef(s.diagonal()[:, 0], s.diagonal()[:, 1])[0, 1]
    assert abs(r) < 3.5 / np.sqrt(len(s))


def test_finite_rank_mean_and_positivity():
    z, xs = 0.2, (0.3, 0.1)
    s = sample_elementary(SamplerSpec("finite_rank", (z,) + xs, 5), count=50_000, seed=14)
    b11 = s.diagonal()[:, 0]
    assert abs(b11.mean() - (z + sum(xs))) < 3.5 * b11.std() / np.sqrt(b11.size)
    assert s.spectrum().min() >= -1e-8


def test_dirichlet_projection():
    assert np.allclose(sample_dirichlet_projection(1.0, [0.3, 0.3, 0.3], 10, seed=1), 0.3)
    u = sample_dirichlet_projection(1.0, [0.0, 1.0], 20000, seed=2)
    assert stats.kstest(u, "uniform").pvalue > 1e-3
    # theta = 2, n = 2: Beta(2, 2)
    b = sample_dirichlet_projection(2.0, [0.0, 1.0], 20000, seed=3)
    assert stats.kstest(b, stats.beta(2, 2).cdf).pvalue > 1e-3
    with pytest.raises(ValueError):
        sample_dirichlet_projection(0.0, [0, 1], 10)
    with pytest.raises(ValueError):
        sample_dirichlet_projection(1.0, [0], 10)


def test_empirical_charfn_basics():
    s = sample_orbital([1.0, -1.0, 0.5], seed=1, count=100)
    assert empirical_charfn(s, [0.0]) == (1 + 0j, 0.0)
    with pytest.raises(ValueError):
        empirical_charfn(s, [0.1, 0.2, 0.3, 0.4])
    with pytest.raises(ValueError):
        empirical_charfn([], [0.1])
    mean, se = empirical_charfn([s, s], [0.3])
    assert abs(mean - empirical_charfn(s, [0.3])[0]) < 1e-14


def test_jackknife_error_matches_plain_standard_error():
    s = sample_orbital([1.0, -1.0], seed=2, count=5000)
    z = np.exp(1j * 0.7 * s.diagonal()[:, 0])
    _, se = empirical_charfn(s, [0.7])
    plain = np.sqrt(np.sum(np.abs(z - z.mean()) ** 2) / (z.size - 1) / z.size)
    assert abs(se - plain) < 1e-12
