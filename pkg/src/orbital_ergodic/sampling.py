"""Seeded Monte Carlo samplers for Hermitian matrices.

All samplers take a ``seed`` (int, SeedSequence or Generator) and draw
``count`` matrices at once; a HermitianSample holds the stacked batch.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .orbital import as_spectrum

CHUNK = 20000


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def split_seeds(seed: int, k: int) -> list[np.random.SeedSequence]:
    """Independent child streams for parallel workers: SeedSequence(seed).spawn(k)."""
    return np.random.SeedSequence(seed).spawn(k)


def _hermitize(m: np.ndarray) -> np.ndarray:
    # (m + m^H)/2 is conjugate-symmetric bit for bit, with an exactly real diagonal
    return (m + np.conj(np.swapaxes(m, -1, -2))) / 2


@dataclass(frozen=True)
class HermitianSample:
    """A batch of Hermitian matrices, entries of shape (count, n, n)."""

    entries: np.ndarray

    def __post_init__(self):
        e = np.asarray(self.entries, dtype=complex)
        if e.ndim == 2:
            e = e[None]
        if e.ndim != 3 or e.shape[1] != e.shape[2]:
            raise ValueError("entries must have shape (count, n, n)")
        object.__setattr__(self, "entries", e)

    @property
    def n(self) -> int:
        return self.entries.shape[1]

    def __len__(self):
        return self.entries.shape[0]

    def __getitem__(self, i) -> np.ndarray:
        return self.entries[i]

    def corner(self, k: int) -> np.ndarray:
        if not 1 <= k <= self.n:
            raise ValueError(f"corner size must lie in 1..{self.n}")
        return self.entries[:, :k, :k]

    def diagonal(self) -> np.ndarray:
        return np.real(np.diagonal(self.entries, axis1=1, axis2=2))

    def spectrum(self, k: int | None = None) -> np.ndarray:
        """Eigenvalues (ascending) of each matrix or of its k x k corner."""
        m = self.entries if k is None else self.corner(k)
        return np.linalg.eigvalsh(m)

    def is_hermitian(self) -> bool:
        return bool(np.array_equal(self.entries, np.conj(np.swapaxes(self.entries, 1, 2))))

    def to_csv(self, path) -> None:
        """One row per matrix: upper triangle row by row, real and imaginary parts interleaved."""
        iu = np.triu_indices(self.n)
        header = [f"{part}_{i + 1}_{j + 1}" for i, j in zip(*iu) for part in ("re", "im")]
        flat = self.entries[:, iu[0], iu[1]]
        rows = np.empty((len(self), 2 * flat.shape[1]))
        rows[:, 0::2] = flat.real
        rows[:, 1::2] = flat.imag
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows.tolist())

    def summary(self, corner: int | None = None) -> dict:
        k = corner or min(self.n, 3)
        return {
            "count": len(self),
            "n": self.n,
            "spectrum": self.spectrum().tolist(),
            "diagonal": self.diagonal().tolist(),
            "corner_size": k,
            "corner_eigenvalues": self.spectrum(k).tolist(),
        }

    def to_json(self, path, corner: int | None = None) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(corner), fh)


def haar_unitary(n: int, seed=None, count: int | None = None) -> np.ndarray:
    """Haar-distributed unitary (or a stack of `count` of them).

    QR of a complex Ginibre matrix, with each column of Q multiplied by the
    phase of the matching diagonal entry of R; without that correction the
    law is not Haar.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = make_rng(seed)
    shape = (n, n) if count is None else (count, n, n)
    z = (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    return q * ph[..., None, :]


def sample_orbital(spectrum, seed=None, count: int = 1) -> HermitianSample:
    """B = U diag(Lambda) U^* with U Haar."""
    lam = as_spectrum(spectrum).array()
    rng = make_rng(seed)
    n = lam.size
    out = np.empty((count, n, n), dtype=complex)
    for start in range(0, count, CHUNK):
        stop = min(count, start + CHUNK)
        u = haar_unitary(n, rng, stop - start)
        out[start:stop] = _hermitize((u * lam[None, None, :]) @ np.conj(np.swapaxes(u, 1, 2)))
    return HermitianSample(out)


def orbital_diagonal_entry(spectrum, seed=None, count: int = 1) -> np.ndarray:
    """Only B_11 of orbital samples: sum_k |u_1k|^2 lambda_k from full Haar unitaries."""
    lam = as_spectrum(spectrum).array()
    rng = make_rng(seed)
    out = np.empty(count)
    for start in range(0, count, CHUNK):
        stop = min(count, start + CHUNK)
        u = haar_unitary(lam.size, rng, stop - start)
        out[start:stop] = np.abs(u[:, 0, :]) ** 2 @ lam
    return out


@dataclass(frozen=True)
class SamplerSpec:
    """variant: "dirac", "gaussian", "rank_one", "finite_rank" or "orbital".

    params: dirac/gaussian -> (gamma,); rank_one -> (y,);
    finite_rank -> (z, x_1, ..., x_k); orbital -> the spectrum.
    """

    variant: str
    params: tuple[float, ...]
    n: int
    seed: int | None = None

    def __post_init__(self):
        if self.variant not in ("dirac", "gaussian", "rank_one", "finite_rank", "orbital"):
            raise ValueError(f"unknown sampler variant {self.variant!r}")
        object.__setattr__(self, "params", tuple(float(v) for v in self.params))
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.variant in ("dirac", "gaussian", "rank_one") and len(self.params) != 1:
            raise ValueError(f"{self.variant} takes exactly one parameter")
        if self.variant == "gaussian" and self.params[0] < 0:
            raise ValueError("gaussian variance gamma must be nonnegative")
        if self.variant == "finite_rank" and len(self.params) < 2:
            raise ValueError("finite_rank takes z followed by at least one x")
        if self.variant == "orbital" and len(self.params) != self.n:
            raise ValueError("orbital spectrum length must equal n")


def _complex_gaussian(rng, shape) -> np.ndarray:
    # density exp(-|z|^2)/pi: real and imaginary parts have variance 1/2
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def sample_elementary(spec: SamplerSpec, count: int = 1, seed=None) -> HermitianSample:
    """n x n corners of the elementary ergodic measures and the finite-rank measures."""
    rng = make_rng(spec.seed if seed is None else seed)
    n = spec.n
    if spec.variant == "dirac":
        g = spec.params[0]
        return HermitianSample(np.broadcast_to(g * np.eye(n, dtype=complex), (count, n, n)).copy())
    if spec.variant == "gaussian":
        g = spec.params[0]
        # diagonal N(0, g); Re and Im of off-diagonal entries N(0, g/2), which is
        # what makes the characteristic function exp(-g tr(A^2)/2) for every A
        z = rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))
        z *= np.sqrt(g / 2)
        upper = np.triu(z, 1)
        diag = np.sqrt(g) * rng.standard_normal((count, n))
        b = upper + np.conj(np.swapaxes(upper, 1, 2))
        b[:, np.arange(n), np.arange(n)] = diag
        return HermitianSample(b)
    if spec.variant == "rank_one":
        y = spec.params[0]
        xi = _complex_gaussian(rng, (count, n))
        b = y * (np.conj(xi)[:, :, None] * xi[:, None, :] - np.eye(n))
        return HermitianSample(_hermitize(b))
    if spec.variant == "finite_rank":
        z, xs = spec.params[0], np.asarray(spec.params[1:])
        k = xs.size
        Xi = _complex_gaussian(rng, (count, k, n))
        b = np.conj(np.swapaxes(Xi, 1, 2)) @ (xs[None, :, None] * Xi) + z * np.eye(n)
        return HermitianSample(_hermitize(b))
    return sample_orbital(spec.params, rng, count)


def sample_dirichlet_projection(theta: float, t_values: Sequence[float], count: int, seed=None) -> np.ndarray:
    """sum_k p_k t_k with (p_1..p_n) ~ Dirichlet(theta, ..., theta), via normalized Gamma(theta)."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    t = np.asarray(t_values, dtype=float)
    if t.size < 2:
        raise ValueError("need at least two values")
    rng = make_rng(seed)
    g = rng.standard_gamma(theta, size=(count, t.size))
    return (g @ t) / g.sum(axis=1)


def empirical_charfn(samples, A) -> tuple[complex, float]:
    """Mean of exp(i tr(diag(A) B)) over the samples, with its jackknife standard error."""
    if isinstance(samples, HermitianSample):
        diag = samples.diagonal()
    else:
        samples = list(samples)
        if not samples:
            raise ValueError("empty sample list")
        diag = np.concatenate([s.diagonal() for s in samples])
    count, n = diag.shape
    if count == 0:
        raise ValueError("empty sample list")
    a = np.asarray(A, dtype=float).ravel()
    if a.size > n:
        raise ValueError(f"evaluation point of length {a.size} does not fit {n} x {n} samples")
    z = np.exp(1j * (diag[:, :a.size] @ a))
    mean = z.mean()
    if count < 2:
        return complex(mean), float("nan")
    loo = (z.sum() - z) / (count - 1)
    var = (count - 1) / count * np.sum(np.abs(loo - loo.mean()) ** 2)
    return complex(mean), float(np.sqrt(var))
