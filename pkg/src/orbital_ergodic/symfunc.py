"""Partitions, hook data and the symmetric polynomials s_mu, p_m, h_m.

Combinatorial quantities (hook lengths, dimensions, content products) are
exact Python integers.  Polynomial evaluations are double-precision complex.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import factorial, prod
from typing import Iterator, Sequence

import numpy as np

MAX_EXACT_WEIGHT = 40


@dataclass(frozen=True, order=True)
class Partition:
    """A Young diagram mu_1 >= mu_2 >= ... > 0.  The empty tuple is the zero partition."""

    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        # trailing zeros are allowed on input and dropped
        while parts and parts[-1] == 0:
            parts = parts[:-1]
        if any(p <= 0 for p in parts):
            raise ValueError(f"partition parts must be positive: {self.parts!r}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"partition parts must be weakly decreasing: {self.parts!r}")
        object.__setattr__(self, "parts", parts)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    @property
    def length(self) -> int:
        return len(self.parts)

    def __len__(self):
        return len(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def conjugate(self) -> "Partition":
        if not self.parts:
            return self
        return Partition(tuple(sum(1 for p in self.parts if p > j) for j in range(self.parts[0])))

    def boxes(self) -> Iterator[tuple[int, int]]:
        """Boxes (p, q), 1-based row p and column q."""
        for p, row in enumerate(self.parts, start=1):
            for q in range(1, row + 1):
                yield p, q

    def hook(self, p: int, q: int) -> int:
        conj = self.conjugate().parts
        return (self.parts[p - 1] - q) + (conj[q - 1] - p) + 1

    def hooks(self) -> list[int]:
        conj = self.conjugate().parts
        return [(self.parts[p - 1] - q) + (conj[q - 1] - p) + 1 for p, q in self.boxes()]

    def __repr__(self):
        return f"Partition{self.parts!r}"


def as_partition(mu) -> Partition:
    return mu if isinstance(mu, Partition) else Partition(tuple(mu))


def partitions(m: int, max_length: int | None = None) -> Iterator[Partition]:
    """Partitions of m in lexicographically descending order."""
    if m < 0:
        return
    if max_length is None:
        max_length = m

    def rec(remaining, largest, length_left):
        if remaining == 0:
            yield ()
            return
        if length_left == 0:
            return
        for first in range(min(remaining, largest), 0, -1):
            for rest in rec(remaining - first, first, length_left - 1):
                yield (first,) + rest

    for parts in rec(m, m, max_length):
        yield Partition(parts)


def dim_sym(mu) -> int:
    """Number of standard Young tableaux of shape mu (hook length formula)."""
    mu = as_partition(mu)
    if mu.weight > MAX_EXACT_WEIGHT:
        raise OverflowError(f"|mu| = {mu.weight} exceeds the exact-arithmetic budget {MAX_EXACT_WEIGHT}")
    return factorial(mu.weight) // prod(mu.hooks())


def content_product(mu, n: int) -> int:
    """prod over boxes (p, q) of (n + q - p)."""
    mu = as_partition(mu)
    if mu.length > n:
        raise ValueError(f"length of {mu} exceeds n = {n}")
    return prod(n + q - p for p, q in mu.boxes())


def power_sum(m: int, values) -> complex:
    if m < 1:
        raise ValueError("power sums are defined for m >= 1")
    v = np.asarray(values, dtype=complex)
    return complex(np.sum(v ** m))


def series_exp(log_coeffs: Sequence[complex]) -> np.ndarray:
    """Coefficients of exp(L(a)) from those of L(a) = sum_{m>=1} l_m a^m.

    log_coeffs[0] is ignored (taken as 0); uses m c_m = sum_j j l_j c_{m-j}.
    """
    l = np.asarray(log_coeffs, dtype=complex)
    order = len(l) - 1
    c = np.zeros(order + 1, dtype=complex)
    c[0] = 1.0
    jl = np.arange(order + 1) * l
    for m in range(1, order + 1):
        c[m] = np.dot(jl[1:m + 1], c[m - 1::-1][:m]) / m
    return c


def series_log(coeffs: Sequence[complex]) -> np.ndarray:
    """Inverse of series_exp; requires coeffs[0] == 1."""
    c = np.asarray(coeffs, dtype=complex)
    if abs(c[0] - 1) > 1e-12:
        raise ValueError("series_log needs a unit constant term")
    order = len(c) - 1
    l = np.zeros(order + 1, dtype=complex)
    for m in range(1, order + 1):
        # m c_m = sum_{j=1}^{m} j l_j c_{m-j}
        acc = m * c[m] - np.dot(np.arange(1, m) * l[1:m], c[m - 1:0:-1])
        l[m] = acc / m
    return l


def complete_homogeneous_all(order: int, values) -> np.ndarray:
    """h_0, ..., h_order at the given point via the Newton recurrence m h_m = sum_j p_j h_{m-j}."""
    v = np.asarray(values, dtype=complex).ravel()
    p = np.zeros(order + 1, dtype=complex)
    if order >= 1 and v.size:
        powers = np.ones_like(v)
        for j in range(1, order + 1):
            powers = powers * v
            p[j] = powers.sum()
    l = np.zeros(order + 1, dtype=complex)
    l[1:] = p[1:] / np.arange(1, order + 1)
    return series_exp(l)


def complete_homogeneous(m: int, values) -> complex:
    if m < 0:
        return 0j
    return complex(complete_homogeneous_all(m, values)[m])


@lru_cache(maxsize=256)
def _jt_index(parts: tuple[int, ...], k: int) -> np.ndarray:
    i = np.arange(k)[:, None]
    j = np.arange(k)[None, :]
    mu = np.zeros(k, dtype=int)
    mu[:len(parts)] = parts
    return mu[:, None] - i + j


def _minor_from_coeffs(coeffs: np.ndarray, parts: tuple[int, ...], k: int) -> complex:
    if k == 0:
        return 1 + 0j
    idx = _jt_index(parts, k)
    ext = np.concatenate([coeffs, np.zeros(1, dtype=complex)])
    # negative or out-of-range indices point at the trailing zero
    safe = np.where((idx >= 0) & (idx < len(coeffs)), idx, len(coeffs))
    return complex(np.linalg.det(ext[safe]))


def schur_jacobi_trudi(mu, values) -> complex:
    """s_mu(values) = det[h_{mu_i - i + j}]."""
    mu = as_partition(mu)
    v = np.asarray(values, dtype=complex).ravel()
    if mu.length > v.size:
        if v.size == 0 and mu.length == 0:
            return 1 + 0j
        raise ValueError(f"length of {mu} exceeds number of variables {v.size}")
    if mu.length == 0:
        return 1 + 0j
    k = mu.length
    h = complete_homogeneous_all(mu.parts[0] + k - 1, v)
    return _minor_from_coeffs(h, mu.parts, k)


def _relative_separation(v: np.ndarray) -> float:
    if v.size < 2:
        return np.inf
    scale = max(np.max(np.abs(v)), np.finfo(float).tiny)
    d = np.abs(v[:, None] - v[None, :])
    d[np.diag_indices(v.size)] = np.inf
    return float(d.min() / scale)


def schur_bialternant(mu, values, min_separation: float = 1e-8) -> complex:
    """s_mu(values) = det[v_j^{mu_k + n - k}] / V(values); needs distinct values."""
    mu = as_partition(mu)
    v = np.asarray(values, dtype=complex).ravel()
    n = v.size
    if mu.length > n:
        raise ValueError(f"length of {mu} exceeds number of variables {n}")
    if _relative_separation(v) < min_separation:
        raise ValueError("values are not pairwise distinct within the separation tolerance; "
                         "use schur_jacobi_trudi")
    lam = np.zeros(n, dtype=int)
    lam[:mu.length] = mu.parts
    exps = lam + n - 1 - np.arange(n)
    num = np.linalg.det(v[:, None] ** exps[None, :])
    den = np.linalg.det(v[:, None] ** (n - 1 - np.arange(n))[None, :])
    return complex(num / den)


def series_product_minor(c, mu, k: int) -> complex:
    """det[c_{mu_i - i + j}]_{i,j<=k}: coefficient of s_mu in prod_p sum_m c_m a_p^m."""
    mu = as_partition(mu)
    if mu.length > k:
        raise ValueError(f"length of {mu} exceeds k = {k}")
    coeffs = np.asarray(c, dtype=complex)
    need = (mu.parts[0] if mu.parts else 0) + k - 1
    if len(coeffs) <= need:
        coeffs = np.concatenate([coeffs, np.zeros(need + 1 - len(coeffs), dtype=complex)])
    return _minor_from_coeffs(coeffs, mu.parts, k)


@lru_cache(maxsize=64)
def partition_table(order: int, max_length: int) -> tuple[tuple[Partition, ...], np.ndarray, np.ndarray]:
    """All partitions with |mu| <= order and length <= max_length, plus their
    Jacobi-Trudi index tensors (padded to max_length) and weights."""
    parts = [mu for m in range(order + 1) for mu in partitions(m, max_length)]
    k = max_length
    idx = np.stack([_jt_index(mu.parts, k) for mu in parts]) if k else np.zeros((len(parts), 0, 0), int)
    weights = np.array([mu.weight for mu in parts])
    return tuple(parts), idx, weights


def schur_batch(h: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """Evaluate many Jacobi-Trudi determinants at once from a vector of h_r values."""
    if idx.shape[1] == 0:
        return np.ones(idx.shape[0], dtype=complex)
    ext = np.concatenate([np.asarray(h, dtype=complex), np.zeros(1, dtype=complex)])
    safe = np.where((idx >= 0) & (idx < len(h)), idx, len(h))
    return np.linalg.det(ext[safe])
