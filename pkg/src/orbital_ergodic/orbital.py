"""Characteristic functions of U(n)-orbital measures.

For a spectrum Lambda and a diagonal test matrix A,

    f_Lambda(A) = integral over U(n) of exp(i tr(A u Lambda u^*)) du.

Three evaluators are provided and cross-checked in the tests:

* ``orbital_charfn_series``  -- the Schur expansion
  sum_mu i^|mu| s_mu(Lambda) s_mu(A) / prod_{(p,q) in mu} (n + q - p),
* ``orbital_charfn_det``     -- the closed determinant formula
  prod_{j<n} j! * det[exp(i a_j lambda_k)] / (V(a) V(i lambda)),
* ``orbital_charfn_onevar``  -- A = diag(a, 0, ..., 0), either by the
  complete-homogeneous series or by a Cauchy integral that stays exact for
  large n and repeated eigenvalues.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import lgamma, log

import mpmath
import numpy as np
from scipy.special import gammainc

from .symfunc import (
    _relative_separation,
    complete_homogeneous_all,
    content_product,
    partition_table,
    schur_batch,
)

DEFAULT_ORDER = 40
RELIABLE_BOUND = 1e-8
MIN_SEPARATION = 1e-8


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of an orbit, stored sorted descending."""

    eigenvalues: tuple[float, ...]

    def __post_init__(self):
        vals = np.asarray(self.eigenvalues, dtype=float).ravel()
        if vals.size == 0:
            raise ValueError("a spectrum needs at least one eigenvalue")
        if not np.all(np.isfinite(vals)):
            raise ValueError("spectrum entries must be finite")
        object.__setattr__(self, "eigenvalues", tuple(sorted(vals.tolist(), reverse=True)))

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def array(self) -> np.ndarray:
        return np.asarray(self.eigenvalues)

    def split(self) -> tuple[tuple[float, ...], tuple[float, ...]]:
        """(nonnegative part descending, negative part ascending); zeros go to the first."""
        pos = tuple(v for v in self.eigenvalues if v >= 0)
        neg = tuple(sorted(v for v in self.eigenvalues if v < 0))
        return pos, neg

    def __len__(self):
        return self.n


def as_spectrum(spec) -> Spectrum:
    return spec if isinstance(spec, Spectrum) else Spectrum(tuple(np.ravel(spec)))


def _eval_point(A) -> np.ndarray:
    a = np.asarray(A, dtype=float).ravel()
    if a.size == 0:
        raise ValueError("evaluation point needs at least one entry")
    if not np.all(np.isfinite(a)):
        raise ValueError("evaluation point entries must be finite")
    return a


@dataclass(frozen=True)
class SeriesResult:
    value: complex
    truncation_order: int
    tail_bound: float
    method: str = "series"

    @property
    def reliable(self) -> bool:
        return self.tail_bound <= RELIABLE_BOUND


def exp_tail(x: float, order: int) -> float:
    """sum_{m > order} x^m / m!  for x >= 0."""
    if x == 0:
        return 0.0
    with np.errstate(over="ignore"):
        return float(np.exp(x) * gammainc(order + 1, x))


@lru_cache(maxsize=64)
def _inverse_content_products(order: int, k: int, n: int) -> np.ndarray:
    parts, _, _ = partition_table(order, k)
    return np.array([1.0 / content_product(mu, n) for mu in parts])


def orbital_charfn_series(spectrum, A, order: int = DEFAULT_ORDER) -> SeriesResult:
    """Schur-series value of f_Lambda(diag(A, 0, ..., 0)) truncated at |mu| <= order."""
    lam = as_spectrum(spectrum).array()
    a = _eval_point(A)
    n, k = lam.size, a.size
    if k > n:
        raise ValueError(f"evaluation point has {k} entries but the orbit lives in H({n})")
    if order < 0:
        raise ValueError("order must be nonnegative")
    if not np.any(a):
        return SeriesResult(1 + 0j, order, 0.0)

    _, idx, weights = partition_table(order, k)
    inv_cp = _inverse_content_products(order, k, n)
    top = order + k - 1
    s_lam = schur_batch(complete_homogeneous_all(top, lam), idx)
    s_a = schur_batch(complete_homogeneous_all(top, a), idx)
    value = np.sum((1j ** weights) * inv_cp * s_lam * s_a)

    # |tr(A B)| <= min(||Lambda||_1 ||A||_inf, ||A||_1 ||Lambda||_inf) on the orbit
    x = min(np.abs(lam).sum() * np.abs(a).max(), np.abs(a).sum() * np.abs(lam).max())
    return SeriesResult(complex(value), order, exp_tail(x, order))


def _log_abs_vandermonde(z: np.ndarray) -> tuple[float, complex]:
    """log|V(z)| and the unit phase of V(z) = prod_{j<k} (z_j - z_k)."""
    d = z[:, None] - z[None, :]
    iu = np.triu_indices(z.size, 1)
    diffs = d[iu]
    return float(np.sum(np.log(np.abs(diffs)))), complex(np.prod(diffs / np.abs(diffs)))


def orbital_charfn_det(spectrum, A, precision: str = "auto") -> complex:
    """Closed-form orbital integral; requires len(A) == n and distinct entries on both sides.

    ``precision`` is "auto" (switch to mpmath when cancellation in the
    determinant would cost more than 6 digits), "double" or "mp".
    """
    lam = as_spectrum(spectrum).array()
    a = _eval_point(A)
    n = lam.size
    if a.size != n:
        raise ValueError(f"the determinant formula needs {n} evaluation entries, got {a.size}")
    if _relative_separation(lam) < MIN_SEPARATION:
        raise ValueError("coincident eigenvalues: the determinant formula is singular; use the series route")
    if _relative_separation(a) < MIN_SEPARATION:
        raise ValueError("coincident evaluation entries: the determinant formula is singular; "
                         "use the series route")
    if n == 1:
        return complex(np.exp(1j * a[0] * lam[0]))

    log_sf = sum(lgamma(j + 1) for j in range(n))
    log_va, ph_va = _log_abs_vandermonde(a)
    log_vl, ph_vl = _log_abs_vandermonde(lam)
    ph_vl *= 1j ** (n * (n - 1) // 2)  # V(i lambda) = i^{n(n-1)/2} V(lambda)
    # digits lost against the Hadamard bound n^{n/2} of the numerator
    loss = (0.5 * n * log(n) + log_sf - log_va - log_vl) / log(10)

    if precision == "double" or (precision == "auto" and loss < 6):
        sign, logdet = np.linalg.slogdet(np.exp(1j * np.outer(a, lam)))
        mag = np.exp(logdet + log_sf - log_va - log_vl)
        return complex(mag * sign / (ph_va * ph_vl))

    with mpmath.workdps(int(25 + max(loss, 0))):
        M = mpmath.matrix(n, n)
        for j in range(n):
            for k in range(n):
                M[j, k] = mpmath.expj(mpmath.mpf(float(a[j])) * mpmath.mpf(float(lam[k])))
        det = mpmath.det(M)
        va = mpmath.mpf(1)
        vl = mpmath.mpc(1)
        for j in range(n):
            for k in range(j + 1, n):
                va *= mpmath.mpf(float(a[j])) - mpmath.mpf(float(a[k]))
                vl *= mpmath.mpc(0, 1) * (mpmath.mpf(float(lam[j])) - mpmath.mpf(float(lam[k])))
        sf = mpmath.mpf(1)
        for j in range(1, n):
            sf *= mpmath.factorial(j)
        return complex(sf * det / (va * vl))


def taylor_coeffs_onevar(spectrum, order: int) -> tuple[np.ndarray, np.ndarray]:
    """(c_m, c~_m) for m = 0..order.

    c_m = h_m(i lambda) / (n (n+1) ... (n+m-1)) are the Taylor coefficients of
    a -> f_Lambda(diag(a, 0, ...)); c~_m = h_m(i lambda / n).
    """
    lam = as_spectrum(spectrum).array()
    n = lam.size
    scaled = complete_homogeneous_all(order, 1j * lam / n)
    # n^m / (n (n+1) ... (n+m-1)) accumulated as a product to stay finite
    ratio = np.ones(order + 1)
    if order >= 1:
        ratio[1:] = np.cumprod(n / (n + np.arange(order)))
    return ratio * scaled, scaled


def taylor_coeff_onevar(spectrum, m: int) -> tuple[complex, complex]:
    c, ct = taylor_coeffs_onevar(spectrum, m)
    return complex(c[m]), complex(ct[m])


def _onevar_series(lam: np.ndarray, a: float, order: int) -> SeriesResult:
    n = lam.size
    scaled = complete_homogeneous_all(order, 1j * a * lam / n)
    ratio = np.ones(order + 1)
    if order >= 1:
        ratio[1:] = np.cumprod(n / (n + np.arange(order)))
    value = complex(np.sum(ratio * scaled))
    return SeriesResult(value, order, exp_tail(abs(a) * np.abs(lam).max(), order), "series")


def _onevar_contour(lam: np.ndarray, a: float, rtol: float = 1e-13) -> SeriesResult:
    """(n-1)!/(2 pi i) * contour integral of e^w / prod_k (w - i a lambda_k) dw.

    The contour is the parabola w(u) = mu (1 - u^2) + i nu u, passing through
    the saddle point w = n of e^w w^{-n} and enclosing every pole i a lambda_k.
    """
    n = lam.size
    poles, mult = np.unique(1j * a * lam, return_counts=True)
    radius = float(np.abs(poles).max())
    mu = float(n)
    nu = max(2.0 * mu, 1.5 * radius + 1.0)
    umax = 1.5 * np.sqrt(1.0 + 60.0 / mu)
    log_norm = lgamma(n)

    def integrand(u):
        w = mu * (1 - u * u) + 1j * nu * u
        logs = np.log(w[:, None] - poles[None, :]) @ mult
        return np.exp(log_norm + w - logs) * (-2 * mu * u + 1j * nu)

    N = 256
    prev = None
    while True:
        u = np.linspace(-umax, umax, N + 1)
        vals = integrand(u)
        du = u[1] - u[0]
        total = du * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
        est = total / (2j * np.pi)
        floor = 1e-15 * du * np.abs(vals).sum() / (2 * np.pi)
        if prev is not None:
            err = abs(est - prev) + floor
            if err <= rtol or N >= 1 << 16:
                return SeriesResult(complex(est), 0, float(err), "contour")
        prev = est
        N *= 2


def orbital_charfn_onevar(spectrum, a: float, order: int = DEFAULT_ORDER,
                          method: str = "series") -> SeriesResult:
    """f_Lambda(diag(a, 0, ..., 0)), the characteristic function of B_11 on the orbit.

    method: "series" (Taylor series through `order`), "contour" (exact
    Cauchy integral), or "auto" (series when its tail bound certifies it,
    contour otherwise).
    """
    lam = as_spectrum(spectrum).array()
    a = float(a)
    if a == 0 or not np.any(lam):
        return SeriesResult(1 + 0j, order, 0.0, "series")
    if method == "series":
        return _onevar_series(lam, a, order)
    if method == "contour":
        return _onevar_contour(lam, a)
    if method == "auto":
        res = _onevar_series(lam, a, order)
        if res.tail_bound <= 1e-13:
            return res
        return _onevar_contour(lam, a)
    raise ValueError(f"unknown method {method!r}")
