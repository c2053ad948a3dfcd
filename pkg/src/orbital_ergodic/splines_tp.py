"""Fundamental splines, their approximate Fourier transforms, and total positivity tests.

The fundamental spline with knots t_1 < ... < t_n is the density

    M(t) = (n-1) * sum_k (t_k - t)_+^(n-2) / prod_{i != k} (t_k - t_i),

the law of sum_k p_k t_k for p uniform on the simplex.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate
from scipy.special import eval_hermitenorm

MIN_KNOT_SEPARATION = 1e-10
TP_RTOL = 1e-10


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class KnotVector:
    knots: tuple[float, ...]

    def __post_init__(self):
        t = tuple(float(v) for v in self.knots)
        if len(t) < 3:
            raise ValueError(f"a fundamental spline needs at least 3 knots, got {len(t)}")
        if not all(math.isfinite(v) for v in t):
            raise ValueError("knots must be finite")
        scale = max(max(abs(v) for v in t), 1.0)
        if any(b - a < MIN_KNOT_SEPARATION * scale for a, b in zip(t, t[1:])):
            raise ValueError("knots must be strictly ascending (coincident knots are not supported)")
        object.__setattr__(self, "knots", t)

    @property
    def n(self) -> int:
        return len(self.knots)

    def array(self) -> np.ndarray:
        return np.asarray(self.knots)

    def _weights(self) -> np.ndarray:
        t = self.array()
        d = t[:, None] - t[None, :]
        np.fill_diagonal(d, 1.0)
        return 1.0 / np.prod(d, axis=1)


def as_knots(kv) -> KnotVector:
    return kv if isinstance(kv, KnotVector) else KnotVector(tuple(np.ravel(kv)))


def bspline_eval(kv, t):
    """M_{n-1}(t) by the truncated-power formula; 0 outside [t_1, t_n]."""
    kv = as_knots(kv)
    knots = kv.array()
    n = kv.n
    t_arr = np.asarray(t, dtype=float)
    tt = np.atleast_1d(t_arr)
    diff = np.maximum(knots[None, :] - tt[:, None], 0.0)
    val = (n - 1) * (diff ** (n - 2)) @ kv._weights()
    inside = (tt >= knots[0]) & (tt <= knots[-1])
    # clip the rounding noise of the alternating sum, which is the only way a negative can appear
    out = np.where(inside, np.maximum(val, 0.0), 0.0)
    return float(out[0]) if t_arr.ndim == 0 else out


def bspline_cdf(kv, t):
    """Distribution function 1 - sum_k (t_k - t)_+^(n-1) / prod_{i != k} (t_k - t_i)."""
    kv = as_knots(kv)
    knots = kv.array()
    n = kv.n
    t_arr = np.asarray(t, dtype=float)
    tt = np.atleast_1d(t_arr)
    diff = np.maximum(knots[None, :] - tt[:, None], 0.0)
    val = 1.0 - (diff ** (n - 1)) @ kv._weights()
    out = np.clip(np.where(tt < knots[0], 0.0, np.where(tt > knots[-1], 1.0, val)), 0.0, 1.0)
    return float(out[0]) if t_arr.ndim == 0 else out


def bspline_normalization(kv) -> float:
    """Adaptive quadrature of M over [t_1, t_n], splitting at the interior knots."""
    kv = as_knots(kv)
    total, err = 0.0, 0.0
    for lo, hi in zip(kv.knots, kv.knots[1:]):
        val, e = integrate.quad(lambda s: bspline_eval(kv, s), lo, hi, epsabs=1e-13, epsrel=1e-12, limit=200)
        total += val
        err += e
    if err > 1e-9:
        raise QuadratureError(f"quadrature error estimate {err:.2e} too large")
    return total


def approx_fourier(kv, a):
    """prod_k (1 - i a t_k / n)^(-1), the exact value of the integral of (1 - i a t/n)^(-n) M(t)."""
    kv = as_knots(kv)
    t = kv.array()
    a_arr = np.asarray(a, dtype=float)
    aa = np.atleast_1d(a_arr)
    out = 1.0 / np.prod(1.0 - 1j * aa[:, None] * t[None, :] / kv.n, axis=1)
    return complex(out[0]) if a_arr.ndim == 0 else out


def spline_integral(kv, g: Callable[[float], complex]) -> complex:
    """Quadrature of g(t) M(t) dt, piece by piece between knots (test oracle)."""
    kv = as_knots(kv)
    re = im = 0.0
    for lo, hi in zip(kv.knots, kv.knots[1:]):
        re += integrate.quad(lambda s: (g(s) * bspline_eval(kv, s)).real, lo, hi, epsabs=1e-13, limit=200)[0]
        im += integrate.quad(lambda s: (g(s) * bspline_eval(kv, s)).imag, lo, hi, epsabs=1e-13, limit=200)[0]
    return complex(re, im)


def approx_fourier_quad(kv, a: float) -> complex:
    kv = as_knots(kv)
    n = kv.n
    return spline_integral(kv, lambda s: (1 - 1j * a * s / n) ** (-n))


# --- densities ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TabulatedDensity:
    """Density values on a uniform grid, linearly interpolated in between.

    ``func`` (vectorized) and ``derivative(t, k)`` give analytic access when known.
    """

    grid: np.ndarray
    values: np.ndarray
    func: Callable | None = field(default=None, compare=False)
    derivative: Callable | None = field(default=None, compare=False)
    normalized: bool = True
    label: str = ""

    def __post_init__(self):
        g = np.asarray(self.grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if g.ndim != 1 or g.shape != v.shape or g.size < 3:
            raise ValueError("grid and values must be 1-d arrays of equal length >= 3")
        steps = np.diff(g)
        h = steps.mean()
        if h <= 0 or np.max(np.abs(steps - h)) > 1e-6 * h:
            raise ValueError("grid must be uniform and ascending")
        if np.any(v < -1e-12 * max(np.abs(v).max(), 1.0)):
            raise ValueError("density values must be nonnegative")
        if self.normalized:
            mass = np.trapezoid(v, g)
            if abs(mass - 1) > 1e-4:
                raise ValueError(f"density integrates to {mass:.6f}, not 1")
        object.__setattr__(self, "grid", g)
        object.__setattr__(self, "values", v)

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0])

    @property
    def support(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])

    def __call__(self, t):
        if self.func is not None:
            return self.func(np.asarray(t, dtype=float))
        t = np.asarray(t, dtype=float)
        lo, hi = self.support
        if np.any((t < lo - 1e-9 * self.step) | (t > hi + 1e-9 * self.step)):
            raise ValueError(f"evaluation outside the tabulated range [{lo}, {hi}]")
        return np.interp(t, self.grid, self.values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "phi"])
            for t, v in zip(self.grid, self.values):
                w.writerow([repr(float(t)), repr(float(v))])

    @classmethod
    def from_csv(cls, path, normalized: bool = True) -> "TabulatedDensity":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1], normalized=normalized, label=str(path))


def default_grid(lo: float, hi: float, step: float | None = None) -> np.ndarray:
    """Nodes k * step covering [lo, hi]; anchoring at 0 keeps grids of equal step aligned."""
    step = step or 1e-3 * (hi - lo)
    k0 = math.floor(lo / step + 1e-9)
    k1 = math.ceil(hi / step - 1e-9)
    return step * np.arange(k0, k1 + 1)


def normal_density(gamma: float, mean: float = 0.0, step: float | None = None, width: float = 10.0) -> TabulatedDensity:
    """psi_gamma: the N(mean, gamma) density tabulated on mean +- width * sd."""
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    sd = math.sqrt(gamma)
    grid = default_grid(mean - width * sd, mean + width * sd, step)

    def f(t):
        return np.exp(-(t - mean) ** 2 / (2 * gamma)) / math.sqrt(2 * math.pi * gamma)

    def d(t, k):
        z = (np.asarray(t, dtype=float) - mean) / sd
        return (-1) ** k * eval_hermitenorm(k, z) * f(t) / sd ** k

    return TabulatedDensity(grid, f(grid), f, d, label=f"normal:{gamma:g}")


def exponential_density(y: float, step: float | None = None, width: float = 30.0) -> TabulatedDensity:
    """phi_y: density of y * Exp(1) (mirrored for y < 0), right-continuous at 0."""
    if y == 0:
        raise ValueError("y must be nonzero")
    s = abs(y)
    lo, hi = (-s, width * s) if y > 0 else (-width * s, s)
    grid = default_grid(lo, hi, step)

    def f(t):
        z = np.asarray(t, dtype=float) / y
        return np.where(z >= 0, np.exp(-np.abs(z)) / s, 0.0)

    # at the jump tabulate the midpoint 1/(2s): the Riemann sum is then second order
    # accurate and the sampled sequence, with generating function (1+qz)/(2(1-qz)),
    # is still a Polya frequency sequence
    vals = f(grid)
    vals[grid == 0.0] = 0.5 / s
    return TabulatedDensity(grid, vals, f, None, label=f"exponential:{y:g}")


def mixture_density(components: Sequence[tuple[float, float, float]], step: float | None = None,
                    width: float = 10.0) -> TabulatedDensity:
    """sum w_i N(m_i, g_i) for components (w, m, g)."""
    lo = min(m - width * math.sqrt(g) for _, m, g in components)
    hi = max(m + width * math.sqrt(g) for _, m, g in components)
    grid = default_grid(lo, hi, step)

    def f(t):
        t = np.asarray(t, dtype=float)
        return sum(w * np.exp(-(t - m) ** 2 / (2 * g)) / math.sqrt(2 * math.pi * g) for w, m, g in components)

    return TabulatedDensity(grid, f(grid), f, None, label="mixture")


def convolve_densities(phi: TabulatedDensity, psi: TabulatedDensity) -> TabulatedDensity:
    """Discrete convolution on the common step, scaled by the step."""
    h1, h2 = phi.step, psi.step
    if abs(h1 - h2) > 1e-9 * max(h1, h2):
        raise ValueError(f"grid steps differ: {h1} vs {h2}")
    vals = np.convolve(phi.values, psi.values) * h1
    grid = phi.grid[0] + psi.grid[0] + h1 * np.arange(vals.size)
    mass = np.trapezoid(vals, grid)
    if abs(mass - 1) > 1e-3:
        raise ValueError(f"convolution has mass {mass:.6f}; widen the input tabulations")
    return TabulatedDensity(grid, vals, normalized=False, label=f"({phi.label})*({psi.label})")


# --- total positivity --------------------------------------------------------------------


@dataclass
class TPReport:
    kind: str
    orders: list[dict]
    status: str

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def order(self, k: int) -> dict:
        for row in self.orders:
            if row["order"] == k:
                return row
        raise KeyError(k)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "status": self.status, "orders": self.orders}

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text + "\n")
        return text


def kernel_det(phi, t, s) -> float:
    """det[phi(t_i - s_j)]."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    return float(np.linalg.det(np.atleast_2d(phi(t[:, None] - s[None, :]))))


def _random_grids(phi: TabulatedDensity, k: int, rng: np.random.Generator):
    lo, hi = phi.support
    c, w = (lo + hi) / 2, (hi - lo) / 2
    # t in c + [-w/2, w/2] and s in [-w/2, w/2] keeps every t_i - s_j inside [lo, hi]
    t = np.sort(rng.uniform(c - w / 2, c + w / 2, k))
    s = np.sort(rng.uniform(-w / 2, w / 2, k))
    if phi.func is None:
        # snap so that t_i - s_j lands exactly on a grid node: no interpolation error
        h = phi.step
        i = np.clip(np.round((t - lo) / h), 0, phi.grid.size - 1)
        t = lo + h * i
        s = h * np.round(s / h)
    return t, s


def tp_test(phi: TabulatedDensity, order: int, trials: int = 100, seed=0) -> TPReport:
    """Minimum of det[phi(t_i - s_j)] over random ascending grids, for each size 1..order."""
    if not 1 <= order <= 5:
        raise ValueError("order must lie in 1..5")
    if trials < 1:
        raise ValueError("trials must be positive")
    rng = np.random.default_rng(seed)
    scale = float(np.max(np.abs(phi.values)))
    rows = []
    for k in range(1, order + 1):
        worst = np.inf
        for _ in range(trials):
            t, s = _random_grids(phi, k, rng)
            worst = min(worst, kernel_det(phi, t, s))
        tol = TP_RTOL * scale ** k
        rows.append({"order": k, "trials": trials, "min_det": worst, "tolerance": tol,
                     "pass": bool(worst >= -tol)})
    status = "PASS" if all(r["pass"] for r in rows) else "FAIL"
    return TPReport("tp", rows, status)


def _fd_derivatives(phi: TabulatedDensity, v: np.ndarray, order: int, h: float) -> np.ndarray:
    """phi^(k)(v), k < order, by 4th-order central differences (5-point stencils)."""
    f = lambda x: phi(x)  # noqa: E731
    out = [f(v)]
    if order >= 2:
        out.append((f(v - 2 * h) - 8 * f(v - h) + 8 * f(v + h) - f(v + 2 * h)) / (12 * h))
    if order >= 3:
        out.append((-f(v - 2 * h) + 16 * f(v - h) - 30 * f(v) + 16 * f(v + h) - f(v + 2 * h)) / (12 * h * h))
    if order >= 4:
        out.append((-f(v - 3 * h) + 8 * f(v - 2 * h) - 13 * f(v - h) + 13 * f(v + h) - 8 * f(v + 2 * h)
                    + f(v + 3 * h)) / (8 * h ** 3))
    return np.array(out)


def etp_test(phi: TabulatedDensity, order: int, points: Sequence[Sequence[float]] | None = None,
             trials: int = 100, seed=0, h: float | None = None) -> TPReport:
    """Minimum of det[phi^(i-1)(v_j)] over descending point sets v_1 > ... > v_k, k = 1..order.

    Without analytic derivatives, 4th-order central differences with step h
    (default 1e-3 of the support width) are used and the noise of the
    estimate (difference against step 2h) is reported; a negative minimum
    inside that noise band gives status INCONCLUSIVE.
    """
    if not 1 <= order <= 4:
        raise ValueError("order must lie in 1..4")
    lo, hi = phi.support
    rng = np.random.default_rng(seed)
    analytic = phi.derivative is not None
    if not analytic:
        h = h or 1e-3 * (hi - lo)
        if phi.func is None:
            h = phi.step * max(1, round(h / phi.step))
    # room for the widest stencil (3 steps) at the doubled step used for the noise estimate
    margin = 0.0 if analytic else 6 * h + (phi.step if phi.func is None else 0.0)

    def derivs(v, k, step):
        if analytic:
            return np.array([phi.derivative(v, j) for j in range(k)])
        return _fd_derivatives(phi, v, k, step)

    rows = []
    status = "PASS"
    for k in range(1, order + 1):
        if points is not None:
            sets = [np.asarray(p, dtype=float) for p in points if len(p) == k]
        else:
            sets = [np.sort(rng.uniform(lo + margin, hi - margin, k))[::-1] for _ in range(trials)]
        if not sets:
            continue
        scale = 1.0
        mats, noise = [], 0.0
        for v in sets:
            if np.any(np.diff(v) >= 0):
                raise ValueError("points must be strictly descending")
            if not analytic and phi.func is None:
                v = lo + phi.step * np.round((v - lo) / phi.step)
            m = derivs(v, k, h)
            mats.append(m)
            if not analytic and k > 1:
                noise = max(noise, abs(np.linalg.det(m) - np.linalg.det(derivs(v, k, 2 * h))))
        mags = np.max(np.abs(np.stack([np.abs(m).max(axis=1) for m in mats])), axis=0)
        scale = float(np.prod(mags))
        worst = min(float(np.linalg.det(m)) for m in mats)
        tol = TP_RTOL * scale
        if worst >= -tol:
            row_status = "PASS"
        elif worst + noise >= -tol:
            row_status = "INCONCLUSIVE"
        else:
            row_status = "FAIL"
        rows.append({"order": k, "trials": len(sets), "min_det": worst, "tolerance": tol,
                     "noise": noise, "status": row_status, "pass": row_status == "PASS"})
        if row_status == "FAIL":
            status = "FAIL"
        elif row_status == "INCONCLUSIVE" and status == "PASS":
            status = "INCONCLUSIVE"
    return TPReport("etp", rows, status)
