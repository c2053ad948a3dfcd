"""Parameters and characteristic functions of ergodic U(infinity)-invariant measures.

An ergodic measure is fixed by (gamma1, gamma2, x) and its one-variable
characteristic function

    F(a) = exp(i gamma1 a - gamma2 a^2 / 2) * prod_k exp(-i theta x_k a) / (1 - i x_k a)^theta

with theta = 1 for Hermitian matrices.  The matrix characteristic function
is f(A) = prod over eigenvalues a of A of F(a).
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .symfunc import series_exp


class DiracCaseError(ValueError):
    """The measure is a point mass (gamma2 = 0 and no x); it has no density."""


class GridTooNarrowError(ValueError):
    pass


def _tuple(xs) -> tuple[float, ...]:
    return tuple(float(v) for v in xs)


@dataclass(frozen=True)
class ErgodicParams:
    gamma1: float = 0.0
    gamma2: float = 0.0
    x_pos: tuple[float, ...] = field(default=())
    x_neg: tuple[float, ...] = field(default=())
    theta: float = 1.0

    def __post_init__(self):
        x_pos, x_neg = _tuple(self.x_pos), _tuple(self.x_neg)
        if not np.isfinite(self.gamma1) or not np.isfinite(self.gamma2):
            raise ValueError("gamma1 and gamma2 must be finite")
        if self.gamma2 < 0:
            raise ValueError(f"gamma2 must be nonnegative, got {self.gamma2}")
        if self.theta <= 0:
            raise ValueError(f"theta must be positive, got {self.theta}")
        if any(v <= 0 for v in x_pos):
            raise ValueError("x_pos entries must be strictly positive")
        if any(v >= 0 for v in x_neg):
            raise ValueError("x_neg entries must be strictly negative")
        object.__setattr__(self, "gamma1", float(self.gamma1))
        object.__setattr__(self, "gamma2", float(self.gamma2))
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "x_pos", tuple(sorted(x_pos, reverse=True)))
        object.__setattr__(self, "x_neg", tuple(sorted(x_neg)))

    @classmethod
    def from_signed(cls, gamma1=0.0, gamma2=0.0, x=(), theta=1.0) -> "ErgodicParams":
        """Build from a single signed x list; zero entries are dropped."""
        x = _tuple(x)
        return cls(gamma1, gamma2, tuple(v for v in x if v > 0), tuple(v for v in x if v < 0), theta)

    @property
    def x(self) -> tuple[float, ...]:
        return self.x_pos + self.x_neg

    @property
    def gamma1_bar(self) -> float:
        """Shift of the normal component once the exponential means are split off."""
        return self.gamma1 - self.theta * sum(self.x)

    def is_dirac(self) -> bool:
        return self.gamma2 == 0 and not self.x

    def combine(self, other: "ErgodicParams") -> "ErgodicParams":
        """Parameters of the convolution of the two measures."""
        if self.theta != other.theta:
            raise ValueError("cannot combine parameter sets with different theta")
        return ErgodicParams(self.gamma1 + other.gamma1, self.gamma2 + other.gamma2,
                             self.x_pos + other.x_pos, self.x_neg + other.x_neg, self.theta)

    def to_dict(self) -> dict:
        return {"gamma1": self.gamma1, "gamma2": self.gamma2, "x": list(self.x), "theta": self.theta}

    @classmethod
    def from_dict(cls, d: dict) -> "ErgodicParams":
        return cls.from_signed(d.get("gamma1", 0.0), d.get("gamma2", 0.0), d.get("x", ()), d.get("theta", 1.0))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ErgodicParams":
        return cls.from_dict(json.loads(text))


def charfn_F(p: ErgodicParams, a):
    """F(a); vectorized over a.  Returns a complex scalar for scalar input."""
    a_arr = np.asarray(a, dtype=float)
    log_f = 1j * p.gamma1 * a_arr - 0.5 * p.gamma2 * a_arr ** 2
    for xk in p.x:
        # Re(1 - i x a) = 1 > 0, so the principal log is continuous in a
        log_f = log_f - p.theta * (1j * xk * a_arr + np.log1p(-1j * xk * a_arr))
    out = np.exp(log_f)
    return complex(out) if out.ndim == 0 else out


def charfn_f(p: ErgodicParams, A) -> complex:
    """f(A) for A with the given eigenvalues."""
    a = np.asarray(A, dtype=float).ravel()
    return complex(np.prod(charfn_F(p, a))) if a.size else 1 + 0j


def log_expansion(p: ErgodicParams, order: int) -> np.ndarray:
    """Coefficients l_0..l_order of ln F(a) = sum_m l_m a^m (l_0 = 0)."""
    if order < 0:
        raise ValueError("order must be nonnegative")
    l = np.zeros(order + 1, dtype=complex)
    x = np.asarray(p.x, dtype=float)
    for m in range(1, order + 1):
        pm = np.sum((1j * x) ** m) if x.size else 0
        if m == 1:
            l[1] = 1j * p.gamma1  # the x-terms cancel against the exponential factors
        elif m == 2:
            l[2] = -0.5 * p.gamma2 + p.theta * pm / 2
        else:
            l[m] = p.theta * pm / m
    return l


def taylor_coeffs_F(p: ErgodicParams, order: int) -> np.ndarray:
    """Taylor coefficients c_0..c_order of F at 0."""
    return series_exp(log_expansion(p, order))


def _check_uniform(grid: np.ndarray) -> float:
    if grid.ndim != 1 or grid.size < 3:
        raise ValueError("grid must be a 1-d array with at least 3 points")
    steps = np.diff(grid)
    h = steps.mean()
    if h <= 0 or np.max(np.abs(steps - h)) > 1e-6 * h:
        raise ValueError("grid must be uniform and ascending")
    return float(h)


def _exp_filter(g: np.ndarray, h: float, y: float) -> np.ndarray:
    """Convolve tabulated g with the exponential density of mean |y| (mirrored if y < 0).

    Solves |y| u' + u = g (forward for y > 0, backward for y < 0), treating g
    as piecewise linear between grid nodes; exact for such g.
    """
    s = abs(y)
    r = h / s
    e = np.exp(-r)
    # weights of g(t_k) and g(t_{k+1}) in the one-step update
    w_near = 1 - (1 - e) / r
    w_far = (1 - e) / r - e
    src = g if y > 0 else g[::-1]
    u = np.empty_like(src)
    u[0] = 0.0
    for k in range(src.size - 1):
        u[k + 1] = e * u[k] + w_far * src[k] + w_near * src[k + 1]
    return u if y > 0 else u[::-1]


def density_diag(p: ErgodicParams, grid) -> np.ndarray:
    """Density of the diagonal entry B_11 under the ergodic measure, on a uniform grid.

    Built as the normal density N(gamma1 - sum x, gamma2) convolved with one
    exponential density of mean x_k per parameter (mirrored for x_k < 0).
    """
    if p.theta != 1:
        raise ValueError("density_diag supports theta = 1 only")
    if p.is_dirac():
        raise DiracCaseError("gamma2 = 0 and no x: the distribution is a point mass at gamma1")
    t = np.asarray(grid, dtype=float)
    h = _check_uniform(t)
    xs = list(p.x)
    shift = p.gamma1_bar

    if p.gamma2 > 0:
        phi = np.exp(-(t - shift) ** 2 / (2 * p.gamma2)) / np.sqrt(2 * np.pi * p.gamma2)
    else:
        # no normal part: start from the first exponential in closed form
        y = xs.pop(0)
        z = (t - shift) / y
        phi = np.where(z >= 0, np.exp(-np.abs(z)) / abs(y), 0.0)
    for y in xs:
        phi = _exp_filter(phi, h, y)

    mass = np.trapezoid(phi, t)
    if mass < 0.999:
        raise GridTooNarrowError(f"grid captures only {mass:.6f} of the probability mass")
    return phi


def is_nonneg_supported(p: ErgodicParams) -> bool:
    """Whether the measure lives on nonnegative definite matrices."""
    return p.gamma2 == 0 and not p.x_neg and sum(p.x_pos) <= p.gamma1
