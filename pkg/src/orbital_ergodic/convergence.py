"""Limit diagnostics for sequences of orbital measures.

Given spectra Lambda(n) for growing n, estimate

    x'_k = lim lambda'_k(n)/n,   x''_k = lim lambda''_k(n)/n,
    gamma1 = lim tr(B_n)/n,      gamma2~ = lim tr(B_n^2)/n^2,
    gamma2 = gamma2~ - sum_k (x'_k^2 + x''_k^2),

and measure how fast f_n(diag(a, 0, ...)) approaches F(a).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy.optimize import brentq

from .ergodic import ErgodicParams, charfn_F, charfn_f
from .orbital import (
    DEFAULT_ORDER,
    RELIABLE_BOUND,
    Spectrum,
    as_spectrum,
    orbital_charfn_onevar,
    orbital_charfn_series,
)

DEFAULT_TOL = 1e-3
DEFAULT_K_MAX = 20


class DivergenceError(RuntimeError):
    """sup_n {p_2(lambda/n) + p_1(lambda/n)^2} appears unbounded."""


class UnreliableEvaluationError(RuntimeError):
    """An orbital characteristic function could not be certified to the reliability bound."""


@dataclass(frozen=True)
class SpectrumSequence:
    generator: Callable[[int], Spectrum]
    label: str = ""

    def __call__(self, n: int) -> Spectrum:
        spec = as_spectrum(self.generator(n))
        if spec.n != n:
            raise ValueError(f"{self.label or 'sequence'}: generator returned {spec.n} eigenvalues for n = {n}")
        return spec


def linear_family(xs: Sequence[float]) -> SpectrumSequence:
    """lambda_i(n) = x_i n for i <= k, the rest zero (a finite-rank sequence)."""
    xs = [float(v) for v in xs]

    def gen(n):
        if n < len(xs):
            raise ValueError(f"linear family with {len(xs)} nonzero eigenvalues needs n >= {len(xs)}")
        return Spectrum(tuple(v * n for v in xs) + (0.0,) * (n - len(xs)))

    return SpectrumSequence(gen, "linear(" + ",".join(f"{v:g}" for v in xs) + ")")


def gaussian_family(gamma: float) -> SpectrumSequence:
    """floor(n/2) eigenvalues sqrt(gamma n) and ceil(n/2) eigenvalues -sqrt(gamma n)."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")

    def gen(n):
        r = math.sqrt(gamma * n)
        return Spectrum((r,) * (n // 2) + (-r,) * ((n + 1) // 2))

    return SpectrumSequence(gen, f"gaussian({gamma:g})")


def wishart_family(y: float, rank_fraction: float) -> SpectrumSequence:
    """r(n) = max(1, floor(rank_fraction * n)) eigenvalues y n / r(n), the rest zero.

    Each eigenvalue over n tends to zero while the trace over n stays y, so the
    limit is the point mass at y * 1 (a law-of-large-numbers Wishart limit).
    """
    if not 0 < rank_fraction <= 1:
        raise ValueError("rank fraction must lie in (0, 1]")

    def gen(n):
        r = max(1, int(math.floor(rank_fraction * n)))
        return Spectrum((y * n / r,) * r + (0.0,) * (n - r))

    return SpectrumSequence(gen, f"wishart({y:g},{rank_fraction:g})")


def explicit_family(spectra: dict[int, Sequence[float]], label: str = "explicit") -> SpectrumSequence:
    table = {int(n): tuple(float(v) for v in vals) for n, vals in spectra.items()}

    def gen(n):
        if n not in table:
            raise KeyError(f"no spectrum of size {n} in {label}")
        return Spectrum(table[n])

    seq = SpectrumSequence(gen, label)
    object.__setattr__(seq, "sizes", tuple(sorted(table)))
    return seq


def read_manifest(path) -> dict[int, tuple[float, ...]]:
    """One spectrum per line, comma or whitespace separated; '#' starts a comment."""
    spectra: dict[int, tuple[float, ...]] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        vals = tuple(float(tok) for tok in line.replace(",", " ").split())
        spectra[len(vals)] = vals
    if not spectra:
        raise ValueError(f"manifest {path} contains no spectra")
    return spectra


def split_spectrum(spectrum) -> tuple[tuple[float, ...], tuple[float, ...]]:
    return as_spectrum(spectrum).split()


def scaled_moments(spectrum, m: int) -> float:
    """p_m(lambda_1/n, ..., lambda_n/n)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    lam = as_spectrum(spectrum).array()
    return float(np.sum((lam / lam.size) ** m))


@dataclass
class LimitEstimate:
    x_pos_est: list[float]
    x_neg_est: list[float]
    x_pos_residuals: list[float]
    x_neg_residuals: list[float]
    gamma1_est: float
    gamma2_tilde_est: float
    gamma2_est: float
    converged: dict[str, bool]
    history: list[dict] = field(default_factory=list)

    def to_params(self) -> ErgodicParams:
        return ErgodicParams(self.gamma1_est, max(self.gamma2_est, 0.0),
                             tuple(v for v in self.x_pos_est if v > 0),
                             tuple(v for v in self.x_neg_est if v < 0))

    def to_dict(self) -> dict:
        return {
            "x_pos": self.x_pos_est,
            "x_neg": self.x_neg_est,
            "x_pos_residuals": self.x_pos_residuals,
            "x_neg_residuals": self.x_neg_residuals,
            "gamma1": self.gamma1_est,
            "gamma2_tilde": self.gamma2_tilde_est,
            "gamma2": self.gamma2_est,
            "converged": self.converged,
            "history": self.history,
        }


def _extremes(spec: Spectrum, k_max: int) -> tuple[np.ndarray, np.ndarray]:
    pos, neg = spec.split()
    n = spec.n
    xp = np.zeros(k_max)
    xn = np.zeros(k_max)
    take = min(k_max, len(pos))
    xp[:take] = np.asarray(pos[:take]) / n
    take = min(k_max, len(neg))
    xn[:take] = np.asarray(neg[:take]) / n
    return xp, xn


def extrapolate_power(ns: Sequence[float], vals: Sequence[float]) -> float | None:
    """Limit of s(n) = s_inf + c n^(-alpha) through the three points (ns, vals).

    Returns None when the data are not contracting like a power law (then no
    extrapolation is justified); returns the last value when it is already flat.
    """
    n0, n1, n2 = (float(v) for v in ns)
    s0, s1, s2 = (float(v) for v in vals)
    d1, d2 = s1 - s0, s2 - s1
    scale = max(abs(s0), abs(s1), abs(s2), 1e-300)
    if abs(d2) <= 1e-13 * scale:
        return s2
    if abs(d1) <= 1e-13 * scale:
        return None
    q = d2 / d1
    q_max = (math.log(n2) - math.log(n1)) / (math.log(n1) - math.log(n0))

    def ratio(alpha):
        return (n2 ** -alpha - n1 ** -alpha) / (n1 ** -alpha - n0 ** -alpha) - q

    if not 0 < q < q_max or ratio(20.0) > 0:
        return None
    alpha = brentq(ratio, 1e-8, 20.0, xtol=1e-14)
    c = d2 / (n2 ** -alpha - n1 ** -alpha)
    return s2 - c * n2 ** -alpha


def _limit(ns, vals, tol) -> tuple[float, bool]:
    """(estimate, converged) from a sequence of values at increasing sizes."""
    est = extrapolate_power(ns[-3:], vals[-3:])
    if est is None:
        return float(vals[-1]), bool(abs(vals[-1] - vals[-2]) < tol)
    if len(ns) >= 4:
        earlier = extrapolate_power(ns[-4:-1], vals[-4:-1])
        ok = earlier is not None and abs(earlier - est) < tol
    else:
        ok = abs(est - vals[-1]) < tol
    return float(est), bool(ok or abs(vals[-1] - vals[-2]) < tol)


def estimate_limits(seq: SpectrumSequence, sizes: Iterable[int], k_max: int = DEFAULT_K_MAX,
                    tol: float = DEFAULT_TOL) -> LimitEstimate:
    sizes = sorted(int(n) for n in sizes)
    if len(sizes) < 3:
        raise ValueError("estimate_limits needs at least 3 sizes")
    if tol <= 0:
        raise ValueError("tol must be positive")

    rows = []
    for n in sizes:
        spec = seq(n)
        xp, xn = _extremes(spec, k_max)
        p1 = scaled_moments(spec, 1)
        p2 = scaled_moments(spec, 2)
        rows.append({"n": n, "x_pos": xp, "x_neg": xn, "gamma1": p1, "gamma2_tilde": p2,
                     "bound": p2 + p1 * p1})

    bounds = [r["bound"] for r in rows]
    ratios = [b1 / b0 if b0 > 0 else (np.inf if b1 > 0 else 1.0) for b0, b1 in zip(bounds, bounds[1:])]
    if all(r > 2 for r in ratios):
        raise DivergenceError(
            "p2(lambda/n) + p1(lambda/n)^2 grows by more than 2x between every pair of consecutive sizes: "
            + ", ".join(f"n={r['n']}: {r['bound']:.4g}" for r in rows))

    ns = [r["n"] for r in rows]

    def side(key):
        est, res, ok = [], [], []
        for k in range(k_max):
            seq_k = [r[key][k] for r in rows]
            if all(v == 0 for v in seq_k):
                est.append(0.0), res.append(0.0), ok.append(True)
                continue
            # sizes too small to carry a k-th eigenvalue of this sign are skipped
            first = next(i for i, v in enumerate(seq_k) if v != 0)
            if len(ns) - first >= 3:
                e, c = _limit(ns[first:], seq_k[first:], tol)
            else:
                e, c = float(seq_k[-1]), False
            # a row matching an already settled predecessor is settled too
            c = c or (bool(ok) and ok[-1] and abs(e - est[-1]) < tol)
            est.append(e)
            res.append(abs(seq_k[-1] - seq_k[-2]))
            ok.append(c)
        mag = np.abs(est)
        # limits keep the order |x_1| >= |x_2| >= ...; a row capped by its
        # predecessor is settled by that ordering, not by its own history
        capped = np.concatenate([[False], mag[1:] > np.minimum.accumulate(mag)[:-1]])
        mag = np.minimum.accumulate(mag)
        # estimates inside the tolerance band are indistinguishable from a vanishing limit
        mag = np.where(mag < tol, 0.0, mag)
        sign = 1.0 if key == "x_pos" else -1.0
        return sign * mag, np.asarray(res), all(o or c for o, c in zip(ok, capped))

    xp, xp_res, xp_ok = side("x_pos")
    xn, xn_res, xn_ok = side("x_neg")
    g1, g1_ok = _limit(ns, [r["gamma1"] for r in rows], tol)
    g2t, g2t_ok = _limit(ns, [r["gamma2_tilde"] for r in rows], tol)
    g2 = g2t - float(np.sum(xp ** 2) + np.sum(xn ** 2))

    converged = {"x_pos": xp_ok, "x_neg": xn_ok, "gamma1": g1_ok, "gamma2_tilde": g2t_ok}
    history = [{"n": r["n"], "x_pos": [float(v) for v in r["x_pos"] if v != 0],
                "x_neg": [float(v) for v in r["x_neg"] if v != 0],
                "gamma1": r["gamma1"], "gamma2_tilde": r["gamma2_tilde"]} for r in rows]
    return LimitEstimate(
        x_pos_est=[float(v) for v in xp if v != 0],
        x_neg_est=[float(v) for v in xn if v != 0],
        x_pos_residuals=[float(v) for v, x in zip(xp_res, xp) if x != 0],
        x_neg_residuals=[float(v) for v, x in zip(xn_res, xn) if x != 0],
        gamma1_est=float(g1),
        gamma2_tilde_est=float(g2t),
        gamma2_est=float(g2),
        converged=converged,
        history=history,
    )


def verify_convergence(seq: SpectrumSequence, p: ErgodicParams, sizes: Iterable[int], a_grid,
                       order: int = DEFAULT_ORDER, points=None) -> list[float]:
    """max |f_n - F| over a_grid for each size.

    With ``points`` (a list of tuples) the multivariate comparison
    f_n(diag(a_1..a_k, 0..)) vs prod F(a_i) is made instead, by the Schur series.
    """
    a_grid = np.atleast_1d(np.asarray(a_grid, dtype=float))
    errors = []
    for n in sizes:
        spec = seq(int(n))
        worst = 0.0
        if points is None:
            target = charfn_F(p, a_grid)
            for a, F in zip(a_grid, np.atleast_1d(target)):
                res = orbital_charfn_onevar(spec, a, order, method="auto")
                if not res.reliable:
                    raise UnreliableEvaluationError(
                        f"n={n}, a={a}: error bound {res.tail_bound:.3g} exceeds {RELIABLE_BOUND}")
                worst = max(worst, abs(res.value - F))
        else:
            for pt in points:
                res = orbital_charfn_series(spec, pt, order)
                if not res.reliable:
                    raise UnreliableEvaluationError(
                        f"n={n}, point={tuple(pt)}: tail bound {res.tail_bound:.3g} exceeds {RELIABLE_BOUND}")
                worst = max(worst, abs(res.value - charfn_f(p, pt)))
        errors.append(float(worst))
    return errors


def tail_control(spectrum, N: int, m: int, side: str = "pos") -> float:
    """Upper bound (lambda'_N/n) p_2(lambda/n) on sum_{r >= N} (lambda'_r/n)^m.

    side="neg" bounds the negative half the same way with |lambda''_N|.
    When lambda'_N > n the factor (lambda'_N/n)^(m-2) is kept instead, since
    the simplification to lambda'_N/n only holds for ratios <= 1.
    """
    if m < 3:
        raise ValueError("the bound needs m >= 3")
    if N < 1:
        raise ValueError("N is 1-based")
    spec = as_spectrum(spectrum)
    pos, neg = spec.split()
    half = pos if side == "pos" else neg
    lead = abs(half[N - 1]) / spec.n if N <= len(half) else 0.0
    factor = lead if lead <= 1 else lead ** (m - 2)
    return factor * scaled_moments(spec, 2)


def actual_tail(spectrum, N: int, m: int, side: str = "pos") -> float:
    spec = as_spectrum(spectrum)
    pos, neg = spec.split()
    half = np.abs(np.asarray(pos if side == "pos" else neg, dtype=float))
    return float(np.sum((half[N - 1:] / spec.n) ** m))
