"""Command-line front end.

    orbital-ergodic eval charfn-F --gamma1 0 --gamma2 1 --grid -3:3:0.1
    orbital-ergodic eval orbital --spectrum 1,-1 --a 0.5,0.25
    orbital-ergodic converge --family linear:0.8,-0.5 --sizes 25,50,100,200
    orbital-ergodic sample --orbital 0,1,2 --count 200000 --seed 7 -o b.csv
    orbital-ergodic spline --knots 0,1,2 --ks b.csv
    orbital-ergodic tp --density normal:1.0 --orders 4

Exit codes: 0 success, 2 invalid input, 3 numerical reliability failure,
4 divergence detected.  The default seed comes from $ORBITAL_ERGODIC_SEED.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import stats

from . import __version__
from .convergence import (
    DivergenceError,
    UnreliableEvaluationError,
    estimate_limits,
    explicit_family,
    gaussian_family,
    linear_family,
    read_manifest,
    verify_convergence,
)
from .ergodic import ErgodicParams, charfn_F
from .orbital import orbital_charfn_det, orbital_charfn_onevar, orbital_charfn_series
from .sampling import SamplerSpec, sample_elementary
from .splines_tp import (
    TabulatedDensity,
    approx_fourier,
    as_knots,
    bspline_cdf,
    bspline_eval,
    convolve_densities,
    etp_test,
    exponential_density,
    mixture_density,
    normal_density,
    tp_test,
)

SEED_ENV = "ORBITAL_ERGODIC_SEED"
EXIT_OK, EXIT_INPUT, EXIT_RELIABILITY, EXIT_DIVERGENCE = 0, 2, 3, 4


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int | None = None
    output: str | None = None
    format: str = "csv"
    order: int = 40
    tol: float | None = None

    def header(self) -> dict:
        return {"version": __version__, "config": asdict(self)}


# --- parsing helpers ---------------------------------------------------------------------


def parse_list(text: str | None) -> list[float]:
    if text is None or text.strip() == "":
        return []
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse number list {text!r}") from exc


def parse_grid(text: str) -> np.ndarray:
    """start:stop:step, endpoints included."""
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"grid must be start:stop:step, got {text!r}")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as exc:
        raise InputError(f"cannot parse grid {text!r}") from exc
    if step <= 0 or stop < start:
        raise InputError(f"grid {text!r} needs step > 0 and stop >= start")
    count = int(np.floor((stop - start) / step + 1e-9))
    return start + step * np.arange(count + 1)


def parse_sizes(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise InputError(f"cannot parse sizes {text!r}") from exc


def parse_family(text: str):
    name, _, args = text.partition(":")
    if name == "linear":
        return linear_family(parse_list(args))
    if name == "gaussian":
        vals = parse_list(args)
        if len(vals) != 1:
            raise InputError("gaussian family takes one parameter")
        return gaussian_family(vals[0])
    if name == "explicit":
        return explicit_family(read_manifest(args), label=f"explicit:{args}")
    raise InputError(f"unknown family {name!r} (linear, gaussian, explicit)")


def parse_density(text: str, step: float | None) -> TabulatedDensity:
    """name:args, or several joined by '*' for a convolution."""
    pieces = text.split("*")
    dens = [_single_density(p.strip(), step if len(pieces) == 1 else (step or 0.01)) for p in pieces]
    out = dens[0]
    for d in dens[1:]:
        out = convolve_densities(out, d)
    return out


def _single_density(text: str, step: float | None) -> TabulatedDensity:
    name, _, args = text.partition(":")
    if name == "csv":
        return TabulatedDensity.from_csv(args)
    vals = parse_list(args)
    if name == "normal" and len(vals) == 1:
        return normal_density(vals[0], step=step)
    if name == "exponential" and len(vals) == 1:
        return exponential_density(vals[0], step=step)
    if name == "bimodal" and len(vals) == 2:
        sep, g = vals
        return mixture_density([(0.5, sep, g), (0.5, -sep, g)], step=step)
    raise InputError(f"unknown density {text!r} (normal:g, exponential:y, bimodal:sep,g, csv:path)")


# --- output ------------------------------------------------------------------------------


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.output in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(cfg.output, "w", newline="") as fh:
            fh.write(text)


def _fmt(v: float) -> str:
    return repr(float(v))


def write_table(cfg: RunConfig, columns: list[str], rows: list[list]) -> None:
    if cfg.format == "json":
        doc = cfg.header()
        doc["columns"] = columns
        doc["rows"] = [[v if isinstance(v, (str, bool)) else float(v) for v in r] for r in rows]
        _emit(cfg, json.dumps(doc, indent=2, sort_keys=True) + "\n")
        return
    buf = io.StringIO()
    buf.write("# " + json.dumps(cfg.header(), sort_keys=True) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([v if isinstance(v, (str, bool)) else _fmt(v) for v in r])
    _emit(cfg, buf.getvalue())


def write_json(cfg: RunConfig, payload: dict) -> None:
    doc = cfg.header()
    doc.update(payload)
    _emit(cfg, json.dumps(doc, indent=2, sort_keys=True) + "\n")


# --- commands ----------------------------------------------------------------------------


def cmd_eval(args, cfg: RunConfig) -> int:
    what = args.what
    if what == "charfn-F":
        p = ErgodicParams.from_signed(args.gamma1, args.gamma2, parse_list(args.x), args.theta)
        grid = parse_grid(args.grid)
        vals = np.atleast_1d(charfn_F(p, grid))
        write_table(cfg, ["a", "re", "im", "tail_bound"], [[a, v.real, v.imag, 0.0] for a, v in zip(grid, vals)])
        return EXIT_OK

    if what == "approx-fourier":
        kv = as_knots(parse_list(args.knots))
        grid = parse_grid(args.grid)
        vals = approx_fourier(kv, grid)
        write_table(cfg, ["a", "re", "im", "tail_bound"], [[a, v.real, v.imag, 0.0] for a, v in zip(grid, vals)])
        return EXIT_OK

    spectrum = parse_list(args.spectrum)
    if not spectrum:
        raise InputError("--spectrum is required")

    if what == "orbital":
        a = parse_list(args.a)
        if not a:
            raise InputError("--a is required")
        method = args.method or "both"
        cols, row = ["method"], []
        unreliable = False
        if method in ("series", "both"):
            res = orbital_charfn_series(spectrum, a, cfg.order)
            cols += ["series_re", "series_im", "tail_bound", "reliable"]
            row += [res.value.real, res.value.imag, res.tail_bound, res.reliable]
            unreliable = not res.reliable
        if method in ("det", "both"):
            val = orbital_charfn_det(spectrum, a)
            cols += ["det_re", "det_im"]
            row += [val.real, val.imag]
        write_table(cfg, cols, [[method] + row])
        return EXIT_RELIABILITY if unreliable else EXIT_OK

    if what == "orbital-1d":
        grid = parse_grid(args.grid)
        rows, unreliable = [], False
        for a in grid:
            res = orbital_charfn_onevar(spectrum, a, cfg.order, method=args.method or "auto")
            rows.append([a, res.value.real, res.value.imag, res.tail_bound, res.method, res.reliable])
            unreliable |= not res.reliable
        write_table(cfg, ["a", "re", "im", "tail_bound", "method", "reliable"], rows)
        return EXIT_RELIABILITY if unreliable else EXIT_OK

    raise InputError(f"unknown eval target {what!r}")


def cmd_converge(args, cfg: RunConfig) -> int:
    seq = parse_family(args.family)
    sizes = parse_sizes(args.sizes)
    tol = cfg.tol if cfg.tol is not None else 1e-3
    try:
        est = estimate_limits(seq, sizes, k_max=args.k_max, tol=tol)
    except DivergenceError as exc:
        write_json(cfg, {"status": "divergent", "message": str(exc)})
        print(f"convergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    grid = parse_grid(args.grid)
    p = est.to_params()
    errors = verify_convergence(seq, p, sizes, grid, cfg.order)
    write_json(cfg, {
        "status": "ok",
        "sizes": sizes,
        "estimate": est.to_dict(),
        "limit_params": p.to_dict(),
        "max_error": dict(zip((str(n) for n in sizes), errors)),
        "errors_decreasing": bool(all(b < a for a, b in zip(errors, errors[1:]))),
    })
    return EXIT_OK


def cmd_sample(args, cfg: RunConfig) -> int:
    if args.orbital is not None:
        lam = parse_list(args.orbital)
        spec = SamplerSpec("orbital", tuple(lam), len(lam), cfg.seed)
    else:
        if args.variant is None or args.n is None:
            raise InputError("give --orbital SPECTRUM, or --variant with --params and --n")
        spec = SamplerSpec(args.variant, tuple(parse_list(args.params)), args.n, cfg.seed)
    sample = sample_elementary(spec, args.count, cfg.seed)
    if cfg.format == "json":
        write_json(cfg, {"summary": sample.summary()})
        return EXIT_OK
    iu = np.triu_indices(sample.n)
    cols = [f"{part}_{i + 1}_{j + 1}" for i, j in zip(*iu) for part in ("re", "im")]
    flat = sample.entries[:, iu[0], iu[1]]
    table = np.empty((len(sample), 2 * flat.shape[1]))
    table[:, 0::2] = flat.real
    table[:, 1::2] = flat.imag
    write_table(cfg, cols, table.tolist())
    return EXIT_OK


def _read_b11(path: str) -> np.ndarray:
    with open(path) as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    col = header.index("re_1_1") if "re_1_1" in header else 0
    return np.array([float(r[col]) for r in reader])


def cmd_spline(args, cfg: RunConfig) -> int:
    kv = as_knots(parse_list(args.knots))
    if args.ks:
        draws = _read_b11(args.ks)
        ks = stats.kstest(draws, lambda t: bspline_cdf(kv, t))
        write_json(cfg, {"knots": list(kv.knots), "count": int(draws.size),
                         "ks_statistic": float(ks.statistic), "ks_pvalue": float(ks.pvalue)})
        return EXIT_OK
    grid = parse_grid(args.grid) if args.grid else np.linspace(kv.knots[0], kv.knots[-1], 201)
    dens = bspline_eval(kv, grid)
    cdf = bspline_cdf(kv, grid)
    write_table(cfg, ["t", "density", "cdf"], [[t, d, c] for t, d, c in zip(grid, dens, cdf)])
    return EXIT_OK


def cmd_tp(args, cfg: RunConfig) -> int:
    phi = parse_density(args.density, args.step)
    seed = cfg.seed if cfg.seed is not None else 0
    if args.etp:
        report = etp_test(phi, args.orders, trials=args.trials, seed=seed)
    else:
        report = tp_test(phi, args.orders, trials=args.trials, seed=seed)
    write_json(cfg, {"density": args.density, "report": report.to_dict()})
    return EXIT_OK


COMMANDS = {"eval": (cmd_eval, "orbital"), "converge": (cmd_converge, "convergence"),
            "sample": (cmd_sample, "sampling"), "spline": (cmd_spline, "splines_tp"), "tp": (cmd_tp, "splines_tp")}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="orbital-ergodic", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt="csv"):
        p.add_argument("-o", "--output", default=None, help="output path (default stdout)")
        p.add_argument("--format", choices=["csv", "json"], default=fmt)
        p.add_argument("--seed", type=int, default=None, help=f"RNG seed (default ${SEED_ENV}, else 0)")
        p.add_argument("--order", type=int, default=40, help="series truncation order")
        p.add_argument("--tol", type=float, default=None)

    p = sub.add_parser("eval", help="evaluate characteristic functions")
    p.add_argument("what", choices=["charfn-F", "orbital", "orbital-1d", "approx-fourier"])
    p.add_argument("--gamma1", type=float, default=0.0)
    p.add_argument("--gamma2", type=float, default=0.0)
    p.add_argument("--x", default="")
    p.add_argument("--theta", type=float, default=1.0)
    p.add_argument("--spectrum")
    p.add_argument("--knots")
    p.add_argument("--a")
    p.add_argument("--grid", default="-3:3:0.1")
    p.add_argument("--method", choices=["series", "det", "both", "contour", "auto"])
    common(p)

    p = sub.add_parser("converge", help="limit diagnostics for a spectrum family")
    p.add_argument("--family", required=True, help="linear:x1,..  gaussian:g  explicit:manifest.txt")
    p.add_argument("--sizes", default="25,50,100,200")
    p.add_argument("--grid", default="-2:2:0.1")
    p.add_argument("--k-max", type=int, default=20)
    common(p, "json")

    p = sub.add_parser("sample", help="draw Hermitian matrices")
    p.add_argument("--orbital", help="spectrum for orbital samples")
    p.add_argument("--variant", choices=["dirac", "gaussian", "rank_one", "finite_rank", "orbital"])
    p.add_argument("--params", default="")
    p.add_argument("--n", type=int)
    p.add_argument("--count", type=int, default=1000)
    common(p)

    p = sub.add_parser("spline", help="tabulate a fundamental spline or KS-test samples against it")
    p.add_argument("--knots", required=True)
    p.add_argument("--grid")
    p.add_argument("--ks", help="sample CSV whose re_1_1 column is tested against the spline law")
    common(p)

    p = sub.add_parser("tp", help="total positivity report for a density")
    p.add_argument("--density", required=True)
    p.add_argument("--orders", type=int, default=4)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--etp", action="store_true", help="extended total positivity instead")
    common(p, "json")
    return parser


def resolve_seed(seed: int | None) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(SEED_ENV)
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError as exc:
        raise InputError(f"${SEED_ENV} must be an integer, got {env!r}") from exc


VALUE_FLAGS = ("--grid", "--spectrum", "--a", "--x", "--knots", "--params", "--orbital")


def _attach_values(argv: list[str]) -> list[str]:
    """Rewrite '--grid -3:3:0.1' as '--grid=-3:3:0.1' so argparse does not read the value as a flag."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in VALUE_FLAGS and i + 1 < len(argv) and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(_attach_values(list(sys.argv[1:] if argv is None else argv)))
    handler, module = COMMANDS[args.command]
    params = {k: v for k, v in sorted(vars(args).items())
              if k not in ("command", "output", "format", "seed", "order", "tol")}
    try:
        cfg = RunConfig(args.command, params, resolve_seed(args.seed), args.output, args.format,
                        args.order, args.tol)
        return handler(args, cfg)
    except UnreliableEvaluationError as exc:
        print(f"{module}: {exc}", file=sys.stderr)
        return EXIT_RELIABILITY
    except DivergenceError as exc:
        print(f"{module}: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ValueError, KeyError, OSError) as exc:
        print(f"{module}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
