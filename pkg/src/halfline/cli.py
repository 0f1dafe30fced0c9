"""Command-line front end writing CSV tables with '#' metadata."""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import math
import sys
import warnings

import numpy as np

from . import __version__, estimates, hankel, oracle, propagator
from .errors import DomainError, NumericalWarning, ResolutionError
from .grid import Grid, WaveFunction
from .operator import (
    OperatorParams,
    e0_kernel,
    resolvent_kernel,
    spectral_density_kernel,
)

EXIT_OK, EXIT_CONFIG, EXIT_WARNING = 0, 1, 2


class ConfigError(ValueError):
    pass


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".15g")


class Table:
    def __init__(self, columns):
        self.columns = list(columns)
        self.rows = []
        self.meta = {}
        self.trailer = {}

    def add(self, *values):
        self.rows.append([_fmt(v) for v in values])

    def render(self) -> str:
        buf = io.StringIO()
        for k, v in self.meta.items():
            buf.write(f"# {k}: {_fmt(v) if not isinstance(v, str) else v}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        w.writerows(self.rows)
        if self.trailer:
            buf.write("# fit\n")
            for k, v in self.trailer.items():
                buf.write(f"# {k}: {_fmt(v)}\n")
        return buf.getvalue()


def _parse_s(text):
    if text is None or text == "max":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("--s takes a number or 'max'") from None


def _params(args) -> OperatorParams:
    if args.alpha < -0.25:
        raise ConfigError(f"alpha must be >= -1/4, got {args.alpha:g}")
    return OperatorParams(args.alpha)


def _resolve_s(args, params, default):
    s = args.s
    if s is None:
        s = default
    if s == "max":
        s = params.nu + 0.5
    return float(s)


def _meta(table, args, params, **extra):
    table.meta["halfline version"] = __version__
    table.meta["created"] = _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")
    table.meta["command"] = args.command
    table.meta["alpha"] = params.alpha
    table.meta["nu"] = params.nu
    for k, v in extra.items():
        table.meta[k] = v


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


# ---------------------------------------------------------------------------

def cmd_kernel(args):
    p = _params(args)
    _require(args.x is not None and args.y is not None, "--x and --y are required")
    _require(args.x > 0 and args.y > 0, "x and y must be > 0")
    what = args.what
    if what in ("density", "resolvent"):
        _require(args.lam is not None and args.lam > 0, "--lambda must be > 0")
    if what == "propagator":
        _require(args.t is not None and args.t != 0, "--t must be nonzero")
    t = Table(["x", "y", "lambda" if what != "propagator" else "t", "value_re", "value_im"])
    _meta(t, args, p, what=what)
    if what == "density":
        v = complex(spectral_density_kernel(p, args.lam, args.x, args.y))
        var = args.lam
    elif what == "resolvent":
        v = complex(resolvent_kernel(p, args.lam, args.x, args.y))
        var = args.lam
    elif what == "e0":
        v = complex(e0_kernel(p, args.x, args.y))
        var = "" if args.lam is None else args.lam
    else:
        v = complex(propagator.kernel(p, args.t, args.x, args.y))
        var = args.t
    t.add(args.x, args.y, var, v.real, v.imag)
    return t


def _initial_state(args):
    reach = args.center + 10.0 * args.width
    grid = Grid.gauss_legendre(reach, min(0.05, args.width / 4), 16)
    return WaveFunction.from_function(
        grid, lambda x: np.exp(-((x - args.center) / args.width) ** 2))


def _times(args):
    if args.t is not None:
        _require(args.t != 0, "--t must be nonzero")
        return np.array([args.t])
    _require(args.t_min is not None and args.t_max is not None, "--t or --t-min/--t-max required")
    _require(0 < args.t_min <= args.t_max, "need 0 < t-min <= t-max")
    n = args.t_points or 1
    return np.geomspace(args.t_min, args.t_max, n) if n > 1 else np.array([args.t_min])


def cmd_evolve(args):
    p = _params(args)
    _require(args.width > 0 and args.center > 0, "--center and --width must be > 0")
    ts = _times(args)
    psi0 = _initial_state(args)
    L = args.x_max or (psi0.grid.x_max + 2.0 * math.sqrt(hankel.spectral_cutoff(p, psi0))
                       * float(np.max(np.abs(ts))) + 10.0 * math.sqrt(float(np.max(np.abs(ts)))))
    n = args.grid_n or 2000
    _require(n >= 100, "--grid-n must be >= 100")
    out = Grid.uniform(L, n)
    table = Table(["t", "x", "re", "im"])
    _meta(table, args, p, method=args.method, center=args.center, width=args.width,
          x_max=L, grid_n=n)
    sgrid = None
    if args.method == "hankel":
        sgrid = hankel.SpectralGrid.for_state(p, psi0, float(np.max(np.abs(ts))), x_max=L)
    norms = []
    for t in ts:
        if args.method == "kernel":
            psi = propagator.evolve(p, psi0, t, out)
        elif args.method == "hankel":
            psi = hankel.evolve_diagonalized(p, psi0, t, sgrid, out)
        else:
            _require(n <= oracle.DENSE_MAX_N, f"--grid-n must be <= {oracle.DENSE_MAX_N}")
            psi = oracle.evolve_reference(p, psi0, t, L, n)
        norms.append(psi.norm())
        for x, v in zip(psi.grid.points, psi.values):
            table.add(t, x, v.real, v.imag)
    table.meta["initial_norm"] = psi0.norm()
    table.meta["final_norms"] = " ".join(_fmt(v) for v in norms)
    return table


def _fit_trailer(table, fit):
    table.trailer = {"exponent": fit.exponent, "prefactor": fit.prefactor,
                     "r_squared": fit.r_squared, "n_points": fit.n_points}


def cmd_dispersive(args):
    p = _params(args)
    s = _resolve_s(args, p, "max")
    top = p.nu + 0.5
    _require(0.0 <= s <= top * (1 + 1e-14), f"s must lie in [0, nu+1/2] = [0, {top:.15g}]")
    _require(args.t_min is not None and args.t_max is not None, "--t-min and --t-max are required")
    _require(0 < args.t_min < args.t_max, "need 0 < t-min < t-max")
    n = args.t_points or 25
    _require(n >= 5, "--t-points must be >= 5")
    cfg = estimates.ScanConfig(p.alpha, s, args.t_min, args.t_max, n, x_max=args.x_max,
                               search_points=args.grid_n or 600)
    if args.beta is not None:
        _require(args.beta > s + 0.5, f"beta must exceed s + 1/2 = {s + 0.5:.15g}")
    table = Table(["t", "sup_value"] + (["weighted_l2_norm"] if args.beta is not None else []))
    _meta(table, args, p, s=s, t_min=args.t_min, t_max=args.t_max, t_points=n,
          search_points=cfg.search_points,
          search_x_max=args.x_max if args.x_max else "adaptive")
    fit = estimates.dispersive_scan(cfg)
    if args.beta is None:
        for t, v in zip(fit.variables, fit.values):
            table.add(t, v)
    else:
        table.meta["beta"] = args.beta
        table.meta["probes"] = "gaussian centers 3,5,7,9,11 widths 1,1.5,2"
        l2_fit, l2 = estimates.l2_weighted_decay(p, s, args.beta, fit.variables, return_values=True)
        for t, v, w in zip(fit.variables, fit.values, l2):
            table.add(t, v, w)
    _fit_trailer(table, fit)
    table.trailer["target_exponent"] = -(0.5 + s)
    if args.beta is not None:
        table.trailer["l2_exponent"] = l2_fit.exponent
        table.trailer["l2_r_squared"] = l2_fit.r_squared
    return table


def cmd_threshold(args):
    p = _params(args)
    if args.s is not None and args.s != "max":
        s = float(args.s)
    else:
        _require(args.s != "max", "--s max applies to dispersive scans only")
        s = p.nu + 1.0 + args.eps
    _require(s > p.nu + 1.0, f"s must exceed nu+1 = {p.nu + 1.0:.15g}")
    lo = args.lambda_min if args.lambda_min is not None else 1e-6
    hi = args.lambda_max if args.lambda_max is not None else 1e-2
    n = args.lambda_points or 9
    _require(0 < lo < hi < 1, "need 0 < lambda-min < lambda-max < 1")
    _require(hi / lo >= 1e3 * (1 - 1e-12), "lambda range must span at least 3 decades")
    _require(n >= 5, "--lambda-points must be >= 5")
    lams = np.geomspace(lo, hi, n)
    table = Table(["lambda", "scaled_e1_norm", "scaled_norm", "e0_norm"])
    _meta(table, args, p, s=s, eps=s - p.nu - 1.0, lambda_min=lo, lambda_max=hi,
          lambda_points=n, x_far="1e3/sqrt(lambda)" if args.x_max is None else args.x_max)
    samples = []
    for lam in lams:
        grid = (estimates.threshold_grid(lam) if args.x_max is None
                else estimates.threshold_grid(lam, x_far=args.x_max * math.sqrt(lam)))
        smp = estimates.threshold_norms(p, s, lam, grid)
        samples.append(smp)
        table.add(lam, smp.remainder_norm, smp.scaled_norm, smp.e0_norm)
    fit = estimates.fit_power_law(lams, [x.remainder_norm for x in samples])
    _fit_trailer(table, fit)
    table.trailer["e0_norm_exact"] = estimates.e0_weighted_hs_exact(p, s)
    return table


def cmd_oracle(args):
    p = _params(args)
    lam = args.lam if args.lam is not None else 1.0
    eps = args.eps if args.eps is not None else 0.05
    L = args.x_max or 200.0
    n = args.grid_n or 4000
    _require(lam > 0 and eps > 0, "lambda and eps must be > 0")
    _require(100 <= n <= oracle.DENSE_MAX_N, f"--grid-n must lie in [100, {oracle.DENSE_MAX_N}]")
    pairs = [(1.0, 2.0), (0.5, 1.5), (1.0, 1.0), (1.5, 2.0), (2.0, 2.0)]
    probes = np.array(sorted({v for pr in pairs for v in pr}))
    _require(probes.max() < L, "probe positions must lie inside (0, L)")
    km = oracle.resolvent_density_reference(p, lam, eps, L, n, probes=probes)
    idx = {v: i for i, v in enumerate(probes)}
    table = Table(["x", "y", "reference", "analytic", "relative_deviation"])
    _meta(table, args, p, **{"lambda": lam, "eps": eps, "L": L, "grid_n": n, "scheme": "power"})
    for a, b in pairs:
        ref = km.entries[idx[a], idx[b]]
        ana = spectral_density_kernel(p, lam, a, b)
        table.add(a, b, ref, ana, abs(ref / ana - 1.0))
    return table


COMMANDS = {
    "kernel": cmd_kernel,
    "evolve": cmd_evolve,
    "dispersive-scan": cmd_dispersive,
    "threshold-scan": cmd_threshold,
    "oracle-compare": cmd_oracle,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="halfline", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--alpha", type=float, required=True)
        sp.add_argument("--out", default=None, help="output path (default: stdout)")
        sp.add_argument("--format", choices=["csv"], default="csv")
        sp.add_argument("--x-max", type=float, default=None)
        sp.add_argument("--grid-n", type=int, default=None)
        return sp

    k = common(sub.add_parser("kernel", help="evaluate one kernel value"))
    k.add_argument("--what", choices=["density", "resolvent", "propagator", "e0"], default="density")
    k.add_argument("--lambda", dest="lam", type=float)
    k.add_argument("--x", type=float)
    k.add_argument("--y", type=float)
    k.add_argument("--t", type=float)

    e = common(sub.add_parser("evolve", help="evolve a Gaussian bump"))
    e.add_argument("--method", choices=["kernel", "hankel", "oracle"], default="kernel")
    e.add_argument("--center", type=float, default=5.0)
    e.add_argument("--width", type=float, default=1.0)
    e.add_argument("--t", type=float)
    e.add_argument("--t-min", type=float)
    e.add_argument("--t-max", type=float)
    e.add_argument("--t-points", type=int)

    d = common(sub.add_parser("dispersive-scan", help="weighted kernel sup versus t"))
    d.add_argument("--s", type=_parse_s, default="max")
    d.add_argument("--t-min", type=float)
    d.add_argument("--t-max", type=float)
    d.add_argument("--t-points", type=int)
    d.add_argument("--beta", type=float, default=None,
                   help="also report ||(1+x)^-beta exp(-itH) (1+x)^-beta|| over Gaussian probes")

    th = common(sub.add_parser("threshold-scan", help="scaled remainder norm versus lambda"))
    th.add_argument("--s", type=_parse_s, default=None)
    th.add_argument("--eps", type=float, default=0.5)
    th.add_argument("--lambda-min", type=float)
    th.add_argument("--lambda-max", type=float)
    th.add_argument("--lambda-points", type=int)

    o = common(sub.add_parser("oracle-compare", help="finite-difference density versus closed form"))
    o.add_argument("--lambda", dest="lam", type=float)
    o.add_argument("--eps", type=float)
    return ap


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NumericalWarning)
        try:
            table = COMMANDS[args.command](args)
        except (ConfigError, DomainError, ResolutionError) as exc:
            print(f"halfline: invalid configuration: {exc}", file=stderr)
            return EXIT_CONFIG
    numerical = [w for w in caught if issubclass(w.category, NumericalWarning)]
    for w in numerical:
        table.meta.setdefault("warnings", "")
        table.meta["warnings"] = (table.meta["warnings"] + f" {w.category.__name__}").strip()
        print(f"halfline: warning: {w.message}", file=stderr)
    text = table.render()
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return EXIT_WARNING if numerical else EXIT_OK


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
