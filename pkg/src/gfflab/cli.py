"""Command-line interface.

Settings resolve as built-in defaults, then ``--config`` file values, then
explicit flags. Every subcommand prints a JSON report (also written to
``--json``) that embeds the resolved config. Exit codes: 0 all checks pass,
1 a check failed, 2 invalid configuration, 3 numerical failure.
"""

import argparse
import math
import sys
import time

import numpy as np

from . import conformal, estimates, io, lattice, rng, spectral, thick
from .brownian import corridor_constant
from .config import RunConfig
from .exceptions import GFFLabError, InvalidConfigError, NumericalError

EXIT_OK, EXIT_CHECK_FAILED, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2, 3

HIGHPOINT_BAND = 0.3
COVARIANCE_TOL = 0.05
SYMMDIFF_SPREAD = 2.0
AFFINE_TOL = 1e-6


def _point_list(text):
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'x,y', got {text!r}") from None
    return [x, y]


def _add_common(p):
    p.add_argument("--config", dest="config_path", help="JSON config file; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="worker processes (default: $GFFLAB_WORKERS or 1)")
    p.add_argument("--json", help="write the JSON report here")


def build_parser():
    parser = argparse.ArgumentParser(prog="gfflab", description="Gaussian free field laboratory")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    S = argparse.SUPPRESS

    def add(name, help_text):
        p = sub.add_parser(name, help=help_text, argument_default=S)
        _add_common(p)
        return p

    p = add("sample", "sample a spectral or lattice field to a GFFB file")
    p.add_argument("--mode", choices=["spectral", "lattice"])
    p.add_argument("--cutoff", type=int)
    p.add_argument("--grid", type=int, nargs="+")
    p.add_argument("--out")

    p = add("eval", "evaluate point values or region functionals of a stored spectral field")
    p.add_argument("--field", dest="field_path")
    p.add_argument("--points", type=_point_list, nargs="+", metavar="X,Y")
    p.add_argument("--radius", dest="radii", type=float, nargs="+")
    p.add_argument("--region", choices=["point", "circle", "disk", "square"])
    p.add_argument("--csv")

    p = add("variance", "exact disk/square integral variances against their asymptotics")
    p.add_argument("--points", type=_point_list, nargs="+", metavar="X,Y")
    p.add_argument("--radius", dest="radii", type=float, nargs="+")
    p.add_argument("--cutoff", type=int)
    p.add_argument("--region", choices=["disk", "square"])
    p.add_argument("--csv")

    p = add("covariance", "circle-average covariance matrix and its Brownian slope")
    p.add_argument("--points", type=_point_list, nargs="+", metavar="X,Y")
    p.add_argument("--radius", dest="radii", type=float, nargs="+")
    p.add_argument("--cutoff", type=int)
    p.add_argument("--csv")

    p = add("highpoints", "DGFF high-point counts over grids, levels and seeds")
    p.add_argument("--grid", type=int, nargs="+")
    p.add_argument("--a", type=float, nargs="+")
    p.add_argument("--seeds", type=int)
    p.add_argument("--threshold-coef", dest="threshold_coef", type=float)
    p.add_argument("--csv")
    p.add_argument("--svg")

    p = add("fit", "fit growth exponents from a high-point CSV")
    p.add_argument("input", nargs="?")

    p = add("energy", "alpha-energy and box dimension of DGFF high points")
    p.add_argument("--grid", type=int, nargs="+")
    p.add_argument("--a", type=float, nargs="+")
    p.add_argument("--alpha", type=float)
    p.add_argument("--threshold-coef", dest="threshold_coef", type=float)
    p.add_argument("--csv")

    p = add("events", "Monte Carlo corridor-event probabilities")
    p.add_argument("--event", choices=["perfect", "f", "corridor"])
    p.add_argument("--a", type=float, nargs="+")
    p.add_argument("--m", type=int, nargs="+")
    p.add_argument("--horizons", type=float, nargs="+")
    p.add_argument("--trials", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--csv")

    p = add("conformal", "conformal error functional and image-disk area distortion")
    p.add_argument("--map")
    p.add_argument("--radius", dest="radii", type=float, nargs="+")
    p.add_argument("--cutoff", type=int)
    p.add_argument("--resolution", type=int)
    p.add_argument("--csv")
    p.add_argument("--svg")

    p = add("check-estimates", "run the Gaussian and Brownian estimate battery")
    p.add_argument("--trials", type=int)
    p.add_argument("--steps", type=int)
    p.add_argument("--csv")

    p = add("holder", "empirical Hoelder quotients of the circle-average process")
    p.add_argument("--cutoff", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--pairs", type=int)
    p.add_argument("--r-min", dest="r_min", type=float)

    p = add("liouville", "Monte Carlo mean of the fixed-r Liouville mass")
    p.add_argument("--gamma", type=float)
    p.add_argument("--radius", dest="radii", type=float, nargs="+")
    p.add_argument("--cutoff", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--region-center", dest="region_center", type=_point_list, metavar="X,Y")
    p.add_argument("--region-side", dest="region_side", type=float)

    add("run", "run the subcommands listed under 'checks' in the config")
    return parser


def resolve_config(args):
    """Defaults, then the config file, then explicit flags."""
    values = vars(args).copy()
    subcommand = values.pop("subcommand")
    config_path = values.pop("config_path", None)
    cfg = RunConfig.load(config_path) if config_path else RunConfig()
    if subcommand != "run" or config_path is None:
        cfg = cfg.replace(subcommand=subcommand)
    try:
        return cfg.replace(**values)
    except TypeError as exc:
        raise InvalidConfigError(str(exc)) from None


def _seed(cfg):
    if not 0 <= cfg.seed < 2**64:
        raise InvalidConfigError(f"seed must be a u64, got {cfg.seed}")
    return cfg.seed


def cmd_sample(cfg):
    if not cfg.out:
        raise InvalidConfigError("sample needs --out")
    if cfg.mode == "spectral":
        fld = spectral.sample_spectral(cfg.cutoff, _seed(cfg))
        dim = fld.cutoff
    else:
        fld = lattice.sample_dgff(cfg.grid[0], _seed(cfg))
        dim = fld.n
    io.write_gffb(cfg.out, fld)
    return {"mode": cfg.mode, "dimension": dim, "path": cfg.out}, {}


def cmd_eval(cfg):
    if not cfg.field_path:
        raise InvalidConfigError("eval needs --field")
    fld = io.read_gffb(cfg.field_path)
    if not isinstance(fld, spectral.SpectralField):
        raise InvalidConfigError("eval works on spectral fields only")
    pts = np.asarray(cfg.points, dtype=float)
    rows = []
    radii = cfg.radii if cfg.region != "point" else [0.0]
    for r in radii:
        if cfg.region == "point":
            vals = spectral.eval_point(fld, pts)
        elif cfg.region == "circle":
            vals = spectral.circle_average(fld, pts, r)
        elif cfg.region == "disk":
            vals = spectral.disk_integral(fld, pts, r)
        else:
            vals = spectral.square_integral(fld, pts, r)
        rows += [(p[0], p[1], r, v) for p, v in zip(pts, np.atleast_1d(vals))]
    if cfg.csv:
        io.write_csv(cfg.csv, ("x", "y", "r", "value"), rows)
    return {"region": cfg.region, "rows": rows}, {}


def cmd_variance(cfg):
    fn = spectral.variance_disk_integral if cfg.region == "disk" else spectral.variance_square_integral
    rows = []
    for z in cfg.points:
        for r in cfg.radii:
            v = fn(tuple(z), r, cfg.cutoff)
            rows.append((z[0], z[1], r, v.cutoff, v.variance, v.asymptotic, v.ratio))
    if cfg.csv:
        io.write_csv(cfg.csv, ("x", "y", "r", "cutoff", "variance", "asymptotic", "ratio"), rows)
    return {"region": cfg.region, "rows": rows}, {}


def cmd_covariance(cfg):
    results, checks = [], {}
    radii = sorted(cfg.radii, reverse=True)
    for z in cfg.points:
        cov = spectral.circle_covariance_matrix(tuple(z), radii, cfg.cutoff)
        s = -np.log(radii)
        # d/ds of E B(s) B(t) at the largest t, scaled by 2 pi
        slopes = [2 * math.pi * (cov[k + 1, -1] - cov[k, -1]) / (s[k + 1] - s[k])
                  for k in range(len(radii) - 1)]
        results.append({"point": z, "radii": radii, "covariance": cov, "slopes": slopes})
        if slopes:
            checks[f"brownian_slope@{z[0]},{z[1]}"] = bool(
                all(abs(v - 1) <= COVARIANCE_TOL for v in slopes))
    if cfg.csv:
        rows = [(res["point"][0], res["point"][1], r1, r2, res["covariance"][i, j])
                for res in results for i, r1 in enumerate(radii) for j, r2 in enumerate(radii)]
        io.write_csv(cfg.csv, ("x", "y", "r1", "r2", "covariance"), rows)
    return {"points": results}, checks


def cmd_highpoints(cfg):
    rows = thick.high_point_counts(cfg.grid, cfg.a, cfg.seeds, _seed(cfg), cfg.threshold_coef,
                                   workers=cfg.workers)
    if cfg.csv:
        io.write_highpoints_csv(cfg.csv, rows)
    if cfg.svg:
        n = cfg.grid[0]
        fld = lattice.sample_dgff(n, rng.derive_seed(_seed(cfg), n, 0))
        io.write_points_svg(cfg.svg, lattice.high_points(fld, cfg.a[0], cfg.threshold_coef).coordinates)
    summary = {}
    for n in cfg.grid:
        for a in cfg.a:
            counts = [r[3] for r in rows if r[0] == n and math.isclose(r[1], a)]
            summary[f"N={n},a={a}"] = {"mean": float(np.mean(counts)), "zero_runs": counts.count(0)}
    return {"summary": summary, "rows": len(rows)}, {}


def _fit_levels(rows, levels):
    results, checks = {}, {}
    for a in levels:
        fit = thick.exponent_fit_rows(rows, a)
        results[str(a)] = {"slope": fit.slope, "stderr": fit.stderr, "target": 2 - a,
                           "band": [2 - a - HIGHPOINT_BAND, 2 - a + HIGHPOINT_BAND]}
        checks[f"slope_a={a}"] = abs(fit.slope - (2 - a)) <= HIGHPOINT_BAND
    return results, checks


def cmd_fit(cfg):
    if not cfg.input:
        raise InvalidConfigError("fit needs an input CSV")
    rows = io.read_highpoints_csv(cfg.input)
    return _fit_levels(rows, sorted({r[1] for r in rows}))


def cmd_energy(cfg):
    results, rows = [], []
    for a in cfg.a:
        alpha = cfg.alpha if cfg.alpha is not None else 2 - a
        for n in cfg.grid:
            fld = lattice.sample_dgff(n, rng.derive_seed(_seed(cfg), n, 0))
            rep = lattice.high_points(fld, a, cfg.threshold_coef)
            energy = dim = None
            if rep.count >= 2:
                energy = thick.alpha_energy(thick.EmpiricalMeasure.from_report(rep), alpha)
                dim = thick.box_dimension(rep.coordinates, [1 / 4, 1 / 8, 1 / 16, 1 / 32]).slope
            rows.append((n, a, alpha, rep.count, energy, dim))
            results.append({"N": n, "a": a, "alpha": alpha, "count": rep.count,
                            "energy": energy, "box_dimension": dim})
    if cfg.csv:
        io.write_csv(cfg.csv, ("N", "a", "alpha", "count", "energy", "box_dimension"), rows)
    return {"rows": results}, {}


def cmd_events(cfg):
    rows, checks = [], {}
    seed = _seed(cfg)
    if cfg.event == "perfect":
        c = corridor_constant(cfg.trials, cfg.steps, rng.derive_seed(seed, 1), workers=cfg.workers)
        for a in cfg.a:
            for m in cfg.m:
                res = thick.perfect_event_prob(thick.MultiscaleEventSpec(a, m), cfg.trials, cfg.steps,
                                               seed, constant=(c.estimate, c.stderr),
                                               workers=cfg.workers)
                rows.append((m, a, res.estimate, res.stderr, res.bound))
                checks[f"perfect_a={a},m={m}"] = res.satisfied
        header = ("m", "a", "estimate", "stderr", "bound")
    elif cfg.event == "f":
        res = thick.f_event_prob(cfg.horizons, cfg.trials, cfg.steps, seed)
        rows = [(h, e, s) for h, e, s in zip(res.horizons, res.estimates, res.stderrs)]
        checks["f_event_monotone"] = res.monotone
        header = ("horizon", "estimate", "stderr")
    else:
        reports = [estimates.bm_corridor_prob(math.sqrt(2 * a), float(m), cfg.trials, cfg.steps,
                                              rng.derive_seed(seed, k), workers=cfg.workers)
                   for k, (a, m) in enumerate((a, m) for a in cfg.a for m in cfg.m)]
        rows = [(r.detail, r.lhs, r.stderr, r.rhs) for r in reports]
        checks.update({f"corridor_{r.detail}": r.satisfied for r in reports})
        header = ("case", "estimate", "stderr", "bound")
    if cfg.csv:
        io.write_csv(cfg.csv, header, rows)
    return {"event": cfg.event, "rows": rows}, checks


def _inversions(values):
    return int(sum(b > a for a, b in zip(values, values[1:])))


def cmd_conformal(cfg):
    fld = spectral.sample_spectral(cfg.cutoff, _seed(cfg))
    cmap = conformal.parse_map(cfg.map)
    radii = sorted(cfg.radii, reverse=True)
    rows = conformal.conformal_sweep(fld, cmap, radii, resolution=cfg.resolution)
    radii, medians = conformal.median_errors(rows)
    ratio_by_r = [float(np.median([row.ratio_r3 for row in rows if row.r == r])) for r in radii]
    checks = {}
    if isinstance(cmap, conformal.AffineMap):
        checks["affine_error"] = all(row.error <= AFFINE_TOL for row in rows)
        checks["affine_symmdiff"] = all(row.symmdiff <= 1e-8 for row in rows)
    else:
        checks["median_error_nonincreasing"] = _inversions(medians) <= 1
        checks["symmdiff_r3_bounded"] = bool(max(ratio_by_r) <= SYMMDIFF_SPREAD * min(ratio_by_r))
    if cfg.csv:
        io.write_csv(cfg.csv, ("map", "xi", "r", "error", "symmdiff", "ratio_r3"),
                     [(row.map, row.xi, row.r, row.error, row.symmdiff, row.ratio_r3) for row in rows])
    if cfg.svg:
        xi = complex(conformal.xi_grid(cmap)[0])
        io.write_overlay_svg(cfg.svg, [conformal.image_disk(cmap, xi, radii[0], 512).polygon,
                                       conformal.comparison_disk(cmap, xi, radii[0], 512).polygon])
    return {"map": cmap.spec, "radii": radii, "median_error": medians,
            "median_symmdiff_over_r3": ratio_by_r}, checks


def cmd_check_estimates(cfg):
    reports = estimates.check_estimates(seed=_seed(cfg), trials=max(cfg.trials, 10**5),
                                        corridor_trials=max(cfg.trials, 10**4),
                                        steps_per_unit_time=cfg.steps, workers=cfg.workers)
    rows = [r.as_row() for r in reports]
    if cfg.csv:
        io.write_csv(cfg.csv, list(rows[0]), rows)
    checks = {f"{r.lemma}[{k}]": r.satisfied for k, r in enumerate(reports)}
    return {"reports": rows}, checks


def cmd_holder(cfg):
    fld = spectral.sample_spectral(cfg.cutoff, _seed(cfg))
    res = thick.holder_scan(fld, cfg.gamma, cfg.pairs, cfg.r_min, rng.derive_seed(_seed(cfg), 1))
    return {"gamma": cfg.gamma, "max_ratio": res.max_ratio, "quantiles": res.quantiles}, {}


def cmd_liouville(cfg):
    region = spectral.SquareSpec(tuple(cfg.region_center), cfg.region_side)
    rows = []
    for k, r in enumerate(cfg.radii):
        est = spectral.liouville_mc(cfg.gamma, region, r, cfg.cutoff, cfg.trials,
                                    rng.derive_seed(_seed(cfg), k), workers=cfg.workers)
        exact = spectral.liouville_expectation(cfg.gamma, region, r, cfg.cutoff)
        rows.append({"r": r, "mean": est.estimate, "stderr": est.stderr, "exact_mean": exact})
    ok = all(abs(p["mean"] - q["mean"]) <= 3 * math.hypot(p["stderr"], q["stderr"])
             for i, p in enumerate(rows) for q in rows[i + 1:])
    return {"rows": rows}, {"r_independence": ok}


HANDLERS = {
    "sample": cmd_sample, "eval": cmd_eval, "variance": cmd_variance,
    "covariance": cmd_covariance, "highpoints": cmd_highpoints, "fit": cmd_fit,
    "energy": cmd_energy, "events": cmd_events, "conformal": cmd_conformal,
    "check-estimates": cmd_check_estimates, "holder": cmd_holder, "liouville": cmd_liouville,
}


def execute(cfg):
    """Run a resolved config and return ``(report, exit_code)``."""
    start = time.perf_counter()
    if cfg.subcommand == "run":
        results, checks, timings = {}, {}, {}
        for name in cfg.checks:
            if name not in HANDLERS:
                raise InvalidConfigError(f"unknown check {name!r}")
            t0 = time.perf_counter()
            res, chk = HANDLERS[name](cfg.replace(subcommand=name))
            results[name] = res
            checks.update({f"{name}:{k}": v for k, v in chk.items()})
            timings[name] = time.perf_counter() - t0
    else:
        results, checks = HANDLERS[cfg.subcommand](cfg)
        timings = {}
    timings["total_seconds"] = time.perf_counter() - start
    passed = all(bool(v) for v in checks.values())
    report = {"config": cfg.to_dict(), "results": results,
              "checks": {k: bool(v) for k, v in checks.items()}, "passed": passed,
              "timings": timings}
    return report, EXIT_OK if passed else EXIT_CHECK_FAILED


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        report, code = execute(cfg)
    except NumericalError as exc:
        print(f"gfflab: numerical failure [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (GFFLabError, OSError) as exc:
        code_name = getattr(exc, "code", "invalid_config")
        print(f"gfflab: invalid configuration [{code_name}]: {exc}", file=sys.stderr)
        return EXIT_INVALID
    text = io.dumps_json(report)
    if cfg.json:
        with open(cfg.json, "w") as fh:
            fh.write(text + "\n")
    print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
