"""Command line entry point ``mtlab``.

    mtlab <experiment> [--config FILE] [--set key=value]...
    mtlab run <experiment> ...
    mtlab greens dump --which {interval|line} --probe-grid a:b:n
    mtlab testfns sweep --family {interval|line} --eps-list 1e-3,1e-4

Exit codes: 0 success, 1 a hard check failed, 2 configuration error.
"""
import argparse
import csv
import dataclasses
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np
import scipy

from . import __version__
from .config import EXPERIMENTS, ConfigError, ExperimentConfig, load_config

EXIT_OK, EXIT_CHECK, EXIT_CONFIG = 0, 1, 2


def versions() -> dict:
    return {"mtlab": __version__, "numpy": np.__version__, "scipy": scipy.__version__}


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return v


def write_table(path: str, columns, rows, cfg: ExperimentConfig = None) -> None:
    with open(path, "w", newline="") as fh:
        if cfg is not None:
            fh.write(f"# config_hash={cfg.config_hash} "
                     + " ".join(f"{k}={v}" for k, v in versions().items()) + "\n")
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    return obj


def write_json(path: str, payload: dict, cfg: ExperimentConfig) -> None:
    doc = {"experiment": cfg.experiment, "config_hash": cfg.config_hash,
           "config": cfg.canonical, "versions": versions(), "results": _jsonable(payload)}
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _pool_map(fn, items, workers: int):
    """Map in a process pool; results come back in input order."""
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


# ---------------------------------------------------------------------------
# experiments; each returns (ok, payload) and writes its own tables


def _grid(cfg, dom):
    from .extremals import default_grid
    from .fraccore import build_grid
    return default_grid(dom) if cfg.T is None else build_grid(cfg.T, cfg.N)


def _opts(cfg):
    from .extremals import MaximizerOptions
    return MaximizerOptions(max_iter=cfg.max_iter, tol=cfg.tol,
                            rearrange_every=cfg.rearrange_every,
                            multistart=cfg.multistart, random_seed=cfg.seed)


def exp_verify_operators(cfg):
    from .verify import operator_crosscheck
    payload = {name: operator_crosscheck(name) for name in ("gaussian", "lorentzian")}
    ok = all(v["max_disagreement"] < 1e-4 for v in payload.values())
    return ok, payload


def exp_verify_greens(cfg):
    from .verify import greens_summary
    s = greens_summary()
    ok = (s["s0_limit_error"] < 1e-6 and s["line_oracle_error"] < 1e-6
          and abs(s["line_log_slope"] - 1 / np.pi) < 1e-3
          and abs(s["line_log_intercept"] + np.euler_gamma / np.pi) < 1e-2
          and s["line_far_field_x2G"] < 10
          and all(v < 5e-3 for k, v in s.items() if k.startswith("reproduction_")))
    return ok, s


def exp_verify_bubble(cfg):
    from .verify import bubble_summary
    s = bubble_summary()
    return s["liouville_residual"] < 1e-3 and s["mass_error"] < 1e-4, s


def exp_maximize(cfg):
    from .extremals import maximize
    from .fraccore import write_csv
    from .functionals import domain_from_name, vanishing_gap
    dom = domain_from_name(cfg.domain)
    res = maximize(cfg.alpha, dom, _opts(cfg), _grid(cfg, dom))
    write_csv(res.u, cfg.output_path(".csv"))
    payload = {"alpha": res.alpha, "value": res.value, "lambda": res.lam, "mu": res.mu,
               "residual": res.el_residual, "converged": res.converged,
               "iterations": res.iterations, "sphere_deviation": res.sphere_deviation}
    if not dom.is_interval:
        payload["vanishing_gap"] = vanishing_gap(res.u, res.alpha)
    return res.sphere_deviation < 1e-8, payload


def exp_sweep_subcritical(cfg):
    from .extremals import SWEEP_COLUMNS, subcritical_sweep, sweep_rows
    from .functionals import domain_from_name
    dom = domain_from_name(cfg.domain)
    alphas = sorted(cfg.alphas)
    results = subcritical_sweep(alphas, dom, _opts(cfg), _grid(cfg, dom))
    rows = sweep_rows(results, alphas)
    write_table(cfg.output_path(".csv"), SWEEP_COLUMNS, rows, cfg)
    vals = [r[1] for r in rows]
    payload = {"rows": [dict(zip(SWEEP_COLUMNS, r)) for r in rows],
               "values_nondecreasing": bool(np.all(np.diff(vals) >= 0))}
    dev = [r.sphere_deviation for r in results if r is not None]
    return bool(dev) and max(dev) < 1e-8, payload


def _synthetic_report(mu):
    from .blowup import SyntheticBlowup, blowup_report
    s = SyntheticBlowup.build(mu)
    return blowup_report(s, s.lam, s.alpha)


def exp_blowup_diagnostics(cfg):
    from .blowup import REPORT_COLUMNS, report_row, sweep_reports
    from .functionals import domain_from_name
    if cfg.source == "synthetic":
        reports = _pool_map(_synthetic_report, cfg.mu_values, cfg.workers)
    else:
        from .extremals import subcritical_sweep
        dom = domain_from_name(cfg.domain)
        results = subcritical_sweep(sorted(cfg.alphas), dom, _opts(cfg), _grid(cfg, dom))
        reports = sweep_reports(results, dom)
    good = [r for r in reports if r is not None]
    write_table(cfg.output_path(".csv"), REPORT_COLUMNS, [report_row(r) for r in good], cfg)
    ok = all(r.scales.identity_defect() < 1e-12 for r in good)
    return ok, {"reports": [r.to_dict() if r else None for r in reports]}


def _testfn(args):
    from .testfns import test_family
    fam, eps = args
    # the profile closure cannot cross a process boundary and is not needed here
    return dataclasses.replace(test_family(fam, eps), profile=None)


def exp_testfn_bound(cfg):
    from .testfns import CSV_COLUMNS
    reps = _pool_map(_testfn, [(cfg.family, e) for e in cfg.eps_list], cfg.workers)
    write_table(cfg.output_path(".csv"), CSV_COLUMNS, [r.row() for r in reps], cfg)
    ok = any(r.margin > 0 and r.feasible for r in reps)
    payload = {"family": cfg.family, "rows": [dict(zip(CSV_COLUMNS, r.row())) for r in reps],
               "nu": [r.tail_contribution for r in reps]}
    return ok, payload


def _sharp(args):
    from .testfns import moser_sharpness_family
    alpha, j = args
    return moser_sharpness_family(alpha, j)[1]


def exp_sharpness(cfg):
    alphas = [1.05 * np.pi, np.pi]
    jobs = [(a, j) for a in alphas for j in cfg.j_values]
    vals = _pool_map(_sharp, jobs, cfg.workers)
    rows = [[j, a, v] for (a, j), v in zip(jobs, vals)]
    write_table(cfg.output_path(".csv"), ["j", "alpha", "value"], rows, cfg)
    payload = {"rows": [dict(zip(["j", "alpha", "value"], r)) for r in rows]}
    js = sorted(cfg.j_values)
    v = dict(zip(jobs, vals))
    if len(js) >= 2 and v[(alphas[0], js[0])] > 0:
        payload["growth_supercritical"] = v[(alphas[0], js[-1])] / v[(alphas[0], js[0])]
    return all(np.isfinite(vals)), payload


RUNNERS = {
    "verify-operators": exp_verify_operators,
    "verify-greens": exp_verify_greens,
    "verify-bubble": exp_verify_bubble,
    "maximize": exp_maximize,
    "sweep-subcritical": exp_sweep_subcritical,
    "blowup-diagnostics": exp_blowup_diagnostics,
    "testfn-bound": exp_testfn_bound,
    "sharpness": exp_sharpness,
}


def run(cfg: ExperimentConfig) -> int:
    os.makedirs(cfg.out_dir, exist_ok=True)
    ok, payload = RUNNERS[cfg.experiment](cfg)
    payload = dict(payload, passed=bool(ok))
    write_json(cfg.output_path(".json"), payload, cfg)
    print(json.dumps({"experiment": cfg.experiment, "passed": bool(ok),
                      "json": cfg.output_path(".json")}))
    return EXIT_OK if ok else EXIT_CHECK


# ---------------------------------------------------------------------------
# argument parsing


def _experiment_parser(sub, name):
    p = sub.add_parser(name, help=f"run the {name} experiment")
    p.add_argument("--config", help="key=value configuration file with sections")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one configuration entry (repeatable)")
    p.add_argument("--family", choices=["interval", "line"])
    p.add_argument("--domain", choices=["interval", "line"])
    p.add_argument("--eps", help="comma separated eps values")
    p.add_argument("--alpha", help="alpha for a single maximization (accepts 0.9*pi)")
    p.add_argument("--workers", type=int)
    p.set_defaults(experiment=name)
    return p


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mtlab", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        _experiment_parser(sub, name)
    runp = sub.add_parser("run", help="run a named experiment")
    rsub = runp.add_subparsers(dest="run_command", required=True)
    for name in EXPERIMENTS:
        _experiment_parser(rsub, name)

    g = sub.add_parser("greens", help="Green's function tables")
    gsub = g.add_subparsers(dest="greens_command", required=True)
    dump = gsub.add_parser("dump", help="CSV x,y,G,S on a probe grid")
    dump.add_argument("--which", choices=["interval", "line"], required=True)
    dump.add_argument("--probe-grid", default="-0.9:0.9:7",
                      help="start:stop:count for both x and y (default -0.9:0.9:7)")
    dump.add_argument("--output", default="-", help="file name or - for stdout")

    t = sub.add_parser("testfns", help="test-function families")
    tsub = t.add_subparsers(dest="testfns_command", required=True)
    sw = tsub.add_parser("sweep", help="CSV eps,L,c,B,norm_sq,value,threshold,margin")
    sw.add_argument("--family", choices=["interval", "line"], required=True)
    sw.add_argument("--eps-list", default="1e-3,1e-4,1e-5,1e-6")
    sw.add_argument("--output", default="-")
    return ap


def _overrides(args):
    out = list(args.set)
    for flag, key in (("family", "problem.family"), ("domain", "problem.domain"),
                      ("eps", "sweep.eps_list"), ("alpha", "sweep.alpha"),
                      ("workers", "output.workers")):
        val = getattr(args, flag, None)
        if val is not None:
            out.append(f"{key}={val}")
    return out


def _probe_grid(spec: str) -> np.ndarray:
    try:
        a, b, n = spec.split(":")
        return np.linspace(float(a), float(b), int(n))
    except ValueError as exc:
        raise ConfigError(f"probe grid must be start:stop:count, got {spec!r}") from exc


def _open_out(path):
    return sys.stdout if path == "-" else open(path, "w", newline="")


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "greens":
            from .greens import probe_table
            pts = _probe_grid(args.probe_grid)
            rows = probe_table(args.which, pts, pts)
            fh = _open_out(args.output)
            w = csv.writer(fh)
            w.writerow(["x", "y", "G", "S"])
            w.writerows([[_fmt(v) for v in r] for r in rows])
            if fh is not sys.stdout:
                fh.close()
            return EXIT_OK
        if args.command == "testfns":
            from .config import _floats
            from .testfns import CSV_COLUMNS, test_family
            eps = _floats(args.eps_list)
            if not eps or any(e <= 0 for e in eps):
                raise ConfigError("eps list must hold positive numbers")
            rows = [test_family(args.family, e).row() for e in eps]  # fail before writing
            fh = _open_out(args.output)
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            w.writerows([[_fmt(v) for v in r] for r in rows])
            if fh is not sys.stdout:
                fh.close()
            return EXIT_OK
        cfg = load_config(args.experiment, args.config, _overrides(args))
    except (ConfigError, ValueError) as exc:
        print(f"mtlab: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
