"""Command-line entry point: ``coherent-surface <subcommand>``.

Exit codes: 0 on success, 1 for a bad configuration or input, 2 for a
failure at run time.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2

log = logging.getLogger("coherent_surface")


def _load_config(args):
    from .experiments import SweepConfig

    cfg = SweepConfig.from_json(args.config)
    if args.seed is not None:
        cfg.master_seed = args.seed
    if args.workers is not None:
        cfg.workers = args.workers
    if args.out is not None:
        cfg.output = args.out
    cfg.validate()
    return cfg


def _write_trace(cfg, path, shots):
    """Re-run the first ``shots`` noiseless shots of every ``(d, p)`` with tracing on."""
    from .experiments import noiseless_seed
    from .sampler import get_sampler

    with open(path, "w") as fh:
        for d in cfg.d_list:
            sampler = get_sampler(d)
            for p, theta in zip(cfg.rates(), cfg.thetas()):
                for shot in range(min(shots, cfg.shots_for(d))):
                    rng = np.random.default_rng(noiseless_seed(cfg.master_seed, d, p, shot))
                    fh.write(json.dumps({"d": d, "p": p, "theta": theta, "shot": shot}) + "\n")
                    rec = sampler.sample_rounds(theta, cfg.rounds_for(d), rng, trace=fh)
                    fh.write(json.dumps({"d": d, "p": p, "shot": shot, "theta_star": rec.theta_star}) + "\n")


def cmd_simulate(args) -> int:
    from .experiments import run_sweep

    cfg = _load_config(args)
    res = run_sweep(cfg, progress=log.info)
    print(f"wrote {res.csv_path} and {res.manifest_path}")
    if res.baseline_path:
        print(f"wrote {res.baseline_path}")
    if args.trace:
        _write_trace(cfg, args.trace, args.trace_shots)
        print(f"wrote trace {args.trace}")
    return EXIT_OK


def _curves(path, column):
    from .experiments import read_baseline, read_estimates

    try:
        rows = read_estimates(path)
        return [(r.d, r.p, r.q, getattr(r, column), getattr(r, column + "_err")) for r in rows]
    except (KeyError, TypeError):
        rows = read_baseline(path)
        return [(r["d"], r["p"], r["q"], r["p_fail"], r["p_fail_err"]) for r in rows]


def cmd_threshold_fit(args) -> int:
    from .metrics import fit_threshold

    data = _curves(args.input, args.column)
    data = [r for r in data if r[4] > 0 and (args.d_min is None or r[0] >= args.d_min)]
    d, p, _, y, s = (np.array(v) for v in zip(*data))
    fit = fit_threshold(d, p, y, s)
    out = {
        "p_th": fit.p_th,
        "p_th_err": fit.p_th_err,
        "nu": fit.nu,
        "params": [float(x) for x in fit.params],
        "chi2": fit.chi2,
        "dof": fit.dof,
    }
    print(f"p_th = {fit.p_th:.5f} +- {fit.p_th_err:.5f}  nu = {fit.nu:.3f}  chi2/dof = {fit.chi2:.1f}/{fit.dof}")
    if args.out:
        Path(args.out).write_text(json.dumps(out, indent=2) + "\n")
    return EXIT_OK


def cmd_diamond(args) -> int:
    from .metrics import diamond_intersection_analysis

    data = _curves(args.input, "pld")
    curves = {}
    for d, p, _, y, s in data:
        curves.setdefault(d, ([], [], []))
        for lst, v in zip(curves[d], (p, y, s)):
            lst.append(v)
    res = diamond_intersection_analysis(curves, seed=args.seed or 0)
    for c in res.crossings:
        print(f"d={c.d1} x d={c.d2}: p_cross = {c.p_cross:.5f} +- {c.p_cross_err:.5f}")
    print(f"1/d -> 0 intercept: {res.intercept:.5f} +- {res.intercept_err:.5f}")
    for note in res.notes:
        print("note:", note)
    if args.out:
        payload = {
            "crossings": [c.__dict__ for c in res.crossings],
            "intercept": res.intercept,
            "intercept_err": res.intercept_err,
            "slope": res.slope,
            "drifts_down_2sigma": res.drifts_down(),
        }
        Path(args.out).write_text(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_threshold_map(args) -> int:
    from .experiments import read_estimates, run_sweep
    from .metrics import threshold_map

    if args.config:
        cfg = _load_config(args)
        rows = run_sweep(cfg, progress=log.info).estimates
    elif args.input:
        rows = read_estimates(args.input)
    else:
        print("threshold-map needs --config or --input", file=sys.stderr)
        return EXIT_CONFIG
    brackets = threshold_map(rows)
    payload = []
    for b in brackets:
        print(f"q={b.q:.4f}: lower={b.lower:.4f} upper={b.upper:.4f}  " + " ".join(f"{p:.4f}:{lab[0]}" for p, lab in b.labels.items()))
        payload.append({"q": b.q, "lower": b.lower, "upper": b.upper, "labels": {f"{p:.6g}": v for p, v in b.labels.items()}})
    if args.map_out:
        Path(args.map_out).write_text(json.dumps(payload, indent=2) + "\n")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .lattice import dump_json

    if args.dump_lattice is not None:
        text = dump_json(args.dump_lattice, args.out)
        if not args.out:
            print(text)
        return EXIT_OK
    from .validation import run_all

    checks = run_all()
    width = max(len(c.name) for c in checks)
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name:<{width}}  {c.value:.3e} (tol {c.tolerance:.0e})")
    return EXIT_OK if all(c.passed for c in checks) else EXIT_RUNTIME


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coherent-surface", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=False):
        p.add_argument("--config", required=config_required, help="JSON sweep config")
        p.add_argument("--seed", type=int, default=None, help="master seed (overrides config)")
        p.add_argument("--workers", type=int, default=None, help="worker processes (overrides config)")
        p.add_argument("--out", default=None, help="output path")

    p = sub.add_parser("simulate", help="run one sweep and write CSV + manifest")
    common(p, config_required=True)
    p.add_argument("--trace", default=None, help="also write a JSON-lines trace of the first shots")
    p.add_argument("--trace-shots", type=int, default=3)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("threshold-fit", help="finite-size-scaling fit of a sweep CSV")
    common(p)
    p.add_argument("--input", required=True)
    p.add_argument("--column", default="pli", choices=("pli", "pld"))
    p.add_argument("--d-min", type=int, default=None)
    p.set_defaults(func=cmd_threshold_fit)

    p = sub.add_parser("diamond-analysis", help="pairwise crossings of diamond-norm curves")
    common(p)
    p.add_argument("--input", required=True)
    p.set_defaults(func=cmd_diamond)

    p = sub.add_parser("threshold-map", help="scalable/unscalable brackets over (p, q)")
    common(p)
    p.add_argument("--input", default=None, help="existing sweep CSV with several q values")
    p.add_argument("--map-out", default=None, help="write brackets as JSON")
    p.set_defaults(func=cmd_threshold_map)

    p = sub.add_parser("validate", help="oracle comparison table")
    common(p)
    p.add_argument("--dump-lattice", type=int, default=None, metavar="D", help="print the lattice/network JSON for distance D")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    from .experiments import ConfigError
    from .flo import ZeroProbabilityError

    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ZeroProbabilityError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - report and map to the runtime exit code
        print(f"runtime failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
