"""Command line front end.

Exit codes: 0 success, 1 quantitative failure, 2 config error, 3 IO error,
4 input outside the convexity range.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys

import numpy as np

from .anisotropy import classify_psi
from .config import ConfigError, RunConfig, load_config
from .ellipse_solver import (
    Ellipse,
    OutsideConvexityError,
    Segment,
    SolverError,
    SolverOptions,
    prediction_from_json,
    solve_report,
)
from .particles import (
    DescentOptions,
    EllipticalWell,
    ParticleConfig,
    Quadratic,
    initial_config,
    minimize,
    second_moments,
)
from .potential import el_scan
from .verify import GaussianBlobPair, parseval_report

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_THEORY = 4

logger = logging.getLogger("ellipselaw")


def _emit(report: dict, out: str | None):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    sys.stdout.write(text)


def cmd_analyze(cfg: RunConfig, args) -> int:
    c = classify_psi(cfg.kernel.series)
    _emit({"psi_min": c.min_value + cfg.kernel.epsilon, "argmin": c.argmin_angle, "label": c.label}, args.out)
    return EXIT_OK


def cmd_solve(cfg: RunConfig, args) -> int:
    if not isinstance(cfg.confinement, Quadratic):
        print("error: solve needs quadratic confinement", file=sys.stderr)
        return EXIT_THEORY
    opts = SolverOptions(quad_nodes=cfg.quad_nodes, residual_tol=cfg.tolerances["solver"])
    try:
        rep = solve_report(cfg.kernel, opts)
    except SolverError as exc:
        _emit({"error": str(exc), "best_residual": exc.best_residual}, args.out)
        return EXIT_FAIL
    el = el_scan(cfg.kernel, rep.prediction, quad_nodes=cfg.quad_nodes)
    ok = el.within(cfg.tolerances["el_scan"])
    _emit({"prediction": rep.prediction.to_json(), "el_report": el.to_json(), "system_residual": rep.residual}, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def _read_prediction(path: str, cfg: RunConfig):
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
        # accept the bare prediction or a full solve report
        if isinstance(data, dict) and "prediction" in data:
            data = data["prediction"]
        pred = prediction_from_json(data)
        if isinstance(pred, Segment) and "half_length" not in data:
            pred = Segment(pred.direction_angle, math.sqrt(2.0 * cfg.kernel.log_strength))
        if isinstance(pred, Ellipse):
            pred.shape.require_nondegenerate()
    except (ValueError, KeyError, TypeError, AttributeError) as exc:
        raise ConfigError(f"prediction: malformed ({exc})") from exc
    return pred


def cmd_verify(cfg: RunConfig, args) -> int:
    pred = _read_prediction(args.prediction, cfg)
    el = el_scan(cfg.kernel, pred, quad_nodes=cfg.quad_nodes)
    ok = el.within(cfg.tolerances["el_scan"])
    _emit({"prediction": pred.to_json(), "el_report": el.to_json(), "pass": ok}, args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_parseval(cfg: RunConfig, args) -> int:
    blobs = GaussianBlobPair(tuple(args.p), tuple(args.q), args.sigma)
    rep = parseval_report(cfg.kernel, blobs)
    ok = rep.rel_gap <= cfg.tolerances["parseval"]
    _emit(rep.to_json(), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def _start(cfg: RunConfig, n: int, seed: int) -> ParticleConfig:
    if isinstance(cfg.confinement, EllipticalWell):
        # uniform in the well, scaled slightly inwards
        shape = cfg.confinement.domain
        unit = initial_config(n, seed, radius=0.99).positions
        local = unit * np.array([shape.a1, shape.a2])
        return ParticleConfig(local @ shape.rotation.T)
    return initial_config(n, seed)


def cmd_simulate(cfg: RunConfig, args) -> int:
    if args.n < 1:
        raise ConfigError(f"--n: must be >= 1, got {args.n}")
    opts = DescentOptions(max_iters=args.max_iters, seed=args.seed)
    res = minimize(_start(cfg, args.n, args.seed), cfg.kernel, cfg.confinement, opts)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "particles.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "y"])
        for x, y in res.config.positions:
            w.writerow([repr(float(x)), repr(float(y))])
    with open(os.path.join(args.out, "log.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "energy", "grad_norm", "step"])
        for row in res.log:
            w.writerow([row.iter, repr(row.energy), repr(row.grad_norm), repr(row.step)])
    summary = {
        "n": args.n,
        "seed": args.seed,
        "iterations": res.log[-1].iter,
        "energy": res.energy,
        "grad_norm": res.log[-1].grad_norm,
        "converged": res.converged,
        "stalled": res.stalled,
        "second_moments": second_moments(res.config).tolist(),
    }
    with open(os.path.join(args.out, "moments.json"), "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return EXIT_FAIL if res.stalled else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ellipselaw", description="Minimisers of anisotropic log-gas energies.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="sign of the Fourier profile psi_hat")
    p.add_argument("config")
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("solve", help="predict the minimiser and check it")
    p.add_argument("config")
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="minimise the n-particle energy")
    p.add_argument("config")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-iters", type=int, default=DescentOptions.max_iters)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("verify", help="Euler-Lagrange residuals of a given prediction")
    p.add_argument("config")
    p.add_argument("prediction", help="prediction JSON (as written by solve)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("parseval", help="physical vs Fourier energy of a Gaussian blob pair")
    p.add_argument("config")
    p.add_argument("--p", type=float, nargs=2, default=[1.0, 0.0], metavar=("X", "Y"))
    p.add_argument("--q", type=float, nargs=2, default=[-1.0, 0.0], metavar=("X", "Y"))
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--out")
    p.set_defaults(func=cmd_parseval)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        return args.func(cfg, args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutsideConvexityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_THEORY
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
