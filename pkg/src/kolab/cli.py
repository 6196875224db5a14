"""Command-line front end: one experiment per invocation.

    kolab <experiment> --config cfg.json [--out DIR] [--format json|csv]

Exit status: 0 when the experiment meets its expected verdict, 1 when it does
not (or fails numerically), 2 for configuration errors.  ``KOLAB_WORKERS``
sets the process count used by sweeps.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys
from pathlib import Path

from . import __version__
from . import estimates as est
from .config import EXPERIMENTS, ExperimentConfig, load_config
from .errors import ConfigError, HypothesisViolated, KolabError
from .exponents import classify_regimes, compute_exponents, particular_coefficients
from .phase import (fixed_point, fixed_point_catalog, reconstruct_uv, shoot_into_orthant,
                    shoot_unstable)
from .radial import sample_particular, solve_regular, solve_scalar
from . import report

WORKERS_ENV = "KOLAB_WORKERS"


def _workers() -> int:
    try:
        return max(int(os.environ.get(WORKERS_ENV, "1")), 1)
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer") from None


def _shoot(src, params):
    fp = fixed_point(params, src.label)
    kw = dict(t_span=src.t_span, eta=src.eta, t_back=src.t_back, n_samples=src.n_samples)
    if src.orthant is not None:
        found = shoot_into_orthant(fp, src.eig_index, params, src.orthant, **kw)
        if not found:
            raise KolabError(f"no shot from {src.label} enters orthant {src.orthant}")
        traj = found[0]
        traj.meta["orthant_matches"] = len(found)
        return traj
    return shoot_unstable(fp, src.eig_index, src.side, params, **kw)


def build_source(src, params, closed_form=False):
    if src.type == "regular":
        return solve_regular(params, src.u0, src.v0, r_max=src.r_max, tol=src.tol)
    if src.type == "particular":
        part = particular_coefficients(params)
        if closed_form:
            return part
        return sample_particular(params, part, src.r_min, src.r_max, src.n_samples)
    return reconstruct_uv(_shoot(src, params), params)


def _run(cfg: ExperimentConfig, workers: int):
    """Returns (verdict, payload for JSON, object for CSV or None)."""
    kind, opt, params = cfg.kind, cfg.options, cfg.params
    if kind == "exponents":
        ex = compute_exponents(params)
        return "ok", dataclasses.asdict(ex), None
    if kind == "classify":
        ex = compute_exponents(params)
        flags = classify_regimes(params, ex)
        payload = {"exponents": dataclasses.asdict(ex), "flags": dataclasses.asdict(flags)}
        if flags.particular_exists:
            payload["particular"] = dataclasses.asdict(particular_coefficients(params, ex))
        return "ok", payload, None
    if kind in ("solve", "scalar-solve"):
        if kind == "solve":
            sol = solve_regular(params, opt.u0, opt.v0, r_max=opt.r_max, tol=opt.tol, n_samples=opt.n_samples)
        else:
            sol = solve_scalar(cfg.scalar, opt.u0, r_max=opt.r_max, tol=opt.tol, n_samples=opt.n_samples)
        return sol.status.kind, report.solution_dict(sol), sol
    if kind == "phase-fixed-points":
        fps = fixed_point_catalog(params)
        return "ok", {"fixed_points": report.fixed_points_dict(fps)}, fps
    if kind == "phase-shoot":
        traj = _shoot(opt.source, params)
        verdict = "escaped" if traj.escape_time is not None else "completed"
        return verdict, report.trajectory_dict(traj), traj
    if kind == "verify-ko":
        if params is not None:
            data = est.scaling_ray(params, opt.count, opt.base, opt.factor) if opt.ray == "scaling" else opt.data
            rep = est.ko_envelope(params, data, r_max=opt.r_max, tol=opt.tol, ratio_bound=opt.ratio_bound,
                                  workers=workers)
        else:
            data = opt.scalar_data or [opt.factor ** k for k in range(opt.count)]
            rep = est.ko_envelope_scalar(cfg.scalar, data, r_max=opt.r_max, tol=opt.tol,
                                         ratio_bound=opt.ratio_bound)
        return rep.verdict, report.report_dict(rep), rep
    if kind == "verify-harnack":
        sol = build_source(opt.source, params)
        rep = est.harnack_ratios(sol, opt.radii, opt.component, opt.origin, opt.ratio_bound)
        return rep.verdict, report.report_dict(rep), rep
    if kind == "verify-punctual":
        sol = build_source(opt.source, params)
        rep = est.punctual_ratio(sol, params, ratio_bound=opt.ratio_bound, decades=opt.decades)
        return rep.verdict, report.report_dict(rep), rep
    if kind == "verify-caccioppoli":
        sol = build_source(opt.source, params)
        rep = est.caccioppoli_ratio(sol, opt.ell, opt.rhos, opt.eps, opt.placement, opt.ratio_bound)
        return rep.verdict, report.report_dict(rep), rep
    if kind == "verify-wolff":
        sol = build_source(opt.source, params, closed_form=True)
        rep = est.wolff_bound_check(sol, params, opt.rhos, opt.center_factor, opt.ratio_bound, opt.quad_tol)
        return rep.verdict, report.report_dict(rep), rep
    if kind == "verify-bootstrap":
        yf, pf = opt.y, opt.phi
        try:
            res = est.bootstrap_certificate(lambda r: yf.coeff * r ** yf.exponent,
                                            lambda r: pf.coeff * r ** pf.exponent,
                                            opt.d, opt.h, opt.big_k, opt.big_m, opt.eps0, r_max=opt.r_max)
        except HypothesisViolated as exc:
            return "HypothesisViolated", {"inequality": exc.inequality, "rho": exc.rho, "message": str(exc)}, None
        return ("Passes" if res.passes else "Fails"), report.bootstrap_dict(res), None
    raise ConfigError(f"unknown experiment {kind!r}")


DEFAULT_EXPECT = {"verify-bootstrap": "Passes"}


def run(cfg: ExperimentConfig, out_dir: Path, fmt: str = "json", workers: int = 1) -> int:
    verdict, payload, table_obj = _run(cfg, workers)
    if cfg.kind.startswith("verify-"):
        expect = cfg.raw.expect or DEFAULT_EXPECT.get(cfg.kind, est.BOUNDED)
    else:
        expect = cfg.raw.expect
    passed = expect is None or verdict == expect
    summary = {
        "experiment": cfg.kind,
        "version": __version__,
        "config": cfg.resolved(),
        "verdict": verdict,
        "expect": expect,
        "passed": passed,
    }
    stem = cfg.kind.replace("-", "_")
    if fmt == "csv" and table_obj is not None:
        report.write(out_dir / f"{stem}.csv", report.to_csv(table_obj))
        summary["csv"] = f"{stem}.csv"
    else:
        summary["result"] = payload
    report.write(out_dir / f"{stem}.json", report.dumps_json(summary))
    print(f"{cfg.kind}: verdict={verdict} expect={expect} -> {'pass' if passed else 'FAIL'}")
    return 0 if passed else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kolab", description=__doc__.splitlines()[0])
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", required=True, help="JSON experiment config")
    ap.add_argument("--out", default=".", help="output directory (default: cwd)")
    ap.add_argument("--format", choices=("json", "csv"), default="json")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.experiment, args.config)
        workers = _workers()
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return run(cfg, Path(args.out), args.format, workers)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (KolabError, FloatingPointError, ArithmeticError) as exc:
        print(f"{args.experiment} failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
