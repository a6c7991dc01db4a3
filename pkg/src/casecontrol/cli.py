"""Command-line entry point.

Exit codes: 0 success, 2 unparseable input, 3 separation, 4 not identifiable,
5 mass escaping the integration grid, 6 MCMC failure, 7 prior fails the
factorization check, 10 posteriors differ (``compare``).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import io
from .errors import (AllDegenerate, AllRejected, BoundaryError, DataFormatError, EmptyArm, MassEscape,
                     NonConvergence, NotIdentifiable, SeparationDetected, SingularInformation)
from .inference import (GridSpec, equivalence_report, log_bayes_factor,
                        marginal_beta_quadrature)
from .likelihoods import CountData, PenaltySpec, fit_logistic_irls, fit_penalized_value, fit_retrospective_mle
from .mcmc import McmcConfig, mcmc_sample, require_convergence
from .model import CovariateSpace, JointTable, LogisticParams, MarginalX
from .priors import (SHM_THRESHOLD, ConditionedLogisticPrior, GFunction,
                     conditioned_prior_logdens_pro, properness_probe, pseudo_count_construction_logdens,
                     shm_factorization_check)
from .simulate import RNG_ALGORITHM, DesignSpec, simulate
from .stratified import (StratifiedData, StratifiedJointLaw, StratifiedPrior, fit_conditional_mle,
                         stratified_equivalence_report, stratified_marginal_beta, stratified_mcmc_sample)

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_SEPARATION = 3
EXIT_NOT_IDENTIFIABLE = 4
EXIT_MASS_ESCAPE = 5
EXIT_MCMC = 6
EXIT_FACTORIZATION = 7
EXIT_DIFFERENT = 10

OUTDIR_ENV = "CASECONTROL_OUTDIR"

_ERROR_CODES = [
    (DataFormatError, EXIT_PARSE),
    (SeparationDetected, EXIT_SEPARATION),
    (NotIdentifiable, EXIT_NOT_IDENTIFIABLE),
    (MassEscape, EXIT_MASS_ESCAPE),
    (AllRejected, EXIT_MCMC),
    (NonConvergence, EXIT_MCMC),
]


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# helpers


def parse_grid(spec: Optional[str]) -> GridSpec:
    """``lo:hi:n`` for the beta grid."""
    if spec is None:
        return GridSpec()
    try:
        lo, hi, n = spec.split(":")
        return GridSpec(beta_bounds=(float(lo), float(hi)), beta_nodes=int(n))
    except ValueError as exc:
        raise DataFormatError(f"bad grid spec {spec!r} (expected lo:hi:n): {exc}") from None


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise DataFormatError(f"expected comma-separated numbers, got {text!r}") from None


def _side_list(side: str) -> list[str]:
    return {"pro": ["prospective"], "retro": ["retrospective"], "both": ["prospective", "retrospective"]}[side]


def _load(args, need_prior: bool = True):
    prior = doc = None
    if need_prior:
        if not args.prior:
            raise UsageError("--prior is required")
        prior, doc = io.load_prior(args.prior)
    space = io.prior_space(prior) if prior is not None else None
    stratified_prior = isinstance(prior, (StratifiedPrior, StratifiedJointLaw))
    if args.data:
        data = io.load_dataset(args.data, space)
    elif prior is not None:
        if stratified_prior:
            raise UsageError("a stratified prior needs --data to fix the strata")
        data = CountData.empty(space)
    else:
        raise UsageError("--data is required")
    if prior is not None and stratified_prior != isinstance(data, StratifiedData):
        raise DataFormatError("stratified priors need stratified data (an 's' column) and vice versa")
    if isinstance(data, StratifiedData) and prior is not None and len(data.strata) != len(
            prior.strata if isinstance(prior, StratifiedJointLaw) else prior.a):
        raise DataFormatError("the prior and the dataset have different numbers of strata")
    return data, prior, doc


def _config(args) -> dict:
    cfg = {}
    for key, val in sorted(vars(args).items()):
        # the output path is left out so that reruns into other files stay byte-identical
        if key in ("func", "out"):
            continue
        if key in ("data", "prior", "prior2") and val:
            val = str(Path(val).resolve())
        cfg[key] = val
    if getattr(args, "grid", "unused") != "unused":
        g = parse_grid(args.grid)
        cfg["grid_resolved"] = {"beta_bounds": list(g.beta_bounds), "beta_nodes": g.beta_nodes,
                                "nuisance_step": g.nuisance_step, "alpha_bounds": list(g.alpha_bounds),
                                "alpha_nodes": g.alpha_nodes, "simplex_resolution": g.simplex_resolution}
    return cfg


def _out_path(args, default_name: str) -> Optional[Path]:
    if args.out:
        return Path(args.out)
    outdir = os.environ.get(OUTDIR_ENV)
    if outdir:
        return Path(outdir) / default_name
    return None


def _emit(args, doc: dict, default_name: str, summary: Sequence[str] = ()) -> Optional[Path]:
    path = _out_path(args, default_name)
    if path is None:
        sys.stdout.write(io.dumps(doc))
    else:
        io.write_json(path, doc)
        for line in summary:
            print(line)
        print(f"wrote {path}")
    return path


def _grid_doc(post) -> dict:
    return {"beta": post.beta, "density": post.density, "log_evidence": post.log_evidence,
            "mean": post.mean(), "sd": post.sd()}


def _mcmc_doc(res) -> dict:
    return {"rng": res.rng_algorithm, "seed": res.config.seed, "chains": res.config.chains,
            "iterations": res.config.iterations, "burn_in": res.config.burn_in,
            "scales": res.scales, "summary": res.summary(),
            "beta_draws": res.draws[..., res.index("beta")] if "beta" in res.names else None}


# --------------------------------------------------------------------------
# commands


def cmd_fit(args) -> int:
    data, _, _ = _load(args, need_prior=False)
    doc = {"schema": "casecontrol.fit/1", "config": _config(args)}
    lines = []
    if isinstance(data, StratifiedData):
        fit = fit_conditional_mle(data)
        doc["conditional"] = {"beta": fit.beta, "se": fit.se, "loglik": fit.loglik,
                              "information": fit.information, "iterations": fit.iterations,
                              "degenerate_strata": fit.degenerate}
        lines.append(f"conditional MLE beta = {fit.beta.tolist()}")
    else:
        # both fits need cases and controls; report that before either optimizer runs
        if np.any(data.col_totals == 0):
            raise EmptyArm("the dataset needs at least one case and one control")
        irls = fit_logistic_irls(data)
        retro = fit_retrospective_mle(data)
        gap = float(np.max(np.abs(irls.params.beta - retro.beta)))
        doc["prospective"] = {"alpha": irls.params.alpha, "beta": irls.params.beta,
                              "se": np.sqrt(np.diag(irls.covariance)), "loglik": irls.loglik,
                              "iterations": irls.iterations}
        doc["retrospective"] = {"beta": retro.beta, "theta_x_given_0": retro.theta_x_given_0.probs,
                                "loglik": retro.loglik, "boundary_points": list(retro.boundary_points)}
        doc["beta_agreement"] = gap
        lines.append(f"beta (prospective)    = {irls.params.beta.tolist()}")
        lines.append(f"beta (retrospective)  = {retro.beta.tolist()}")
        lines.append(f"max |difference|      = {gap:.3g}")
        if args.penalty:
            kind, _, w = args.penalty.partition(":")
            try:
                pen = PenaltySpec(kind, float(w or 0.0))
            except ValueError as exc:
                raise DataFormatError(str(exc)) from None
            doc["penalized"] = {
                side: fit_penalized_value(data, pen, side) for side in ("prospective", "retrospective")
            }
            doc["penalized"]["penalty"] = {"kind": pen.kind, "weight": pen.weight}
    _emit(args, doc, "fit.json", lines)
    return EXIT_OK


def _posterior_quad(data, prior, side, grid):
    if isinstance(data, StratifiedData):
        return stratified_marginal_beta(data, prior, side, grid)
    return marginal_beta_quadrature(data, prior, side, grid)


def cmd_posterior(args) -> int:
    data, prior, _ = _load(args)
    grid = parse_grid(args.grid)
    doc = {"schema": "casecontrol.posterior/1", "config": _config(args), "method": args.method, "sides": {}}
    lines = []
    out = _out_path(args, "posterior.json")
    for side in _side_list(args.side):
        if args.method == "quad":
            post = _posterior_quad(data, prior, side, grid)
            doc["sides"][side] = _grid_doc(post)
            lines.append(f"{side}: mean {post.mean():.6g}, sd {post.sd():.6g}")
            if out is not None:
                io.write_grid(out.with_name(f"{out.stem}.{side}.grid.csv"), post.beta, post.density)
        else:
            cfg = McmcConfig(chains=args.chains, iterations=args.iters, burn_in=min(args.iters // 10, 1000),
                             seed=args.seed)
            if isinstance(data, StratifiedData):
                res = stratified_mcmc_sample(data, prior, side, cfg)
            else:
                if side == "retrospective" and not isinstance(prior, ConditionedLogisticPrior):
                    raise UsageError("retrospective MCMC needs a conditioned prior")
                res = mcmc_sample(data, prior, side, cfg)
            require_convergence(res)
            doc["sides"][side] = _mcmc_doc(res)
            lines.append(f"{side}: mean {res.mean('beta'):.6g} (mcse {res.mcse('beta'):.2g}), "
                         f"max R-hat {res.rhat.max():.4f}")
    _emit(args, doc, "posterior.json", lines)
    return EXIT_OK


def cmd_compare(args) -> int:
    data, prior, _ = _load(args)
    grid = parse_grid(args.grid)
    if isinstance(data, StratifiedData):
        rep = stratified_equivalence_report(data, prior, grid)
    else:
        rep = equivalence_report(data, prior, grid)
    doc = {"schema": "casecontrol.compare/1", "config": _config(args), "verdict": rep.verdict,
           "max_relative_discrepancy": rep.max_relative_discrepancy, "threshold": rep.threshold,
           "evidence_gap": rep.evidence_gap, "prospective": _grid_doc(rep.prospective),
           "retrospective": _grid_doc(rep.retrospective)}
    _emit(args, doc, "compare.json",
          [f"verdict {rep.verdict} (max relative discrepancy {rep.max_relative_discrepancy:.3g})"])
    return EXIT_OK if rep.equivalent else EXIT_DIFFERENT


def cmd_bf(args) -> int:
    if not args.prior2:
        raise UsageError("--prior2 is required")
    data, prior1, _ = _load(args)
    prior2, _ = io.load_prior(args.prior2)
    if isinstance(data, StratifiedData):
        raise UsageError("Bayes factors are implemented for unstratified data")
    if io.prior_space(prior2) != data.space:
        raise DataFormatError("the two priors live on different covariate spaces")
    grid = parse_grid(args.grid)
    doc = {"schema": "casecontrol.bf/1", "config": _config(args), "sides": {}}
    lines = []
    for side in _side_list(args.side):
        lbf = log_bayes_factor(data, prior1, prior2, side, grid)
        doc["sides"][side] = {"log_bf": lbf, "bf": float(np.exp(lbf))}
        lines.append(f"{side}: BF = {np.exp(lbf):.10g}")
    if len(doc["sides"]) == 2:
        lp = doc["sides"]["prospective"]["log_bf"]
        lr = doc["sides"]["retrospective"]["log_bf"]
        doc["relative_gap"] = float(abs(np.expm1(lp - lr)))
        lines.append(f"|BF_pro / BF_retro - 1| = {doc['relative_gap']:.3g}")
    _emit(args, doc, "bf.json", lines)
    return EXIT_OK


def _points_arg(text: str) -> CovariateSpace:
    rows = [r for r in text.split(";") if r.strip()]
    try:
        return CovariateSpace(np.array([_floats(r) for r in rows]))
    except ValueError as exc:
        raise DataFormatError(f"bad --points: {exc}") from None


def cmd_simulate(args) -> int:
    try:
        space = _points_arg(args.points)
        theta_x = MarginalX(np.array(_floats(args.theta_x))) if args.theta_x else MarginalX.uniform(space.size)
        beta = np.array(_floats(args.beta))
        if beta.size != space.k or theta_x.probs.size != space.size:
            raise DataFormatError("beta / theta-x sizes do not match the points")
        table = JointTable.from_prospective(theta_x, LogisticParams(args.alpha, beta), space)
        kind = {"prospective": "prospective", "case-control": "case_control", "matched": "stratified_matched"}
        design = DesignSpec(kind[args.design], n=args.n, n0=args.n0, n1=args.n1, cases=args.cases,
                            controls=args.controls, strata=args.strata, seed=args.seed)
        data = simulate(design, [table], space)
    except (ValueError, BoundaryError) as exc:
        raise DataFormatError(f"bad simulation spec: {exc}") from None
    out = _out_path(args, "simulated.csv")
    if out is None:
        raise UsageError("simulate needs --out (or the output directory variable)")
    io.write_dataset(out, data)
    io.write_json(out.with_suffix(".json"), {"schema": "casecontrol.simulate/1", "config": _config(args),
                                             "rng": RNG_ALGORITHM})
    print(f"wrote {out}")
    return EXIT_OK


def _prop1_spread(prior: ConditionedLogisticPrior) -> float:
    """Spread of (pseudo-count construction - conditioned prior) over a 5 x 5 grid."""
    flat = ConditionedLogisticPrior(prior.space, prior.a, GFunction.constant(), prior.reference)
    diffs = []
    for a in np.linspace(-2, 2, 5):
        for b in np.linspace(-2, 2, 5):
            p = LogisticParams(a, np.full(prior.space.k, b))
            diffs.append(pseudo_count_construction_logdens(p, flat) - conditioned_prior_logdens_pro(p, flat))
    return float(np.ptp(diffs))


def cmd_check_prior(args) -> int:
    prior, _ = io.load_prior(args.prior)
    if isinstance(prior, (StratifiedPrior, StratifiedJointLaw)):
        raise UsageError("check-prior takes an unstratified prior")
    doc = {"schema": "casecontrol.check_prior/1", "config": _config(args)}
    lines = []
    stats = {d: shm_factorization_check(prior, d) for d in ("Y-margin", "X-margin")}
    passed = all(v < SHM_THRESHOLD for v in stats.values())
    doc["factorization"] = {"statistics": stats, "threshold": SHM_THRESHOLD, "pass": passed}
    lines.append(f"factorization: {'PASS' if passed else 'FAIL'} "
                 f"(Y-margin {stats['Y-margin']:.3g}, X-margin {stats['X-margin']:.3g})")
    warnings = []
    if isinstance(prior, ConditionedLogisticPrior):
        spread = _prop1_spread(prior)
        doc["pseudo_count_identity"] = {"spread": spread, "pass": spread < 1e-10}
        lines.append(f"pseudo-count construction identity: {'PASS' if spread < 1e-10 else 'FAIL'} "
                     f"(spread {spread:.3g})")
        probe = properness_probe(prior)
        doc["properness"] = {"assessed": probe.assessed, "masses": probe.masses, "bounds": probe.bounds,
                             "proper": probe.proper}
        if probe.warning:
            warnings.append(probe.warning)
        lines.append(f"properness: {'not assessed' if probe.proper is None else ('proper' if probe.proper else 'IMPROPER')}")
    doc["warnings"] = warnings
    for w in warnings:
        print(f"WARNING: {w}", file=sys.stderr)
    _emit(args, doc, "check_prior.json", lines)
    return EXIT_OK if passed else EXIT_FACTORIZATION


# --------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="casecontrol",
                                description="Prospective vs retrospective logistic inference for case-control data.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, prior=True, grid=False):
        sp.add_argument("--data", help="dataset CSV (x1..xk, y, optional s and count)")
        if prior:
            sp.add_argument("--prior", help="prior JSON document")
        sp.add_argument("--out", help="output path (default: $%s/<command>.json or stdout)" % OUTDIR_ENV)
        sp.add_argument("--seed", type=int, default=0)
        if grid:
            sp.add_argument("--grid", help="beta grid as lo:hi:n")

    sp = sub.add_parser("fit", help="maximum likelihood fits on both sides")
    common(sp, prior=False)
    sp.add_argument("--penalty", help="ridge:WEIGHT or lasso:WEIGHT")
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("posterior", help="marginal posterior of beta")
    common(sp, grid=True)
    sp.add_argument("--side", choices=["pro", "retro", "both"], default="both")
    sp.add_argument("--method", choices=["quad", "mcmc"], default="quad")
    sp.add_argument("--chains", type=int, default=4)
    sp.add_argument("--iters", type=int, default=10000)
    sp.set_defaults(func=cmd_posterior)

    sp = sub.add_parser("compare", help="compare prospective and retrospective posteriors")
    common(sp, grid=True)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("bf", help="Bayes factor between two priors")
    common(sp, grid=True)
    sp.add_argument("--prior2", help="second prior JSON document")
    sp.add_argument("--side", choices=["pro", "retro", "both"], default="both")
    sp.set_defaults(func=cmd_bf)

    sp = sub.add_parser("simulate", help="simulate a dataset")
    sp.add_argument("--design", choices=["prospective", "case-control", "matched"], required=True)
    sp.add_argument("--points", default="0;1", help="covariate points, rows separated by ';'")
    sp.add_argument("--theta-x", help="covariate distribution (comma-separated)")
    sp.add_argument("--alpha", type=float, default=0.0)
    sp.add_argument("--beta", default="0", help="log odds ratio (comma-separated for k > 1)")
    sp.add_argument("--n", type=int, default=0)
    sp.add_argument("--n0", type=int, default=0)
    sp.add_argument("--n1", type=int, default=0)
    sp.add_argument("--cases", type=int, default=1)
    sp.add_argument("--controls", type=int, default=1)
    sp.add_argument("--strata", type=int, default=0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", help="output CSV")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("check-prior", help="diagnose a prior document")
    sp.add_argument("--prior", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_check_prior)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_PARSE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (EmptyArm, AllDegenerate, SingularInformation, BoundaryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NOT_IDENTIFIABLE if not isinstance(exc, BoundaryError) else EXIT_SEPARATION
    except tuple(e for e, _ in _ERROR_CODES) as exc:
        code = next(c for e, c in _ERROR_CODES if isinstance(exc, e))
        print(f"error: {exc}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
