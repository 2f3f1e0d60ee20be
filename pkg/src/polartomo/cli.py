"""Command-line front end.

Reports are JSON (or CSV for curves) written to ``--output`` or stdout.
Module errors exit non-zero with an error JSON on stderr: 2 for schema and
input violations, 3 for numerical failures.
"""

import argparse
import json
import sys

import numpy as np

from . import acceptance, counts, fitstats, io, mcerr, metrics, tomo
from .eigen import eigvalsh
from .errors import NoConvergence, PolartomoError, SchemaError


def _ml_config(args):
    return tomo.MLConfig(args.max_iterations, args.objective_tolerance, args.step_tolerance)


def _density_report(rho, **extra):
    return {**rho.to_dict(), **extra}


def cmd_reconstruct(args):
    ms = io.read_measurements(args.input)
    res = tomo.fit_max_likelihood(ms, _ml_config(args))
    if not res.converged:
        raise_no_convergence(res)
    li = tomo.linear_inversion(ms)
    return io.dumps(
        _density_report(
            res.rho,
            objective=res.objective,
            iterations=res.iterations,
            converged=res.converged,
            linear_inversion={
                "re": li.real.tolist(),
                "im": li.imag.tolist(),
                "min_eigenvalue": float(eigvalsh(li)[0]),
            },
        )
    )


def raise_no_convergence(res):
    raise NoConvergence(f"no convergence after {res.iterations} iterations", best=res)


def cmd_metrics(args):
    rho = io.read_density(args.input)
    return io.dumps(metrics.metrics_report(rho, args.dop_threshold).to_dict())


def cmd_mc(args):
    ms = io.read_measurements(args.input)
    cfg = _ml_config(args)
    point = tomo.max_likelihood(ms, cfg)
    if args.background:
        ens = mcerr.background_ensemble(ms, args.background, args.samples, args.seed, cfg, args.workers)
        try:
            point = mcerr.subtract_background(point, args.background)
        except PolartomoError:
            point = None
    else:
        ens = mcerr.build_ensemble(ms, args.samples, args.seed, cfg, args.workers)
    stats = mcerr.ensemble_statistics(ens, point=point)
    return io.dumps(mcerr.summary_to_dict(ens, stats))


def cmd_subtract(args):
    rho = io.read_density(args.input)
    out = mcerr.subtract_background(rho, args.fraction)
    return io.dumps(_density_report(out, background_fraction=args.fraction))


def cmd_correlation(args):
    rho = io.read_density(args.input)
    theta = np.linspace(args.theta_start, args.theta_stop, args.points)
    lines = ["theta_rad,degree_of_correlation"]
    lines += [f"{float(t)!r},{float(metrics.degree_of_correlation(rho, t))!r}" for t in theta]
    return "\n".join(lines) + "\n"


def cmd_pipeline(args):
    recs = counts.counts_from_dict(io.read_json(args.input))
    ms = counts.counts_to_probabilities(recs, args.normalization)
    rho = tomo.max_likelihood(ms, _ml_config(args))
    return io.dumps(
        {
            "normalization": args.normalization,
            "probabilities": ms.to_dict()["measurements"],
            "normalization_audit": tomo.check_complete_normalization(ms).to_dict(),
            "density_matrix": rho.to_dict(),
            "metrics": metrics.metrics_report(rho, args.dop_threshold).to_dict(),
        }
    )


def cmd_synth(args):
    rho = io.read_density(args.input)
    recs = counts.synthesize_counts(
        rho, args.pairs, args.background, args.accidental_level, args.peaks, args.seed
    )
    return io.dumps(counts.counts_to_dict(recs))


def cmd_fit(args):
    pts = fitstats.read_points_csv(args.input)
    if args.model == "constant":
        res = fitstats.fit_constant(pts)
    else:
        if args.period is None:
            raise SchemaError("--period is required for the sinusoid model")
        res = fitstats.fit_sinusoid(pts, args.period)
    out = res.to_dict()
    if args.reference is not None:
        out["sigma_distance"] = fitstats.sigma_distance(res.params[0], res.param_sigmas[0], args.reference)
        out["reference"] = args.reference
    return io.dumps(out)


def cmd_reproduce(args):
    run = acceptance.FixtureRun(args.seed, args.samples, args.property_samples, args.workers, _ml_config(args))
    criteria = acceptance.run_all(run)
    for c in criteria:
        print(c.line(), file=sys.stderr if args.output in (None, "-") else sys.stdout)
    rep = acceptance.report(run, criteria)
    return io.dumps(rep), 0 if rep["all_passed"] else 1


def _add_ml_flags(p):
    g = p.add_argument_group("maximum-likelihood optimizer")
    g.add_argument("--max-iterations", type=int, default=5000, help="iteration budget (default: %(default)s)")
    g.add_argument("--objective-tolerance", type=float, default=1e-12,
                   help="relative objective decrease that counts as converged (default: %(default)s)")
    g.add_argument("--step-tolerance", type=float, default=1e-10,
                   help="relative step length that counts as converged (default: %(default)s)")


def _add_mc_flags(p, seed_default):
    p.add_argument("--samples", type=int, default=mcerr.DEFAULT_SIZE,
                   help="ensemble size; 5000 is the size behind the published uncertainties (default: %(default)s)")
    p.add_argument("--seed", type=int, default=seed_default, help="seed for all randomness (default: %(default)s)")
    p.add_argument("--workers", type=int, default=1,
                   help="worker processes; results do not depend on this (default: %(default)s)")


def build_parser():
    parser = argparse.ArgumentParser(prog="polartomo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, input_help=None):
        p = sub.add_parser(name, help=help_text, description=help_text)
        if input_help:
            p.add_argument("input", help=input_help)
        p.add_argument("-o", "--output", default=None, help="output file (default: stdout)")
        p.set_defaults(func=func)
        return p

    p = add("reconstruct", cmd_reconstruct, "measurement JSON -> ML density matrix JSON", "measurement JSON")
    _add_ml_flags(p)

    p = add("metrics", cmd_metrics, "density matrix JSON -> metrics report JSON", "density-matrix JSON")
    p.add_argument("--dop-threshold", type=float, default=metrics.DEFAULT_DOP_THRESHOLD,
                   help="max single-photon DOP for the eigenvalue method to apply; separates the "
                        "published 4.5%% (invalid) from 0%% (valid) (default: %(default)s)")

    p = add("mc", cmd_mc, "measurement JSON -> Monte-Carlo ensemble statistics JSON", "measurement JSON")
    _add_mc_flags(p, 0)
    p.add_argument("--background", type=float, nargs="?", const=mcerr.DEFAULT_BACKGROUND, default=0.0,
                   metavar="FRACTION",
                   help="subtract an unpolarized background from each member; the bare flag uses the "
                        "quoted source background 0.49 (default: no subtraction)")
    _add_ml_flags(p)

    p = add("subtract", cmd_subtract, "density matrix JSON -> background-subtracted density matrix", "density-matrix JSON")
    p.add_argument("--fraction", type=float, default=mcerr.DEFAULT_BACKGROUND,
                   help="unpolarized background fraction, quoted without error as 49%% (default: %(default)s)")

    p = add("correlation", cmd_correlation, "density matrix JSON -> degree-of-correlation CSV", "density-matrix JSON")
    p.add_argument("--theta-start", type=float, default=0.0, help="first analyzer angle, radians (default: %(default)s)")
    p.add_argument("--theta-stop", type=float, default=float(np.pi), help="last analyzer angle, radians (default: pi)")
    p.add_argument("--points", type=int, default=181, help="number of angles (default: %(default)s)")

    p = add("pipeline", cmd_pipeline, "counts JSON -> probabilities -> ML -> metrics", "counts JSON")
    p.add_argument("--normalization", choices=("pairwise", "complete"), default="complete",
                   help="pairwise forces P_A + P_B = 1/2; complete uses full product bases (default: %(default)s)")
    p.add_argument("--dop-threshold", type=float, default=metrics.DEFAULT_DOP_THRESHOLD,
                   help="see 'metrics' (default: %(default)s)")
    _add_ml_flags(p)

    p = add("synth", cmd_synth, "density matrix JSON -> synthetic Poisson counts JSON", "density-matrix JSON")
    p.add_argument("--pairs", type=float, required=True, help="mean pairs per setting")
    p.add_argument("--background", type=float, default=0.0, help="unpolarized background fraction (default: %(default)s)")
    p.add_argument("--accidental-level", type=float, default=100.0,
                   help="mean accidental pairs per finite-delay peak (default: %(default)s)")
    p.add_argument("--peaks", type=int, default=4, help="finite-delay peaks counted (default: %(default)s)")
    p.add_argument("--seed", type=int, default=0, help="seed (default: %(default)s)")

    p = add("fit", cmd_fit, "points CSV (theta_rad,y,sigma) -> fit result JSON", "points CSV")
    p.add_argument("--model", choices=("constant", "sinusoid"), default="constant", help="(default: %(default)s)")
    p.add_argument("--period", type=float, default=None, help="sinusoid period in radians (required for sinusoid)")
    p.add_argument("--reference", type=float, default=None,
                   help="report |reference - a| / sigma_a, e.g. 0.5 for the entanglement threshold")

    p = add("reproduce-paper", cmd_reproduce, "run every acceptance check on the shipped fixtures")
    _add_mc_flags(p, 1)
    p.add_argument("--property-samples", type=int, default=10_000,
                   help="random states per property check (default: %(default)s)")
    _add_ml_flags(p)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = args.func(args)
    except PolartomoError as exc:
        sys.stderr.write(json.dumps(exc.to_dict()) + "\n")
        return exc.exit_code
    status = 0
    if isinstance(out, tuple):
        out, status = out
    io.write_text(args.output, out)
    return status


if __name__ == "__main__":
    sys.exit(main())
