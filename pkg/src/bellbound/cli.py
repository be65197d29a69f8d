"""Command-line interface.

Exit codes: 0 success (bound check passed, test ruled out local models),
1 usage or input error, 2 bound check failed or optimization infeasible,
3 locality test inconclusive.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, experiment, models, optimizer
from .correlation import (CorrelationFormatError, GridError, covariance_path, load_correlation, uniform_grid,
                          write_covariance)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAIL = 2
EXIT_INCONCLUSIVE = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _json(d: dict) -> str:
    return json.dumps(d, indent=2) + "\n"


def _angles(text: str) -> list[float]:
    try:
        vals = [float(x) for x in text.split(",")]
    except ValueError:
        raise UsageError(f"bad angle list {text!r}") from None
    if len(vals) != 4:
        raise UsageError("--angles needs exactly four values a,a2,b,b2")
    return vals


def cmd_simulate(args) -> int:
    grid = uniform_grid(args.grid)
    if args.model == "wigner":
        C = models.simulate_wigner_correlation(grid, args.samples, args.seed, workers=args.workers)
    else:
        C = models.simulate_correlation(models.get_model(args.model), grid, args.samples, args.seed,
                                        workers=args.workers)
    _emit(C.to_csv(), args.out)
    if args.out and C.covariance is not None:
        write_covariance(covariance_path(args.out), C.covariance)
    if args.figure:
        from .plotting import plot_correlation
        plot_correlation(C, args.figure, title=f"{args.model} model, n={args.samples}")
    return EXIT_OK


def cmd_fourier(args) -> int:
    C = load_correlation(args.input)
    s = analysis.fourier_coefficients(C, args.kmax)
    d = s.to_dict()
    if s.std_err is not None:
        d["std_err"] = [float(x) for x in s.std_err]
    d["imag_residue"] = s.imag_residue
    _emit(_json(d), args.out)
    if args.figure:
        from .plotting import plot_spectrum
        plot_spectrum(s, args.figure)
    return EXIT_OK


def cmd_bound_check(args) -> int:
    text = Path(args.input).read_text(encoding="utf-8")
    s = analysis.FourierSpectrum.from_json(text)
    tol: float | np.ndarray = args.stat_tol
    if args.n_sigma is not None:
        se = json.loads(text).get("std_err")
        if se is None:
            raise UsageError("--n-sigma needs a spectrum with std_err")
        tol = args.n_sigma * np.asarray(se, dtype=float) + args.stat_tol
    report = analysis.check_fourier_bounds(s, tol)
    _emit(_json(report.to_dict()), args.out)
    return EXIT_OK if report.verdict else EXIT_FAIL


def cmd_distance(args) -> int:
    C = load_correlation(args.input)
    report = analysis.bound_margin(C)
    d = report.to_dict()
    d["n_sigma_consistent_with_bell"] = None
    if report.distance_std_err > 0:
        bell = math.sqrt(5.0 / 6.0 - 8.0 / math.pi**2)
        d["n_sigma_consistent_with_bell"] = abs(report.distance - bell) / report.distance_std_err
    d["covariance_used"] = C.covariance is not None
    _emit(_json(d), args.out)
    return EXIT_OK


def cmd_optimize(args) -> int:
    cons = optimizer.SpectrumConstraints(args.kmax, c0_zero=args.c0_zero)
    try:
        result = optimizer.solve_min_distance(cons)
    except optimizer.InfeasibleConstraintsError as exc:
        _emit(_json(exc.to_dict()), args.out)
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_FAIL
    _emit(result.to_json(), args.out)
    if args.figure:
        from .plotting import plot_spectrum
        plot_spectrum(result.spectrum, args.figure, title=f"relaxation optimum, k_max={args.kmax}")
    return EXIT_OK


def cmd_approach(args) -> int:
    try:
        ks = [int(x) for x in args.kmax_list.split(",")]
    except ValueError:
        raise UsageError(f"bad k_max list {args.kmax_list!r}") from None
    points = optimizer.bound_approach_curve(ks)
    lines = ["k_max,distance,bound"] + [f"{k},{d:.17g},{analysis.DISTANCE_BOUND:.17g}" for k, d in points]
    _emit("\n".join(lines) + "\n", args.out)
    if args.figure:
        from .plotting import plot_approach
        plot_approach(points, args.figure)
    return EXIT_OK


def cmd_bell_check(args) -> int:
    C = load_correlation(args.input)
    r = analysis.bell_inequality_check(C, args.theta1, args.theta2, n_sigma=args.n_sigma)
    d = r.to_dict()
    d.update(theta1=args.theta1, theta2=args.theta2)
    _emit(_json(d), args.out)
    return EXIT_OK


def cmd_chsh(args) -> int:
    C = load_correlation(args.input)
    a, a2, b, b2 = _angles(args.angles)
    s = analysis.chsh_value(analysis.pair_expectation_from(C), a, a2, b, b2)
    se = 0.0
    if np.any(C.std_err):
        seps = [abs(a - b), abs(a - b2), abs(a2 - b), abs(a2 - b2)]
        se = math.sqrt(sum(float(C.std_err_at(float(t))) ** 2 for t in seps))
    _emit(_json({"schema_version": 1, "angles": [a, a2, b, b2], "S": s, "abs_S": abs(s), "std_err": se,
                 "classical_limit": 2.0, "quantum_limit": 2.0 * math.sqrt(2.0),
                 "violates_classical": abs(s) > 2.0}), args.out)
    return EXIT_OK


def cmd_test(args) -> int:
    d = experiment.load_dataset(args.data)
    v = experiment.hypothesis_test(d, args.bootstrap, args.alpha, args.seed)
    _emit(v.to_json(), args.out)
    if args.plot_data:
        lines = ["theta_rad,c_hat,std_err,cos"] + [
            f"{t:.17g},{c:.17g},{s:.17g},{math.cos(t):.17g}" for t, c, s in zip(v.theta, v.c_hat, v.std_err)]
        Path(args.plot_data).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.figure:
        from .plotting import plot_verdict
        plot_verdict(v, args.figure)
    return EXIT_OK if v.ruled_out else EXIT_INCONCLUSIVE


def cmd_synthesize(args) -> int:
    theta = np.linspace(0.0, math.pi, args.angles)
    model = None if args.source == "quantum" else models.get_model(args.source)
    ds = experiment.synthesize_dataset(theta, args.samples, args.seed, model)
    _emit(ds.to_csv(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bellbound", description="Classical vs quantum singlet correlation diagnostics.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="Monte Carlo correlation on a uniform grid")
    s.add_argument("--model", choices=["bell", "wigner"], required=True)
    s.add_argument("--grid", type=int, default=64)
    s.add_argument("--samples", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out")
    s.add_argument("--figure", help="also render a PNG of the estimate")
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("fourier", help="cosine coefficients of a correlation CSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--kmax", type=int, required=True)
    s.add_argument("--out")
    s.add_argument("--figure")
    s.set_defaults(func=cmd_fourier)

    s = sub.add_parser("bound-check", help="check 0 <= c_k <= 4/pi^2")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--stat-tol", type=float, default=0.0)
    s.add_argument("--n-sigma", type=float, help="add n_sigma * per-coefficient std_err to the tolerance")
    s.add_argument("--out")
    s.set_defaults(func=cmd_bound_check)

    s = sub.add_parser("distance", help="distance to cos and the lower-bound margin")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_distance)

    s = sub.add_parser("optimize", help="minimum distance over the Fourier relaxation")
    s.add_argument("--kmax", type=int, required=True)
    s.add_argument("--c0-zero", action="store_true")
    s.add_argument("--out")
    s.add_argument("--figure")
    s.set_defaults(func=cmd_optimize)

    s = sub.add_parser("approach", help="relaxation optimum for several k_max values (CSV)")
    s.add_argument("--kmax-list", default="1,2,4,8,16,32,64,128")
    s.add_argument("--out")
    s.add_argument("--figure")
    s.set_defaults(func=cmd_approach)

    s = sub.add_parser("bell-check", help="Bell's three-direction inequality")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--theta1", type=float, required=True)
    s.add_argument("--theta2", type=float, required=True)
    s.add_argument("--n-sigma", type=float, default=5.0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_bell_check)

    s = sub.add_parser("chsh", help="CHSH combination from a correlation CSV")
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--angles", required=True, help="a,a2,b,b2 in radians")
    s.add_argument("--out")
    s.set_defaults(func=cmd_chsh)

    s = sub.add_parser("test", help="bootstrap locality test on coincidence counts")
    s.add_argument("--data", required=True)
    s.add_argument("--bootstrap", type=int, default=1000)
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.add_argument("--plot-data", help="CSV of per-angle estimates for external plotting")
    s.add_argument("--figure")
    s.set_defaults(func=cmd_test)

    s = sub.add_parser("synthesize", help="synthetic coincidence dataset")
    s.add_argument("--source", choices=["quantum", "bell"], required=True)
    s.add_argument("--angles", type=int, default=64)
    s.add_argument("--samples", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_synthesize)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (OSError, ValueError, ArithmeticError, GridError, CorrelationFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
