"""Command-line interface: ``fracgreen {green,solve,ml,verify}``.

Exit status:

* 0 success
* 2 usage error (bad flags or parameter lists)
* 3 problem file could not be parsed
* 4 problem violates an invariant (or a value is outside a domain)
* 5 a series or an iteration did not converge
* 6 a verification check failed
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Sequence

import numpy as np

from fracgreen.exceptions import (
    ConvergenceError,
    DomainError,
    FracGreenError,
    SpecParseError,
    SpecValidationError,
    TermOverflowError,
)
from fracgreen.neumann_engine import (
    constant_coeff_green,
    greens_function,
    homogeneous_solution,
    inhomogeneous_solution,
)
from fracgreen.numeric_path import (
    GradedGrid,
    GridFunction,
    convolve_green,
    green_on_grid,
    solve_inhomogeneous_grid,
    successive_approximation,
)
from fracgreen.power_algebra import (
    BivariatePowerSeries,
    GeneralizedPowerSeries,
    format_series,
    parse_series,
)
from fracgreen.problem_spec import ProblemSpec, parse_spec
from fracgreen.special_functions import (
    MLParams,
    ml_multivariate,
    ml_two_param,
    ml_two_param_deriv,
)
from fracgreen.verifier import VerificationReport, verify_green, verify_solution

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_VALIDATION = 4
EXIT_CONVERGENCE = 5
EXIT_VERIFICATION = 6


class UsageError(Exception):
    pass


# {{{ helpers


def _floats(text: str, what: str) -> list[float]:
    try:
        out = [float(x) for x in text.replace(";", ",").split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"{what}: expected comma-separated numbers, got {text!r}") from None
    if not out:
        raise UsageError(f"{what}: empty list")
    return out


def _pairs(text: str) -> list[tuple[float, float]]:
    out = []
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        values = _floats(chunk, "--sample")
        if len(values) != 2:
            raise UsageError(f"--sample: expected 't,tau' pairs, got {chunk!r}")
        out.append((values[0], values[1]))
    if not out:
        raise UsageError("--sample: no pairs given")
    return out


def _read_spec(path: str) -> ProblemSpec:
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path) as f:
                text = f.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    return parse_spec(text)


def _write_csv(out, header: str, rows) -> None:
    out.write(header + "\n")
    for row in rows:
        out.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _sample_points(spec: ProblemSpec, n: int) -> np.ndarray:
    return spec.horizon * np.arange(1, n + 1) / n


# }}}

# {{{ solvers


def _solve(spec: ProblemSpec):
    """Solution as a power series (symbolic path) or a grid function."""
    op = spec.operator()
    path = spec.resolved_path
    if path == "symbolic":
        if spec.homogeneous:
            return homogeneous_solution(op, spec.policy())
        return inhomogeneous_solution(op, spec.rhs.series(), spec.policy())
    grid = spec.grid()
    if spec.homogeneous:
        return successive_approximation(op, grid, max_iter=spec.max_terms)
    if op.is_polynomial:
        # polynomial operator with a general right-hand side: Green's
        # function in closed series form, convolved with h on the grid
        G = greens_function(op, spec.policy())
        return convolve_green(G, spec.rhs, grid, h_exponent=spec.h_exponent)
    return solve_inhomogeneous_grid(
        op, spec.rhs, grid, max_iter=spec.max_terms, rhs_exponent=spec.h_exponent)


def _verify(spec: ProblemSpec, y) -> VerificationReport:
    op = spec.operator()
    if spec.homogeneous:
        h = None
    elif isinstance(y, GeneralizedPowerSeries) and spec.rhs.power_sum is not None:
        h = spec.rhs.series()
    else:
        h = spec.rhs
    grid = y.grid if isinstance(y, GridFunction) else None
    return verify_solution(op, y, h, grid, T=spec.horizon)


# }}}

# {{{ subcommands


def cmd_green(args, out) -> int:
    spec = _read_spec(args.spec)
    op = spec.operator()
    samples = _pairs(args.sample) if args.sample else []
    for t, tau in samples:
        if not t > tau >= 0:
            raise DomainError(f"sample ({t}, {tau}) needs t > tau >= 0")

    if args.closed_form:
        if not op.is_constant:
            raise SpecValidationError("--closed-form needs constant coefficients")
        if args.emit_series:
            raise UsageError("--closed-form has no series to emit")
        _write_csv(out, "t,tau,value",
                   ((t, tau, constant_coeff_green(op, t, tau)) for t, tau in samples))
        return EXIT_OK

    if spec.resolved_path == "symbolic":
        horizon = max([spec.horizon] + [t for t, _ in samples])
        G = greens_function(op, spec.policy(horizon))
        if args.emit_series:
            out.write(format_series(G) + "\n")
        if samples:
            if args.emit_series:
                out.write("\n")
            _write_csv(out, "t,tau,value", ((t, tau, G(t, tau)) for t, tau in samples))
        return EXIT_OK

    if args.emit_series:
        raise UsageError("--emit-series needs polynomial coefficients (symbolic path)")
    rows = []
    for t, tau in samples:
        grid = GradedGrid(t - tau, spec.N, spec.grid().r)
        rows.append((t, tau, float(green_on_grid(op, tau, grid).values[-1])))
    _write_csv(out, "t,tau,value", rows)
    return EXIT_OK


def cmd_solve(args, out) -> int:
    spec = _read_spec(args.spec)
    if args.path:
        spec = spec.with_path(args.path)
    y = _solve(spec)
    if args.emit_series:
        if not isinstance(y, GeneralizedPowerSeries):
            raise UsageError("--emit-series needs the symbolic path")
        out.write(format_series(y) + "\n")
    else:
        if isinstance(y, GeneralizedPowerSeries):
            t = _sample_points(spec, args.points or 100)
            _write_csv(out, "t,value", zip(t, y(t)))
        elif args.points:
            t = _sample_points(spec, args.points)
            _write_csv(out, "t,value", zip(t, y(t)))
        else:
            y.to_csv(out)
    if args.verify:
        report = _verify(spec, y)
        out.write("\n".join(f"# {line}" for line in report.render().splitlines()) + "\n")
        if not report.converged:
            return EXIT_VERIFICATION
    return EXIT_OK


def cmd_ml(args, out) -> int:
    if args.alphas is not None:
        if args.alpha is not None or args.l:
            raise UsageError("--alphas cannot be combined with --alpha or --l")
        alphas = _floats(args.alphas, "--alphas")
        z = _floats(args.z, "--z")
        if len(z) != len(alphas):
            raise UsageError(f"--z needs {len(alphas)} values, got {len(z)}")
        try:
            params = MLParams(tuple(alphas), args.beta)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        value = ml_multivariate(params, z)
    else:
        if args.alpha is None:
            raise UsageError("give --alpha (two-parameter) or --alphas (multivariate)")
        if not args.alpha > 0:
            raise UsageError("--alpha must be positive")
        if args.l < 0:
            raise UsageError("--l must be nonnegative")
        z = _floats(args.z, "--z")
        if len(z) != 1:
            raise UsageError("--z takes a single value with --alpha")
        if args.l:
            value = ml_two_param_deriv(args.alpha, args.beta, args.l, z[0])
        else:
            value = ml_two_param(args.alpha, args.beta, z[0])
    out.write(f"{value:.17g}\n")
    return EXIT_OK


def cmd_verify(args, out) -> int:
    spec = _read_spec(args.spec)
    op = spec.operator()
    if args.series:
        try:
            with open(args.series) as f:
                candidate = parse_series(f.read())
        except OSError as exc:
            raise UsageError(f"cannot read {args.series}: {exc.strerror}") from None
        except ValueError as exc:
            raise SpecParseError(f"{args.series}: {exc}") from None
    elif args.green:
        candidate = greens_function(op, spec.policy(2.0 * spec.horizon))
    else:
        candidate = _solve(spec)

    if isinstance(candidate, BivariatePowerSeries):
        taus = _floats(args.tau, "--tau") if args.tau else [spec.horizon / 4, spec.horizon / 2,
                                                               spec.horizon]
        report = verify_green(op, candidate, taus, horizon=spec.horizon)
    else:
        report = _verify(spec, candidate)
    out.write(report.render() + "\n")
    return EXIT_OK if report.converged else EXIT_VERIFICATION


# }}}

# {{{ entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fracgreen",
        description="Green's functions and initial value problems for fractional "
                    "differential operators with variable coefficients.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("green", help="Green's function G(t, tau)")
    p.add_argument("spec", help="problem file ('-' for stdin)")
    p.add_argument("--emit-series", action="store_true", help="print the term list")
    p.add_argument("--sample", metavar="T,TAU;...", help="evaluate at (t, tau) pairs")
    p.add_argument("--closed-form", action="store_true",
                   help="constant coefficients: evaluate the Mittag-Leffler closed form")
    p.set_defaults(func=cmd_green)

    p = sub.add_parser("solve", help="solve the initial value problem")
    p.add_argument("spec", help="problem file ('-' for stdin)")
    p.add_argument("--emit-series", action="store_true", help="print the solution series")
    p.add_argument("--points", type=int, help="number of uniform output points in (0, T]")
    p.add_argument("--path", choices=("auto", "symbolic", "numeric"), help="override the path")
    p.add_argument("--verify", action="store_true", help="append a verification report")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("ml", help="Mittag-Leffler functions")
    p.add_argument("--alpha", type=float, help="two-parameter function E_{alpha,beta}")
    p.add_argument("--alphas", help="comma-separated exponents of the multivariate function")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--l", type=int, default=0, help="derivative order (two-parameter only)")
    p.add_argument("--z", required=True, help="argument(s), comma separated")
    p.set_defaults(func=cmd_ml)

    p = sub.add_parser("verify", help="check a solution or Green's function")
    p.add_argument("spec", help="problem file ('-' for stdin)")
    p.add_argument("--series", help="series file written by --emit-series (default: solve)")
    p.add_argument("--green", action="store_true", help="check the computed Green's function")
    p.add_argument("--tau", help="tau samples for Green's function checks")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args, out)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SpecParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (SpecValidationError, DomainError) as exc:
        print(f"invalid problem: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (ConvergenceError, TermOverflowError) as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except (FracGreenError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())


# }}}
