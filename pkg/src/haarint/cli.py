"""``haarint`` command line.

Exit codes: 0 when every gate passes, 1 when a gate fails, 2 on usage or
input errors.
"""

import argparse
import math
import secrets
import sys

import numpy as np

from . import __version__, asymptotics, io, montecarlo, reduction, saddle, suites
from .errors import HaarintError
from .haar import RngStream

EXIT_OK, EXIT_GATE, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _seed(args):
    if args.seed is None:
        args.seed = secrets.randbits(63)
        print(f"seed: {args.seed}", file=sys.stderr)
    return args.seed


def _emit(args, payload, rows=None):
    if args.format == "csv":
        if rows is None:
            raise UsageError("csv output is only available for table commands (exact, sweep-h, saddle-*)")
        text = io.dumps_csv(rows)
    else:
        text = io.dumps_json(payload)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _row(inputs, route, value=None, log_value=None, uncertainty=None, status="ok"):
    row = dict(inputs)
    row.update({"route": route, "value": value, "uncertainty": uncertainty, "status": status})
    lv = log_value.to_dict() if log_value is not None else {"log_magnitude": None, "phase_re": None, "phase_im": None}
    row.update({f"log_{k}" if not k.startswith("log") else k: v for k, v in lv.items()})
    return row


# ---------------------------------------------------------------------------


def cmd_moment(args):
    pattern = montecarlo.MonomialPattern.parse(args.pattern)
    N = args.n
    rep = suites.CompareReport(f"moment {pattern}", {"N": N, "pattern": str(pattern), "samples": args.samples})
    if not pattern.balanced:
        est = montecarlo.moment_monomial(pattern, N, args.samples, RngStream(0))
        rep.routes["mc"] = {"mean": 0.0, "std_error": 0.0, "exact": True, "n_samples": 0}
        rep.routes["pairing"] = 0.0
        rep.gate("unbalanced conjugation gives exact zero", est.exact and est.mean == 0)
        return rep
    seed = _seed(args)
    est = montecarlo.moment_monomial(pattern, N, args.samples, RngStream(seed), workers=args.workers)
    target = asymptotics.weingarten_leading(pattern, N)
    p = len(pattern.unconj)
    gap = abs(est.mean - target)
    bound = max(4 * est.std_error, args.tol if args.tol is not None else 5.0 / N ** (p + 1))
    rep.config["seed"] = seed
    rep.routes["mc"] = est.to_dict()
    rep.routes["pairing"] = target
    rep.gate("|MC - pairing| <= max(4 sigma, 5/N^(p+1))", gap <= bound, gap=gap, bound=bound)
    return rep


def cmd_exact(args):
    N, q, kind = args.n, args.q, args.integrand
    inputs = {"N": N, "q": q, "integrand": kind}
    rows = []
    if kind == "det-power":
        rows.append(_row(inputs, "closed-form", log_value=reduction.normalization_constant(N, q),
                         value=reduction.normalization_constant(N, q).value(), uncertainty=0.0))
        if q == 1:
            v = reduction.reduced_integral_q1(lambda u: 1.0, N, radial=True) * math.pi / (N - 1)
            rows.append(_row(inputs, "quadrature-q1", value=v, uncertainty=abs(v) * reduction.Q1_RTOL))
        elif q == 2:
            v = reduction.detpower_integral_q2(N)
            rows.append(_row(inputs, "quadrature-q2", value=v, uncertainty=abs(v) * reduction.Q2_RTOL))
    elif kind in ("exp-radial", "exp-linear"):
        if q != 1:
            raise UsageError(f"{kind} quadrature is implemented for q = 1 only")
        if kind == "exp-radial":
            beta = _need(args.beta, "--beta")
            inputs["beta"] = beta
            lv = reduction.reduced_log_integral_q1(lambda u: beta * u, N, radial=True, log_f=True)
            rows.append(_row(inputs, "quadrature-q1", value=lv.value(), log_value=lv,
                             uncertainty=lv.value() * reduction.Q1_RTOL))
            s = saddle.exp_linear_example(beta, N)
            rows.append(_row(inputs, "series", value=s, uncertainty=0.0))
        else:
            y = complex(io.parse_matrix_arg(_need(args.y, "--y"))[0, 0])
            inputs["y"] = y.real
            lv = reduction.reduced_log_integral_q1(lambda a: N * y.real * a.real, N, log_f=True)
            rows.append(_row(inputs, "quadrature-q1", value=lv.value(), log_value=lv,
                             uncertainty=lv.value() * reduction.Q1_RTOL))
    else:
        raise UsageError(f"unknown integrand {kind!r}")
    if args.samples:
        if kind == "det-power":
            raise UsageError("--samples applies to the exponential integrands; the weight integral has no MC route")
        seed = _seed(args)
        spec = {
            "exp-radial": lambda: montecarlo.IntegrandSpec.callback(
                lambda A: args.beta * np.abs(A[:, 0, 0]) ** 2, vectorized=True, log=True),
            "exp-linear": lambda: montecarlo.IntegrandSpec.exp_linear(io.parse_matrix_arg(args.y), N),
        }[kind]()
        est = montecarlo.integrate_single(spec, N, q, args.samples, RngStream(seed), shift="auto",
                                          workers=args.workers)
        rows.append(_row({**inputs, "seed": seed}, "monte-carlo", value=est.value, log_value=est.log_value,
                         uncertainty=est.scaled_std_error))
    return rows


def _need(v, flag):
    if v is None:
        raise UsageError(f"{flag} is required here")
    return v


def cmd_saddle_linear(args):
    Y = io.parse_matrix_arg(_need(args.y, "--y"))
    N = args.n
    rep = saddle.linear_saddle(Y, N)
    inputs = {"N": N, "q": Y.shape[0]}
    rows = [_row(inputs, "saddle", value=rep.log_asymptotic_value.value(), log_value=rep.log_asymptotic_value,
                 status=rep.status)]
    if Y.shape[0] == 1:
        y = Y[0, 0].real
        lv = reduction.reduced_log_integral_q1(lambda a: N * y * a.real, N, log_f=True)
        rows.append(_row(inputs, "quadrature-q1", value=lv.value(), log_value=lv,
                         uncertainty=lv.value() * reduction.Q1_RTOL))
    return {"report": rep.to_dict(), "rows": rows}, rows


def cmd_saddle_quartic(args):
    beta = _need(args.beta, "--beta")
    N, q = args.n, args.q
    rep = saddle.quartic_saddle(saddle.QuarticConfig(beta, q, N))
    inputs = {"N": N, "q": q, "beta": beta}
    lv = rep.log_asymptotic_value
    rows = [_row(inputs, "saddle", value=None if lv is None else lv.value(), log_value=lv, status=rep.status)]
    if q == 1:
        ql = reduction.quartic_double_q1(beta, N)
        rows.append(_row(inputs, "quadrature-q1", value=ql.value(), log_value=ql,
                         uncertainty=ql.value() * reduction.Q1_RTOL))
    return {"report": rep.to_dict(), "rows": rows}, rows


def cmd_sweep_h(args):
    q_min = args.q_min
    q_bar = args.q_bar
    q_max = args.q_max or (3 * q_bar if q_bar else 50 * q_min)
    grid = np.linspace(q_min, q_max, args.grid)
    if q_bar is not None:
        grid = np.union1d(grid, [q_bar])
    rows = []
    for q in grid:
        q = float(q)
        h = saddle.h_weighted(q, q_min, q_bar) if q_bar is not None else saddle.h_of_q(q, q_min)
        rows.append({"q": q, "h": h, "c": saddle.c_of_q(min(q, q_bar) if q_bar else q, q_min)})
    return rows


def cmd_compare(args):
    if args.suite not in suites.SUITES:
        raise UsageError(f"unknown suite {args.suite!r}; valid suites: {', '.join(suites.SUITES)}")
    return suites.run_suite(args.suite, args.seed, args.samples, args.workers)


# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv"), default=None)
    common.add_argument("--out", metavar="PATH")
    common.add_argument("--seed", type=int)
    common.add_argument("--samples", type=int)
    common.add_argument("--tol", type=float)
    common.add_argument("--workers", type=int, help="threads for Monte Carlo chunks (default: $HAARINT_WORKERS or 1)")

    ap = argparse.ArgumentParser(prog="haarint", description="Haar integrals of submatrix functionals on U(N)")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("moment", parents=[common], help="mixed moment of matrix entries, MC vs pairing sum")
    p.add_argument("--pattern", required=True, help='factors like "1:1 2:2 ~1:1 ~2:2" (~ conjugates)')
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("exact", parents=[common], help="exact reduction to the ball")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, default=1)
    p.add_argument("--integrand", choices=("det-power", "exp-radial", "exp-linear"), default="det-power")
    p.add_argument("--beta", type=float)
    p.add_argument("--y")

    p = sub.add_parser("saddle-linear", parents=[common], help="saddle point of exp(N Re Tr(AY))")
    p.add_argument("--y", required=True, help="scalar or matrix file")
    p.add_argument("--n", type=int, required=True)

    p = sub.add_parser("saddle-quartic", parents=[common], help="saddle point of exp(beta N T)")
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--q", type=int, default=1)

    p = sub.add_parser("sweep-h", parents=[common], help="tabulate the subsystem exponent h(q)")
    p.add_argument("--q-min", type=float, required=True)
    p.add_argument("--q-bar", type=float)
    p.add_argument("--q-max", type=float)
    p.add_argument("--grid", type=int, default=200)

    p = sub.add_parser("compare", parents=[common], help="run a named cross-validation suite")
    p.add_argument("--suite", required=True, help=f"one of: {', '.join(suites.SUITES)}")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.samples is not None and args.samples < 2:
        print("haarint: error: --samples must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "moment":
            args.samples = args.samples or montecarlo.DEFAULT_SINGLE_SAMPLES
            rep = cmd_moment(args)
            args.format = args.format or "json"
            _emit(args, rep.to_dict())
            return EXIT_OK if rep.passed else EXIT_GATE
        if args.command == "compare":
            rep = cmd_compare(args)
            args.format = args.format or "json"
            _emit(args, rep.to_dict())
            return EXIT_OK if rep.passed else EXIT_GATE
        if args.command == "exact":
            rows = cmd_exact(args)
            args.format = args.format or "json"
            _emit(args, {"rows": rows}, rows)
        elif args.command == "saddle-linear":
            payload, rows = cmd_saddle_linear(args)
            args.format = args.format or "json"
            _emit(args, payload, rows)
        elif args.command == "saddle-quartic":
            payload, rows = cmd_saddle_quartic(args)
            args.format = args.format or "json"
            _emit(args, payload, rows)
        elif args.command == "sweep-h":
            rows = cmd_sweep_h(args)
            args.format = args.format or "csv"
            _emit(args, {"rows": rows}, rows)
        return EXIT_OK
    except (UsageError, HaarintError, ValueError, OSError) as exc:
        print(f"haarint: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
