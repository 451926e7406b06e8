"""Command line interface: ``skewkrylov {solve,verify,generate,compare}``.

Exit codes: 0 success, 2 solve did not converge (or the requested Galerkin
iterate does not exist), 3 a verification check failed, 64 usage error,
65 malformed or unsuitable input data, 66 input file missing or unreadable,
73 output file cannot be written.

``SKEWKRYLOV_PRECISION`` overrides the number of significant digits used for
CSV history output (default 17).
"""
import argparse
import csv
import json
import logging
import os
import sys

import numpy as np

from .equivalence import (
    EQUALITY_TOL,
    IDENTITY_TOL,
    RunReport,
    check_lemma,
    check_theorem_equal,
    check_theorem_nobetter,
    compare_methods,
    describe_instance,
)
from .mmio import MatrixMarketError, read_matrix_market, read_vector, write_matrix_market
from .operators import (
    InstanceGenerationError,
    SingularMatrixError,
    SparseSkewMatrix,
    aslinearoperator,
    dense_solve,
    random_skew,
    verify_skew,
)
from .solvers import (
    MAX_ITER_FACTOR,
    SolverConfig,
    cgne_general,
    cgne_skew,
    cgnr_general,
    cgnr_skew,
    galerkin_reference,
    minres_reference,
    precondition,
)

EX_OK, EX_NOT_CONVERGED, EX_CHECK_FAILED = 0, 2, 3
EX_USAGE, EX_DATAERR, EX_NOINPUT, EX_CANTCREAT = 64, 65, 66, 73
SKEW_GATE_TOL = 1e-12
PRECISION_ENV = "SKEWKRYLOV_PRECISION"
CSV_COLUMNS = ("method", "q", "res_norm", "err_norm", "alpha", "beta")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


class _CliFailure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _random_spec(text):
    try:
        n, density, seed = text.split(",")
        return int(n), float(density), int(seed)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n,density,seed, got {text!r}") from None


def build_parser():
    p = _Parser(prog="skewkrylov", description="Krylov solvers for skew-symmetric systems")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add_problem(sp):
        g = sp.add_mutually_exclusive_group(required=True)
        g.add_argument("--matrix", help="Matrix Market file")
        g.add_argument("--random", type=_random_spec, metavar="N,DENSITY,SEED",
                       help="generate a random skew instance")
        sp.add_argument("--rhs", default="ones", help="'ones', 'random:SEED' or a vector file (default: ones)")
        sp.add_argument("--out", help="JSON report path (default: stdout)")

    s = sub.add_parser("solve", help="run one solver")
    add_problem(s)
    s.add_argument("--method", required=True, choices=("cgne", "cgnr", "galerkin", "minres"))
    s.add_argument("--m", type=int, help="Krylov dimension for galerkin/minres")
    s.add_argument("--rtol", type=float, default=1e-10)
    s.add_argument("--max-iter", type=int)
    s.add_argument("--precond", default="none", help="'none', 'diag:SEED' or 'rownorm'")
    s.add_argument("--history", help="CSV iteration history path")

    v = sub.add_parser("verify", help="check the orthogonality lemma and both theorems")
    add_problem(v)
    v.add_argument("--qmax", type=int, default=5)
    v.add_argument("--tol", type=float, default=EQUALITY_TOL, help="tolerance for iterate equalities")
    v.add_argument("--identity-tol", type=float, default=IDENTITY_TOL,
                   help="tolerance for orthogonality and Pythagorean identities")
    v.add_argument("--m-values", default="3,4,7,8", help="Krylov dimensions for the Pythagorean check")
    v.add_argument("--trials", type=int, default=100)
    v.add_argument("--seed", type=int, default=0)

    g = sub.add_parser("generate", help="write a random skew instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--density", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)

    c = sub.add_parser("compare", help="tabulate CGNE, CGNR and the reference solvers")
    add_problem(c)
    c.add_argument("--rtol", type=float, default=1e-10)
    c.add_argument("--history", help="CSV iteration history path")
    return p


def _load_problem(args):
    meta = {}
    if getattr(args, "random", None):
        n, density, seed = args.random
        if n < 2 or n % 2:
            raise UsageError(f"n must be even and at least 2, got {n}")
        if not 0 < density <= 1:
            raise UsageError(f"density must lie in (0, 1], got {density}")
        matrix = random_skew(n, density, seed)
        meta.update(source="random", density=density, seed=seed)
    else:
        try:
            matrix = read_matrix_market(args.matrix)
        except OSError as exc:
            raise _CliFailure(EX_NOINPUT, f"cannot read {args.matrix}: {exc}") from exc
        meta.update(source=args.matrix)
    if isinstance(matrix, SparseSkewMatrix):
        op = matrix.to_operator()
        skew = verify_skew(op, tol=SKEW_GATE_TOL)
    else:
        if matrix.shape[0] != matrix.shape[1]:
            raise _CliFailure(EX_DATAERR, f"matrix is {matrix.shape[0]}x{matrix.shape[1]}, not square")
        op = aslinearoperator(matrix)
        skew = verify_skew(op, tol=SKEW_GATE_TOL)
        if skew.ok:
            op = op.as_skew()
    if op.is_skew and op.dim % 2:
        raise _CliFailure(EX_DATAERR, f"skew-symmetric matrix of odd order {op.dim} is singular")
    meta["skew_gate"] = {"passed": skew.ok, "max_quadratic": skew.max_quadratic, "max_transpose": skew.max_transpose}
    b = _load_rhs(args.rhs, op.dim)
    return op, b, meta


def _load_rhs(spec, n):
    if spec == "ones":
        return np.ones(n)
    if spec.startswith("random:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad rhs spec {spec!r}") from None
        return np.random.default_rng(seed).standard_normal(n)
    try:
        b = read_vector(spec)
    except OSError as exc:
        raise _CliFailure(EX_NOINPUT, f"cannot read {spec}: {exc}") from exc
    if b.shape != (n,):
        raise _CliFailure(EX_DATAERR, f"rhs has length {b.size}, matrix has order {n}")
    return b


def _preconditioner(spec, op):
    if spec == "none":
        return None
    if spec.startswith("diag:"):
        try:
            seed = int(spec.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad preconditioner spec {spec!r}") from None
        d = np.random.default_rng(seed).uniform(0.5, 2.0, op.dim)
    elif spec == "rownorm":
        d = np.linalg.norm(op.to_dense(), axis=1)
        if np.any(d == 0):
            raise _CliFailure(EX_DATAERR, "zero row; row-norm scaling undefined")
    else:
        raise UsageError(f"unknown preconditioner {spec!r}")
    return precondition(op, ml_solve=lambda v: v / d)


def _digits():
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return 17
    try:
        digits = int(raw)
    except ValueError:
        raise UsageError(f"{PRECISION_ENV} must be an integer, got {raw!r}") from None
    if not 1 <= digits <= 17:
        raise UsageError(f"{PRECISION_ENV} must lie in [1, 17]")
    return digits


def write_history_csv(path, rows_by_method):
    """Write iteration rows (dicts with the CSV columns) keyed by method."""
    fmt = f"%.{_digits()}g"
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_COLUMNS)
            for method, rows in rows_by_method.items():
                for row in rows:
                    w.writerow([method, row["q"]] + [fmt % row[k] for k in CSV_COLUMNS[2:]])
    except OSError as exc:
        raise _CliFailure(EX_CANTCREAT, f"cannot write {path}: {exc}") from exc


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [float(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    return obj


def _emit(doc, path):
    text = json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n"
    if not path:
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise _CliFailure(EX_CANTCREAT, f"cannot write {path}: {exc}") from exc


def _x_true(op, b):
    try:
        return dense_solve(op.to_dense(), b)
    except SingularMatrixError as exc:
        raise _CliFailure(EX_DATAERR, f"matrix is singular (condition estimate {exc.condition_estimate:.3g})") from exc


def cmd_solve(args):
    op, b, meta = _load_problem(args)
    x_true = _x_true(op, b)
    instance = describe_instance(op, b, **meta)
    config = {"method": args.method, "rtol": args.rtol, "max_iter": args.max_iter, "precond": args.precond, "m": args.m}
    doc = {"command": "solve", "instance": instance, "config": config}
    bnorm = np.linalg.norm(b)

    if args.method in ("galerkin", "minres"):
        if args.m is None or args.m < 1:
            raise UsageError("--m (a positive integer) is required for galerkin and minres")
        if args.m > op.dim:
            raise UsageError(f"--m must not exceed the matrix order {op.dim}")
        if args.precond != "none":
            raise UsageError("--precond applies to cgne and cgnr only")
        if args.method == "galerkin":
            g = galerkin_reference(op, b, args.m)
            x = g.x
            result = {"exists": g.exists, "sigma_min": g.sigma_min, "h_norm": g.h_norm}
        else:
            x = minres_reference(op, b, args.m)
            result = {"exists": True}
        if x is not None:
            result.update(x=x, true_res_norm=float(np.linalg.norm(b - op.apply(x))),
                          err_norm=float(np.linalg.norm(x - x_true)))
        doc["result"] = result
        _emit(doc, args.out)
        return EX_OK if x is not None else EX_NOT_CONVERGED

    if args.max_iter is not None and not 1 <= args.max_iter <= MAX_ITER_FACTOR * op.dim:
        raise UsageError(f"--max-iter must lie in [1, {MAX_ITER_FACTOR * op.dim}]")
    if not 0 <= args.rtol < 1:
        raise UsageError("--rtol must lie in [0, 1)")
    cfg = SolverConfig(rtol=args.rtol, max_iter=args.max_iter)
    pre = _preconditioner(args.precond, op)
    if pre is None:
        if op.is_skew:
            solver = cgne_skew if args.method == "cgne" else cgnr_skew
        else:
            solver = cgne_general if args.method == "cgne" else cgnr_general
        res = solver(op, b, cfg, x_true=x_true)
        x = res.x
    else:
        solver = cgne_general if args.method == "cgne" else cgnr_general
        bt = pre.transform_rhs(b)
        res = solver(pre.operator, bt, cfg)
        x = pre.recover(res.x)
    true_res = float(np.linalg.norm(b - op.apply(x)))
    doc["result"] = {
        "solver": res.method,
        "x": x,
        "iterations": res.iterations,
        "termination": res.termination,
        "applies": res.applies,
        "true_res_norm": true_res,
        "rel_res_norm": true_res / bnorm,
        "err_norm": float(np.linalg.norm(x - x_true)),
    }
    doc["history"] = list(res.history.rows())
    if args.history:
        write_history_csv(args.history, {res.method: list(res.history.rows())})
    _emit(doc, args.out)
    return EX_OK if res.converged else EX_NOT_CONVERGED


def cmd_verify(args):
    op, b, meta = _load_problem(args)
    x_true = _x_true(op, b)
    try:
        m_values = [int(t) for t in args.m_values.split(",") if t]
    except ValueError:
        raise UsageError(f"bad --m-values {args.m_values!r}") from None
    if args.qmax < 1 or args.trials < 1 or any(m < 1 for m in m_values):
        raise UsageError("--qmax, --trials and --m-values must be positive")
    report = RunReport(describe_instance(op, b, **meta))
    gate = meta["skew_gate"]
    report.add("skew.verify", {}, max(gate["max_quadratic"], gate["max_transpose"]), SKEW_GATE_TOL)
    check_lemma(op, b, args.qmax, args.qmax, args.identity_tol, x_true=x_true, report=report)
    if op.is_skew:
        check_theorem_equal(op, b, args.qmax, args.tol, x_true=x_true, report=report)
        for m in m_values:
            check_theorem_nobetter(op, b, m, args.trials, args.seed, args.identity_tol, x_true=x_true, report=report)
    else:
        report.notes.append("matrix failed the skew gate; theorem checks skipped")
    doc = {"command": "verify",
           "config": {"qmax": args.qmax, "tol": args.tol, "identity_tol": args.identity_tol,
                      "m_values": m_values, "trials": args.trials, "seed": args.seed}}
    doc.update(report.to_dict())
    _emit(doc, args.out)
    return EX_OK if report.passed else EX_CHECK_FAILED


def cmd_generate(args):
    if args.n < 2 or args.n % 2:
        raise UsageError(f"--n must be even and at least 2, got {args.n}")
    if not 0 < args.density <= 1:
        raise UsageError(f"--density must lie in (0, 1], got {args.density}")
    S = random_skew(args.n, args.density, args.seed)
    try:
        write_matrix_market(S, args.out, comments=[f"random_skew n={args.n} density={args.density} seed={args.seed}"])
    except OSError as exc:
        raise _CliFailure(EX_CANTCREAT, f"cannot write {args.out}: {exc}") from exc
    return EX_OK


def cmd_compare(args):
    op, b, meta = _load_problem(args)
    if not op.is_skew:
        raise _CliFailure(EX_DATAERR, "compare needs a skew-symmetric matrix")
    x_true = _x_true(op, b)
    report = compare_methods(op, b, SolverConfig(rtol=args.rtol), x_true=x_true, meta=meta)
    doc = {"command": "compare", "config": {"rtol": args.rtol}}
    doc.update(report.to_dict())
    if args.history:
        write_history_csv(args.history, {m: report.tables[m] for m in ("cgne_skew", "cgnr_skew")})
    _emit(doc, args.out)
    return EX_OK


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "generate": cmd_generate, "compare": cmd_compare}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"skewkrylov: error: {exc}", file=sys.stderr)
        return EX_USAGE
    except MatrixMarketError as exc:
        print(f"skewkrylov: parse error: {exc}", file=sys.stderr)
        return EX_DATAERR
    except InstanceGenerationError as exc:
        print(f"skewkrylov: {exc}", file=sys.stderr)
        return EX_DATAERR
    except _CliFailure as exc:
        print(f"skewkrylov: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
