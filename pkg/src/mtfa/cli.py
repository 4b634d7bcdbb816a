"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 solver hit its numerical limit,
3 infeasible (or not realizable / not recovered) while ``--require`` was given.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from . import conic, decompose, ellipsoid, elliptope, experiments
from . import io as mio
from .numerics import DEFAULT_RANK_TOL, NumericalFailure, Subspace

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_INFEASIBLE = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _mat(A):
    A = np.asarray(A, dtype=float)
    return A.tolist()


def _num(x):
    x = float(x)
    return x if np.isfinite(x) else None


def _partition(args, n):
    if getattr(args, "partition", None):
        P = mio.read_partition(args.partition)
        if P.n != n:
            raise ValueError(f"partition is for n={P.n}, input has n={n}")
        return P
    return None


def _emit(args, report: dict, text: str):
    if args.json:
        print(mio.dumps(report))
    else:
        print(text)


def _basis(path) -> Subspace:
    return Subspace.span(mio.read_matrix(path))


def cmd_decompose(args) -> int:
    X = mio.read_matrix(args.input, symmetric=True)
    P = _partition(args, X.shape[0])
    res = decompose.bmtfa(X, P) if P is not None else decompose.mtfa(X)
    rank = res.rank_L(args.rank_tol)
    report = {
        "status": res.status,
        "certified": res.certified,
        "trace_L": res.trace_L,
        "rank_L": rank,
        "D": _mat(res.D),
        "L": _mat(res.L),
        "Y": _mat(res.Y),
        "complementarity_residual": res.complementarity(),
        "margin": _num(res.margin),
        "boundary": res.boundary,
    }
    _emit(args, report, f"status {res.status}\ntrace_L = {res.trace_L:.6g}\nrank_L = {rank}\n"
                        f"complementarity = {res.complementarity():.3g}")
    if res.status != conic.OPTIMAL:
        return EXIT_NUMERIC
    return EXIT_OK


def _report_dict(rep: elliptope.RealizabilityReport) -> dict:
    out = {"verdict": rep.verdict, "method": rep.method, "margin": _num(rep.margin), "certificate": None}
    if isinstance(rep.certificate, elliptope.CorrelationCertificate):
        out["certificate"] = {"type": "correlation", "Y": _mat(rep.certificate.Y)}
    elif isinstance(rep.certificate, elliptope.FailureCertificate):
        out["certificate"] = {"type": "failure", "d": _mat(rep.certificate.d),
                              "B": _mat(rep.certificate.B)}
    return out


def cmd_realizable(args) -> int:
    U = _basis(args.basis)
    P = _partition(args, U.n)
    rep = elliptope.realizability_certificate(U, P, method=args.method)
    lines = [f"verdict {rep.verdict} (method {rep.method}, margin {rep.margin:.3g})"]
    if isinstance(rep.certificate, elliptope.FailureCertificate):
        lines.append("d = " + np.array2string(rep.certificate.d, precision=6))
    _emit(args, _report_dict(rep), "\n".join(lines))
    if rep.verdict == elliptope.UNCERTAIN:
        return EXIT_NUMERIC
    if args.require and rep.verdict != elliptope.REALIZABLE:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_fit(args) -> int:
    if args.grid:
        xmin, xmax, ymin, ymax, step = args.grid
        w = csv.writer(sys.stdout, lineterminator="\n")
        w.writerow(["x", "y", "in_R", "in_Rprime", "fitted"])
        for x, y, inR, inRp, status in ellipsoid.region_grid(xmin, xmax, ymin, ymax, step):
            w.writerow([f"{x:.10g}", f"{y:.10g}", int(inR), int(inRp), int(status == ellipsoid.FITTED)])
        return EXIT_OK
    if not args.points:
        raise ValueError("fit-ellipsoid needs --points unless --grid is given")
    V = mio.read_matrix(args.points)
    P = _partition(args, V.shape[1])
    res = ellipsoid.fit_blocks(V, P) if P is not None else ellipsoid.fit(V)
    report = {"status": res.status, "phase1": _num(res.phase1), "solver_status": res.solver_status,
              "M": None if res.M is None else _mat(res.M),
              "d": None if res.d is None else _mat(res.d),
              "B": None if res.B is None else _mat(res.B)}
    text = f"status {res.status} (phase-one value {res.phase1:.3g})"
    _emit(args, report, text)
    if res.status == ellipsoid.UNCERTAIN:
        return EXIT_NUMERIC
    if args.require and res.status != ellipsoid.FITTED:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_coherence(args) -> int:
    U = _basis(args.basis)
    P = _partition(args, U.n)
    mu = elliptope.p_coherence(U, P) if P is not None else elliptope.coherence(U)
    _emit(args, {"coherence": mu, "dim": U.dim, "n": U.n}, f"{mu:.6f}")
    return EXIT_OK


def cmd_balance(args) -> int:
    U = _basis(args.basis)
    P = _partition(args, U.n)
    if P is not None:
        if U.dim != 1:
            raise ValueError("block balance is decided for one-dimensional subspaces only")
        holds = elliptope.is_p_balanced(U.basis[:, 0], P)
        report = {"balanced": holds, "index": None, "witness": None, "uncertain": False}
    else:
        res = elliptope.all_balanced(U)
        holds = res.holds
        report = {"balanced": res.holds, "index": None if res.index is None else res.index + 1,
                  "witness": None if res.witness is None else _mat(res.witness),
                  "uncertain": res.uncertain}
    _emit(args, report, "balanced" if holds else f"not balanced (index {report['index']})")
    if report["uncertain"]:
        return EXIT_NUMERIC
    if args.require and not holds:
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    r = args.r if args.r is not None else int(round((0.5 - args.epsilon) * args.n))
    cfg = experiments.ExperimentConfig(n=args.n, r=r, trials=args.trials, seed=args.seed,
                                       epsilon=args.epsilon, verify_sdp=args.verify_sdp,
                                       sdp_cap=args.sdp_cap)
    rep = experiments.montecarlo_coherence(cfg)
    d = rep.as_dict()
    if args.json:
        d.pop("wall_time")  # keeps output a pure function of the seed
    bound = "n/a" if rep.analytic_lower_bound is None else f"{rep.analytic_lower_bound:.4f}"
    text = (f"{rep.count_mu_below_half}/{rep.trials} trials with coherence < 1/2 "
            f"(fraction {rep.observed_fraction:.4f}, analytic bound {bound})")
    _emit(args, d, text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mtfa", description="Diagonal plus low-rank decomposition, elliptope faces "
                                         "and ellipsoid fitting.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, partition=True):
        sp.add_argument("--json", action="store_true", help="machine readable report")
        sp.add_argument("--seed", type=int, default=0)
        if partition:
            sp.add_argument("--partition", help="partition JSON (1-based indices)")
        return sp

    sp = common(sub.add_parser("decompose", help="MTFA / BMTFA of a symmetric matrix"))
    sp.add_argument("--input", required=True)
    sp.add_argument("--rank-tol", type=float, default=DEFAULT_RANK_TOL)
    sp.set_defaults(func=cmd_decompose)

    sp = common(sub.add_parser("realizable", help="realizability of a subspace"))
    sp.add_argument("--basis", required=True, help="n x r CSV, columns span U")
    sp.add_argument("--method", choices=[elliptope.CONSTRUCTIVE, elliptope.SDP, elliptope.BALANCE])
    sp.add_argument("--require", action="store_true", help="exit 3 unless realizable")
    sp.set_defaults(func=cmd_realizable)

    sp = common(sub.add_parser("fit-ellipsoid", help="centered ellipsoid through points"))
    sp.add_argument("--points", help="k x n CSV, columns are points")
    sp.add_argument("--grid", nargs=5, type=float, metavar=("XMIN", "XMAX", "YMIN", "YMAX", "STEP"))
    sp.add_argument("--require", action="store_true", help="exit 3 unless a fit exists")
    sp.set_defaults(func=cmd_fit)

    sp = common(sub.add_parser("coherence", help="coherence (or block coherence) of a subspace"))
    sp.add_argument("--basis", required=True)
    sp.set_defaults(func=cmd_coherence)

    sp = common(sub.add_parser("balance", help="are all vectors of a subspace balanced"))
    sp.add_argument("--basis", required=True)
    sp.add_argument("--require", action="store_true")
    sp.set_defaults(func=cmd_balance)

    sp = common(sub.add_parser("montecarlo", help="coherence of random subspaces"), partition=False)
    sp.add_argument("--n", type=int, default=200)
    sp.add_argument("--r", type=int)
    sp.add_argument("--epsilon", type=float, default=0.25)
    sp.add_argument("--trials", type=int, default=500)
    sp.add_argument("--verify-sdp", action="store_true")
    sp.add_argument("--sdp-cap", type=int, default=20)
    sp.set_defaults(func=cmd_montecarlo)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except NumericalFailure as exc:
        print(f"mtfa: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, OSError) as exc:
        print(f"mtfa: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
