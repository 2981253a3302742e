"""Command-line front end.

    python3 -m mabif <subcommand> [options]

Subcommands: classify, eigen, solve, branch, count, stability, domain-bounds,
scan-mu1.  Exit status: 0 success, 1 solver failure, 2 usage error.

``--nu`` names the sign of u = -v, the solution of the Monge-Ampere problem:
``minus`` is the convex branch (u < 0, v > 0), ``plus`` the concave one.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from pathlib import Path

import numpy as np

from . import branch as br
from . import domain, eigen, radial, stability
from .nonlinearity import (
    InconclusiveClassification,
    UnknownFamilyError,
    check_subhomogeneity,
    classify,
    make_nonlinearity,
    parse_spec,
)

log = logging.getLogger("mabif")

SUBCOMMANDS = ("classify", "eigen", "solve", "branch", "count", "stability", "domain-bounds", "scan-mu1")
CONFIG_KEYS = {"M": int, "ppd": int, "a_min": float, "a_max": float, "tol": float, "threads": int, "k": int}


class UsageError(Exception):
    pass


class SolverFailure(Exception):
    def __init__(self, stage: str, detail: str):
        super().__init__(f"{stage}: {detail}")
        self.stage = stage


def _positive(kind):
    def conv(text):
        try:
            x = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"not a number: {text!r}")
        if not x > 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
        return x

    conv.__name__ = kind.__name__
    return conv


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--N", type=_positive(int), default=None, help="dimension (>= 1)")
    common.add_argument("--f", default=None, help="nonlinearity spec name:p1,p2 (default power:N)")
    common.add_argument("--nu", choices=("plus", "minus"), default="minus", help="sign of u = -v; minus = convex branch")
    common.add_argument("--M", type=_positive(int), default=radial.DEFAULT_M, help="grid intervals on [0, 1]")
    common.add_argument("--lambda", dest="lam", type=_positive(float), nargs="+", default=None)
    common.add_argument("--a-min", dest="a_min", type=_positive(float), default=1e-4)
    common.add_argument("--a-max", dest="a_max", type=_positive(float), default=1e4)
    common.add_argument("--ppd", type=_positive(int), default=200, help="amplitudes per decade")
    common.add_argument("--out", default=None, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "json"), default=None)
    common.add_argument("--threads", type=_positive(int), default=1)
    common.add_argument("--config", default=None, help="key=value overrides for " + ", ".join(CONFIG_KEYS))
    common.add_argument("--tol", type=_positive(float), default=1e-12, help="relative tolerance on lambda")
    common.add_argument("--k", type=_positive(int), default=1, help="linearized eigenvalues per point")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="mabif", description="Radial solutions, branches and spectra.")
    sub = p.add_subparsers(dest="cmd", metavar="|".join(SUBCOMMANDS))
    sub.required = True
    sub.add_parser("classify", parents=[common], help="f_0 / f_inf classification")
    e = sub.add_parser("eigen", parents=[common], help="first eigenvalue")
    e.add_argument("--method", choices=("shoot", "inverse", "both"), default="both")
    e.add_argument("--p", type=float, default=None, help="exponent for inverse iteration (default N+1)")
    sub.add_parser("solve", parents=[common], help="all one-sign solutions at --lambda")
    sub.add_parser("branch", parents=[common], help="trace lambda(a)")
    sub.add_parser("count", parents=[common], help="count solutions at --lambda")
    sub.add_parser("stability", parents=[common], help="branch with linearized spectrum")
    d = sub.add_parser("domain-bounds", parents=[common], help="lambda windows between two balls")
    d.add_argument("--r-in", dest="r_in", type=_positive(float), required=True)
    d.add_argument("--r-out", dest="r_out", type=_positive(float), required=True)
    s = sub.add_parser("scan-mu1", parents=[common], help="mu_1(p) scan")
    s.add_argument("--p-from", dest="p_from", type=float, default=2.0)
    s.add_argument("--p-to", dest="p_to", type=float, default=5.0)
    s.add_argument("--p-step", dest="p_step", type=_positive(float), default=0.1)
    return p


def _read_config(path: str) -> dict:
    out = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}")
    for n, line in enumerate(lines, 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, val = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{n}: expected key=value with key in {sorted(CONFIG_KEYS)}")
        try:
            out[key] = CONFIG_KEYS[key](val.strip())
        except ValueError:
            raise UsageError(f"{path}:{n}: bad value for {key}")
        if not out[key] > 0:
            raise UsageError(f"{path}:{n}: {key} must be positive")
    return out


def _parse(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        explicit = {a.split("=")[0] for a in argv if a.startswith("--")}
        for key, val in _read_config(args.config).items():
            flag = "--" + key.replace("_", "-")
            if flag not in explicit:
                setattr(args, key, val)
    if args.cmd != "scan-mu1" and args.N is None:
        raise UsageError("--N is required")
    if args.a_min >= args.a_max:
        raise UsageError("--a-min must be below --a-max")
    if args.cmd in ("solve", "count") and not args.lam:
        raise UsageError(f"{args.cmd} needs --lambda")
    return parser, args


def _nonlinearity(args):
    spec = args.f or f"power:{args.N}"
    try:
        return parse_spec(spec)
    except (UnknownFamilyError, ValueError) as exc:
        raise UsageError(f"--f {spec}: {exc}")


def _lib_nu(args) -> int:
    # u = -v: a convex (negative) u is a positive v
    return 1 if args.nu == "minus" else -1


def _emit(args, text: str):
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, default=_jsonable) + "\n"


def _jsonable(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(type(x))


def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    wr = csv.writer(buf, lineterminator="\n")
    wr.writerow(header)
    wr.writerows(rows)
    return buf.getvalue()


# -- subcommands -------------------------------------------------------------------


def cmd_classify(args):
    f = _nonlinearity(args)
    try:
        cls = classify(f, args.N)
    except InconclusiveClassification as exc:
        raise SolverFailure("classify", str(exc))
    sub = check_subhomogeneity(f, args.N)
    d = {"f": f.spec, "N": args.N, **cls.to_dict(), "label": cls.label(), "subhomogeneous": sub.holds}
    if args.format == "csv":
        return _csv(["f", "N", "f0", "finf", "subhomogeneous"], [[f.spec, args.N, str(cls.f0), str(cls.finf), sub.holds]])
    return _dump(d)


def cmd_eigen(args):
    N = args.N
    out = {"N": N}
    rows = []
    if args.method in ("shoot", "both"):
        try:
            r = eigen.lambda1_shoot(N, tol=args.tol, M=args.M)
        except (radial.BracketError, RuntimeError) as exc:
            raise SolverFailure("eigen/shoot", f"N={N}: {exc}")
        out["shoot"] = {"lambda1": r.value, "residual": r.residual}
        rows.append(["shoot", N + 1, repr(r.value), f"{r.residual:.3e}"])
    if args.method in ("inverse", "both"):
        p = args.p if args.p is not None else N + 1
        try:
            r = eigen.mu1_inverse_iteration(p, M=args.M)
        except eigen.EigenStallError as exc:
            raise SolverFailure("eigen/inverse", f"p={p}: {exc}")
        except ValueError as exc:
            raise UsageError(str(exc))
        out["inverse"] = {"p": p, "mu1": r.value, "eta1": r.eta, "residual": r.residual, "iterations": r.iterations}
        rows.append(["inverse", p, repr(r.value), f"{r.residual:.3e}"])
    if args.format == "csv":
        return _csv(["method", "p", "value", "residual"], rows)
    return _dump(out)


def cmd_solve(args):
    f = _nonlinearity(args)
    nu = _lib_nu(args)
    res, rows = [], []
    for lam in args.lam:
        try:
            sols = radial.solve_at_lambda(
                f, args.N, lam, nu, (args.a_min, args.a_max), args.ppd, args.M, workers=args.threads
            )
        except radial.ContinuumError as exc:
            res.append({"lambda": lam, "continuum": True, "solutions": []})
            rows.append([repr(lam), "continuum", "", ""])
            log.warning("%s", exc)
            continue
        res.append({
            "lambda": lam,
            "solutions": [{"amplitude": p.amplitude, "terminal": p.terminal} for p in sols],
        })
        rows.extend([repr(lam), i, repr(p.amplitude), repr(p.terminal)] for i, p in enumerate(sols))
        if args.out and args.format != "json":
            for i, p in enumerate(sols):
                p.to_csv(Path(args.out).with_name(f"{Path(args.out).stem}_lam{lam:g}_{i}.csv"))
    if args.format == "csv":
        return _csv(["lambda", "index", "a", "terminal"], rows)
    return _dump({"f": f.spec, "N": args.N, "nu": args.nu, "results": res})


def _trace(args, profiles=False):
    f = _nonlinearity(args)
    b = br.trace_branch(
        f, args.N, _lib_nu(args), args.a_min, args.a_max, args.ppd, args.M, keep_profiles=profiles, workers=args.threads
    )
    if len(b.points) < 3:
        raise SolverFailure("branch", f"only {len(b.points)} amplitudes in [{args.a_min:g}, {args.a_max:g}] have a lambda")
    return f, b


def _fill_slope(b):
    a, lam = b.amplitudes, b.lambdas
    for p, d in zip(b.points, np.gradient(lam, a)):
        p.dlambda_da = float(d)


def _endpoints(f, args, b):
    try:
        cls = classify(f, args.N)
        return br.branch_endpoints(b, cls, eigen.lambda1(args.N, args.M)), cls
    except (InconclusiveClassification, br.TailError) as exc:
        log.info("endpoints skipped: %s", exc)
        return None, None


def cmd_branch(args):
    f, b = _trace(args)
    _fill_slope(b)
    fold = br.detect_fold(b)
    if args.format == "json":
        counts = {repr(l): br.count_solutions(b, l) for l in (args.lam or [])}
        ep, _ = _endpoints(f, args, b)
        return br.summary_json(b, fold, counts, ep)
    return b.to_csv(fold)


def cmd_count(args):
    f, b = _trace(args)
    counts = {repr(l): br.count_solutions(b, l) for l in args.lam}
    if args.format == "csv":
        return _csv(["lambda", "count"], [[k, v] for k, v in counts.items()])
    return _dump({"f": f.spec, "N": args.N, "nu": args.nu, "counts": counts})


def cmd_stability(args):
    f, b = _trace(args, profiles=True)
    if not f.analytic:
        raise UsageError("stability needs an analytic derivative")
    rep = stability.branch_stability_sweep(b, k=args.k)
    fold = br.detect_fold(b) if not rep.degenerate else None
    if args.format == "json":
        return _dump({
            "f": f.spec,
            "N": args.N,
            "nu": args.nu,
            "subhomogeneous": rep.subhomogeneous,
            "degenerate": rep.degenerate,
            "all_stable": rep.all_stable,
            "monotone": rep.monotone,
            "implication_violations": rep.implication_violations,
            "mu1_crossings": rep.mu1_crossings,
            "fold_amplitude": rep.fold_amplitude,
            "fold_offset": rep.fold_offset,
            "max_identity_residual": float(np.max(rep.residuals)),
            "consistent": rep.consistent,
        })
    return b.to_csv(fold)


def cmd_domain_bounds(args):
    if args.r_in > args.r_out:
        raise UsageError(f"--r-in {args.r_in} exceeds --r-out {args.r_out}")
    args.nu = "minus"
    f, b = _trace(args)
    ep, cls = _endpoints(f, args, b)
    w = domain.unit_ball_windows(b, ep, br.interior_extrema(b), cls.label() if cls else "")
    try:
        rep = domain.bounds_from_radii(f, args.N, args.r_in, args.r_out, w)
    except ValueError as exc:
        raise UsageError(str(exc))
    if args.format == "csv":
        rows = [[kind, repr(lo), repr(hi)] for kind, ivs in (("exists", rep.exists_on), ("none", rep.none_on), ("unresolved", rep.unresolved)) for lo, hi in ivs]
        return _csv(["set", "lo", "hi"], rows)
    return rep.to_json()


def cmd_scan_mu1(args):
    try:
        scan = eigen.mu1_scan(args.p_from, args.p_to, args.p_step, M=args.M)
    except ValueError as exc:
        raise UsageError(str(exc))
    except eigen.EigenStallError as exc:
        raise SolverFailure("scan-mu1", str(exc))
    if args.format == "json":
        return _dump({
            "p": scan.p, "mu1": scan.mu1, "eta1": scan.eta1, "residual": scan.residual,
            "iterations": scan.iterations, "max_jump": scan.max_jump,
        })
    return scan.to_csv()


COMMANDS = {
    "classify": cmd_classify,
    "eigen": cmd_eigen,
    "solve": cmd_solve,
    "branch": cmd_branch,
    "count": cmd_count,
    "stability": cmd_stability,
    "domain-bounds": cmd_domain_bounds,
    "scan-mu1": cmd_scan_mu1,
}

DEFAULT_FORMAT = {"classify": "json", "eigen": "json", "solve": "json", "count": "json", "domain-bounds": "json"}


def run(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        parser, args = _parse(argv)
    except SystemExit as exc:          # argparse already printed the grammar
        return 0 if exc.code == 0 else 2
    except UsageError as exc:
        build_parser().print_usage(sys.stderr)
        print(f"mabif: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    if args.format is None:
        args.format = DEFAULT_FORMAT.get(args.cmd, "csv")
    try:
        _emit(args, COMMANDS[args.cmd](args))
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"mabif: error: {exc}", file=sys.stderr)
        return 2
    except SolverFailure as exc:
        print(f"mabif: solver failure in {exc}", file=sys.stderr)
        return 1
    except (radial.BracketError, radial.BlowUpError, eigen.EigenStallError, br.TailError) as exc:
        print(f"mabif: solver failure in {args.cmd} (N={args.N}, f={args.f}): {exc}", file=sys.stderr)
        return 1
    return 0


def main() -> None:
    sys.exit(run())
