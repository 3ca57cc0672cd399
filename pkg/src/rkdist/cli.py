"""Command-line interface.

Exit codes: 0 success, 2 invalid input, 3 numerical failure, 4 a ``--check``
assertion failed.
"""

import argparse
import sys

from . import alignment, kernels
from .config import OptimizerConfig
from .errors import RKDistError
from .experiments import REGISTRY, run_experiments
from .io import ResultRow, load_pointset, load_targets, rows_to_csv, rows_to_json
from .mult_bm import PickInstance, min_multiplier_norm, mult_bm_bracket
from .rkhs_bm import rk_bm_distance
from .set_metrics import BaseMetric, Certificate, hausdorff, invariant_distances, symmetric

EXIT_OK, EXIT_CHECK = 0, 4
DIST_KINDS = ("hausdorff", "symmetric", "invariant-hausdorff", "invariant-symmetric", "all")


def _config(args):
    cfg = OptimizerConfig(seed=args.seed)
    if args.tol is not None:
        cfg = cfg.replace(tolerance=args.tol)
    if args.restarts is not None:
        cfg = cfg.replace(random_restarts=args.restarts)
    return cfg


def _cmd_dist(args, cfg):
    X, Y = load_pointset(args.X), load_pointset(args.Y)
    metric = BaseMetric(args.metric)
    row = ResultRow("dist", {"metric": metric.value})
    kinds = DIST_KINDS[:-1] if args.kind == "all" else (args.kind,)
    if "hausdorff" in kinds:
        row.add("hausdorff", hausdorff(X, Y, metric), Certificate.EXACT)
    if "symmetric" in kinds:
        row.add("symmetric", symmetric(X, Y, metric)[0], Certificate.EXACT)
    which = tuple(k.split("-", 1)[1] for k in kinds if k.startswith("invariant-"))
    if which:
        for key, rep in sorted(invariant_distances(X, Y, cfg, which=which).items()):
            row.add(f"invariant_{key}", rep.value, rep.certificate)
    return [row]


def _cmd_rkbm(args, cfg):
    rep = rk_bm_distance(load_pointset(args.X), load_pointset(args.Y), cfg)
    row = ResultRow("rkbm", {"sigma": rep.witness.sigma})
    row.add("delta_rk", rep.delta, rep.certificate)
    row.add("rho_rk", rep.rho, rep.certificate)
    return [row]


def _cmd_multbm(args, cfg):
    b = mult_bm_bracket(load_pointset(args.X), load_pointset(args.Y), cfg)
    row = ResultRow("multbm", {"sigma": b.lower_witness["sigma"]})
    # an exhaustive discrepancy bounds delta_M from below; a heuristic one is only an estimate of itself
    exhaustive = b.lower_certificate is Certificate.EXACT
    row.add("delta_m_lower", b.lower, Certificate.LOWER_BOUND if exhaustive else Certificate.UPPER_BOUND)
    row.add("delta_m_upper", b.upper, Certificate.UPPER_BOUND)
    row.add("delta_rk", b.upper_source.delta, b.upper_source.certificate)
    return [row]


def _cmd_pick(args, cfg):
    inst = PickInstance(load_pointset(args.nodes), load_targets(args.targets))
    row = ResultRow("pick", {"n": inst.nodes.n, "m": inst.targets.shape[1]})
    row.add("min_multiplier_norm", min_multiplier_norm(inst), Certificate.EXACT)
    return [row]


def _cmd_procrustes(args, cfg):
    A = alignment.configuration_matrix(load_pointset(args.X))
    B = alignment.configuration_matrix(load_pointset(args.Y))
    W, res = alignment.procrustes(A, B)
    row = ResultRow("procrustes", {"W": [[[float(c.real), float(c.imag)] for c in r] for r in W]})
    row.add("residual", res, Certificate.EXACT)
    row.add("singular_value_residual", alignment.singular_value_residual(A, B), Certificate.EXACT)
    return [row]


def _cmd_truncation(args, cfg):
    V = load_pointset(args.V)
    if args.r is None:
        N = kernels.truncation_order_self(V, args.eps)
        mode = "self"
    else:
        N = kernels.truncation_order_tail(V, args.r, args.eps)
        mode = "tail"
    row = ResultRow("truncation-order", {"mode": mode, "eps": args.eps, "r": args.r if args.r is not None else ""})
    row.add("N", N, Certificate.EXACT)
    return [row]


def _cmd_experiment(args, cfg):
    names = sorted(REGISTRY) if args.name == "all" else [args.name]
    out = run_experiments(names, cfg)
    return out.rows, out.checks


COMMANDS = {
    "dist": _cmd_dist,
    "rkbm": _cmd_rkbm,
    "multbm": _cmd_multbm,
    "pick": _cmd_pick,
    "procrustes": _cmd_procrustes,
    "truncation-order": _cmd_truncation,
    "experiment": _cmd_experiment,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--tol", type=float, default=None, help="optimizer early-exit tolerance")
    common.add_argument("--restarts", type=int, default=None, help="random restarts of the searches")
    common.add_argument("--check", action="store_true", help="exit 4 if any experiment assertion fails")
    common.add_argument("-o", "--output", default=None, help="write the report here instead of stdout")

    p = argparse.ArgumentParser(prog="rkdist", description="Distances between finite subsets of the unit ball.")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dist", parents=[common], help="Hausdorff / symmetric distances")
    d.add_argument("X")
    d.add_argument("Y")
    d.add_argument("--kind", choices=DIST_KINDS, default="all")
    d.add_argument("--metric", choices=[m.value for m in BaseMetric], default=BaseMetric.PSEUDOHYPERBOLIC.value)

    for name, helptext in (("rkbm", "reproducing-kernel Banach-Mazur distance"), ("multbm", "multiplier distance bracket"), ("procrustes", "unitary Procrustes alignment")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("X")
        s.add_argument("Y")

    pk = sub.add_parser("pick", parents=[common], help="minimal row-multiplier interpolation norm")
    pk.add_argument("nodes")
    pk.add_argument("targets", help='JSON {"m": m, "targets": [[[re, im], ...], ...]}')

    t = sub.add_parser("truncation-order", parents=[common], help="Schur power-series truncation order")
    t.add_argument("V")
    t.add_argument("--eps", type=float, required=True)
    t.add_argument("--r", type=float, default=None, help="radius for the tail criterion; omit for the self criterion")

    e = sub.add_parser("experiment", parents=[common], help="run a registered experiment")
    e.add_argument("name", choices=sorted(REGISTRY) + ["all"])
    return p


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _config(args)
        result = COMMANDS[args.command](args, cfg)
    except RKDistError as exc:
        print(f"rkdist: error: {exc}", file=sys.stderr)
        return exc.exit_code
    rows, checks = result if isinstance(result, tuple) else (result, [])
    _emit(rows_to_json(rows) if args.format == "json" else rows_to_csv(rows), args.output)
    if args.check:
        failed = [c for c in checks if not c.passed]
        for c in checks:
            print(f"{'PASS' if c.passed else 'FAIL'} {c.name}" + (f" ({c.detail})" if c.detail and not c.passed else ""), file=sys.stderr)
        if failed:
            return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
