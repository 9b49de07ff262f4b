"""Command line entry point: ``slamrank <subcommand> ...``.

Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O or
format error.
"""

import argparse
import sys

import numpy as np

from . import batch, data, oracle, online, zoo
from .errors import (
    DimensionError,
    DivergenceError,
    EmptyDatasetError,
    FormatError,
    InvalidCutoffError,
    InvalidGradeError,
    InvalidRelevanceError,
    ParameterError,
    ParseError,
    SizeError,
)
from .measures import as_measure
from .surrogate import slam_loss, weights_for

EXIT_OK, EXIT_USAGE, EXIT_VERIFY, EXIT_IO = 0, 1, 2, 3

_USAGE_ERRORS = (ParameterError, InvalidCutoffError, SizeError)
_IO_ERRORS = (
    OSError,
    ParseError,
    FormatError,
    EmptyDatasetError,
    DimensionError,
    InvalidGradeError,
    InvalidRelevanceError,
    UnicodeDecodeError,
)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _measure(text):
    try:
        return as_measure(text)
    except ParameterError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _lambda(text):
    if text == "auto":
        return text
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("expected 'auto' or a number") from None


def _int_list(text):
    try:
        return [int(t) for t in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _load(path):
    ds = data.parse_ranking_file(path)
    if len(ds) == 0:
        raise EmptyDatasetError(f"{path}: no queries")
    return ds


# ------------------------------------------------------------ subcommands

def cmd_train_online(args, out):
    ds = _load(args.data)
    measure = args.measure
    log = online.run(ds, measure, delta=args.delta)
    data.save_model(log.w, args.out, measure, args.delta)
    log.to_csv(args.log)
    if args.bound_comparator == "auto":
        u, label = log.w, "final w"
    else:
        u, label = data.load_vector(args.bound_comparator), args.bound_comparator
        if u.size != ds.d:
            raise DimensionError(f"comparator has d={u.size}, data has d={ds.d}")
    print(f"# slamrank train-online measure={measure.tag} rounds={len(ds)}", file=out)
    if measure.kind == "ndcg@k":
        short = sum(q.m < measure.k for q in ds)
        if short:
            print(f"note: k={measure.k} clamped to m on {short} queries with fewer documents", file=out)
    print(online.bound_report(log, ds, u, comparator=label, delta=args.delta).to_text(), file=out)
    return EXIT_OK


def cmd_train_batch(args, out):
    cfg = batch.BatchConfig(
        lam=args.lam, B=args.B, epochs=args.epochs, measure=args.measure,
        delta=args.delta, seed=args.seed,
    )
    ds = _load(args.data)
    test = _load(args.test) if args.test else None
    res = batch.fit(ds, cfg, test=test)
    data.save_model(res.w, args.out, cfg.measure, cfg.delta)
    print(f"# slamrank train-batch measure={cfg.measure.tag} seed={args.seed}", file=out)
    src = "auto" if cfg.lam == "auto" else "given"
    print(f"lambda = {res.lam!r} ({src})", file=out)
    print("epoch,objective", file=out)
    for e, val in enumerate(res.trace, start=1):
        print(f"{e},{val!r}", file=out)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("epoch,objective\n")
            for e, val in enumerate(res.trace, start=1):
                fh.write(f"{e},{val!r}\n")
    print(f"train {cfg.measure.tag} = {res.train.metric:.6f}", file=out)
    if res.test is not None:
        print(f"test {cfg.measure.tag} = {res.test.metric:.6f}", file=out)
    return EXIT_OK


def cmd_eval(args, out):
    model = data.load_model(args.model)
    ds = _load(args.data)
    if model.w.size != ds.d:
        raise DimensionError(f"model has d={model.w.size}, data has d={ds.d}")
    measure = args.measure or as_measure(model.measure)
    rows = []
    for num, q in enumerate(ds, start=1):
        measure.check(q.R)
        s = q.scores(model.w)
        surr = slam_loss(s, q.R, weights_for(measure, q.R), delta=model.delta)
        rows.append((q.qid or str(num), measure.value(s, q.R), surr))
    mean = float(np.mean([r[1] for r in rows]))
    print(f"# mean {measure.tag} = {mean!r} over {len(rows)} queries", file=out)
    if args.per_query:
        print("qid,metric,surrogate", file=out)
        for qid, val, surr in rows:
            print(f"{qid},{val!r},{surr!r}", file=out)
    return EXIT_OK


def cmd_verify(args, out):
    if args.trials < 1:
        raise ParameterError("--trials must be >= 1")
    print(f"# slamrank verify suite={args.suite} trials={args.trials} seed={args.seed}", file=out)
    reports = oracle.run_suite(args.suite, args.trials, args.seed, weight_scale=args.corrupt_weights)
    for rep in reports:
        print(rep.to_text(), file=out)
    bad = sum(r.violations for r in reports)
    print(f"total violations: {bad}", file=out)
    return EXIT_VERIFY if bad else EXIT_OK


def cmd_analyze(args, out):
    prof = zoo.lipschitz_profile(args.surrogate, args.m_grid, args.trials, args.seed)
    prof.to_csv(args.out)
    print(f"# slamrank analyze surrogate={prof.kind} trials={args.trials} seed={args.seed}", file=out)
    for rec in prof.records:
        print(f"m={rec.m} sup_l1={rec.sup_l1:.6g}", file=out)
    print(f"slope = {prof.exponent:.4f}", file=out)
    return EXIT_OK


def cmd_gen_data(args, out):
    spec = data.SyntheticSpec(
        n=args.n, m=args.m, d=args.d, gamma=args.gamma, grades=tuple(args.grades),
        noise=args.noise, seed=args.seed, r_x=args.r_x,
    )
    res = data.generate_synthetic(spec)
    data.write_ranking_file(res.dataset, args.out)
    sidecar = args.sidecar or f"{args.out}.sidecar"
    data.save_sidecar(sidecar, res.u_star, res.gamma_realized)
    print(f"# slamrank gen-data n={args.n} m={args.m} d={args.d} seed={args.seed}", file=out)
    print(f"gamma_realized = {res.gamma_realized!r}", file=out)
    print(f"wrote {args.out} and {sidecar}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------- parser

def build_parser():
    p = _Parser(prog="slamrank", description="Listwise large-margin ranking tools.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def measure_flag(sp, default="ndcg"):
        sp.add_argument("--measure", type=_measure, default=None if default is None else as_measure(default),
                        help="ndcg, map or ndcg@K")

    sp = sub.add_parser("train-online", help="perceptron-like online learner")
    sp.add_argument("--data", required=True)
    measure_flag(sp)
    sp.add_argument("--out", required=True, help="model file to write")
    sp.add_argument("--log", required=True, help="per-round CSV to write")
    sp.add_argument("--bound-comparator", default="auto",
                    help="'auto' (final w) or a model/sidecar file")
    sp.add_argument("--delta", type=float, default=1.0)
    sp.set_defaults(func=cmd_train_online)

    sp = sub.add_parser("train-batch", help="regularized batch training")
    sp.add_argument("--data", required=True)
    measure_flag(sp)
    sp.add_argument("--lambda", dest="lam", type=_lambda, default="auto")
    sp.add_argument("--B", type=float, default=1e3)
    sp.add_argument("--epochs", type=int, default=50)
    sp.add_argument("--out", required=True)
    sp.add_argument("--trace", help="optional CSV for the objective trace")
    sp.add_argument("--test", help="optional held-out ranking file")
    sp.add_argument("--delta", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_train_batch)

    sp = sub.add_parser("eval", help="evaluate a saved model")
    sp.add_argument("--data", required=True)
    sp.add_argument("--model", required=True)
    measure_flag(sp, default=None)
    sp.add_argument("--per-query", action="store_true")
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("verify", help="run the verification suites")
    sp.add_argument("--suite", choices=oracle.SUITES, default="all")
    sp.add_argument("--trials", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    # negative-control hook: scales every SLAM weight before checking
    sp.add_argument("--corrupt-weights", type=float, default=1.0, help=argparse.SUPPRESS)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("analyze", help="empirical l1-Lipschitz profile of a surrogate")
    sp.add_argument("--surrogate", required=True, choices=[k.value for k in zoo.SurrogateKind])
    sp.add_argument("--m-grid", type=_int_list, required=True)
    sp.add_argument("--trials", type=int, default=200)
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("gen-data", help="write a synthetic ranking file and sidecar")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--gamma", type=float, default=1.0)
    sp.add_argument("--grades", type=_int_list, default=[0, 1])
    sp.add_argument("--noise", type=float, default=0.0)
    sp.add_argument("--r-x", type=float, default=1.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True)
    sp.add_argument("--sidecar", help="defaults to <out>.sidecar")
    sp.set_defaults(func=cmd_gen_data)
    return p


def main(argv=None, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=err)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.func(args, out)
    except _USAGE_ERRORS as exc:
        print(f"slamrank: error: {exc}", file=err)
        return EXIT_USAGE
    except (*_IO_ERRORS, DivergenceError) as exc:
        print(f"slamrank: error: {exc}", file=err)
        return EXIT_IO


def run():
    sys.exit(main())
