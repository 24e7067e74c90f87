"""Command-line entry point ``tailcontagion``.

Every command writes its artifacts to disk and prints one JSON line listing
the files written.  Output goes to ``--out``/``--out-dir`` when given, else to
``$TAILCONTAGION_OUTDIR``, else to the current directory.

Exit codes:
  0  success
  1  other package error
  2  usage error (bad or missing flags)
  3  parameter outside its domain
  4  insufficient or degenerate data
  5  quantity not supported for this model
  6  file could not be read or written

On failure a JSON error record ``{"error", "message", "exit_code"}`` is
written to stderr.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import data as data_mod
from . import diagnostics, estimators, experiments, tail_index
from .errors import ParameterError, TailContagionError
from .io import (
    provenance,
    read_sample_csv,
    with_header,
    write_json,
    write_sample_csv,
    write_text,
)
from .models import aggregate_system, model_from_params

OUTDIR_ENV = "TAILCONTAGION_OUTDIR"
EXIT_IO = 6

_MODEL_FLAGS = ("alpha", "rho", "gamma1", "gamma2", "alpha0", "gamma", "q")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("UsageError", message, 2)
        self.print_usage(sys.stderr)
        raise SystemExit(2)


def _emit_error(kind, message, code):
    sys.stderr.write(json.dumps({"error": kind, "message": message, "exit_code": code}) + "\n")


def _outdir(args) -> Path:
    d = getattr(args, "out_dir", None) or os.environ.get(OUTDIR_ENV) or "."
    return Path(d)


def _out_path(args, default_name: str) -> Path:
    if getattr(args, "out", None):
        return Path(args.out)
    return _outdir(args) / default_name


def _flags(args) -> dict:
    return {k: v for k, v in vars(args).items() if k not in ("func",)}


def _report(paths, **extra):
    print(json.dumps({"written": [str(p) for p in paths], **extra}))


def _model(args):
    params = {k: getattr(args, k) for k in _MODEL_FLAGS if getattr(args, k, None) is not None}
    if getattr(args, "variant", None):
        params["variant"] = args.variant
    return model_from_params(args.model, **params)


# -- commands -----------------------------------------------------------------

def cmd_simulate(args):
    spec = _model(args)
    sample = spec.sample(args.n, args.seed, args.stream)
    if args.aggregate:
        sample = aggregate_system(sample, args.aggregate)
    path = _out_path(args, f"sample_{spec.key}_n{args.n}_seed{args.seed}.csv")
    write_sample_csv(sample, path, provenance("simulate", _flags(args), args.seed))
    _report([path], n=sample.n)


def _column(sample, which):
    if which == "z1":
        return sample.z1
    if which == "z2":
        return sample.z2
    return tail_index.min_transform(sample)


def cmd_tail_index(args):
    sample = read_sample_csv(args.input)
    x = _column(sample, args.column)
    prov = provenance("tail-index", _flags(args))
    if args.method == "hill-plot":
        k_min = args.k_min if args.k_min is not None else 2
        k_max = args.k_max if args.k_max is not None else min(x.size - 1, max(k_min, x.size // 2))
        rows = tail_index.hill_plot(x, k_min, k_max)
        path = _out_path(args, f"hill_plot_{args.column}.csv")
        write_text(with_header(tail_index.hill_plot_csv(rows), prov), path)
        _report([path], rows=len(rows))
        return
    k = args.k if args.k is not None else tail_index.default_k(x.size)
    fit = tail_index.hill if args.method == "hill" else tail_index.lmoment_tail_index
    est = fit(x, k)
    path = _out_path(args, f"tail_index_{args.column}_{args.method}.json")
    write_json({"column": args.column, **est.to_dict()}, path, prov)
    _report([path], index=est.index)


def cmd_estimate(args):
    sample = read_sample_csv(args.input)
    method = "empirical" if args.empirical else ("evt_ai" if args.assume == "ai" else "evt_dependent")
    est = estimators.estimate(sample, args.measure, method, p=args.p, k=args.k, k0=args.k0,
                              k1=args.k1, k2=args.k2, index_method=args.index_method)
    path = _out_path(args, f"estimate_{args.measure.lower()}_{method}.json")
    write_json(est.to_dict(), path, provenance("estimate", _flags(args)))
    _report([path], value=est.value, method=est.method)


def cmd_diagnose(args):
    sample = read_sample_csv(args.input)
    hist = diagnostics.angular_histogram(sample, args.threshold_fraction, args.bins)
    verdict = diagnostics.ai_verdict(hist)
    prov = provenance("diagnose", _flags(args))
    if args.format == "csv":
        path = _out_path(args, "angular_histogram.csv")
        write_text(with_header(hist.to_csv(), prov), path)
    else:
        path = _out_path(args, "angular_histogram.json")
        write_json({**hist.to_dict(), "verdict": verdict}, path, prov)
    _report([path], verdict=verdict)


def cmd_experiment(args):
    plan = experiments.parse_plan(Path(args.plan).read_text())
    summary = experiments.run_experiment(plan, workers=args.workers)
    prov = provenance("experiment", _flags(args), plan.base_seed)
    paths = experiments.write_summary(summary, _outdir(args), prov=prov)
    _report(paths, truth_source=summary.truth_source)


def cmd_reproduce(args):
    prov = provenance("reproduce-figures", _flags(args), args.seed)
    out = _outdir(args)
    summaries = experiments.reproduce_figures(out, reps=args.reps, base_seed=args.seed,
                                                    workers=args.workers, prov=prov)
    paths = []
    for s in summaries:
        paths += [out / f"{s.plan.name}.csv", out / f"{s.plan.name}.json"]
    _report(paths, summaries=len(summaries))


def cmd_ingest(args):
    out = _outdir(args)
    written = []
    if args.synthetic:
        pa, pb = data_mod.synthetic_price_pair(seed=args.seed)
        written.append(write_text(data_mod.series_to_csv(pa), out / "synthetic_a.csv"))
        written.append(write_text(data_mod.series_to_csv(pb), out / "synthetic_b.csv"))
        ra, rb = data_mod.returns(pa, args.kind), data_mod.returns(pb, args.kind)
    else:
        if not (args.a and args.b):
            raise ParameterError("ingest needs --a and --b, or --synthetic")
        ra, rb = data_mod.load_returns(args.a, args.kind), data_mod.load_returns(args.b, args.kind)
    sample = data_mod.joint_negative_pairs(ra, rb)
    path = _out_path(args, "joint_losses.csv")
    written.append(write_sample_csv(sample, path, provenance("ingest", _flags(args), args.seed)))
    _report(written, pairs=sample.n)


def cmd_analyze(args):
    sample = read_sample_csv(args.input)
    cfg = data_mod.AnalysisConfig(k=args.k, p_grid=tuple(args.p_grid) if args.p_grid else None,
                                  hist_fraction=args.hist_fraction, bins=args.bins,
                                  index_method=args.index_method)
    report = data_mod.analyze_pair(sample, cfg)
    prov = provenance("analyze", _flags(args))
    out = _outdir(args)
    stem = args.stem
    p1 = write_json(report.to_dict(), out / f"{stem}_report.json", prov)
    p2 = write_text(with_header(report.curve_csv(), prov), out / f"{stem}_curve.csv")
    _report([p1, p2], verdict=report.verdict)


# -- parser -------------------------------------------------------------------

def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


def _nonneg_int(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a nonnegative integer, got {text}")
    return v


def _level(text):
    v = experiments._parse_level(text)
    if not (0.0 < v < 1.0):
        raise argparse.ArgumentTypeError(f"level must lie in (0, 1), got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    top = _Parser(prog="tailcontagion", description=__doc__,
                  formatter_class=argparse.RawDescriptionHelpFormatter)
    from . import __version__
    top.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = top.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="draw a seeded sample from a model and write z1,z2 CSV")
    p.add_argument("--model", required=True, help="gauss, mo, bernoulli or modelc")
    for flag in _MODEL_FLAGS:
        p.add_argument(f"--{flag}", type=float)
    p.add_argument("--variant", choices=("plain", "sum", "min", "max"))
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=_nonneg_int, required=True)
    p.add_argument("--stream", type=_nonneg_int, default=0)
    p.add_argument("--aggregate", choices=("sum", "min", "max"),
                   help="replace z2 by an aggregate of both coordinates")
    p.add_argument("--out")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tail-index", help="Hill, L-moment or Hill-plot estimates for one column")
    p.add_argument("--input", required=True)
    p.add_argument("--column", choices=("z1", "z2", "min"), default="z2")
    p.add_argument("--method", choices=("hill", "lmoment", "hill-plot"), default="hill")
    p.add_argument("--k", type=_positive_int)
    p.add_argument("--k-min", type=_positive_int)
    p.add_argument("--k-max", type=_positive_int)
    p.add_argument("--out")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_tail_index)

    p = sub.add_parser("estimate", help="MME or MES at level p")
    p.add_argument("--input", required=True)
    p.add_argument("--measure", type=str.upper, choices=("MME", "MES"), required=True)
    p.add_argument("--p", type=_level)
    p.add_argument("--k", type=_positive_int)
    p.add_argument("--k0", type=_positive_int)
    p.add_argument("--k1", type=_positive_int)
    p.add_argument("--k2", type=_positive_int)
    p.add_argument("--assume", choices=("ai", "dependent"), default="ai",
                   help="extrapolate under asymptotic independence or tail dependence")
    p.add_argument("--empirical", action="store_true", help="empirical estimate at p = k/n")
    p.add_argument("--index-method", choices=("hill", "lmoment"), default="hill")
    p.add_argument("--out")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("diagnose", help="angular histogram and tail-independence verdict")
    p.add_argument("--input", required=True)
    p.add_argument("--threshold-fraction", type=float, default=0.1)
    p.add_argument("--bins", type=int, default=20)
    p.add_argument("--format", choices=("csv", "json"), default="json")
    p.add_argument("--out")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("experiment", help="run a replication plan file")
    p.add_argument("--plan", required=True)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("reproduce-figures", help="run the seven canned boxplot studies")
    p.add_argument("--reps", type=_positive_int, default=500)
    p.add_argument("--seed", type=_nonneg_int, default=2024)
    p.add_argument("--workers", type=_positive_int, default=1)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_reproduce)

    p = sub.add_parser("ingest", help="joint-loss pairs from two return or price CSVs")
    p.add_argument("--a")
    p.add_argument("--b")
    p.add_argument("--kind", choices=data_mod.RETURN_KINDS, default="simple")
    p.add_argument("--synthetic", action="store_true", help="use the built-in synthetic price pair")
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--out")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("analyze", help="tail indices, verdict and MME/MES curves for a pair")
    p.add_argument("--input", required=True)
    p.add_argument("--k", type=_positive_int, default=50)
    p.add_argument("--p-grid", type=_level, nargs="+")
    p.add_argument("--hist-fraction", type=float)
    p.add_argument("--bins", type=int, default=10)
    p.add_argument("--index-method", choices=("hill", "lmoment"), default="hill")
    p.add_argument("--stem", default="analysis")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_analyze)
    return top


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except TailContagionError as exc:
        _emit_error(type(exc).__name__, str(exc), exc.exit_code)
        return exc.exit_code
    except OSError as exc:
        _emit_error(type(exc).__name__, str(exc), EXIT_IO)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
