"""Command line entry point: ``olgmean {fetch,run,compare,regret,plot}``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from ..dataio import NORMALIZE_MODES, fetch_dataset, load_manifest, open_dataset, permute
from ..errors import OlgmeanError, UnknownDataset
from .experiment import ALGORITHMS, ExperimentConfig, run_experiment
from .regret import regret_check
from .report import TRACE_METRICS, emit_csv, mean_curves, read_trace
from .svgchart import emit_svg_chart

logger = logging.getLogger("olgmean")


def _param(text: str):
    key, sep, value = text.partition("=")
    if not sep or not key:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {text!r}")
    try:
        return key, float(value)
    except ValueError:
        return key, value


def _seed(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 1 << 64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="olgmean", description="Online G-mean learning benchmarks")
    p.add_argument("--manifest", help="dataset manifest JSON (default: bundled)")
    p.add_argument("--cache-dir", help="dataset cache directory (default: $OLGMEAN_CACHE or ~/.cache/olgmean)")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fetch", help="download a dataset into the cache")
    f.add_argument("dataset")

    r = sub.add_parser("run", help="run one algorithm on one dataset over several permutations")
    r.add_argument("--algo", required=True, choices=ALGORITHMS)
    r.add_argument("--dataset", required=True)
    r.add_argument("--tau", type=float, default=0.2)
    r.add_argument("--runs", type=int, default=20)
    r.add_argument("--seed", type=_seed, default=0)
    r.add_argument("--normalize", choices=NORMALIZE_MODES, default="none")
    r.add_argument("--trace-every", type=int)
    r.add_argument("--n-p", type=float, default=0.5)
    r.add_argument("--n-n", type=float, default=0.5)
    r.add_argument("--param", type=_param, action="append", default=[],
                   help="algorithm extra, e.g. C=1 or schedule=inv-sqrt")
    r.add_argument("--no-timing", action="store_true", help="record elapsed times as 0")
    r.add_argument("--out", required=True)

    c = sub.add_parser("compare", help="run a JSON list of experiment configs")
    c.add_argument("--config", required=True)
    c.add_argument("--no-timing", action="store_true")
    c.add_argument("--out", required=True)

    g = sub.add_parser("regret", help="empirical relative loss bound check")
    g.add_argument("--dataset", required=True)
    g.add_argument("--passes", type=int, default=5)
    g.add_argument("--seed", type=_seed, default=0)
    g.add_argument("--normalize", choices=NORMALIZE_MODES, default="l2-cap")
    g.add_argument("--out", required=True)

    pl = sub.add_parser("plot", help="SVG chart of a trace metric, averaged over runs")
    pl.add_argument("--trace", required=True)
    pl.add_argument("--metric", required=True, choices=TRACE_METRICS)
    pl.add_argument("--dataset", help="only plot this dataset")
    pl.add_argument("--out", required=True)
    return p


def _print_summary(summaries) -> None:
    print(f"{'algo':<11}{'dataset':<11}{'runs':>5}  {'mistake rate':>18}  {'updates':>20}  {'sum':>17}")
    for s in summaries:
        print(f"{s.algo:<11}{s.dataset:<11}{s.runs:>5}  "
              f"{s.mistake_rate[0]:.4f} +- {s.mistake_rate[1]:.4f}  "
              f"{s.updates[0]:>9.2f} +- {s.updates[1]:<7.2f}  "
              f"{s.sum[0]:.4f} +- {s.sum[1]:.4f}")


def cmd_fetch(args, manifest):
    try:
        spec = manifest[args.dataset]
    except KeyError:
        raise UnknownDataset(f"dataset {args.dataset!r} not in manifest") from None
    path = fetch_dataset(spec.name, spec.urls, args.cache_dir, spec.checksum)
    ds = open_dataset(args.dataset, manifest, args.cache_dir)
    print(path)
    print(json.dumps(ds.summary()))


def _run_configs(configs, args, manifest):
    traces, summaries = [], []
    loaded = {}
    for cfg in configs:
        if cfg.dataset not in loaded:
            loaded[cfg.dataset] = open_dataset(cfg.dataset, manifest, args.cache_dir)
        res = run_experiment(cfg, dataset=loaded[cfg.dataset], timing=not args.no_timing)
        traces.extend(res.traces)
        summaries.append(res.summary)
    trace_path, summary_path = emit_csv(traces, summaries, args.out)
    _print_summary(sorted(summaries, key=lambda s: (s.algo, s.dataset)))
    print(f"wrote {trace_path} and {summary_path}")


def cmd_run(args, manifest):
    cfg = ExperimentConfig(
        dataset=args.dataset, algo=args.algo, tau=args.tau, runs=args.runs, seed=args.seed,
        normalize=args.normalize, trace_every=args.trace_every, n_p=args.n_p, n_n=args.n_n,
        params=dict(args.param),
    )
    _run_configs([cfg], args, manifest)


def cmd_compare(args, manifest):
    raw = json.loads(Path(args.config).read_text())
    if not isinstance(raw, list):
        raise ValueError("config file must hold a JSON array of experiment records")
    _run_configs([ExperimentConfig.from_dict(d) for d in raw], args, manifest)


def cmd_regret(args, manifest):
    ds = open_dataset(args.dataset, manifest, args.cache_dir, args.normalize)
    report = regret_check(ds, permute(len(ds), args.seed), args.passes)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    data = {"dataset": args.dataset, "normalize": args.normalize, "seed": args.seed, **report.as_dict()}
    (out / "regret.json").write_text(json.dumps(data, indent=2) + "\n")
    print(f"T={report.T} online={report.online_loss:.4f} comparator={report.comparator_loss:.4f} "
          f"||u||={report.comparator_norm:.4f} bound={report.bound:.4f} satisfied={report.satisfied}")


def cmd_plot(args, manifest):
    rows = read_trace(args.trace)
    if args.dataset:
        rows = [r for r in rows if r["dataset"] == args.dataset]
    curves = mean_curves(rows, args.metric)
    series = [(f"{algo} / {ds}", pts) for (algo, ds), pts in curves.items()]
    path = emit_svg_chart(series, "round t", args.metric, args.out, title=f"online {args.metric}")
    print(path)


COMMANDS = {"fetch": cmd_fetch, "run": cmd_run, "compare": cmd_compare,
            "regret": cmd_regret, "plot": cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        manifest = load_manifest(args.manifest)
        COMMANDS[args.command](args, manifest)
    except (OlgmeanError, OSError, ValueError, KeyError) as exc:
        print(f"olgmean: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
