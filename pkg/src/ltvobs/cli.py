"""Command-line entry point: ``ltvobs {run,oracle,figure,sweep}``."""

import argparse
import csv
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from ltvobs.errors import ConfigError, DivergenceError
from ltvobs.scenario.config import RunConfig, load_config_file
from ltvobs.scenario.csvio import write_csv
from ltvobs.scenario.figures import FIGURES, plot_trace_csv, render
from ltvobs.scenario.pipeline import oracle_simulate, run

log = logging.getLogger("ltvobs")


def _base_config(args):
    cfg = load_config_file(args.config) if args.config else RunConfig()
    if args.delay is not None:
        cfg = cfg.replace(d=args.delay)
    return cfg


def _outdir(args, cfg):
    out = args.out or cfg.out or "."
    os.makedirs(out, exist_ok=True)
    return out


def _csv_path(out, cfg, scenario=None):
    stem = cfg.replace(scenario=scenario).file_stem() if scenario else cfg.file_stem()
    return os.path.join(out, stem + ".csv")


def _run_one(cfg):
    return run(cfg).records


def _write_initial_error(records, path):
    n = len(records[0].x)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t"] + [f"ehat{i + 1}" for i in range(n)] + [f"eft{i + 1}" for i in range(n)])
        for r in records:
            e = r.e_hat if r.e_hat is not None else [float("nan")] * n
            f = r.e_ft if r.e_ft is not None else [float("nan")] * n
            w.writerow([f"{r.t:.12g}"] + [f"{v:.12g}" for v in (*e, *f)])


def cmd_run(args):
    cfg = _base_config(args)
    out = _outdir(args, cfg)
    records = run(cfg).records
    path = _csv_path(out, cfg)
    write_csv(records, path)
    print(path)
    if args.plot:
        print(plot_trace_csv(path, path[:-4] + ".png"))


def cmd_oracle(args):
    cfg = _base_config(args)
    out = _outdir(args, cfg)
    path = _csv_path(out, cfg, "oracle")
    write_csv(oracle_simulate(cfg), path)
    print(path)


def _run_many(cfgs, jobs):
    if jobs > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            return list(ex.map(_run_one, cfgs))
    return [_run_one(c) for c in cfgs]


def cmd_figure(args):
    if args.id not in FIGURES:
        raise SystemExit(f"unknown figure {args.id}; choose 1..{len(FIGURES)}")
    spec = FIGURES[args.id]
    base = _base_config(args)
    out = _outdir(args, base)
    pairs = spec.configs(base.replace(scenario=f"fig{args.id}"), d=args.delay)
    results = _run_many([c for _, c in pairs], args.jobs)
    runs = []
    for (label, cfg), records in zip(pairs, results):
        path = _csv_path(out, cfg)
        write_csv(records, path)
        print(path)
        if spec.kind == "initial_error":
            extra = path[:-4] + "_ehat.csv"
            _write_initial_error(records, extra)
            print(extra)
        runs.append((label, cfg, records))
    print(render(args.id, runs, os.path.join(out, f"fig{args.id}.png")))


def _parse_values(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad value list: {text!r}") from None


def cmd_sweep(args):
    base = _base_config(args)
    if not hasattr(base, args.gain) or not args.gain.startswith(("gamma", "lambda")):
        raise ConfigError(args.gain, "not a sweepable gain")
    out = _outdir(args, base)
    cfgs = [base.replace(**{args.gain: v}, scenario=f"sweep-{args.gain}") for v in args.values]
    for cfg, records in zip(cfgs, _run_many(cfgs, args.jobs)):
        path = _csv_path(out, cfg)
        write_csv(records, path)
        print(path)
        if args.plot:
            print(plot_trace_csv(path, path[:-4] + ".png"))


def build_parser():
    p = argparse.ArgumentParser(prog="ltvobs", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="TOML configuration file")
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--delay", type=float, help="measurement delay d, s")

    sp = sub.add_parser("run", help="full estimation pipeline")
    common(sp)
    sp.add_argument("--plot", action="store_true", help="also render a PNG from the CSV")
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("oracle", help="high-accuracy plant-only reference trajectory")
    common(sp)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("figure", help="reproduce one transient figure (1..12)")
    sp.add_argument("id", type=int)
    common(sp)
    sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    sp.set_defaults(func=cmd_figure)

    sp = sub.add_parser("sweep", help="run the pipeline over several values of one gain")
    common(sp)
    sp.add_argument("--gain", required=True, help="e.g. gamma1, gamma2, gamma3")
    sp.add_argument("--values", required=True, type=_parse_values, help="comma-separated list")
    sp.add_argument("--plot", action="store_true")
    sp.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    sp.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except DivergenceError as exc:
        print(f"error: divergence in {exc.quantity} at t={exc.t:.6g} s", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"error: configuration: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
