"""``noisylab`` command line: run, sweep, select-beta, verify."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, load_config, load_grid
from .harness import run_experiment, run_sweep, select_hyperparameter
from .verify import run_all


def _print_summary(rows) -> None:
    for r in rows:
        print(f"{r['method']:<12} eta={r['eta']:<5g} n={r['n_seeds']} "
              f"last {r['last_mean']:.2f}+-{r['last_std']:.2f}  best {r['best_mean']:.2f}+-{r['best_std']:.2f}")


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = args.output or cfg.output_dir
    records, rows = run_experiment(cfg, out)
    _print_summary(rows)
    print(f"wrote {out}")
    return 0 if all(r.ok for r in records) else 1


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    cells = load_grid(args.grid).cells(cfg)
    out = args.output or cfg.output_dir
    records, rows = run_sweep(cells, out)
    _print_summary(rows)
    print(f"wrote {out}")
    return 0 if all(r.ok for r in records) else 1


def cmd_select_beta(args) -> int:
    cfg = load_config(args.config)
    try:
        candidates = [float(v) for v in args.candidates.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"bad candidate list {args.candidates!r}")
    best, scores = select_hyperparameter(cfg, candidates)
    for beta, score in scores.items():
        print(f"beta={beta:g}  noisy-validation accuracy {score:.2f}")
    print(f"selected beta={best:g}")
    if not args.no_retrain:
        final = cfg.replace(smoothing="power", smoothing_param=best)
        out = args.output or final.output_dir
        _, rows = run_experiment(final, out)
        _print_summary(rows)
        print(f"wrote {out}")
    return 0


def cmd_verify(args) -> int:
    results = run_all()
    for r in results:
        print(r.line())
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} checks passed")
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="noisylab", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one configuration over its seeds")
    p.add_argument("--config", required=True)
    p.add_argument("--output", help="override output_dir")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run every cell of a grid file")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--output", help="override output_dir")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("select-beta", help="choose beta on a noisy validation split, then retrain")
    p.add_argument("--config", required=True)
    p.add_argument("--candidates", default="0.1,0.3,0.5,0.8,1.0")
    p.add_argument("--no-retrain", action="store_true")
    p.add_argument("--output", help="override output_dir")
    p.set_defaults(func=cmd_select_beta)

    p = sub.add_parser("verify", help="run the gradient, smoothing and noise self-checks")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, OSError) as exc:
        print(f"noisylab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
