"""``ddlab`` command line.

Exit status: 0 on success, 1 on usage errors (bad flags, unknown
subcommand, invalid config values), 2 on data or format errors (missing
dataset files, malformed or future-schema result files, failed downloads).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from ..data import fashion_mnist_paths
from ..emc import TrainingProcedure, estimate_emc
from ..exceptions import ContractError, FormatError, InputError
from ..sweep import SCHEMA_VERSION, _source, load, persist, run, write_csv
from .config import EXPERIMENTS, load_config
from .fetch import fetch_fashion_mnist
from .plots import render_heatmap, render_line
from .table import summary_table


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _common(p):
    p.add_argument("--config", help="run configuration file (INI sections)")
    p.add_argument("--seed", type=int, help="base seed (overrides sweep.base_seed)")
    p.add_argument("--out", help="output directory (overrides output.dir)")
    p.add_argument("--data-dir", help="Fashion-MNIST directory (default: $DDLAB_DATA_DIR or ~/.cache/ddlab)")
    p.add_argument("--dataset", choices=("synthetic", "fashion-mnist"))
    p.add_argument("--workers", type=int, help="worker processes for the sweep")
    p.add_argument("--replicates", type=int)
    p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override any config value; repeatable")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ddlab", description="Double-descent laboratory for random-feature least squares.")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("sweep", help="run a named experiment")
    p.add_argument("experiment", choices=EXPERIMENTS)
    _common(p)
    p.add_argument("--no-plots", action="store_true")

    p = sub.add_parser("emc", help="estimate effective model complexity for each model size")
    _common(p)
    p.add_argument("--n-features", type=int, action="append",
                   help="model size D; repeatable (default: sweep.model_dims)")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--trials", type=int)
    p.add_argument("--n-max", type=int)
    p.add_argument("--metric", choices=("classification", "mse-threshold"))
    p.add_argument("--noise", type=float, help="label noise probability")

    p = sub.add_parser("plot", help="render SVG figures from a result file")
    p.add_argument("result")
    p.add_argument("--out", help="output directory (default: next to the result)")
    p.add_argument("--metric", default="test_mse")
    p.add_argument("--x-axis")
    p.add_argument("--linear-x", action="store_true")

    p = sub.add_parser("fetch-data", help="download the Fashion-MNIST IDX files")
    p.add_argument("--data-dir")
    p.add_argument("--url", help="base URL (default: $DDLAB_FASHION_MNIST_URL or the public mirror)")
    return parser


def _overrides(args):
    ov = []
    if args.dataset:
        ov.append(f"experiment.dataset={args.dataset}")
    if args.seed is not None:
        ov.append(f"sweep.base_seed={args.seed}")
    if args.replicates is not None:
        ov.append(f"sweep.replicates={args.replicates}")
    if args.data_dir:
        ov.append(f"task.data_dir={args.data_dir}")
    if args.workers is not None:
        ov.append(f"output.workers={args.workers}")
    if args.out:
        ov.append(f"output.dir={args.out}")
    return ov + list(args.set)


def _resolve(args, experiment=None):
    ov = _overrides(args)
    if experiment:
        ov.append(f"experiment.kind={experiment}")
    rc = load_config(args.config, ov)
    # fail on missing dataset files before any compute
    if rc.sweep.task.kind == "fashion-mnist":
        fashion_mnist_paths(rc.sweep.task.data_dir)
    return rc


def _emc_estimates(rc, dims, epsilon, trials, n_max, metric, noise):
    spec = rc.sweep
    rows = []
    for D in dims:
        proc = TrainingProcedure(int(D), solver=spec.solver, variance=spec.variance, mode=spec.mode,
                                 metric=metric, noise_p=noise)
        est = estimate_emc(proc, _source(spec.task), epsilon, n_max or 4 * int(D), trials, spec.base_seed)
        rows.append({
            "n_features": int(D), "emc": est.n_star, "bracket": list(est.bracket),
            "censored": est.censored, "monotonicity_flag": est.monotonicity_flag,
            "curve": [list(c) for c in est.curve],
        })
    return rows


def _write_emc(rc, rows, metric, epsilon, out):
    out.mkdir(parents=True, exist_ok=True)
    doc = {"schema_version": SCHEMA_VERSION, "kind": "emc", "metric": metric, "epsilon": epsilon,
           "spec": rc.sweep.to_dict(), "estimates": rows}
    path = out / "emc.json"
    path.write_text(json.dumps(doc, indent=1, sort_keys=True) + "\n")
    print(f"{'D':>8}  {'emc':>8}  bracket")
    for r in rows:
        note = " (censored)" if r["censored"] else ""
        note += " (non-monotone)" if r["monotonicity_flag"] else ""
        print(f"{r['n_features']:>8}  {r['emc']:>8}  {r['bracket']}{note}")
    print(f"wrote {path}")


def cmd_sweep(args) -> int:
    rc = _resolve(args, args.experiment)
    out = Path(rc.out)
    if rc.experiment == "emc":
        spec = rc.sweep
        rows = _emc_estimates(rc, spec.model_dims, spec.emc_epsilon, spec.emc_trials,
                              spec.emc_n_max, rc.emc_metric, spec.noise_levels[0])
        _write_emc(rc, rows, rc.emc_metric, spec.emc_epsilon, out)
        return 0
    result = run(rc.experiment, rc.sweep, workers=rc.workers)
    out.mkdir(parents=True, exist_ok=True)
    stem = out / rc.experiment
    persist(result, stem.with_suffix(".json"))
    write_csv(result, stem.with_suffix(".csv"))
    written = [stem.with_suffix(".json"), stem.with_suffix(".csv")]
    if rc.plots and not args.no_plots:
        written += _render(result, stem)
    sys.stdout.write(summary_table(result))
    for path in written:
        print(f"wrote {path}")
    return 0


def _render(result, stem, metric="test_mse", x_axis=None, log_x=True):
    paths = []
    svg = render_line(result, x_axis=x_axis, style={"metric": metric, "log_x": log_x})
    path = Path(f"{stem}.svg")
    path.write_text(svg)
    paths.append(path)
    if result.kind == "grid":
        path = Path(f"{stem}_heatmap.svg")
        path.write_text(render_heatmap(result, metric))
        paths.append(path)
    return paths


def cmd_emc(args) -> int:
    rc = _resolve(args, "emc")
    spec = rc.sweep
    dims = args.n_features or spec.model_dims
    epsilon = spec.emc_epsilon if args.epsilon is None else args.epsilon
    trials = args.trials or spec.emc_trials
    metric = args.metric or rc.emc_metric
    noise = spec.noise_levels[0] if args.noise is None else args.noise
    rows = _emc_estimates(rc, dims, epsilon, trials, args.n_max or spec.emc_n_max, metric, noise)
    _write_emc(rc, rows, metric, epsilon, Path(rc.out))
    return 0


def cmd_plot(args) -> int:
    src = Path(args.result)
    if not src.exists():
        raise FileNotFoundError(f"result file not found: {src}")
    result = load(src)
    if not result.cells:
        raise FormatError(f"result file {src} holds no cells to plot")
    out = Path(args.out) if args.out else src.parent
    out.mkdir(parents=True, exist_ok=True)
    for path in _render(result, out / src.stem, args.metric, args.x_axis, not args.linear_x):
        print(f"wrote {path}")
    return 0


def cmd_fetch(args) -> int:
    from ..data import data_dir_from_env

    data_dir = args.data_dir or data_dir_from_env()
    fetch_fashion_mnist(data_dir, args.url)
    print(f"Fashion-MNIST files ready in {data_dir}")
    return 0


COMMANDS = {"sweep": cmd_sweep, "emc": cmd_emc, "plot": cmd_plot, "fetch-data": cmd_fetch}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except (InputError, ContractError) as exc:
        print(f"ddlab: error: {exc}", file=sys.stderr)
        return 1
    except (FormatError, OSError) as exc:
        # FileNotFoundError and urllib errors are OSErrors
        print(f"ddlab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
