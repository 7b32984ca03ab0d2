"""Command-line front end.

Usage: ``tensorconc <experiment> [flags]``. Writes
``<out>/<experiment>-<seed>.json|csv``, ``<out>/manifest.json`` and, with
``--plot``, ``<out>/<experiment>-<seed>.svg``.

Exit codes: 0 success, 1 a verdict is false, 2 configuration error,
3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path

from . import oracle_suite
from ._version import build_id, tool_version
from .errors import ConfigError, InsufficientDataError, NumericalError
from .montecarlo.config import FUNCTIONS, MATRICES, OPERATORS, SUBSPACES, Experiment, config_from_mapping
from .montecarlo.experiments import run_experiment
from .montecarlo.report import Record, TailReport, clean

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

log = logging.getLogger("tensorconc")

EXIT_OK, EXIT_VERDICT, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
ORACLE_SUITE = "oracle-suite"
VERDICT_COMMANDS = {Experiment.MULTIPLIERS.value, Experiment.MARTINGALE_CHECK.value, ORACLE_SUITE}

# flag dest -> config key
_CONFIG_KEYS = {
    "n": "n", "d": "d", "m": "m", "k": "k", "epsilon": "epsilon", "dist": "dist", "trials": "trials",
    "grid": "grid", "seed": "master_seed", "workers": "workers", "function": "function",
    "operator": "operator", "subspace": "subspace", "matrix": "matrix", "functionals": "functionals",
    "c": "c", "C": "C", "lambda0": "lambda0", "M": "M", "space_sizes": "space_sizes",
    "value_bound": "value_bound", "instances": "instances",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of numbers, got {text!r}") from None


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma-separated list of integers, got {text!r}") from None


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("experiment")
    g.add_argument("--n", type=int, help="factor dimension")
    g.add_argument("--d", type=int, help="tensor degree")
    g.add_argument("--m", type=int, help="number of simple tensors")
    g.add_argument("--k", type=int, help="codimension / operator rows")
    g.add_argument("--epsilon", type=float)
    g.add_argument("--dist", help="normal, rademacher, uniform or bernoulli:<p>")
    g.add_argument("--trials", type=int)
    g.add_argument("--grid", type=_float_list, help="comma-separated t, u or lambda values")
    g.add_argument("--seed", type=int)
    g.add_argument("--workers", type=int)
    g.add_argument("--function", choices=FUNCTIONS)
    g.add_argument("--operator", choices=OPERATORS)
    g.add_argument("--subspace", choices=SUBSPACES)
    g.add_argument("--matrix", choices=MATRICES)
    g.add_argument("--functionals", type=int)
    g.add_argument("--c", type=float, help="tail constant c")
    g.add_argument("--C", type=float, help="MGF constant C")
    g.add_argument("--lambda0", type=float)
    g.add_argument("--M", type=float)
    g.add_argument("--space-sizes", type=_int_list)
    g.add_argument("--value-bound", type=float)
    g.add_argument("--instances", type=int)
    o = p.add_argument_group("output")
    o.add_argument("--config", type=Path, help="TOML file with flat key = value pairs")
    o.add_argument("--out", type=Path, default=Path("results"))
    o.add_argument("--format", choices=("json", "csv"), default="json")
    o.add_argument("--plot", action="store_true", help="also write an SVG of survival against bounds")
    o.add_argument("-v", "--verbose", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tensorconc", description="Monte Carlo experiments on simple random tensors.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    common = _common_flags()
    for exp in Experiment:
        sub.add_parser(exp.value, parents=[common], help=f"run the {exp.value} experiment")
    sub.add_parser(ORACLE_SUITE, parents=[common], help="cross-check fast routes against exact oracles")
    return parser


def load_config_file(path: Path) -> dict:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"malformed config file {path}: {exc}") from None
    for key, value in data.items():
        if isinstance(value, dict):
            raise ConfigError(f"config file must be flat; {key!r} is a table")
    return data


def merged_settings(args: argparse.Namespace) -> dict:
    """Config-file values overridden by explicit flags."""
    settings = load_config_file(args.config) if args.config else {}
    settings.pop("experiment", None)
    for dest, key in _CONFIG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            settings.pop(dest, None)
            settings[key] = value
    return settings


def _dump_json(payload, path: Path):
    text = json.dumps(clean(payload), indent=2, allow_nan=False) + "\n"
    path.write_text(text, encoding="utf-8")


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def _dump_csv(header, rows, path: Path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in clean(rows):
            w.writerow([_cell(v) for v in row])


def write_plot(report: TailReport, path: Path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    t2 = np.asarray(report.grid) ** 2
    fig, ax = plt.subplots(figsize=(6, 4))
    surv = np.asarray(report.survival)
    pos = surv > 0
    ax.semilogy(t2[pos], surv[pos], "o-", label="empirical")
    ax.fill_between(t2[pos], np.asarray(report.wilson_lo)[pos], np.asarray(report.wilson_hi)[pos], alpha=0.25)
    ax.semilogy(t2, report.bound_default_c, "--", label="bound, default c")
    if report.bound_fitted_c is not None:
        ax.semilogy(t2, report.bound_fitted_c, ":", label=f"bound, fitted c = {report.fitted_c:.3g}")
    ax.set_xlabel("t^2")
    ax.set_ylabel("P(statistic > t)")
    ax.set_title(report.experiment)
    ax.legend()
    fig.tight_layout()
    with matplotlib.rc_context({"svg.hashsalt": "tensorconc"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _run_oracle_suite(settings: dict):
    seed = int(settings.get("master_seed", 0))
    checks = oracle_suite.run_all(seed)
    ok = all(c.ok for c in checks)
    rows = [[c.name, c.ok] for c in checks]
    payload = {
        "kind": "record", "experiment": ORACLE_SUITE, "checks": [c.to_dict() for c in checks],
        "table": {"columns": ["check", "ok"], "rows": rows}, "ok": ok,
        "metadata": {"config": {"experiment": ORACLE_SUITE, "master_seed": seed}, "seed": seed,
                     "build_id": build_id()},
    }
    return payload, (["check", "ok"], rows), None, ok, {"experiment": ORACLE_SUITE, "master_seed": seed}, seed


def _run(command: str, settings: dict):
    if command == ORACLE_SUITE:
        return _run_oracle_suite(settings)
    config = config_from_mapping({"experiment": command, **settings})
    result = run_experiment(config)
    ok = result.ok if isinstance(result, Record) else None
    plot = result if isinstance(result, TailReport) else None
    return result.to_dict(), result.csv_table(), plot, ok, config.echo(), config.master_seed


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    started = datetime.now(timezone.utc).isoformat()
    try:
        settings = merged_settings(args)
        payload, (header, rows), plot_report, ok, echo, seed = _run(args.command, settings)
        args.out.mkdir(parents=True, exist_ok=True)
        stem = f"{args.command}-{seed}"
        outputs = []
        target = args.out / f"{stem}.{args.format}"
        if args.format == "json":
            _dump_json(payload, target)
        else:
            _dump_csv(header, rows, target)
        outputs.append(str(target))
        if args.plot:
            if plot_report is None:
                log.warning("--plot only applies to tail experiments; no SVG written")
            else:
                svg = args.out / f"{stem}.svg"
                write_plot(plot_report, svg)
                outputs.append(str(svg))
        manifest = {
            "config": echo,
            "started_at": started,
            "finished_at": datetime.now(timezone.utc).isoformat(),
            "tool_version": tool_version(),
            "build_id": build_id(),
            "outputs": outputs,
        }
        _dump_json(manifest, args.out / "manifest.json")
    except (ConfigError, InsufficientDataError) as exc:
        print(f"tensorconc: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"tensorconc: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    for path in outputs:
        log.info("wrote %s", path)
    if args.command in VERDICT_COMMANDS and ok is False:
        return EXIT_VERDICT
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
