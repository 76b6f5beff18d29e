"""
``expgram`` command-line interface.

Subcommands: ``compute``, ``simulate``, ``fisher`` and ``plot``. Exit codes
are 0 on success, 2 for unreadable or malformed input, 3 for numeric
failures and 4 for invalid options or configuration files. Option values
resolve as command-line flag, then ``--config`` JSON entry, then default.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .classical import ordinary_periodogram, quantile_periodogram
from .core import DEFAULT_LEVELS, PeriodogramMatrix, expectile_periodogram, normalize
from .exceptions import (ExpgramError, InvalidLevel, InvalidSeries, NonStationary,
                         ReplicateError)
from .experiments import TABLE1_MODEL, detection_table
from .fileio import (InputError, atomic_write_text, fmt, matrix_to_json,
                     read_matrix_csv, read_series_csv, write_matrix_csv)
from .sim import (TWO_PI, Ar2, Garch11, HiddenPeriodicity, McConfig, Mixture,
                  model_to_dict, monte_carlo, replicate_rng, simulate)
from .spectrum import smooth_matrix
from .stats import fisher_test
from .svg import heatmap_svg, line_svg, plot_data_csv

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_CONFIG = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse would exit with status 2, which this tool reserves for bad input
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigError(message)


# ---------------------------------------------------------------------------
# Option parsing helpers
# ---------------------------------------------------------------------------

def parse_levels(text) -> np.ndarray:
    """``"0.1,0.5,0.9"`` or ``"start:stop:step"`` (inclusive of ``stop``)."""
    if isinstance(text, (list, tuple)):
        vals = np.array(text, dtype=float)
    elif ":" in str(text):
        try:
            start, stop, step = (float(p) for p in str(text).split(":"))
        except ValueError:
            raise ConfigError(f"bad level range {text!r}; use start:stop:step") from None
        if step <= 0:
            raise ConfigError("level step must be positive")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        vals = np.round(start + step * np.arange(count), 10)
    else:
        try:
            vals = np.array([float(p) for p in str(text).split(",") if p.strip()])
        except ValueError:
            raise ConfigError(f"bad level list {text!r}") from None
    if vals.size == 0 or np.any((vals <= 0) | (vals >= 1)) or not np.isfinite(vals).all():
        raise ConfigError(f"levels must lie strictly between 0 and 1, got {text!r}")
    if np.unique(vals).size != vals.size:
        raise ConfigError("levels must be distinct")
    return np.sort(vals)


def _add_model_flags(p):
    g = p.add_argument_group("model parameters")
    g.add_argument("--model", choices=["ar2", "hidden", "mixture", "garch"])
    g.add_argument("--r", type=float, help="AR(2) pole radius (default 0.6)")
    g.add_argument("--fc", type=float, help="AR(2) peak frequency in cycles/sample (default 0.25)")
    g.add_argument("--sd", type=float, help="AR(2) innovation sd (default 1)")
    g.add_argument("--b0", type=float)
    g.add_argument("--b1", type=float)
    g.add_argument("--b2", type=float)
    g.add_argument("--f0", type=float, help="first hidden frequency, cycles/sample (default 0.1)")
    g.add_argument("--f1", type=float, help="second hidden frequency, cycles/sample (default 0.12)")
    g.add_argument("--garch-omega", dest="garch_omega", type=float)
    g.add_argument("--garch-a", dest="garch_a", type=float)
    g.add_argument("--garch-b", dest="garch_b", type=float)
    g.add_argument("--n", type=int, help="series length")
    g.add_argument("--burn-in", dest="burn_in", type=int)


def build_model(args):
    """Turn model flags into a model record (unset flags keep model defaults)."""
    def pick(name, default):
        v = getattr(args, name, None)
        return default if v is None else v

    carrier = Ar2(r=pick("r", 0.6), omega_c=TWO_PI * pick("fc", 0.25),
                  innovation_sd=pick("sd", 1.0))
    name = args.model
    if name == "ar2":
        return carrier
    if name == "hidden":
        return HiddenPeriodicity(b0=pick("b0", 1.0), b1=pick("b1", 0.9), b2=pick("b2", 1.0),
                                 omega_0=TWO_PI * pick("f0", 0.10),
                                 omega_1=TWO_PI * pick("f1", 0.12), carrier=carrier)
    if name == "mixture":
        return Mixture()
    if name == "garch":
        return Garch11(omega=pick("garch_omega", 1e-6), a=pick("garch_a", 0.49),
                       b=pick("garch_b", 0.49))
    raise ConfigError("--model is required")


def _common(p):
    p.add_argument("--config", help="JSON file of option defaults")
    p.add_argument("--seed", type=int, help="base seed (default 0)")
    p.add_argument("--out", help="output path")


def make_parser():
    parser = _Parser(prog="expgram",
                     description="Expectile periodograms from the command line")
    parser.add_argument("--version", action="version", version=f"expgram {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compute", help="periodogram matrix of a CSV series")
    c.add_argument("input")
    _common(c)
    c.add_argument("--column", help="column name or 0-based index")
    c.add_argument("--levels", help="comma list or start:stop:step (default 0.05:0.95:0.01)")
    c.add_argument("--pg", action="store_true", default=None,
                   help="also write the ordinary periodogram to <out>.pg.csv")
    c.add_argument("--qp", action="store_true", default=None,
                   help="also write the quantile periodogram to <out>.qp.csv")
    c.add_argument("--demean", action=argparse.BooleanOptionalAction, default=None)
    c.add_argument("--smooth", type=int, metavar="M",
                   help="modified Daniell half-width applied to each row")
    c.add_argument("--normalize", action="store_true", default=None,
                   help="rescale each row to unit sum (after smoothing)")
    c.add_argument("--format", choices=["csv", "json"])

    s = sub.add_parser("simulate", help="draw series from a model")
    _common(s)
    _add_model_flags(s)
    s.add_argument("--replicates", type=int)
    s.add_argument("--format", choices=["csv", "json"])

    f = sub.add_parser("fisher", help="Fisher's test on a series or a simulated ensemble")
    f.add_argument("input", nargs="?")
    _common(f)
    _add_model_flags(f)
    f.add_argument("--column")
    f.add_argument("--method", choices=["ep", "pg", "qp"])
    f.add_argument("--level", type=float, help="expectile/quantile level (default 0.9)")
    f.add_argument("--significance", type=float)
    f.add_argument("--replicates", type=int)
    f.add_argument("--include-nyquist", dest="include_nyquist", action="store_true", default=None)
    f.add_argument("--table1", action="store_true", default=None,
                   help="detection rates of EP/QP (0.85, 0.9, 0.95) and PG on the "
                        "single-cosine hidden model (f0=0.1, fc=0.3, b2=0, n=200)")
    f.add_argument("--format", choices=["json"])

    pl = sub.add_parser("plot", help="SVG view of a matrix CSV")
    pl.add_argument("input")
    _common(pl)
    pl.add_argument("--kind", choices=["line", "heatmap"])
    pl.add_argument("--levels", help="levels to overlay in line mode (default all)")
    pl.add_argument("--data", help="plot-data CSV path (default <out>.data.csv)")
    pl.add_argument("--format", choices=["svg"])
    return parser


DEFAULTS = {
    "compute": {"levels": None, "pg": False, "qp": False, "demean": True, "smooth": None,
                "normalize": False, "format": "csv", "column": None, "seed": 0},
    "simulate": {"model": None, "n": 200, "burn_in": 500, "replicates": 1, "seed": 0,
                 "format": "csv"},
    "fisher": {"method": "ep", "level": 0.9, "significance": 0.05, "replicates": None,
               "seed": 0, "n": 200, "burn_in": 500, "table1": False, "column": None,
               "model": None, "include_nyquist": False, "format": "json"},
    "plot": {"kind": "line", "levels": None, "data": None, "seed": 0, "format": "svg"},
}


def resolve_args(argv):
    """Parse ``argv`` and fill unset options from the config file and defaults."""
    parser = make_parser()
    args = parser.parse_args(argv)
    config = {}
    if args.config:
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config {args.config}: {err}") from None
        if not isinstance(config, dict):
            raise ConfigError("config file must hold a JSON object")
        known = set(vars(args))
        unknown = sorted(set(config) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    for key, value in {**DEFAULTS[args.command], **config}.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    return args


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def _require_out(args):
    if not args.out:
        raise ConfigError("--out is required")
    return Path(args.out)


def _sibling(out: Path, tag):
    return out.with_name(f"{out.stem}.{tag}{out.suffix or '.csv'}")


def _warn_unconverged(pm, label):
    bad = int((~pm.converged).sum())
    if bad:
        print(f"warning: {bad} {label} cell(s) did not converge", file=sys.stderr)


def _finish(pm, args):
    if args.smooth is not None:
        pm = smooth_matrix(pm, int(args.smooth))
    if args.normalize:
        pm = normalize(pm)
    return pm


def _write(pm, path, fmt_):
    if fmt_ == "json":
        atomic_write_text(path, matrix_to_json(pm))
    else:
        write_matrix_csv(pm, path)


def cmd_compute(args):
    out = _require_out(args)
    levels = DEFAULT_LEVELS if args.levels is None else parse_levels(args.levels)
    y = read_series_csv(args.input, args.column)
    results = [(out, _finish(expectile_periodogram(y, levels, demean=args.demean), args), "EP")]
    if args.pg:
        results.append((_sibling(out, "pg"),
                        _finish(ordinary_periodogram(y, demean=args.demean), args), "PG"))
    if args.qp:
        results.append((_sibling(out, "qp"),
                        _finish(quantile_periodogram(y, levels, demean=args.demean), args), "QP"))
    for path, pm, label in results:
        _warn_unconverged(pm, label)
        _write(pm, path, args.format)
    return EXIT_OK


def cmd_simulate(args):
    out = _require_out(args)
    model = build_model(args)
    if args.replicates < 1 or args.n < 1 or args.burn_in < 0:
        raise ConfigError("need --replicates >= 1, --n >= 1, --burn-in >= 0")
    out.mkdir(parents=True, exist_ok=True)
    ext = "json" if args.format == "json" else "csv"
    files = []
    for i in range(args.replicates):
        y = simulate(model, args.n, replicate_rng(args.seed, i), args.burn_in)
        name = f"series_{i:05d}.{ext}"
        if ext == "json":
            text = json.dumps([float(v) for v in y]) + "\n"
        else:
            text = (f"# model={args.model} seed={args.seed} replicate={i}\ny\n"
                    + "".join(fmt(v) + "\n" for v in y))
        atomic_write_text(out / name, text)
        files.append({"path": name, "replicate": i, "seed": args.seed, "stream": [args.seed, i]})
    manifest = {"model": model_to_dict(model), "n": args.n, "burn_in": args.burn_in,
                "seed": args.seed, "replicates": args.replicates, "files": files}
    atomic_write_text(out / "manifest.json", json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    return EXIT_OK


def _row_for(y, method, level, demean=True):
    if method == "pg":
        return ordinary_periodogram(y, demean=demean)
    if method == "qp":
        return quantile_periodogram(y, [level], demean=demean)
    return expectile_periodogram(y, [level], demean=demean)


def _emit(args, payload):
    text = json.dumps(payload, indent=1, sort_keys=True) + "\n"
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)


def cmd_fisher(args):
    if not 0 < args.significance < 1:
        raise ConfigError("--significance must lie in (0, 1)")
    if not 0 < args.level < 1:
        raise ConfigError("--level must lie in (0, 1)")
    if args.table1:
        reps = args.replicates or 1000
        model = build_model(args) if args.model else TABLE1_MODEL
        table = detection_table(reps, args.seed, model=model, n=args.n)
        _emit(args, {"replicates": reps, "seed": args.seed, "n": args.n,
                     "model": model_to_dict(model), "rates": table.as_records()})
        return EXIT_OK
    if args.input:
        y = read_series_csv(args.input, args.column)
        res = fisher_test(_row_for(y, args.method, args.level), significance=args.significance,
                          include_nyquist=args.include_nyquist)
        _emit(args, {**res.as_dict(), "method": args.method,
                     "level": None if args.method == "pg" else args.level})
        return EXIT_OK
    if not args.model:
        raise ConfigError("give an input file, --model for ensemble mode, or --table1")
    reps = args.replicates or 1000
    model = build_model(args)

    def pipeline(y):
        return fisher_test(_row_for(y, args.method, args.level), significance=args.significance,
                           include_nyquist=args.include_nyquist).reject

    mc = monte_carlo(model, McConfig(reps, args.n, args.seed, args.burn_in), pipeline)
    rate, se = mc.rate()
    _emit(args, {"method": args.method, "level": None if args.method == "pg" else args.level,
                 "significance": args.significance, "replicates": reps, "seed": args.seed,
                 "n": args.n, "model": model_to_dict(model), "detection_rate": rate,
                 "standard_error": se})
    return EXIT_OK


def cmd_plot(args):
    out = _require_out(args)
    pm = read_matrix_csv(args.input)
    if args.kind == "heatmap":
        svg, rows = heatmap_svg(pm, title=Path(args.input).name), None
    else:
        rows = None
        if args.levels is not None:
            wanted = parse_levels(args.levels)
            try:
                rows = [pm.level_index(lv) for lv in wanted]
            except KeyError as err:
                raise ConfigError(str(err)) from None
        svg = line_svg(pm, rows, title=Path(args.input).name)
    atomic_write_text(out, svg)
    data = Path(args.data) if args.data else out.with_name(out.stem + ".data.csv")
    atomic_write_text(data, plot_data_csv(pm, rows))
    return EXIT_OK


COMMANDS = {"compute": cmd_compute, "simulate": cmd_simulate,
            "fisher": cmd_fisher, "plot": cmd_plot}


def main(argv=None) -> int:
    try:
        args = resolve_args(argv)
        return COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (InputError, InvalidSeries, OSError) as err:
        print(f"input error: {err}", file=sys.stderr)
        return EXIT_INPUT
    except (InvalidLevel, NonStationary) as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (ExpgramError, ReplicateError, np.linalg.LinAlgError) as err:
        print(f"numeric failure: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
