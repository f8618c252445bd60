"""Command-line interface: ``logfluct {ingest,analyze,synth,defaults}``.

Option values are resolved flag first, then ``LOGFLUCT_<NAME>`` environment
variable, then the built-in default.  Exit codes: 0 success, 1 at least one
analysis block failed, 2 input error, 3 degenerate data.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._io import atomic_write_text
from .dist import QGaussianParams, StableParams, fgn_sample, qgauss_sample, stable_sample
from .ingest import (
    CACHE_ENV,
    ColumnSpec,
    IngestError,
    fetch_remote,
    normalize,
    parse_quotes,
    read_returns_csv,
    returns_from_quotes,
    write_returns_csv,
)
from .pipeline import ANALYSES, AnalysisConfig, analyze

logger = logging.getLogger("logfluct")

EXIT_OK, EXIT_PARTIAL, EXIT_INPUT, EXIT_DEGENERATE = 0, 1, 2, 3
ENV_PREFIX = "LOGFLUCT_"


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _int_list(s):
    return tuple(int(v) for v in str(s).split(",") if v.strip())


def _float_list(s):
    return tuple(float(v) for v in str(s).split(",") if v.strip())


def _analyses(s):
    items = tuple(v.strip() for v in str(s).split(",") if v.strip())
    if "all" in items:
        return ANALYSES
    bad = [v for v in items if v not in ANALYSES]
    if bad or not items:
        raise ValueError(f"unknown analyses {bad}; choose from {', '.join(ANALYSES)} or all")
    return items


def _scales(s):
    return None if str(s).strip().lower() == "auto" else _int_list(s)


def _spread(s):
    s = str(s).strip().lower()
    if s not in ("robust", "std"):
        raise ValueError(f"spread must be robust or std, got {s!r}")
    return s


def _bool(s):
    return str(s).strip().lower() in ("1", "true", "yes", "on")


_cfg = AnalysisConfig()
# name -> (parser for env/flag strings, default)
OPTIONS = {
    "analyses": (_analyses, ANALYSES),
    "max_lag": (int, _cfg.max_lag),
    "leverage_max_lag": (int, _cfg.leverage_max_lag),
    "bins": (float, _cfg.bins),
    "bin_spread": (_spread, _cfg.bin_spread),
    "horizons": (_int_list, _cfg.horizons),
    "alpha": (float, _cfg.alpha),
    "scales": (_scales, _cfg.scales),
    "detrend_order": (int, _cfg.detrend_order),
    "fix_q": (_float_list, _cfg.fix_q),
    "seed": (int, _cfg.seed),
    "shuffles": (int, _cfg.shuffles),
    "surrogates": (int, _cfg.surrogates),
    "out_dir": (str, "."),
    "offline": (_bool, False),
}


def env_name(option):
    return ENV_PREFIX + option.upper()


def resolve(option, flag_value, environ=None):
    """Flag value if given, else the environment variable, else the default."""
    parse, default = OPTIONS[option]
    if flag_value is not None:
        return flag_value
    environ = os.environ if environ is None else environ
    raw = environ.get(env_name(option))
    if raw is not None and raw != "":
        try:
            return parse(raw)
        except ValueError as exc:
            raise CliError(f"bad value for {env_name(option)}={raw!r}: {exc}") from None
    return default


def _argtype(parse):
    def convert(s):
        try:
            return parse(s)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    convert.__name__ = getattr(parse, "__name__", "value")
    return convert


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


# --------------------------------------------------------------------------
# subcommands
# --------------------------------------------------------------------------


def cmd_ingest(args) -> int:
    offline = resolve("offline", True if args.offline else None)
    if bool(args.input) == bool(args.url):
        raise CliError("exactly one of --input or --url is required")
    if args.input:
        path = Path(args.input)
        if not path.is_file():
            raise CliError(f"input file not found: {path}")
        raw, source = path.read_bytes(), str(path)
    else:
        raw, source = fetch_remote(args.url, offline=offline), args.url
    spec = ColumnSpec(_column(args.date_col), _column(args.value_col), args.delimiter)
    quotes = parse_quotes(raw, spec).restrict(args.start, args.end)
    if len(quotes) < 2:
        raise CliError(f"only {len(quotes)} quote(s) in the requested window", EXIT_DEGENERATE)
    try:
        series = returns_from_quotes(quotes)
    except IngestError as exc:
        raise CliError(str(exc), EXIT_DEGENERATE) from None
    out = Path(args.output)
    write_returns_csv(series, out)
    meta = {
        "source": source,
        "window": [args.start, args.end],
        "first_date": str(quotes.dates[0]),
        "last_date": str(quotes.dates[-1]),
        "n_quotes": len(quotes),
        "n_returns": len(series),
        "n_dropped": quotes.n_dropped,
        "name": quotes.name,
        "raw_mean": series.raw_mean,
        "raw_std": series.raw_std,
        "tool_version": __version__,
    }
    atomic_write_text(_meta_path(out), _dump(meta))
    logger.info("%d quotes -> %d returns written to %s", len(quotes), len(series), out)
    return EXIT_OK


def _column(s):
    return int(s) if str(s).isdigit() else s


def _meta_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def cmd_analyze(args) -> int:
    path = Path(args.input)
    if not path.is_file():
        raise CliError(f"series file not found: {path}")
    series = read_returns_csv(path)
    values = np.asarray(series.values)
    if not np.all(np.isfinite(values)):
        raise CliError("series contains non-finite values")
    if np.all(values == values[0]):
        raise CliError("constant series: nothing to analyze", EXIT_DEGENERATE)

    opts = {name: resolve(name, getattr(args, name, None)) for name in OPTIONS}
    cfg = AnalysisConfig(**{k: v for k, v in opts.items() if k in AnalysisConfig.field_names()})
    dataset = {"input": str(path)}
    meta = _meta_path(path)
    if meta.is_file():
        dataset["ingest"] = json.loads(meta.read_text(encoding="utf-8"))
    report, tables, ok = analyze(values, cfg, dataset)

    out_dir = Path(opts["out_dir"])
    for name, text in sorted(tables.items()):
        atomic_write_text(out_dir / f"{name}.csv", text)
    atomic_write_text(out_dir / "report.json", _dump(report))
    failed = [k for k, b in report["analyses"].items() if b["status"] != "ok"]
    if failed:
        logger.error("failed analyses: %s", ", ".join(failed))
        return EXIT_PARTIAL
    return EXIT_OK


def synthesize(family, n, seed, q=1.5, B=1.0, alpha=1.77, a=1.0, hurst=0.8) -> np.ndarray:
    """Draw ``n`` values from one of the oracle families."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if family == "gaussian":
        return np.random.default_rng(seed).standard_normal(n)
    if family == "qgaussian":
        QGaussianParams(q, B)  # validates the domain
        return qgauss_sample(q, B, n, seed)
    if family == "stable":
        return stable_sample(StableParams(alpha, a), n, seed)
    if family == "fgn":
        return fgn_sample(hurst, n, seed)
    raise ValueError(f"unknown family {family!r}")


def cmd_synth(args) -> int:
    seed = resolve("seed", args.seed)
    try:
        x = synthesize(args.family, args.n, seed, q=args.q, B=args.B, alpha=args.alpha, a=args.a,
                       hurst=args.hurst)
    except ValueError as exc:
        raise CliError(f"invalid synth parameters: {exc}") from None
    dates = np.datetime64(args.start_date, "D") + np.arange(args.n)
    series = normalize(x, dates)
    out = Path(args.output)
    write_returns_csv(series, out)
    meta = {
        "source": "synth",
        "family": args.family,
        "params": {"q": args.q, "B": args.B, "alpha": args.alpha, "a": args.a, "hurst": args.hurst},
        "n": args.n,
        "seed": seed,
        "raw_mean": series.raw_mean,
        "raw_std": series.raw_std,
        "tool_version": __version__,
    }
    atomic_write_text(_meta_path(out), _dump(meta))
    return EXIT_OK


def cmd_defaults(args) -> int:
    effective = {}
    for name, (_, default) in OPTIONS.items():
        effective[name] = resolve(name, None)
    doc = {
        "defaults": {name: default for name, (_, default) in OPTIONS.items()},
        "effective": effective,
        "environment": {name: env_name(name) for name in OPTIONS} | {"cache_dir": CACHE_ENV},
    }
    sys.stdout.write(_dump(doc))
    return EXIT_OK


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="logfluct", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    pi = sub.add_parser("ingest", help="quote file or URL -> normalized return series CSV")
    src = pi.add_mutually_exclusive_group()
    src.add_argument("--input", help="local quote file")
    src.add_argument("--url", help="remote quote file (cached)")
    pi.add_argument("--from", dest="start", help="first date kept (YYYY-MM-DD)")
    pi.add_argument("--to", dest="end", help="last date kept (YYYY-MM-DD)")
    pi.add_argument("--date-col", default="0", help="date column name or index (default 0)")
    pi.add_argument("--value-col", default="1", help="value column name or index (default 1)")
    pi.add_argument("--delimiter", default=",")
    pi.add_argument("--offline", action="store_true", help="use the cache only")
    pi.add_argument("-o", "--output", default="returns.csv")
    pi.set_defaults(func=cmd_ingest)

    pa = sub.add_parser("analyze", help="run analyses on a return series")
    pa.add_argument("--input", required=True, help="series CSV (date,r)")
    pa.add_argument("--analyses", type=_argtype(_analyses), help="comma list of acf,pdf,collapse,dfa,leverage or all")
    pa.add_argument("--max-lag", type=int, help="largest ACF lag")
    pa.add_argument("--leverage-max-lag", type=int)
    pa.add_argument("--bins", type=float, help="histogram bin width in units of the sample spread")
    pa.add_argument("--bin-spread", choices=["robust", "std"],
                    help="spread measure for --bins: IQR/1.349 (robust) or standard deviation")
    pa.add_argument("--horizons", type=_argtype(_int_list), help="collapse horizons, e.g. 1,5,20,100")
    pa.add_argument("--alpha", type=float, help="stable index for the collapse (default: from the q fit)")
    pa.add_argument("--scales", type=_argtype(_scales), help="DFA box sizes, comma list or auto")
    pa.add_argument("--detrend-order", type=int)
    pa.add_argument("--fix-q", type=_argtype(_float_list), action="append",
                    help="extra fits at fixed q (repeatable or comma list)")
    pa.add_argument("--shuffles", type=int, help="shuffles for the leverage noise band")
    pa.add_argument("--surrogates", type=int, help="shuffles for the antisymmetry baseline")
    pa.add_argument("--seed", type=int)
    pa.add_argument("--out-dir")
    pa.set_defaults(func=cmd_analyze)

    ps = sub.add_parser("synth", help="write a synthetic series in the analyze input schema")
    ps.add_argument("--family", required=True, choices=["gaussian", "qgaussian", "stable", "fgn"])
    ps.add_argument("--n", type=int, default=13865)
    ps.add_argument("--seed", type=int)
    ps.add_argument("--q", type=float, default=1.5)
    ps.add_argument("--B", type=float, default=1.0)
    ps.add_argument("--alpha", type=float, default=1.77)
    ps.add_argument("--a", type=float, default=1.0)
    ps.add_argument("--hurst", type=float, default=0.8)
    ps.add_argument("--start-date", default="2000-01-01")
    ps.add_argument("-o", "--output", default="synth.csv")
    ps.set_defaults(func=cmd_synth)

    pd = sub.add_parser("defaults", help="print defaults and effective values as JSON")
    pd.set_defaults(func=cmd_defaults)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "fix_q", None) is not None:
        args.fix_q = tuple(q for group in args.fix_q for q in group)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s: %(message)s",
                        stream=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"logfluct: error: {exc}", file=sys.stderr)
        return exc.code
    except IngestError as exc:
        print(f"logfluct: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"logfluct: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
