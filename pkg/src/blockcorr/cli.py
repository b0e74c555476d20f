"""Command-line entry point: ``blockcorr {test,simulate,freeness,pipeline}``.

Exit codes: 0 ok, 1 internal error, 2 usage or input error, 3 singular block.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .blocks import BlockSpec
from .errors import BlockCorrError, SingularBlockError
from .freeness import (
    WEINGARTEN_PATTERNS,
    ProjectionSumModel,
    mc_moments,
    mc_weingarten,
    weingarten_moment,
)
from .pipeline import independence_report, read_price_csv
from .sampling import RngStream
from .schott import schott_test, wilks_test
from .simulation import ExperimentConfig, empirical_rate, run_table, table_csv, table_json

EXIT_OK, EXIT_INTERNAL, EXIT_INPUT, EXIT_SINGULAR = 0, 1, 2, 3


def _int_list(text: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a comma list of integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _alt(text: str) -> str:
    if text not in ("upper", "two-sided", "two_sided"):
        raise argparse.ArgumentTypeError("alternative must be 'upper' or 'two-sided'")
    return "two_sided" if text != "upper" else "upper"


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="blockcorr", description=__doc__.splitlines()[0],
                                     formatter_class=fmt)
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("test", help="test independence of the blocks of a data file",
                       formatter_class=fmt)
    t.add_argument("data", type=Path, help="CSV with n rows (observations) and p columns, header optional")
    t.add_argument("--blocks", type=_int_list, required=True, help="block sizes, e.g. 10,10,15")
    t.add_argument("--alpha", type=float, default=0.05, help="significance level")
    t.add_argument("--alternative", type=_alt, default="upper", help="upper or two-sided")
    t.add_argument("--wilks", action="store_true", help="also run the classical Wilks test (needs n-1 > p)")
    t.add_argument("--format", choices=("text", "json"), default="text", help="report format")

    s = sub.add_parser("simulate", help="empirical size/power of the test", formatter_class=fmt)
    s.add_argument("--config", type=Path, default=None,
                   help="JSON file with one config object or a list of them (overrides the flags below)")
    s.add_argument("--scenario", choices=("I", "II", "III", "IV"), default="I", help="population scenario")
    s.add_argument("--blocks", type=_int_list, default=(2, 2, 3), help="block sizes")
    s.add_argument("--n", type=_int_list, default=(30,), help="sample size(s), comma list")
    s.add_argument("--alpha", type=float, default=0.05, help="significance level")
    s.add_argument("--reps", type=int, default=10_000, help="Monte Carlo replications")
    s.add_argument("--seed", type=int, default=42, help="base seed")
    s.add_argument("--alternative", type=_alt, default="upper", help="upper or two-sided")
    s.add_argument("--fresh-population", dest="fresh_population", action=argparse.BooleanOptionalAction,
                   default=True, help="redraw scenario II parameters in every replicate")
    s.add_argument("--workers", type=int, default=1, help="worker processes")
    s.add_argument("--output", type=Path, default=None, help="CSV path; a .json mirror is written alongside")
    s.add_argument("--format", choices=("csv", "json"), default="csv", help="stdout format")

    f = sub.add_parser("freeness", help="Monte Carlo checks of the Haar projection model",
                       formatter_class=fmt)
    f.add_argument("--N", type=int, required=True, help="ambient dimension (n - 1)")
    f.add_argument("--ranks", type=_int_list, default=None, help="projection ranks, e.g. 10,10,15")
    f.add_argument("--pattern", choices=sorted(WEINGARTEN_PATTERNS), default=None,
                   help="Weingarten monomial to check instead of the moment report")
    f.add_argument("--reps", type=int, default=10_000, help="Monte Carlo replications")
    f.add_argument("--seed", type=int, default=42, help="base seed")
    f.add_argument("--format", choices=("csv", "json"), default="csv", help="report format")

    p = sub.add_parser("pipeline", help="price panel workflow with subset scans", formatter_class=fmt)
    p.add_argument("prices", type=Path, help="price CSV: names header, optional sector row, T price rows")
    p.add_argument("--sectors", type=Path, default=None, help="sidecar CSV of label,sector")
    p.add_argument("--subset-sizes", type=_int_list, default=(2,), help="subset sizes m to scan")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level")
    p.add_argument("--target", choices=("scores", "truncated"), default="scores",
                   help="fourth-moment reference for the power exponent")
    p.add_argument("--output", type=Path, default=None, help="write the report here instead of stdout")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="report format")
    return parser


def _read_data(path: Path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise BlockCorrError(f"{path}: empty file")

    def numeric(row):
        try:
            return [float(c) for c in row]
        except ValueError:
            return None

    if numeric(rows[0]) is None:
        rows = rows[1:]
    data = []
    for i, r in enumerate(rows):
        vals = numeric(r)
        if vals is None:
            raise BlockCorrError(f"{path}: non-numeric value in data row {i + 1}")
        data.append(vals)
    widths = {len(r) for r in data}
    if len(widths) != 1:
        raise BlockCorrError(f"{path}: rows have differing numbers of columns {sorted(widths)}")
    return np.asarray(data).T


def _cmd_test(args, out) -> int:
    X = _read_data(args.data)
    spec = BlockSpec(args.blocks)
    if X.shape[0] != spec.p:
        raise BlockCorrError(
            f"--blocks {','.join(map(str, args.blocks))} sums to p = {spec.p} "
            f"but the data has {X.shape[0]} columns"
        )
    res = schott_test(X, spec, alpha=args.alpha, alternative=args.alternative)
    wilks = wilks_test(X, spec, alpha=args.alpha) if args.wilks else None
    if args.format == "json":
        payload = {k: getattr(res, k) for k in ("statistic", "a_n", "b_n", "z", "p_value",
                                                "alternative", "alpha", "reject", "n")}
        payload["blocks"] = list(spec.sizes)
        payload["ratios"] = list(res.ratios)
        if wilks is not None:
            payload["wilks"] = dataclasses.asdict(wilks)
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        out.write(res.summary() + "\n")
        if wilks is not None:
            out.write(f"wilks        {wilks.statistic:.6g} on {wilks.rho:g} df, "
                      f"p-value {wilks.p_value:.6g}\n")
    return EXIT_OK


def _load_configs(args) -> list[ExperimentConfig]:
    if args.config is not None:
        raw = json.loads(args.config.read_text())
        raw = raw if isinstance(raw, list) else [raw]
        return [ExperimentConfig.from_dict(d) for d in raw]
    return [ExperimentConfig(args.scenario, BlockSpec(args.blocks), args.n, alpha=args.alpha,
                             reps=args.reps, seed=args.seed, alternative=args.alternative,
                             fresh_population=args.fresh_population)]


def _cmd_simulate(args, out) -> int:
    configs = _load_configs(args)
    if args.output is not None:
        rows = run_table(configs, args.output, workers=args.workers)
    else:
        rows = [r for c in configs for r in empirical_rate(c, workers=args.workers).rows]
    seeds = ",".join(str(c.seed) for c in configs)
    if args.format == "json":
        out.write(table_json(rows))
    else:
        out.write(f"# blockcorr simulate seed={seeds}\n")
        out.write(table_csv(rows))
    return EXIT_OK


def _cmd_freeness(args, out) -> int:
    rng = RngStream(args.seed, 0)
    if args.pattern is not None:
        exact = weingarten_moment(args.pattern, args.N)
        est, se = mc_weingarten(args.pattern, args.N, args.reps, rng)
        rows = [("pattern", "N", "exact", "mc_estimate", "mc_se", "z")]
        rows.append((args.pattern, args.N, float(exact), est, se, (est - float(exact)) / se))
    else:
        model = ProjectionSumModel(args.N, args.ranks)
        rep = mc_moments(model, args.reps, rng)
        rows = [("quantity", "monte_carlo", "se", "closed_form")]
        rows.extend(rep.rows())
    if args.format == "json":
        head, body = rows[0], rows[1:]
        payload = {"seed": args.seed, "reps": args.reps,
                   "rows": [{h: (v if isinstance(v, str) else float(f"{v:.6g}")) for h, v in zip(head, r)}
                            for r in body]}
        out.write(json.dumps(payload, indent=2) + "\n")
    else:
        out.write(f"# blockcorr freeness seed={args.seed} reps={args.reps}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(rows[0])
        for r in rows[1:]:
            w.writerow([v if isinstance(v, (str, int)) else f"{v:.6g}" for v in r])
    return EXIT_OK


def _cmd_pipeline(args, out) -> int:
    panel = read_price_csv(args.prices, args.sectors)
    report = independence_report(panel, args.subset_sizes, alpha=args.alpha, target=args.target)
    text = report.to_json() if args.format == "json" else report.series_csv() + "\n" + report.scan_csv()
    if args.output is not None:
        args.output.write_text(text)
    else:
        out.write(text)
    return EXIT_OK


def _validate(parser, args):
    if getattr(args, "alpha", 0.5) is not None and not 0 < getattr(args, "alpha", 0.5) <= 1:
        parser.error("--alpha must lie in (0, 1]")
    if getattr(args, "reps", 1) < 1:
        parser.error("--reps must be at least 1")
    if args.command == "freeness":
        if args.pattern is None and args.ranks is None:
            parser.error("freeness needs --ranks or --pattern")
        if args.ranks is not None and any(not 1 <= r <= args.N for r in args.ranks):
            parser.error(f"every rank must lie in [1, N={args.N}]")
        if args.pattern is not None and args.N < 2:
            parser.error("--pattern needs N >= 2")
        if args.reps < 100:
            parser.error("freeness needs --reps >= 100")
    if args.command == "simulate" and args.workers < 1:
        parser.error("--workers must be at least 1")


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    _validate(parser, args)
    handlers = {"test": _cmd_test, "simulate": _cmd_simulate,
                "freeness": _cmd_freeness, "pipeline": _cmd_pipeline}
    try:
        return handlers[args.command](args, out)
    except SingularBlockError as exc:
        print(f"blockcorr: singular block: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except (BlockCorrError, ValueError, OSError) as exc:
        print(f"blockcorr: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception as exc:  # pragma: no cover
        print(f"blockcorr: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
