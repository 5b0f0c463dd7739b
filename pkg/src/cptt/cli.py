"""Command-line front end: decompose / gen / bench / summarize.

Exit codes: 0 on success, 1 on numerical failure (e.g. a tensor file with
non-finite values), 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .baselines import FixedPointConfig
from .bench import (
    ExperimentConfig,
    RandomFunctionSpec,
    gen_random_function,
    run_experiment,
    summarize,
    write_results_csv,
    write_summary_csv,
)
from .core import TensorValueError
from .greedy import GreedyConfig, METHODS, greedy_decompose, write_trace_csv
from .io import ParseError, read_cp, write_cp

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cptt",
        description="Greedy CP tensor approximation and method benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="approximate a stored CP tensor")
    p.add_argument("input", help="CP tensor file to approximate")
    p.add_argument("--method", choices=METHODS, required=True)
    p.add_argument("--rank", type=int, required=True, help="number of terms")
    p.add_argument("--tol", type=float, default=0.0,
                   help="stop once the relative residual drops below this")
    p.add_argument("--rank-k", type=int, default=1,
                   help="terms added per iteration (cptt only)")
    p.add_argument("--seed", type=int, default=0, help="solver RNG seed")
    p.add_argument("--out", required=True, help="output CP tensor file")
    p.add_argument("--trace", default=None, help="optional trace CSV path")

    p = sub.add_parser("gen", help="generate a random sine-series tensor")
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-points", type=int, default=25)
    p.add_argument("--term-budget", type=int, default=200)
    p.add_argument("--out", required=True)

    p = sub.add_parser("bench", help="run a comparison campaign from a config file")
    p.add_argument("--config", required=True, help="key = value config file")
    p.add_argument("--workers", type=int,
                   default=int(os.environ.get("CPTT_WORKERS", "1")),
                   help="parallel campaign cells (default $CPTT_WORKERS or 1)")

    p = sub.add_parser("summarize", help="aggregate a results CSV")
    p.add_argument("--in", dest="results", required=True, help="results CSV")
    p.add_argument("--ranks", default="25,50,75",
                   help="comma-separated ranks to report")
    return parser


def _cmd_decompose(args) -> int:
    if args.rank_k > 1 and args.method != "cptt":
        print(
            f"error: --rank-k {args.rank_k} conflicts with --method {args.method}; "
            "rank-k updates are only available with --method cptt",
            file=sys.stderr,
        )
        return 2
    tensor = read_cp(args.input)
    cfg = GreedyConfig(
        method=args.method,
        target_rank=args.rank,
        rel_tol=args.tol,
        rank_k_update=args.rank_k,
        solver_cfg=FixedPointConfig(rng_seed=args.seed),
    )
    approx, trace = greedy_decompose(tensor, cfg)
    write_cp(approx, args.out)
    if args.trace:
        write_trace_csv(trace, args.trace)
    final = trace.steps[-1].rel_residual if trace.steps else 1.0
    print(f"{final:.6g}")
    return 0


def _cmd_gen(args) -> int:
    spec = RandomFunctionSpec(
        dim=args.dim,
        beta=args.beta,
        n_points=args.n_points,
        seed=args.seed,
        term_budget=args.term_budget,
    )
    tensor, metadata = gen_random_function(spec, with_metadata=True)
    write_cp(tensor, args.out)
    with open(str(args.out) + ".meta.json", "w") as fh:
        json.dump(metadata, fh)
        fh.write("\n")
    return 0


_CONFIG_REQUIRED = ("dims", "regularity", "methods", "max_rank", "base_seed", "out")
_CONFIG_OPTIONAL = ("n_functions", "report_ranks", "n_points", "lmax", "term_budget")


def _parse_config(path) -> dict:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ParseError(f"{path}:{lineno}: expected 'key = value'")
            key, _, raw = line.partition("=")
            key, raw = key.strip(), raw.strip()
            if key not in _CONFIG_REQUIRED + _CONFIG_OPTIONAL:
                raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
            values[key] = raw
    missing = [k for k in _CONFIG_REQUIRED if k not in values]
    if missing:
        raise ParseError(f"missing config keys: {', '.join(missing)}")
    return values


def _int_list(raw: str) -> tuple[int, ...]:
    return tuple(int(v.strip()) for v in raw.split(",") if v.strip())


def _cmd_bench(args) -> int:
    raw = _parse_config(args.config)
    try:
        cfg = ExperimentConfig(
            dims=_int_list(raw["dims"]),
            regularity=raw["regularity"],
            methods=tuple(m.strip() for m in raw["methods"].split(",") if m.strip()),
            max_rank=int(raw["max_rank"]),
            base_seed=int(raw["base_seed"]),
            n_functions=int(raw.get("n_functions", "32")),
            report_ranks=_int_list(raw.get("report_ranks", "25,50,75")),
            n_points=int(raw.get("n_points", "25")),
            lmax=int(raw.get("lmax", "6")),
            term_budget=int(raw.get("term_budget", "200")),
        )
    except ValueError as exc:
        raise ParseError(f"invalid config: {exc}") from None
    rows = run_experiment(cfg, workers=max(1, args.workers))
    write_results_csv(rows, raw["out"])
    return 0


def _cmd_summarize(args) -> int:
    ranks = _int_list(args.ranks)
    rows = summarize(args.results, ranks)
    write_summary_csv(rows, sys.stdout)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "decompose": _cmd_decompose,
        "gen": _cmd_gen,
        "bench": _cmd_bench,
        "summarize": _cmd_summarize,
    }
    try:
        return handlers[args.command](args)
    except TensorValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ParseError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
