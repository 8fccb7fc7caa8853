"""Command line entry point: python -m app.cli <mode> ..."""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional

from pydantic import ValidationError

from app.core.config import OUTPUT_DIR
from app.core.exceptions import PragueLabError
from app.core.logging import configure_logging
from app.harness.experiment import load_records, run_experiment
from app.harness.summary import NORMALIZERS, summarize_scaling, write_scaling_csv
from app.schemas.experiment import ExperimentConfig

GREEN = "\033[92m"
RED = "\033[91m"
RESET = "\033[0m"


def _floats(text: str) -> List[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> List[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="experiment config JSON (flags below are ignored)")
    parser.add_argument("--out", help=f"output directory (default {OUTPUT_DIR})")
    parser.add_argument("--jobs", type=int, default=1, help="parallel worker processes")
    parser.add_argument("--seeds", type=_ints, default=[0], help="comma-separated base seeds")
    parser.add_argument("--seed", type=int, help="single seed, overrides --seeds")


def _nibble_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n", type=_ints, default=[200])
    parser.add_argument("--p", type=_floats, default=[0.5])
    parser.add_argument("--ca", type=_floats, default=[1 / 3])
    parser.add_argument("--tau", type=_ints, default=[2])
    parser.add_argument("--beps", type=_floats, default=[0.1])
    parser.add_argument("--max-k", type=int, dest="max_clique_cap")
    parser.add_argument("--trivial-alpha", type=float)
    parser.add_argument("--q-source", choices=["predicted", "observed"], default="predicted",
                        help="mu_2 for q_i: G(n, p_i) formula or measured on each round graph")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="prague-lab", description="Clique partition and Prague dimension experiments")
    parser.add_argument("--log-level", default="INFO")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("partition", "prague"):
        p = sub.add_parser(name)
        _common(p)
        _nibble_flags(p)
        if name == "prague":
            p.add_argument("--eps", type=_floats, default=[0.1])

    audit = sub.add_parser("audit")
    _common(audit)
    _nibble_flags(audit)
    audit.add_argument("--rounds", type=_ints, default=[0])
    audit.add_argument("--samples", type=int, default=50, help="sampled sets per audited statistic")
    audit.add_argument("--tolerance", type=float, default=1.0)

    color = sub.add_parser("color")
    _common(color)
    source = color.add_mutually_exclusive_group()
    source.add_argument("--hypergraph", help="hypergraph file 'n r m' + m edge lines")
    source.add_argument("--complete-r", type=_ints, dest="r", default=[3])
    color.add_argument("--n", type=_ints, default=[60])
    color.add_argument("--m", type=_ints, default=[20000])
    color.add_argument("--q", type=_ints, default=[])
    color.add_argument("--gamma", type=_floats, default=[0.2])
    color.add_argument("--delta", type=_floats, default=[])
    color.add_argument("--sigma", type=_floats, default=[0.5])
    color.add_argument("--checkpoints", type=_floats, default=[0.0, 0.25, 0.5, 0.75])
    color.add_argument("--bernoulli", action="store_true", help="color a Bernoulli subhypergraph instead")

    lower = sub.add_parser("lowerbound")
    _common(lower)
    lower.add_argument("--n", type=_ints, default=[1024])
    lower.add_argument("--p", type=_floats, default=[0.5])
    lower.add_argument("--eps", type=_floats, default=[0.1])

    summarize = sub.add_parser("summarize")
    summarize.add_argument("--records", required=True, help="records.jsonl from a run")
    summarize.add_argument("--metric", required=True)
    summarize.add_argument("--normalizer", choices=sorted(NORMALIZERS), default="one")
    summarize.add_argument("--out", help="CSV path (default: print)")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        data["mode"] = args.command if "mode" not in data else data["mode"]
        if data["mode"] != args.command:
            raise ValueError(f"config mode {data['mode']!r} does not match command {args.command!r}")
        return ExperimentConfig.model_validate(data)

    seeds = [args.seed] if args.seed is not None else args.seeds
    data = {"mode": args.command, "seeds": seeds, "save_artifacts": len(seeds) == 1}
    if args.command in ("partition", "prague", "audit"):
        data["grid"] = {"n": args.n, "p": args.p, "ca": args.ca, "tau": args.tau, "beps": args.beps}
        data["max_clique_cap"] = args.max_clique_cap
        data["trivial_alpha"] = args.trivial_alpha
        data["q_source"] = args.q_source
        if args.command == "prague":
            data["grid"]["eps"] = args.eps
        if args.command == "audit":
            targets = [{"s_size": s, "j": j, "samples": args.samples} for s, j in ((0, 2), (1, 2), (1, 3), (2, 3))]
            data["audit"] = {
                "clique_targets": targets,
                "neighborhood_targets": [{"s_size": s, "samples": args.samples} for s in (1, 2)],
                "rounds": args.rounds,
                "tolerance_multiplier": args.tolerance,
            }
    elif args.command == "color":
        mode = "inflated" if args.delta else "literal"
        data["grid"] = {"n": args.n, "r": args.r, "m": args.m, "q": args.q, "gamma": args.gamma,
                        "delta": args.delta, "sigma": args.sigma}
        data.update(coloring_mode=mode, checkpoints=args.checkpoints, hypergraph_file=args.hypergraph,
                    sampling="bernoulli" if args.bernoulli else "fixed")
    else:
        data["grid"] = {"n": args.n, "p": args.p, "eps": args.eps}
    return ExperimentConfig.model_validate(data)


def _print_summary(records) -> None:
    ok = sum(r.status == "ok" for r in records)
    failed = len(records) - ok
    print(f"\nTrials: {len(records)}  {GREEN}ok: {ok}{RESET}  {RED if failed else GREEN}errors: {failed}{RESET}")
    for record in records[:20]:
        shown = {k: v for k, v in list(record.metrics.items())[:6]}
        print(f"  [{record.grid_index}/{record.replicate}] {record.coords} -> {shown}")


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    if args.command == "summarize":
        records = load_records(args.records)
        try:
            table = summarize_scaling(records, args.metric, args.normalizer)
        except PragueLabError as exc:
            print(f"{RED}error:{RESET} {exc}", file=sys.stderr)
            return 2
        if args.out:
            write_scaling_csv(table, args.out)
        else:
            print(table.to_string(index=False, na_rep="n/a"))
        return 0

    try:
        config = config_from_args(args)
    except (ValidationError, ValueError) as exc:
        print(f"{RED}invalid configuration:{RESET}\n{exc}", file=sys.stderr)
        return 2
    records = run_experiment(config, jobs=args.jobs, out_dir=args.out)
    _print_summary(records)
    return 0 if all(r.status == "ok" for r in records) else 1


if __name__ == "__main__":
    sys.exit(main())
