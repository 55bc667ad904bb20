"""Command-line interface.

Subcommands: audit (full pipeline), metrics (recompute from dumps),
proxy (perturbation/shift analysis from dumps), synth (generator),
inspect-schema (feature vs. sensitive correlation report).

Exit codes: 0 success, 1 validation error, 2 runtime stage failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

from .audit import (
    AuditConfig,
    ConfigError,
    StageError,
    _default_ablation,
    config_from_file,
    report_emit,
    run_audit,
    strategy_metrics,
)
from .cfgen import GenerationError, load_sets
from .data import DataError, load_csv, sensitive_correlations
from .models import ModelError, load_handle
from .schema import SchemaError, load_schema
from .synth import generate_synthetic, write_synthetic_csv

_VALIDATION_ERRORS = (ConfigError, SchemaError, DataError, ModelError, GenerationError, ValueError)


def _cmd_audit(args) -> int:
    cfg = config_from_file(args.config)
    overrides = {}
    if args.strategy:
        overrides["strategy"] = args.strategy
    if args.k is not None:
        overrides["k"] = args.k
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if args.out:
        overrides["out_dir"] = args.out
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    result = run_audit(cfg)
    out_dir = cfg.out_dir or "audit_out"
    report_emit(result, out_dir)
    print(f"report written to {os.path.join(out_dir, 'report.json')}")
    for strat, block in result["report"]["strategies"].items():
        print(
            f"{strat}: delta_cflips={block['delta_cflips']}, "
            f"priv={block['privileged']['mean_cflips']}, "
            f"unpriv={block['unprivileged']['mean_cflips']}"
        )
    return 0


def _cmd_metrics(args) -> int:
    sets, groups = load_sets(args.dump)
    if any(g is None for g in groups):
        raise ConfigError("dump lacks true_group fields; metrics cannot be recomputed")
    f_s = load_handle(args.model)
    schema = load_schema(args.schema)
    k = max((s.requested_k for s in sets), default=1)
    block = strategy_metrics(sets, groups, f_s, schema, k, _default_ablation(k))
    block.pop("records")
    json.dump(block, sys.stdout, sort_keys=True, indent=1)
    print()
    return 0


def _cmd_proxy(args) -> int:
    from .proxy import proxy_correlations, top_k

    sets, _ = load_sets(args.dump)
    f_s = load_handle(args.model)
    schema = load_schema(args.schema)
    pairs = [(s.origin, m) for s in sets for m in s.members]
    report = proxy_correlations(pairs, f_s, schema)
    writer = csv.writer(sys.stdout if not args.out else open(args.out, "w", newline=""))
    writer.writerow(["feature", "level", "rho", "n_pairs"])
    for e in report.entries:
        writer.writerow([e.feature, e.level, e.rho, e.n_pairs])
    for e in top_k(report, args.top):
        print(f"# top: {e.feature}" + (f"={e.level}" if e.level else "") + f" rho={e.rho:.4f}",
              file=sys.stderr)
    return 0


def _cmd_synth(args) -> int:
    ds = generate_synthetic(args.n, args.beta, noise_features=args.noise_features, seed=args.seed)
    schema_path = os.path.splitext(args.out)[0] + ".schema.yaml"
    write_synthetic_csv(ds, args.out, schema_path)
    print(f"wrote {args.out} and {schema_path}")
    return 0


def _cmd_inspect_schema(args) -> int:
    schema = load_schema(args.schema)
    ds = load_csv(args.dataset, schema)
    writer = csv.writer(sys.stdout)
    writer.writerow(["sensitive", "feature", "level", "pearson", "spearman"])
    for row in sensitive_correlations(ds):
        writer.writerow([row["sensitive"], row["feature"], row["level"],
                         row["pearson"], row["spearman"]])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cfaudit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("audit", help="run the full audit pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--strategy", choices=["kdtree", "genetic", "both"])
    p.add_argument("--k", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_audit)

    p = sub.add_parser("metrics", help="recompute flip metrics from a counterfactual dump")
    p.add_argument("--dump", required=True)
    p.add_argument("--model", required=True, help="serialized sensitive classifier")
    p.add_argument("--schema", required=True)
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("proxy", help="perturbation/shift correlation from a dump")
    p.add_argument("--dump", required=True)
    p.add_argument("--model", required=True, help="serialized sensitive classifier")
    p.add_argument("--schema", required=True)
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--top", type=int, default=6)
    p.set_defaults(func=_cmd_proxy)

    p = sub.add_parser("synth", help="generate a planted-proxy synthetic dataset")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--noise-features", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="CSV path; schema lands next to it")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("inspect-schema", help="feature vs sensitive correlation report")
    p.add_argument("--dataset", required=True)
    p.add_argument("--schema", required=True)
    p.set_defaults(func=_cmd_inspect_schema)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
