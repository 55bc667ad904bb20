"""End-to-end audit pipeline: split, fit, generate, measure, report."""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field

import numpy as np
import yaml

from . import fairmetrics
from .cfgen import (
    GeneticConfig,
    batch_generate,
    default_genetic_config,
    dump_sets,
    shortfall_stats,
)
from .data import (
    Dataset,
    encode,
    ex_ante_sp,
    group_distribution,
    load_csv,
    stratified_split,
)
from .models import CvConfig, evaluate, fit, grid_search_cv
from .proxy import proxy_correlations, top_k
from .schema import FeatureSchema, GroupSpec, load_schema


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class ModelSpec:
    family: str = "decision-tree"
    hyperparams: dict = field(default_factory=dict)
    grid: dict | None = None  # when set, grid-search CV picks hyperparams
    folds: int = 5


@dataclass(frozen=True)
class AuditConfig:
    dataset_path: str | None = None
    schema_path: str | None = None
    decision_maker: ModelSpec = field(default_factory=ModelSpec)
    sensitive_classifier: ModelSpec = field(default_factory=ModelSpec)
    group: str | None = None  # sensitive column; defaults to the schema's first
    strategy: str = "kdtree"  # kdtree | genetic | both
    k: int = 100
    test_fraction: float = 0.10
    seed: int = 42
    workers: int = 1
    out_dir: str | None = None
    ablation_lengths: tuple[int, ...] = ()
    genetic: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if not 0.0 < self.test_fraction < 1.0:
            raise ConfigError("test_fraction must lie in (0, 1)")
        if self.strategy not in ("kdtree", "genetic", "both"):
            raise ConfigError(f"unknown strategy {self.strategy!r}")


def config_from_file(path: str) -> AuditConfig:
    with open(path, "r", encoding="utf-8") as fh:
        doc = yaml.safe_load(fh) or {}
    base_dir = os.path.dirname(os.path.abspath(path))

    def resolve(p):
        if p is None:
            return None
        return p if os.path.isabs(p) else os.path.join(base_dir, p)

    def model_spec(key):
        sub = doc.get(key, {}) or {}
        return ModelSpec(
            family=sub.get("family", "decision-tree"),
            hyperparams=sub.get("hyperparams", {}) or {},
            grid=sub.get("grid"),
            folds=sub.get("folds", 5),
        )

    cfg = AuditConfig(
        dataset_path=resolve(doc.get("dataset")),
        schema_path=resolve(doc.get("schema")),
        decision_maker=model_spec("decision_maker"),
        sensitive_classifier=model_spec("sensitive_classifier"),
        group=doc.get("group"),
        strategy=doc.get("strategy", "kdtree"),
        k=doc.get("k", 100),
        test_fraction=doc.get("test_fraction", 0.10),
        seed=doc.get("seed", 42),
        workers=doc.get("workers", 1),
        out_dir=resolve(doc.get("out")),
        ablation_lengths=tuple(doc.get("ablation_lengths", ())),
        genetic=doc.get("genetic", {}) or {},
    )
    for p in (cfg.dataset_path, cfg.schema_path):
        if p is not None and not os.path.exists(p):
            raise ConfigError(f"referenced file does not exist: {p}")
    return cfg


def _fit_spec(spec: ModelSpec, train_enc, labels, seed: int):
    if spec.grid:
        cv = CvConfig(folds=spec.folds, objective="auc", grid=spec.grid, seed=seed)
        best = grid_search_cv(spec.family, cv, train_enc, labels)["best_params"]
    else:
        best = dict(spec.hyperparams)
    return fit(spec.family, best, train_enc, labels, seed=seed), best


def _default_ablation(k: int) -> tuple[int, ...]:
    lengths = [l for l in (1, 2, 5, 10, 20, 50, 100) if l < k]
    return tuple(lengths + [k])


def run_audit(cfg: AuditConfig, dataset: Dataset | None = None) -> dict:
    """Run the full pipeline and return the report as a plain dict.

    Deterministic given the config: every stage seed derives from cfg.seed.
    Wall-clock timings are returned separately under the "timings" key of the
    result so report bytes stay reproducible.
    """
    timings: dict[str, float] = {}
    report: dict = {}

    def stage(name):
        class _Timer:
            def __enter__(self_inner):
                self_inner.t0 = time.perf_counter()

            def __exit__(self_inner, exc_type, exc, tb):
                timings[name] = time.perf_counter() - self_inner.t0
                if exc is not None and not isinstance(exc, StageError):
                    raise StageError(name, exc) from exc

        return _Timer()

    with stage("load"):
        if dataset is None:
            if cfg.dataset_path is None or cfg.schema_path is None:
                raise ConfigError("dataset and schema paths (or an in-memory dataset) required")
            schema = load_schema(cfg.schema_path)
            dataset = load_csv(cfg.dataset_path, schema)
        schema = dataset.schema
        group = schema.group(cfg.group) if cfg.group else schema.sensitive[0]

    with stage("split"):
        train, test = stratified_split(dataset, cfg.test_fraction, cfg.seed)
        train_enc, test_enc = encode(train), encode(test)
        report["data"] = {
            "n_total": len(dataset),
            "n_train": len(train),
            "n_test": len(test),
            "dropped_rows": dataset.provenance.get("dropped_rows", 0),
            "group": {"name": group.name, "privileged": group.privileged, "unprivileged": group.unprivileged},
            "group_distribution": list(group_distribution(dataset, group)),
            "ex_ante_sp": ex_ante_sp(dataset, group),
        }

    with stage("fit_decision_maker"):
        seed_dm = int(np.random.SeedSequence([cfg.seed, 1]).generate_state(1)[0])
        f, dm_params = _fit_spec(cfg.decision_maker, train_enc, train.target01(), seed_dm)
        report["decision_maker"] = {
            "family": cfg.decision_maker.family,
            "hyperparams": dm_params,
            "eval": evaluate(f, test_enc, test.target01()).as_dict(),
        }

    with stage("fit_sensitive_classifier"):
        seed_fs = int(np.random.SeedSequence([cfg.seed, 2]).generate_state(1)[0])
        f_s, fs_params = _fit_spec(
            cfg.sensitive_classifier, train_enc, train.sensitive01(group), seed_fs
        )
        report["sensitive_classifier"] = {
            "family": cfg.sensitive_classifier.family,
            "hyperparams": fs_params,
            "eval": evaluate(f_s, test_enc, test.sensitive01(group)).as_dict(),
        }

    with stage("fairness_metrics"):
        preds = f.predict(test_enc)
        y = test.target01()
        s = test.sensitive01(group)
        def _safe(fn, *args):
            try:
                return fn(*args)
            except fairmetrics.MetricError as exc:
                return {"undefined": str(exc)}
        report["group_fairness"] = {
            "dsp": _safe(fairmetrics.dsp, preds, s),
            "deo": _safe(fairmetrics.deo, preds, y, s),
            "dao": _safe(fairmetrics.dao, preds, y, s),
        }

    with stage("select_negatives"):
        neg_idx = np.flatnonzero(preds == 0)
        samples = [test.feature_row(int(i)) for i in neg_idx]
        true_groups = [int(s[i]) for i in neg_idx]
        report["n_negative"] = len(samples)

    strategies = ["kdtree", "genetic"] if cfg.strategy == "both" else [cfg.strategy]
    report["strategies"] = {}
    all_sets: dict[str, list] = {}
    for strat in strategies:
        with stage(f"generate_{strat}"):
            seed_gen = int(np.random.SeedSequence([cfg.seed, 3]).generate_state(1)[0])
            gen_cfg = None
            if strat == "genetic":
                gen_cfg = default_genetic_config(
                    train, cfg.k, seed=seed_gen,
                    immutable=tuple(cfg.genetic.get("immutable", ())),
                    population=cfg.genetic.get("population", 200),
                    generations=cfg.genetic.get("generations", 100),
                )
            sets = batch_generate(
                samples,
                strat,
                cfg.k,
                f,
                schema,
                pool=train,
                train=train,
                genetic_cfg=gen_cfg,
                base_seed=seed_gen,
                workers=cfg.workers,
            )
            all_sets[strat] = sets

        with stage(f"metrics_{strat}"):
            report["strategies"][strat] = strategy_metrics(
                sets, true_groups, f_s, schema, cfg.k,
                cfg.ablation_lengths or _default_ablation(cfg.k),
            )

    result = {
        "config": _config_echo(cfg),
        "report": report,
        "timings": timings,
        "sets": all_sets,
        "true_groups": true_groups,
    }
    return result


def strategy_metrics(sets, true_groups, f_s, schema, k, ablation_lengths) -> dict:
    """Flip records, group summaries, delta, ablation, and proxy ranking."""
    records = [
        fairmetrics.cflips_sample(i, true_groups[i], sets[i], f_s, schema)
        for i in range(len(sets))
    ]
    priv = fairmetrics.cflips_group(records, privileged=True)
    unpriv = fairmetrics.cflips_group(records, privileged=False)
    delta = fairmetrics.delta_cflips(priv, unpriv)
    curves = fairmetrics.ablation_curve(records, list(ablation_lengths))

    pairs = [
        (sets[r.sample_id].origin, member)
        for r in records
        if r.included
        for member in sets[r.sample_id].members
    ]
    if len(pairs) >= 3:
        prox = proxy_correlations(pairs, f_s, schema)
        proxy_doc = {
            "entries": [
                {"feature": e.feature, "level": e.level, "rho": e.rho, "n_pairs": e.n_pairs}
                for e in prox.entries
            ],
            "top": [
                {"feature": e.feature, "level": e.level, "rho": e.rho}
                for e in top_k(prox, 6)
            ],
            "per_feature": prox.per_feature(),
        }
    else:
        proxy_doc = {"undefined": f"only {len(pairs)} pairs"}

    return {
        "records": [
            {
                "sample_id": r.sample_id,
                "true_group": r.true_group,
                "origin_pred": r.origin_pred,
                "cflips": r.cflips,
                "included": r.included,
                "n_members": len(r.member_preds),
            }
            for r in records
        ],
        "excluded_by_fs_misprediction": sum(
            1 for r in records if r.cflips is not None and not r.included
        ),
        "privileged": {"n": priv.n_samples, "mean_cflips": priv.mean_cflips},
        "unprivileged": {"n": unpriv.n_samples, "mean_cflips": unpriv.mean_cflips},
        "delta_cflips": delta,
        "ablation": curves,
        "shortfall": shortfall_stats(sets, k),
        "proxy": proxy_doc,
    }


def _config_echo(cfg: AuditConfig) -> dict:
    return {
        "dataset": cfg.dataset_path,
        "schema": cfg.schema_path,
        "decision_maker": {
            "family": cfg.decision_maker.family,
            "hyperparams": cfg.decision_maker.hyperparams,
            "grid": cfg.decision_maker.grid,
        },
        "sensitive_classifier": {
            "family": cfg.sensitive_classifier.family,
            "hyperparams": cfg.sensitive_classifier.hyperparams,
            "grid": cfg.sensitive_classifier.grid,
        },
        "group": cfg.group,
        "strategy": cfg.strategy,
        "k": cfg.k,
        "test_fraction": cfg.test_fraction,
        "seed": cfg.seed,
    }


def report_emit(result: dict, out_dir: str, formats: tuple[str, ...] = ("json", "csv-bundle")):
    """Write report.json (byte-stable), counterfactual dumps, CSV bundle,
    and timings.json (timings stay out of report.json on purpose)."""
    os.makedirs(out_dir, exist_ok=True)
    doc = {"config": result["config"], "report": result["report"]}
    if "json" in formats:
        with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
            json.dump(doc, fh, sort_keys=True, indent=1)
            fh.write("\n")
    with open(os.path.join(out_dir, "timings.json"), "w", encoding="utf-8") as fh:
        json.dump(result["timings"], fh, sort_keys=True, indent=1)
    for strat, sets in result.get("sets", {}).items():
        dump_sets(
            sets,
            os.path.join(out_dir, f"counterfactuals_{strat}.jsonl"),
            true_groups=result.get("true_groups"),
        )
    if "csv-bundle" in formats:
        _emit_csv_bundle(result["report"], out_dir)


def _emit_csv_bundle(report: dict, out_dir: str):
    import csv as _csv

    for strat, block in report.get("strategies", {}).items():
        with open(os.path.join(out_dir, f"flip_records_{strat}.csv"), "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["sample_id", "true_group", "origin_pred", "cflips", "included", "n_members"])
            for r in block["records"]:
                w.writerow([r["sample_id"], r["true_group"], r["origin_pred"],
                            r["cflips"], r["included"], r["n_members"]])
        with open(os.path.join(out_dir, f"ablation_{strat}.csv"), "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["group", "prefix_length", "mean_cflips"])
            for grp, curve in block["ablation"].items():
                for length, val in curve:
                    w.writerow([grp, length, val])
        prox = block.get("proxy", {})
        if "entries" in prox:
            with open(os.path.join(out_dir, f"proxy_{strat}.csv"), "w", newline="") as fh:
                w = _csv.writer(fh)
                w.writerow(["feature", "level", "rho", "n_pairs"])
                for e in prox["entries"]:
                    w.writerow([e["feature"], e["level"], e["rho"], e["n_pairs"]])
