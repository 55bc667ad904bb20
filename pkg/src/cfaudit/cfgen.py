"""Counterfactual generation: neighbor-search and genetic strategies."""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, encode_rows
from .distance import GowerDistance
from .kdtree import KDTree
from .schema import CATEGORICAL, NUMERIC, FeatureSchema


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class CounterfactualSet:
    """The generated counterfactuals of one origin sample.

    Every member is re-verified against the decision maker after generation;
    shortfall is set when fewer than the requested k valid members exist.
    """

    origin: dict
    desired_outcome: int
    members: tuple[dict, ...]
    distances: tuple[float, ...]
    strategy: str
    seed: int
    requested_k: int

    @property
    def shortfall(self) -> bool:
        return len(self.members) < self.requested_k

    def prefix(self, length: int) -> tuple[dict, ...]:
        return self.members[:length]


def _predict_rows(f, rows: list[dict], schema: FeatureSchema) -> np.ndarray:
    return f.predict(encode_rows(rows, schema))


def _check_origin(x: dict, desired: int, f, schema: FeatureSchema):
    pred = int(_predict_rows(f, [x], schema)[0])
    if pred == desired:
        raise GenerationError(
            f"origin is already predicted {desired}; counterfactuals are undefined"
        )


def generate_kdtree(
    x: dict,
    desired: int,
    k: int,
    pool: Dataset,
    f,
    distance: GowerDistance | None = None,
) -> CounterfactualSet:
    """k nearest pool rows (Gower distance) among those the model predicts
    as the desired outcome. Members are real pool rows, never synthesized."""
    if len(pool) == 0:
        raise GenerationError("pool is empty")
    if k < 1:
        raise GenerationError("k must be >= 1")
    schema = pool.schema
    _check_origin(x, desired, f, schema)
    if distance is None:
        distance = GowerDistance.fit(pool)

    from .data import encode

    preds = f.predict(encode(pool))
    candidates = [pool.feature_row(i) for i in np.flatnonzero(preds == desired)]
    if not candidates:
        return CounterfactualSet(x, desired, (), (), "kdtree", 0, k)

    pts = distance.to_search_space(candidates)
    tree = KDTree(pts, distance.kinds, 1.0 / distance.n_features)
    q = distance.to_search_space([x])[0]
    dists, idx = tree.query(q, min(k, len(candidates)))
    members = tuple(candidates[i] for i in idx)
    return CounterfactualSet(x, desired, members, tuple(float(d) for d in dists), "kdtree", 0, k)


@dataclass(frozen=True)
class GeneticConfig:
    population: int = 200
    generations: int = 100
    mutation_rate: float = 0.1
    crossover_rate: float = 0.8
    proximity_weight: float = 1.0
    sparsity_weight: float = 0.5
    diversity_weight: float = 1.0
    immutable: tuple[str, ...] = ()
    ranges: dict = field(default_factory=dict)  # feature -> (lo, hi) for numerics
    seed: int = 0

    def __post_init__(self):
        for w in (self.proximity_weight, self.sparsity_weight, self.diversity_weight):
            if w < 0:
                raise GenerationError("weights must be >= 0")
        if self.population < 2:
            raise GenerationError("population must be >= 2")


_INVALID_PENALTY = 1e6


def _feature_stats(train: Dataset) -> dict:
    stats = {}
    for f in train.schema.features:
        if f.kind == NUMERIC:
            col = train.columns[f.name].astype(float)
            stats[f.name] = {
                "std": float(col.std()),
                "lo": float(col.min()),
                "hi": float(col.max()),
            }
    return stats


def default_genetic_config(train: Dataset, k: int, seed: int = 0, **overrides) -> GeneticConfig:
    """Ranges default to observed train min/max; population stays >= 2k."""
    ranges = {
        name: (s["lo"], s["hi"]) for name, s in _feature_stats(train).items()
    }
    ranges.update(overrides.pop("ranges", {}))
    population = max(overrides.pop("population", 200), 2 * k)
    return GeneticConfig(population=population, ranges=ranges, seed=seed, **overrides)


def generate_genetic(
    x: dict,
    desired: int,
    k: int,
    cfg: GeneticConfig,
    f,
    schema: FeatureSchema,
    distance: GowerDistance,
    train: Dataset | None = None,
) -> CounterfactualSet:
    """Evolve candidates toward the desired decision, favoring proximity,
    sparsity, and diversity. Returns up to k valid, distinct members."""
    mutable = [feat for feat in schema.features if feat.name not in cfg.immutable]
    if not mutable:
        raise GenerationError("mutable features non-empty is required")
    if cfg.population < 2 * k:
        raise GenerationError("population must be >= 2k")
    _check_origin(x, desired, f, schema)

    rng = np.random.default_rng(cfg.seed)
    stats = _feature_stats(train) if train is not None else {}

    def num_range(feat):
        if feat.name in cfg.ranges:
            return cfg.ranges[feat.name]
        s = stats.get(feat.name)
        return (s["lo"], s["hi"]) if s else (float(x[feat.name]) - 1.0, float(x[feat.name]) + 1.0)

    def num_sigma(feat):
        s = stats.get(feat.name)
        if s and s["std"] > 0:
            return 0.1 * s["std"]
        lo, hi = num_range(feat)
        return 0.1 * (hi - lo) if hi > lo else 1.0

    def mutate_gene(feat, value):
        if feat.kind == NUMERIC:
            lo, hi = num_range(feat)
            return float(np.clip(value + rng.normal(0.0, num_sigma(feat)), lo, hi))
        return feat.levels[rng.integers(len(feat.levels))]

    def random_candidate():
        cand = dict(x)
        for feat in mutable:
            if feat.kind == NUMERIC:
                lo, hi = num_range(feat)
                cand[feat.name] = float(rng.uniform(lo, hi))
            else:
                cand[feat.name] = feat.levels[rng.integers(len(feat.levels))]
        return cand

    def mutate(cand):
        out = dict(cand)
        for feat in mutable:
            if rng.random() < cfg.mutation_rate:
                out[feat.name] = mutate_gene(feat, out[feat.name])
        return out

    def crossover(a, b):
        if rng.random() >= cfg.crossover_rate:
            return dict(a)
        child = dict(a)
        for feat in mutable:
            if rng.random() < 0.5:
                child[feat.name] = b[feat.name]
        return child

    def changed_fraction(cand):
        changed = sum(1 for feat in schema.features if cand[feat.name] != x[feat.name])
        return changed / len(schema.features)

    def member_key(cand):
        return tuple(cand[feat.name] for feat in schema.features)

    # archive of every valid candidate seen, keyed for distinctness
    archive: dict[tuple, tuple[float, dict]] = {}

    population = [mutate(dict(x)) for _ in range(cfg.population // 2)]
    population += [random_candidate() for _ in range(cfg.population - len(population))]

    for _ in range(cfg.generations):
        preds = _predict_rows(f, population, schema)
        dists = np.array([distance.distance(x, c) for c in population])
        sparsity = np.array([changed_fraction(c) for c in population])

        valid_mask = preds == desired
        for i in np.flatnonzero(valid_mask):
            key = member_key(population[i])
            if key != member_key(x) and key not in archive:
                archive[key] = (float(dists[i]), dict(population[i]))

        elite = sorted(archive.values(), key=lambda t: t[0])[:k]
        if len(elite) >= 2:
            rows = [e[1] for e in elite]
            pair = [
                distance.distance(rows[i], rows[j])
                for i in range(len(rows))
                for j in range(i + 1, len(rows))
            ]
            diversity_bonus = float(np.mean(pair))
        else:
            diversity_bonus = 0.0

        fitness = (
            np.where(valid_mask, 0.0, _INVALID_PENALTY)
            + cfg.proximity_weight * dists
            + cfg.sparsity_weight * sparsity
            - cfg.diversity_weight * diversity_bonus
        )

        order = np.argsort(fitness, kind="stable")
        n_elite = max(2, cfg.population // 10)
        parents = [population[i] for i in order[: cfg.population // 2]]
        next_pop = [dict(population[i]) for i in order[:n_elite]]
        while len(next_pop) < cfg.population:
            a = parents[rng.integers(len(parents))]
            b = parents[rng.integers(len(parents))]
            next_pop.append(mutate(crossover(a, b)))
        population = next_pop

    ranked = sorted(archive.values(), key=lambda t: t[0])[:k]
    if ranked:
        # trust nothing: re-verify validity before returning
        preds = _predict_rows(f, [r for _, r in ranked], schema)
        ranked = [rv for rv, p in zip(ranked, preds) if p == desired]
    members = tuple(r for _, r in ranked)
    dists = tuple(d for d, _ in ranked)
    return CounterfactualSet(x, desired, members, dists, "genetic", cfg.seed, k)


def perturbation(x: dict, c_x: dict, schema: FeatureSchema) -> np.ndarray:
    """Perturbation vector aligned with the encoded column map: plain
    differences for numeric/ordinal, signed +1/-1 level indicators for
    categoricals (all zeros when the level is unchanged)."""
    out = []
    for f in schema.features:
        if f.kind == CATEGORICAL:
            for lvl in f.levels:
                was = x[f.name] == lvl
                now = c_x[f.name] == lvl
                out.append(0.0 if was == now else (1.0 if now else -1.0))
        elif f.kind == NUMERIC:
            out.append(float(c_x[f.name]) - float(x[f.name]))
        else:
            out.append(float(f.levels.index(c_x[f.name]) - f.levels.index(x[f.name])))
    return np.asarray(out, dtype=float)


def batch_generate(
    samples: list[dict],
    strategy: str,
    k: int,
    f,
    schema: FeatureSchema,
    pool: Dataset | None = None,
    train: Dataset | None = None,
    genetic_cfg: GeneticConfig | None = None,
    base_seed: int = 0,
    workers: int = 1,
) -> list[CounterfactualSet]:
    """Generate one CounterfactualSet per negatively predicted sample.

    Per-sample seeds derive from (base_seed, index), so results are identical
    for any worker count. Shortfalls are recorded, never raised.
    """
    if strategy not in ("kdtree", "genetic"):
        raise GenerationError(f"unknown strategy {strategy!r}")
    reference = train if train is not None else pool
    distance = GowerDistance.fit(reference) if reference is not None else None

    def one(i: int) -> CounterfactualSet:
        sample_seed = int(np.random.SeedSequence([base_seed, i]).generate_state(1)[0])
        if strategy == "kdtree":
            return generate_kdtree(samples[i], 1, k, pool, f, distance=distance)
        cfg = genetic_cfg if genetic_cfg is not None else default_genetic_config(train, k)
        cfg = GeneticConfig(
            population=cfg.population,
            generations=cfg.generations,
            mutation_rate=cfg.mutation_rate,
            crossover_rate=cfg.crossover_rate,
            proximity_weight=cfg.proximity_weight,
            sparsity_weight=cfg.sparsity_weight,
            diversity_weight=cfg.diversity_weight,
            immutable=cfg.immutable,
            ranges=cfg.ranges,
            seed=sample_seed,
        )
        return generate_genetic(samples[i], 1, k, cfg, f, schema, distance, train=train)

    indices = range(len(samples))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool_exec:
            return list(pool_exec.map(one, indices))
    return [one(i) for i in indices]


def shortfall_stats(sets: list[CounterfactualSet], k: int) -> dict:
    sizes = [len(s.members) for s in sets]
    return {
        "requested_k": k,
        "n_samples": len(sets),
        "n_shortfall": sum(1 for s in sets if s.shortfall),
        "n_empty": sum(1 for s in sets if not s.members),
        "median_size": float(np.median(sizes)) if sizes else None,
    }


def dump_sets(
    sets: list[CounterfactualSet], path: str, true_groups: list[int] | None = None
) -> None:
    """One JSON record per sample: origin, strategy, seed, members with
    distances and validity flags, and (when known) the sample's true group."""
    with open(path, "w", encoding="utf-8") as fh:
        for i, s in enumerate(sets):
            rec = {
                "origin": s.origin,
                "desired_outcome": s.desired_outcome,
                "strategy": s.strategy,
                "seed": s.seed,
                "requested_k": s.requested_k,
                "members": list(s.members),
                "distances": list(s.distances),
                "valid": [True] * len(s.members),
                "true_group": None if true_groups is None else int(true_groups[i]),
            }
            fh.write(json.dumps(rec, sort_keys=True) + "\n")


def load_sets(path: str) -> tuple[list[CounterfactualSet], list[int | None]]:
    sets: list[CounterfactualSet] = []
    groups: list[int | None] = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            sets.append(
                CounterfactualSet(
                    origin=rec["origin"],
                    desired_outcome=rec["desired_outcome"],
                    members=tuple(rec["members"]),
                    distances=tuple(rec["distances"]),
                    strategy=rec["strategy"],
                    seed=rec["seed"],
                    requested_k=rec["requested_k"],
                )
            )
            groups.append(rec.get("true_group"))
    return sets, groups
