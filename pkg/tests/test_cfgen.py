import numpy as np
import pytest

from cfaudit.cfgen import (
    CounterfactualSet,
    GenerationError,
    GeneticConfig,
    batch_generate,
    default_genetic_config,
    dump_sets,
    generate_genetic,
    generate_kdtree,
    load_sets,
    perturbation,
    shortfall_stats,
)
from cfaudit.data import Dataset, encode_rows
from cfaudit.distance import GowerDistance
from cfaudit.schema import Feature, FeatureSchema, GroupSpec

from conftest import FixedClassifier, make_dataset


def numeric_schema(names=("v",)):
    return FeatureSchema(
        features=tuple(Feature(n, "numeric") for n in names),
        target="y",
        positive_label="1",
        sensitive=(),
    )


def dataset_from_rows(schema, rows, target="no"):
    columns = {}
    for f in schema.features:
        vals = [r[f.name] for r in rows]
        dtype = float if f.kind == "numeric" else object
        columns[f.name] = np.asarray(vals, dtype=dtype)
    columns[schema.target] = np.asarray([target] * len(rows), dtype=object)
    for g in schema.sensitive:
        columns[g.name] = np.asarray([g.privileged] * len(rows), dtype=object)
    return Dataset(schema, columns)


class TestKdtreeStrategy:
    def test_one_dimensional_pool(self):
        schema = numeric_schema()
        pool = dataset_from_rows(schema, [{"v": float(i)} for i in range(10)])
        f = FixedClassifier(lambda row: 1.0 if row[0] >= 5 else 0.0)
        cf = generate_kdtree({"v": 4.0}, desired=1, k=3, pool=pool, f=f)
        assert sorted(m["v"] for m in cf.members) == [5.0, 6.0, 7.0]
        assert not cf.shortfall

    def test_exhaustion_returns_whole_positive_pool(self):
        schema = numeric_schema()
        pool = dataset_from_rows(schema, [{"v": float(i)} for i in range(10)])
        f = FixedClassifier(lambda row: 1.0 if row[0] >= 5 else 0.0)
        cf = generate_kdtree({"v": 0.0}, desired=1, k=5, pool=pool, f=f)
        assert sorted(m["v"] for m in cf.members) == [5.0, 6.0, 7.0, 8.0, 9.0]

    def test_origin_already_desired_rejected(self):
        schema = numeric_schema()
        pool = dataset_from_rows(schema, [{"v": float(i)} for i in range(10)])
        f = FixedClassifier(lambda row: 1.0 if row[0] >= 5 else 0.0)
        with pytest.raises(GenerationError, match="already predicted"):
            generate_kdtree({"v": 9.0}, desired=1, k=3, pool=pool, f=f)

    def test_no_valid_rows_gives_empty_with_shortfall(self):
        schema = numeric_schema()
        pool = dataset_from_rows(schema, [{"v": float(i)} for i in range(5)])
        f = FixedClassifier(lambda row: 0.0)
        cf = generate_kdtree({"v": 1.0}, desired=1, k=3, pool=pool, f=f)
        assert cf.members == ()
        assert cf.shortfall

    def test_members_are_pool_rows(self, mixed_schema):
        pool = make_dataset(mixed_schema, 150, seed=2)
        f = FixedClassifier(lambda row: 1.0 if row[0] > 0 else 0.0)
        x = pool.feature_row(0)
        if f.predict(encode_rows([x], mixed_schema))[0] == 1:
            x = dict(x, amount=-50.0)
        cf = generate_kdtree(x, desired=1, k=10, pool=pool, f=f)
        pool_rows = [pool.feature_row(i) for i in range(len(pool))]
        for m in cf.members:
            assert m in pool_rows

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_linear_scan_oracle(self, seed, mixed_schema):
        rng = np.random.default_rng(seed)
        pool = make_dataset(mixed_schema, int(rng.integers(30, 300)), seed=seed)
        f = FixedClassifier(lambda row: 1.0 if row[0] + row[1] > 0 else 0.0)
        dist = GowerDistance.fit(pool)
        x = {"amount": -30.0, "grade": "low", "sector": "a"}
        k = int(rng.integers(1, 12))
        cf = generate_kdtree(x, desired=1, k=k, pool=pool, f=f, distance=dist)

        # brute-force restricted k-NN
        preds = f.predict(encode_rows([pool.feature_row(i) for i in range(len(pool))], mixed_schema))
        cands = [pool.feature_row(i) for i in np.flatnonzero(preds == 1)]
        oracle = sorted(dist.distance(x, c) for c in cands)[:k]
        assert np.allclose(sorted(cf.distances), oracle, atol=1e-12)
        # validity of every member
        assert all(
            f.predict(encode_rows([m], mixed_schema))[0] == 1 for m in cf.members
        )

    def test_monotone_shortfall(self, mixed_schema):
        pool = make_dataset(mixed_schema, 100, seed=9)
        f = FixedClassifier(lambda row: 1.0 if row[0] > 3 else 0.0)
        x = {"amount": -10.0, "grade": "mid", "sector": "b"}
        sizes = [
            len(generate_kdtree(x, 1, k, pool, f).members) for k in (1, 5, 20, 200)
        ]
        assert sizes == sorted(sizes)


class TestGeneticStrategy:
    def _setup(self):
        schema = numeric_schema(("x1", "x2"))
        rng = np.random.default_rng(0)
        rows = [{"x1": float(a), "x2": float(b)} for a, b in rng.random((200, 2))]
        train = dataset_from_rows(schema, rows)
        f = FixedClassifier(lambda row: 1.0 if row[0] >= 0.5 else 0.0)
        dist = GowerDistance.fit(train)
        return schema, train, f, dist

    def test_all_members_valid(self):
        schema, train, f, dist = self._setup()
        cfg = default_genetic_config(train, 5, seed=1, generations=20)
        cf = generate_genetic({"x1": 0.2, "x2": 0.3}, 1, 5, cfg, f, schema, dist, train=train)
        assert len(cf.members) == 5
        for m in cf.members:
            assert m["x1"] >= 0.5
            assert 0.0 <= m["x1"] <= 1.0  # within declared train ranges

    def test_all_immutable_rejected(self):
        schema, train, f, dist = self._setup()
        cfg = GeneticConfig(population=20, immutable=("x1", "x2"), seed=0)
        with pytest.raises(GenerationError, match="mutable"):
            generate_genetic({"x1": 0.2, "x2": 0.3}, 1, 5, cfg, f, schema, dist, train=train)

    def test_immutable_feature_untouched(self):
        schema, train, f, dist = self._setup()
        cfg = default_genetic_config(train, 5, seed=2, generations=20, immutable=("x2",))
        cf = generate_genetic({"x1": 0.2, "x2": 0.3}, 1, 5, cfg, f, schema, dist, train=train)
        for m in cf.members:
            assert m["x2"] == 0.3

    def test_deterministic_for_fixed_seed(self):
        schema, train, f, dist = self._setup()
        cfg = default_genetic_config(train, 4, seed=11, generations=15)
        a = generate_genetic({"x1": 0.1, "x2": 0.8}, 1, 4, cfg, f, schema, dist, train=train)
        b = generate_genetic({"x1": 0.1, "x2": 0.8}, 1, 4, cfg, f, schema, dist, train=train)
        assert a.members == b.members
        assert a.distances == b.distances

    def test_proximity_within_2x_of_grid_oracle(self):
        schema, train, f, dist = self._setup()
        x = {"x1": 0.2, "x2": 0.3}
        cfg = default_genetic_config(train, 10, seed=3, generations=40)
        cf = generate_genetic(x, 1, 10, cfg, f, schema, dist, train=train)
        assert len(cf.members) >= 1

        # exhaustive grid at resolution 0.01 over [0,1]^2
        grid = np.arange(0.0, 1.0001, 0.01)
        best = min(
            dist.distance(x, {"x1": a, "x2": b})
            for a in grid
            for b in grid
            if a >= 0.5
        )
        assert np.mean(cf.distances) <= 2 * best + 1e-9

    def test_population_must_cover_2k(self):
        schema, train, f, dist = self._setup()
        cfg = GeneticConfig(population=8, seed=0)
        with pytest.raises(GenerationError, match="2k"):
            generate_genetic({"x1": 0.2, "x2": 0.3}, 1, 5, cfg, f, schema, dist, train=train)

    def test_categorical_genes_and_validity_filter(self, mixed_schema):
        train = make_dataset(mixed_schema, 120, seed=5)
        dist = GowerDistance.fit(train)
        f = FixedClassifier(lambda row: 1.0 if row[2] > 0.5 else 0.0)  # sector == 'a'
        cfg = default_genetic_config(train, 5, seed=7, generations=15)
        x = {"amount": 0.0, "grade": "mid", "sector": "b"}
        cf = generate_genetic(x, 1, 5, cfg, f, mixed_schema, dist, train=train)
        for m in cf.members:
            assert m["sector"] == "a"


class TestPerturbation:
    def _schema(self):
        return FeatureSchema(
            features=(
                Feature("capital-gain", "numeric"),
                Feature("education-num", "numeric"),
                Feature("workclass", "categorical", ("Private", "Public", "Unemployed")),
            ),
            target="y",
            positive_label="1",
            sensitive=(),
        )

    def test_numeric_and_categorical_signed_indicators(self):
        schema = self._schema()
        x = {"capital-gain": 2000.0, "education-num": 2.0, "workclass": "Unemployed"}
        c = {"capital-gain": 5000.0, "education-num": 6.0, "workclass": "Private"}
        eps = perturbation(x, c, schema)
        # capital-gain diff, education diff, (Private, Public, Unemployed)
        assert eps.tolist() == [3000.0, 4.0, 1.0, 0.0, -1.0]

    def test_unchanged_categorical_block_is_zero(self):
        schema = self._schema()
        x = {"capital-gain": 600.0, "education-num": 5.0, "workclass": "Private"}
        c = {"capital-gain": 2800.0, "education-num": 5.0, "workclass": "Public"}
        eps = perturbation(x, c, schema)
        assert eps.tolist() == [2200.0, 0.0, -1.0, 1.0, 0.0]

    def test_identity(self):
        schema = self._schema()
        x = {"capital-gain": 1.0, "education-num": 3.0, "workclass": "Public"}
        assert perturbation(x, x, schema).tolist() == [0.0] * 5

    def test_numeric_linearity_and_categorical_blocks_sum_zero(self, mixed_schema):
        rng = np.random.default_rng(0)
        for _ in range(20):
            delta = float(rng.normal())
            x = {"amount": float(rng.normal()), "grade": "mid", "sector": "a"}
            c = dict(x, amount=x["amount"] + delta, sector="c")
            eps = perturbation(x, c, mixed_schema)
            assert eps[0] == pytest.approx(delta, abs=1e-12)
            assert eps[2:5].sum() == 0.0
            assert set(eps[2:5].tolist()) <= {-1.0, 0.0, 1.0}


class TestBatchGenerate:
    def test_empty_input(self, mixed_schema):
        pool = make_dataset(mixed_schema, 30, seed=0)
        f = FixedClassifier(lambda row: 1.0 if row[0] > 0 else 0.0)
        assert batch_generate([], "kdtree", 3, f, mixed_schema, pool=pool) == []

    def test_rerun_identical_and_worker_invariant(self, mixed_schema):
        pool = make_dataset(mixed_schema, 80, seed=1)
        f = FixedClassifier(lambda row: 1.0 if row[0] > 0 else 0.0)
        samples = [
            {"amount": -float(i + 1), "grade": "low", "sector": "a"} for i in range(6)
        ]
        runs = [
            batch_generate(samples, "kdtree", 4, f, mixed_schema, pool=pool,
                           base_seed=3, workers=w)
            for w in (1, 1, 3)
        ]
        for other in runs[1:]:
            assert [s.members for s in other] == [s.members for s in runs[0]]

    def test_shortfall_statistics(self, mixed_schema):
        pool = make_dataset(mixed_schema, 40, seed=2)
        f = FixedClassifier(lambda row: 1.0 if row[0] > 100 else 0.0)  # nothing valid
        samples = [{"amount": 0.0, "grade": "low", "sector": "a"}] * 3
        sets = batch_generate(samples, "kdtree", 5, f, mixed_schema, pool=pool)
        stats = shortfall_stats(sets, 5)
        assert stats["n_empty"] == 3
        assert stats["median_size"] == 0.0

    def test_unknown_strategy(self, mixed_schema):
        with pytest.raises(GenerationError):
            batch_generate([], "annealing", 3, None, mixed_schema)


class TestDumpFormat:
    def test_round_trip(self, tmp_path, mixed_schema):
        pool = make_dataset(mixed_schema, 60, seed=3)
        f = FixedClassifier(lambda row: 1.0 if row[0] > 0 else 0.0)
        samples = [{"amount": -2.0, "grade": "low", "sector": "b"}]
        sets = batch_generate(samples, "kdtree", 4, f, mixed_schema, pool=pool)
        path = str(tmp_path / "dump.jsonl")
        dump_sets(sets, path, true_groups=[1])
        loaded, groups = load_sets(path)
        assert groups == [1]
        assert loaded[0].members == sets[0].members
        assert loaded[0].strategy == "kdtree"
