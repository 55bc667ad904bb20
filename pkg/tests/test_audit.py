import json
import os

import numpy as np
import pytest
import yaml

from cfaudit.audit import (
    AuditConfig,
    ConfigError,
    ModelSpec,
    StageError,
    config_from_file,
    report_emit,
    run_audit,
)
from cfaudit.cli import main as cli_main
from cfaudit.data import load_csv
from cfaudit.models import load_handle, save_handle, fit
from cfaudit.data import encode
from cfaudit.schema import load_schema
from cfaudit.synth import generate_synthetic, write_synthetic_csv


def small_config(**overrides):
    base = dict(
        decision_maker=ModelSpec("decision-tree", {"max_depth": 4}),
        sensitive_classifier=ModelSpec("decision-tree", {"max_depth": 3}),
        strategy="kdtree",
        k=10,
        test_fraction=0.2,
        seed=7,
    )
    base.update(overrides)
    return AuditConfig(**base)


@pytest.fixture(scope="module")
def synth_ds():
    return generate_synthetic(600, 0.8, seed=5)


@pytest.fixture(scope="module")
def synth_result(synth_ds):
    return run_audit(small_config(), dataset=synth_ds)


class TestRunAudit:
    def test_report_structure(self, synth_result):
        report = synth_result["report"]
        assert report["data"]["n_train"] + report["data"]["n_test"] == 600
        assert "kdtree" in report["strategies"]
        block = report["strategies"]["kdtree"]
        assert set(block) >= {
            "records", "privileged", "unprivileged", "delta_cflips",
            "ablation", "shortfall", "proxy",
        }
        assert report["n_negative"] == len(block["records"])

    def test_planted_proxy_detected(self, synth_result):
        block = synth_result["report"]["strategies"]["kdtree"]
        assert block["delta_cflips"] is not None and block["delta_cflips"] > 10.0
        top = block["proxy"]["top"][0]
        assert top["feature"] == "proxy"

    def test_deterministic_reports(self, synth_ds):
        a = run_audit(small_config(), dataset=synth_ds)
        b = run_audit(small_config(), dataset=synth_ds)
        assert json.dumps(a["report"], sort_keys=True) == json.dumps(b["report"], sort_keys=True)

    def test_worker_count_does_not_change_report(self, synth_ds, synth_result):
        par = run_audit(small_config(workers=4), dataset=synth_ds)
        doc = lambda r: json.dumps({"report": r["report"]}, sort_keys=True)
        assert doc(par) == doc(synth_result)

    def test_timings_cover_stages(self, synth_result):
        t = synth_result["timings"]
        for name in ("load", "split", "fit_decision_maker", "fit_sensitive_classifier",
                     "generate_kdtree", "metrics_kdtree"):
            assert name in t and t[name] >= 0.0

    def test_requires_paths_or_dataset(self):
        with pytest.raises(StageError) as exc:
            run_audit(small_config())
        assert exc.value.stage == "load"

    def test_k_zero_rejected(self):
        with pytest.raises(ConfigError):
            small_config(k=0)

    def test_bad_strategy_rejected(self):
        with pytest.raises(ConfigError):
            small_config(strategy="exhaustive")

    def test_group_fairness_present(self, synth_result):
        gf = synth_result["report"]["group_fairness"]
        for key in ("dsp", "deo", "dao"):
            v = gf[key]
            assert isinstance(v, dict) and "undefined" in v or 0.0 <= v <= 1.0


class TestReportEmit:
    def test_emit_and_recompute(self, synth_result, tmp_path):
        out = str(tmp_path / "out")
        report_emit(synth_result, out)
        with open(os.path.join(out, "report.json")) as fh:
            doc = json.load(fh)
        assert doc["report"]["data"]["n_total"] == 600
        assert os.path.exists(os.path.join(out, "timings.json"))
        assert os.path.exists(os.path.join(out, "counterfactuals_kdtree.jsonl"))

        # CSV bundle recomputation oracle: flip record rows must match the report
        import csv

        with open(os.path.join(out, "flip_records_kdtree.csv")) as fh:
            rows = list(csv.DictReader(fh))
        records = synth_result["report"]["strategies"]["kdtree"]["records"]
        assert len(rows) == len(records)
        for row, recd in zip(rows, records):
            assert int(row["sample_id"]) == recd["sample_id"]
            assert row["cflips"] == str(recd["cflips"])

    def test_timings_not_in_report_json(self, synth_result, tmp_path):
        out = str(tmp_path / "out2")
        report_emit(synth_result, out)
        text = open(os.path.join(out, "report.json")).read()
        assert "timings" not in text

    def test_byte_identical_reports(self, synth_ds, tmp_path):
        paths = []
        for i, workers in enumerate((1, 3)):
            out = str(tmp_path / f"run{i}")
            report_emit(run_audit(small_config(workers=workers), dataset=synth_ds), out)
            paths.append(os.path.join(out, "report.json"))
        assert open(paths[0], "rb").read() == open(paths[1], "rb").read()


@pytest.fixture(scope="module")
def synth_files(tmp_path_factory):
    root = tmp_path_factory.mktemp("synthfiles")
    csv_path = str(root / "data.csv")
    schema_path = str(root / "data.schema.yaml")
    write_synthetic_csv(generate_synthetic(500, 0.8, seed=11), csv_path, schema_path)
    cfg_path = str(root / "audit.yaml")
    with open(cfg_path, "w") as fh:
        yaml.safe_dump(
            {
                "dataset": "data.csv",
                "schema": "data.schema.yaml",
                "decision_maker": {"family": "decision-tree", "hyperparams": {"max_depth": 4}},
                "sensitive_classifier": {"family": "decision-tree", "hyperparams": {"max_depth": 3}},
                "strategy": "kdtree",
                "k": 8,
                "test_fraction": 0.2,
                "seed": 3,
            },
            fh,
        )
    return {"csv": csv_path, "schema": schema_path, "config": cfg_path, "root": root}


class TestConfigFile:
    def test_relative_paths_resolved(self, synth_files):
        cfg = config_from_file(synth_files["config"])
        assert os.path.isabs(cfg.dataset_path) and os.path.exists(cfg.dataset_path)
        assert cfg.k == 8

    def test_missing_file_named(self, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("dataset: nowhere.csv\nschema: also_nowhere.yaml\n")
        with pytest.raises(ConfigError, match="nowhere.csv"):
            config_from_file(str(p))


class TestCli:
    def test_audit_subcommand(self, synth_files, tmp_path, capsys):
        out = str(tmp_path / "cliout")
        code = cli_main(["audit", "--config", synth_files["config"], "--out", out])
        assert code == 0
        assert os.path.exists(os.path.join(out, "report.json"))
        assert "delta_cflips" in capsys.readouterr().out

    def test_metrics_subcommand(self, synth_files, tmp_path, capsys):
        out = str(tmp_path / "mout")
        assert cli_main(["audit", "--config", synth_files["config"], "--out", out]) == 0
        capsys.readouterr()

        # rebuild the sensitive classifier the audit used and serialize it
        schema = load_schema(synth_files["schema"])
        ds = load_csv(synth_files["csv"], schema)
        from cfaudit.data import stratified_split

        train, _ = stratified_split(ds, 0.2, 3)
        seed_fs = int(np.random.SeedSequence([3, 2]).generate_state(1)[0])
        f_s = fit("decision-tree", {"max_depth": 3}, encode(train),
                  train.sensitive01(schema.sensitive[0]), seed=seed_fs)
        model_path = str(tmp_path / "fs.json")
        save_handle(f_s, model_path)

        code = cli_main([
            "metrics",
            "--dump", os.path.join(out, "counterfactuals_kdtree.jsonl"),
            "--model", model_path,
            "--schema", synth_files["schema"],
        ])
        assert code == 0
        recomputed = json.loads(capsys.readouterr().out)
        original = json.load(open(os.path.join(out, "report.json")))
        block = original["report"]["strategies"]["kdtree"]
        assert recomputed["delta_cflips"] == pytest.approx(block["delta_cflips"])
        assert recomputed["privileged"]["mean_cflips"] == pytest.approx(
            block["privileged"]["mean_cflips"])

    def test_proxy_subcommand(self, synth_files, tmp_path, capsys):
        out = str(tmp_path / "pout")
        assert cli_main(["audit", "--config", synth_files["config"], "--out", out]) == 0
        capsys.readouterr()
        schema = load_schema(synth_files["schema"])
        ds = load_csv(synth_files["csv"], schema)
        from cfaudit.data import stratified_split

        train, _ = stratified_split(ds, 0.2, 3)
        seed_fs = int(np.random.SeedSequence([3, 2]).generate_state(1)[0])
        f_s = fit("decision-tree", {"max_depth": 3}, encode(train),
                  train.sensitive01(schema.sensitive[0]), seed=seed_fs)
        model_path = str(tmp_path / "fs.json")
        save_handle(f_s, model_path)
        csv_out = str(tmp_path / "proxy.csv")
        code = cli_main([
            "proxy",
            "--dump", os.path.join(out, "counterfactuals_kdtree.jsonl"),
            "--model", model_path,
            "--schema", synth_files["schema"],
            "--out", csv_out,
        ])
        assert code == 0
        header = open(csv_out).readline().strip()
        assert header == "feature,level,rho,n_pairs"

    def test_synth_subcommand(self, tmp_path, capsys):
        out_csv = str(tmp_path / "gen.csv")
        code = cli_main(["synth", "--n", "100", "--beta", "0.5", "--out", out_csv])
        assert code == 0
        schema_path = str(tmp_path / "gen.schema.yaml")
        assert os.path.exists(out_csv) and os.path.exists(schema_path)
        ds = load_csv(out_csv, load_schema(schema_path))
        assert len(ds) == 100

    def test_inspect_schema_subcommand(self, synth_files, capsys):
        code = cli_main([
            "inspect-schema", "--dataset", synth_files["csv"],
            "--schema", synth_files["schema"],
        ])
        assert code == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].strip() == "sensitive,feature,level,pearson,spearman"
        assert "proxy" in out

    def test_validation_error_exit_code(self, tmp_path, capsys):
        p = tmp_path / "bad.yaml"
        p.write_text("dataset: missing.csv\nschema: missing.yaml\n")
        assert cli_main(["audit", "--config", str(p)]) == 1
        assert "error" in capsys.readouterr().err

    def test_stage_error_exit_code(self, synth_files, tmp_path, capsys):
        # corrupt dataset: single-class target makes model fitting impossible
        bad_csv = str(tmp_path / "oneclass.csv")
        lines = open(synth_files["csv"]).read().splitlines()
        header = lines[0].split(",")
        t_idx = header.index("outcome")
        kept = [lines[0]] + [l for l in lines[1:] if l.split(",")[t_idx] == "yes"]
        open(bad_csv, "w").write("\n".join(kept) + "\n")
        cfg = tmp_path / "bad_stage.yaml"
        cfg.write_text(
            f"dataset: {bad_csv}\nschema: {synth_files['schema']}\n"
            "test_fraction: 0.2\nk: 5\nseed: 1\n"
        )
        assert cli_main(["audit", "--config", str(cfg)]) == 2
        assert "stage" in capsys.readouterr().err

    def test_cli_overrides(self, synth_files, tmp_path, capsys):
        out = str(tmp_path / "ovr")
        code = cli_main([
            "audit", "--config", synth_files["config"],
            "--k", "3", "--seed", "9", "--out", out,
        ])
        assert code == 0
        doc = json.load(open(os.path.join(out, "report.json")))
        assert doc["config"]["k"] == 3
        assert doc["config"]["seed"] == 9
