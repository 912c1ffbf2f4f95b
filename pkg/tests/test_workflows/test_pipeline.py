import json
import shutil
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pandas as pd

from regimerisk.core.clustering import validity_report_from_csv
from regimerisk.core.dcc import fit_dcc
from regimerisk.exceptions import ConfigError, ConvergenceError
from regimerisk.models.config_model import PipelineConfig
from regimerisk.workflows.pipeline import STAGE_NAMES, run_all, run_stage1, run_stage2, run_workflow
from regimerisk.workflows.synthetic import SyntheticMarketSpec, simulate_market, write_market

N_WEEKS = 200
REPORT_FILES = [
    "returns.csv", "table2.json", "table3.csv", "table4.json", "table5.csv", "regimes.csv",
    "correlations_by_regime.csv", "covar_by_regime.csv", "covar/INS1.csv", "covar/INS2.csv",
    "plotdata/fig3_conditional_variances.csv", "plotdata/fig4_regimes.csv", "plotdata/fig5_silhouette.csv",
    "plotdata/fig6_variance_by_regime.csv", "plotdata/fig7_panel_correlations_by_regime.csv",
    "plotdata/fig8_pair_correlations.csv", "plotdata/fig9_pair_correlations_by_regime.csv",
    "plotdata/fig10_covar_by_regime.csv", "models/margins/INDEX.json", "models/margins/INS1.json",
    "models/margins/INS2.json", "models/dcc/panel.json", "models/pairs/INS1.json", "models/pairs/INS2.json",
    "manifest.json",
]


def small_config(root: Path, **overrides) -> PipelineConfig:
    """Two insurers, eGARCH(1,1) margins and a single optimizer start."""
    market = simulate_market(SyntheticMarketSpec(n_weeks=N_WEEKS, n_insurers=2), seed=3)
    paths = write_market(market, root / "data", seed=11)
    payload = json.loads(paths["config.json"].read_text())
    payload["model"] = {"orders": {"p_mean": 0, "q_mean": 0, "p_var": 1, "q_var": 1}, "dist_family": "student_t"}
    payload["clustering"] = {"k_range": [2, 3]}
    payload["optimizer"] = {"starts": 1}
    payload["output_dir"] = str(root / "out")
    payload.update(overrides)
    paths["config.json"].write_text(json.dumps(payload))
    return PipelineConfig.load(paths["config.json"])


def output_files(outdir: Path):
    return sorted(path.relative_to(outdir).as_posix() for path in outdir.rglob("*") if path.is_file())


class TestRunAll(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.root = Path(cls.tmp.name)
        cls.config = small_config(cls.root)
        cls.outdir = Path(cls.config.output_dir)
        cls.stage1, cls.stage2, cls.manifest = run_all(cls.config)

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_report_files(self):
        for name in REPORT_FILES:
            self.assertTrue((self.outdir / name).is_file(), name)

    def test_fixed_families_write_no_selection(self):
        self.assertNotIn("model_selection.csv", self.manifest.files)
        self.assertEqual(self.stage1.margins["INS1"].selection, {})
        self.assertNotIn("selection", json.loads((self.outdir / "table4.json").read_text()))

    def test_manifest_lists_every_file(self):
        self.assertEqual(self.manifest.files, output_files(self.outdir))
        written = json.loads((self.outdir / "manifest.json").read_text())
        self.assertEqual(written["files"], self.manifest.files)
        self.assertEqual(written["config_hash"], self.config.config_hash())
        self.assertEqual(written["data_hash"], self.stage1.ingest.data_hash)
        self.assertEqual(set(written["stages"]), set(STAGE_NAMES))
        self.assertEqual(written["failures"], {})
        self.assertIn("numpy", written["versions"])

    def test_regimes_cover_every_period(self):
        regimes = pd.read_csv(self.outdir / "regimes.csv", index_col="date")
        self.assertEqual(len(regimes), N_WEEKS)
        partition = self.stage1.regimes.partition
        self.assertIn(partition.k, (2, 3))
        self.assertEqual(set(np.unique(partition.labels)), set(range(1, partition.k + 1)))
        self.assertEqual(len(self.stage1.regimes.silhouette_widths), N_WEEKS)

    def test_validity_table_round_trip(self):
        restored = validity_report_from_csv((self.outdir / "table3.csv").read_text())
        report = self.stage1.regimes.report
        self.assertEqual(len(report.entries), 3 * 2)
        for entry in report.entries:
            self.assertEqual(restored.get(entry.method, entry.k), entry)

    def test_regimes_ordered_by_variance_level(self):
        k = self.stage1.regimes.partition.k
        summaries = self.stage2.covar.variance_summaries
        self.assertEqual(set(summaries), {"INS1", "INS2"})
        level = lambda label: np.mean([summary.regimes[label].mean for summary in summaries.values()])
        self.assertGreater(level(k), level(1))
        for insurer in ("INS1", "INS2"):
            regimes = self.stage2.covar.covar_summaries[insurer].regimes
            self.assertLess(regimes[k].mean, regimes[1].mean)

    def test_covar_paths(self):
        for insurer in ("INS1", "INS2"):
            frame = pd.read_csv(self.outdir / "covar" / f"{insurer}.csv", index_col="date")
            self.assertEqual(list(frame.columns), ["covar", "var_j", "rho_t"])
            self.assertEqual(len(frame), N_WEEKS)
            self.assertTrue(np.all(frame["covar"] < 0.0))
            self.assertTrue(np.all(np.abs(frame["rho_t"]) < 1.0))
        table5 = pd.read_csv(self.outdir / "table5.csv")
        self.assertEqual(set(table5["pair"]), {"INS1", "INS2"})

    def test_deterministic_rerun(self):
        outdir = self.root / "again"
        run_all(self.config.model_copy(update={"output_dir": str(outdir)}))
        self.assertEqual(output_files(outdir), self.manifest.files)
        for name in self.manifest.files:
            self.assertEqual((outdir / name).read_bytes(), (self.outdir / name).read_bytes(), name)

    def test_reuses_stored_models(self):
        outdir = self.root / "reuse"
        shutil.copytree(self.outdir, outdir)
        config = self.config.model_copy(update={"output_dir": str(outdir)})
        with self.assertLogs("regimerisk.workflows.artifact_store", level="INFO") as logs:
            results, _ = run_workflow(config, until="fit-dcc")
        reused = [line for line in logs.output if "Reusing stored model" in line]
        self.assertEqual(len(reused), 3 + 1 + 2)
        self.assertEqual(results["fit-margins"]["INS1"].params, self.stage1.margins["INS1"].params)
        np.testing.assert_allclose(results["fit-dcc"].pairs["INS2"].path.R, self.stage2.pair_fits["INS2"].path.R,
                                   rtol=1e-12)

    def test_pair_failure_is_isolated(self):
        outdir = self.root / "failure"
        shutil.copytree(self.outdir, outdir)
        (outdir / "models" / "pairs" / "INS2.json").unlink()
        (outdir / "covar" / "INS2.csv").unlink()
        config = self.config.model_copy(update={"output_dir": str(outdir)})
        attempts = []

        def failing_fit(U, **kwargs):
            if kwargs.get("tickers") == ["INDEX", "INS2"]:
                attempts.append(kwargs["attempt"])
                raise ConvergenceError("no convergence")
            return fit_dcc(U, **kwargs)

        with patch("regimerisk.workflows.stages.fit_dcc", side_effect=failing_fit):
            stage1, stage2, manifest = run_all(config)
        self.assertEqual(attempts, [0, 1, 2])
        self.assertEqual(set(stage2.pair_fits), {"INS1"})
        self.assertIn("ConvergenceError", manifest.failures["INS2"])
        self.assertFalse((outdir / "covar" / "INS2.csv").exists())
        self.assertNotIn("covar/INS2.csv", manifest.files)
        self.assertEqual(set(stage2.covar.series), {"INS1"})

    def test_linear_algebra_failure_is_isolated(self):
        outdir = self.root / "singular"
        shutil.copytree(self.outdir, outdir)
        (outdir / "models" / "pairs" / "INS2.json").unlink()
        (outdir / "covar" / "INS2.csv").unlink()
        config = self.config.model_copy(update={"output_dir": str(outdir)})
        attempts = []

        def singular_fit(U, **kwargs):
            if kwargs.get("tickers") == ["INDEX", "INS2"]:
                attempts.append(kwargs["attempt"])
                raise np.linalg.LinAlgError("singular Qbar")
            return fit_dcc(U, **kwargs)

        with patch("regimerisk.workflows.stages.fit_dcc", side_effect=singular_fit):
            stage1, stage2, manifest = run_all(config)
        self.assertEqual(attempts, [0])
        self.assertEqual(set(stage2.pair_fits), {"INS1"})
        self.assertIn("LinAlgError: singular Qbar", manifest.failures["INS2"])
        self.assertTrue((outdir / "covar" / "INS1.csv").is_file())
        self.assertNotIn("covar/INS2.csv", manifest.files)

    def test_invalid_value_failure_is_isolated(self):
        outdir = self.root / "invalid"
        shutil.copytree(self.outdir, outdir)
        (outdir / "models" / "pairs" / "INS1.json").unlink()
        (outdir / "covar" / "INS1.csv").unlink()
        config = self.config.model_copy(update={"output_dir": str(outdir)})

        def invalid_fit(U, **kwargs):
            if kwargs.get("tickers") == ["INDEX", "INS1"]:
                raise ValueError("bad copula shape")
            return fit_dcc(U, **kwargs)

        with patch("regimerisk.workflows.stages.fit_dcc", side_effect=invalid_fit):
            _, stage2, manifest = run_all(config)
        self.assertEqual(set(stage2.pair_fits), {"INS2"})
        self.assertIn("ValueError", manifest.failures["INS1"])
        written = json.loads((outdir / "manifest.json").read_text())
        self.assertEqual(set(written["failures"]), {"INS1"})


class TestModelSelection(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.root = Path(cls.tmp.name)
        cls.config = small_config(cls.root, insurer_tickers=["INS1"])
        model = cls.config.model.model_copy(update={
            "dist_family": "auto", "dist_candidates": ["normal", "student_t"], "dist_criterion": "bic",
            "copula_family": "auto", "copula_candidates": ["gaussian", "student"], "copula_criterion": "aic",
        })
        cls.config = cls.config.model_copy(update={"model": model})
        cls.outdir = Path(cls.config.output_dir)
        cls.stage1, cls.stage2, cls.manifest = run_all(cls.config)
        cls.table = pd.read_csv(cls.outdir / "model_selection.csv")

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_selection_table(self):
        self.assertIn("model_selection.csv", self.manifest.files)
        self.assertEqual(list(self.table.columns),
                         ["scope", "name", "candidate", "aic", "bic", "hqic", "shibata", "selected"])
        margins = self.table[self.table["scope"] == "margin"]
        self.assertEqual(set(margins["name"]), {"INS1", "INDEX"})
        self.assertEqual(len(margins), 2 * 2)
        copulas = self.table[self.table["scope"] == "copula"]
        self.assertEqual(set(copulas["name"]), {"INS1"})
        self.assertEqual(set(copulas["candidate"]), {"gaussian", "student"})
        for _, rows in self.table.groupby(["scope", "name"]):
            self.assertEqual(int(rows["selected"].sum()), 1)

    def test_selected_margin_has_smallest_criterion(self):
        margins = self.table[self.table["scope"] == "margin"]
        for ticker, rows in margins.groupby("name"):
            best = rows.loc[rows["bic"].idxmin(), "candidate"]
            self.assertEqual(rows.loc[rows["selected"], "candidate"].item(), best)
            self.assertEqual(self.stage1.margins[ticker].params.dist.family, best)

    def test_selected_copula_has_smallest_criterion(self):
        rows = self.table[(self.table["scope"] == "copula") & (self.table["name"] == "INS1")]
        best = rows.loc[rows["aic"].idxmin(), "candidate"]
        self.assertEqual(self.stage2.pair_fits["INS1"].params.copula.family, best)

    def test_selection_stored_with_fit(self):
        table4 = json.loads((self.outdir / "table4.json").read_text())
        self.assertEqual(set(table4["selection"]), {"normal", "student_t"})
        config = self.config.model_copy(update={"output_dir": str(self.root / "reuse")})
        shutil.copytree(self.outdir, self.root / "reuse")
        results, _ = run_workflow(config, until="fit-dcc")
        self.assertEqual(results["fit-margins"]["INS1"].selection, self.stage1.margins["INS1"].selection)
        self.assertEqual(results["fit-dcc"].pairs["INS1"].selection, self.stage2.pair_fits["INS1"].selection)


class TestPartialRuns(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_until_regimes(self):
        config = small_config(self.root)
        results, manifest = run_workflow(config, until="regimes")
        self.assertEqual(set(results), {"ingest", "fit-margins", "regimes"})
        self.assertEqual(set(manifest.stages), {"ingest", "fit-margins", "regimes"})
        outdir = Path(config.output_dir)
        self.assertFalse((outdir / "table3.csv").exists())
        self.assertFalse((outdir / "models" / "dcc").exists())
        self.assertEqual(manifest.files, output_files(outdir))

    def test_two_stage_api(self):
        config = small_config(self.root, insurer_tickers=["INS1"])
        stage1 = run_stage1(config)
        self.assertEqual(stage1.regimes.features.tickers, ["INS1"])
        self.assertIsNone(stage1.panel_dcc)
        stage2 = run_stage2(config, stage1)
        self.assertEqual(set(stage2.pair_fits), {"INS1"})
        self.assertEqual(len(stage2.covar.series["INS1"].values), N_WEEKS)

    def test_index_only(self):
        config = small_config(self.root, insurer_tickers=[])
        stage1, stage2, manifest = run_all(config)
        self.assertEqual(stage1.regimes.features.tickers, ["INDEX"])
        self.assertEqual(stage2.pair_fits, {})
        self.assertEqual(manifest.failures, {})
        table5 = pd.read_csv(Path(config.output_dir) / "table5.csv")
        self.assertEqual(len(table5), 0)

    def test_empty_candidate_list(self):
        with self.assertRaises(ConfigError):
            small_config(self.root, model={"dist_family": "auto", "dist_candidates": []})

    def test_missing_ticker(self):
        config = small_config(self.root, insurer_tickers=["INS1", "INS9"])
        with self.assertRaises(ConfigError):
            run_workflow(config)


if __name__ == "__main__":
    unittest.main()
