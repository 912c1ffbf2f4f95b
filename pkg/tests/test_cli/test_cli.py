import io
import json
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from pathlib import Path
from unittest.mock import patch

import numpy as np

from regimerisk.cli import build_parser, main
from regimerisk.exceptions import ConvergenceError


def run_cli(*argv):
    stdout, stderr = io.StringIO(), io.StringIO()
    with redirect_stdout(stdout), redirect_stderr(stderr):
        code = main(list(argv))
    return code, stdout.getvalue(), stderr.getvalue()


class TestCli(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def simulate(self, weeks: int = 60, insurers: int = 1) -> Path:
        code, stdout, _ = run_cli("simulate", "--out", str(self.root / "data"), "--weeks", str(weeks),
                                  "--insurers", str(insurers), "--seed", "3")
        self.assertEqual(code, 0)
        self.assertIn("prices.csv", stdout)
        return self.root / "data" / "config.json"

    def write_config(self, **payload) -> Path:
        path = self.root / "config.json"
        path.write_text(json.dumps(payload), encoding="utf-8")
        return path

    def test_parser(self):
        args = build_parser().parse_args(["fit-dcc", "--config", "run.json", "--force", "--seed", "7"])
        self.assertEqual((args.command, args.force, args.seed), ("fit-dcc", True, 7))
        with redirect_stderr(io.StringIO()):
            with self.assertRaises(SystemExit) as raised:
                build_parser().parse_args(["run-all"])
        self.assertEqual(raised.exception.code, 2)

    def test_simulate(self):
        config_path = self.simulate(insurers=2)
        for name in ("prices.csv", "instruments.csv", "truth.csv", "config.json"):
            self.assertTrue((config_path.parent / name).is_file())
        self.assertEqual(json.loads(config_path.read_text())["insurer_tickers"], ["INS1", "INS2"])

    def test_simulate_invalid_settings(self):
        code, _, stderr = run_cli("simulate", "--out", str(self.root), "--weeks", "5")
        self.assertEqual(code, 1)
        self.assertIn("error:", stderr)

    def test_ingest(self):
        config_path = self.simulate()
        outdir = self.root / "run"
        code, stdout, _ = run_cli("ingest", "--config", str(config_path), "--out", str(outdir))
        self.assertEqual(code, 0)
        self.assertTrue(stdout.startswith("ingest:"))
        self.assertTrue((outdir / "returns.csv").is_file())
        manifest = json.loads((outdir / "manifest.json").read_text())
        self.assertEqual(manifest["stages"], ["ingest"])
        self.assertEqual(manifest["files"], ["manifest.json", "returns.csv"])

    def test_missing_config(self):
        code, _, stderr = run_cli("run-all", "--config", str(self.root / "missing.json"))
        self.assertEqual(code, 1)
        self.assertIn("not found", stderr)

    def test_invalid_json(self):
        path = self.root / "broken.json"
        path.write_text("{", encoding="utf-8")
        self.assertEqual(run_cli("report", "--config", str(path))[0], 1)

    def test_invalid_settings(self):
        path = self.write_config(data={"prices_path": "prices.csv"}, index_ticker="INDEX",
                                 clustering={"k_range": [1, 2]})
        self.assertEqual(run_cli("regimes", "--config", str(path))[0], 1)

    def test_missing_prices_file(self):
        path = self.write_config(data={"prices_path": "absent.csv"}, index_ticker="INDEX")
        code, _, stderr = run_cli("ingest", "--config", str(path), "--out", str(self.root / "run"))
        self.assertEqual(code, 2)
        self.assertIn("absent.csv", stderr)

    def test_malformed_prices(self):
        (self.root / "prices.csv").write_text("date,INDEX\n2005-01-07,100\n2005-01-14,-3\n", encoding="utf-8")
        path = self.write_config(data={"prices_path": "prices.csv"}, index_ticker="INDEX")
        self.assertEqual(run_cli("ingest", "--config", str(path), "--out", str(self.root / "run"))[0], 2)

    def test_unknown_ticker(self):
        config_path = self.simulate()
        payload = json.loads(config_path.read_text())
        payload["insurer_tickers"] = ["INS7"]
        config_path.write_text(json.dumps(payload))
        code, _, stderr = run_cli("ingest", "--config", str(config_path), "--out", str(self.root / "run"))
        self.assertEqual(code, 1)
        self.assertIn("INS7", stderr)

    def test_numeric_failure(self):
        config_path = self.simulate()
        with patch("regimerisk.cli.run_workflow", side_effect=ConvergenceError("optimizer diverged")):
            code, _, stderr = run_cli("fit-margins", "--config", str(config_path))
        self.assertEqual(code, 3)
        self.assertIn("optimizer diverged", stderr)

    def test_unexpected_failure(self):
        config_path = self.simulate()
        for error in (np.linalg.LinAlgError("singular matrix"), ValueError("bad shape")):
            with patch("regimerisk.cli.run_workflow", side_effect=error):
                code, _, stderr = run_cli("fit-dcc", "--config", str(config_path))
            self.assertEqual(code, 3)
            self.assertIn(f"{type(error).__name__}: {error}", stderr)
            self.assertNotIn("Traceback", stderr)


if __name__ == "__main__":
    unittest.main()
