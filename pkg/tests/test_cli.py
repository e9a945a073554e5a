"""
Tests for the kq command line, run in-process.
"""
import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout
from unittest import mock

import numpy as np
import pandas as pd

from src.cli import main
from src.tail_report import ANALYTIC_COLUMNS, COMPARE_COLUMNS, ORACLE_COLUMNS

A_DOC = {"type": "bimodal", "p": 0.06666666666666667, "m": 6}
B_DOC = {"type": "bimodal", "p": 0.4, "m": 1}


class CliTestCase(unittest.TestCase):
    def setUp(self):
        """Temporary directory with a quiet configuration and a clean environment."""
        self.temp_dir = tempfile.TemporaryDirectory()
        self.env = mock.patch.dict(os.environ, {}, clear=True)
        self.env.start()
        self.config_path = self.write("config.yaml", "logging:\n  level: WARNING\n")

    def tearDown(self):
        self.env.stop()
        self.temp_dir.cleanup()

    def write(self, filename, content):
        path = os.path.join(self.temp_dir.name, filename)
        with open(path, "w") as f:
            f.write(content if isinstance(content, str) else json.dumps(content))
        return path

    def run_cli(self, *argv):
        """Run main() and return (exit code, stdout, stderr)."""
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv) + ["--config", self.config_path])
        return code, out.getvalue(), err.getvalue()

    def run_cli_logged(self, *argv):
        """Run main() while capturing the error records of the CLI logger."""
        with self.assertLogs("src.cli", level="ERROR") as captured:
            code, _, _ = self.run_cli(*argv)
        return code, "\n".join(captured.output)


class TestAnalyzeCommand(CliTestCase):
    def test_single_table(self):
        """Header R,exact,asymptotic,doob and one row per R."""
        path = self.write("single.json", {"model": "single", "arrivals": A_DOC})
        code, out, _ = self.run_cli("analyze", path, "--rmax", "10")
        self.assertEqual(code, 0)
        self.assertEqual(out.splitlines()[0], ",".join(ANALYTIC_COLUMNS))
        frame = pd.read_csv(io.StringIO(out))
        self.assertEqual(list(frame["R"]), list(range(11)))
        self.assertEqual(frame["exact"].iloc[0], 1.0)
        self.assertAlmostEqual(frame["exact"].iloc[1], 0.4, delta=1e-12)
        self.assertTrue(np.all(frame["doob"] > frame["asymptotic"]))

    def test_tandem_exact_column_is_empty(self):
        """Tandem has no exact series."""
        path = self.write("tandem.json", {"model": "tandem", "arrivals": A_DOC, "arrivals_b": B_DOC})
        code, out, _ = self.run_cli("analyze", path, "--rmax", "5")
        self.assertEqual(code, 0)
        self.assertEqual(out.splitlines()[1].split(",")[:2], ["0", ""])
        self.assertTrue(pd.read_csv(io.StringIO(out))["exact"].isna().all())

    def test_deep_tail_needs_no_oracle_truncation(self):
        """analyze is not bounded by --truncation; oracle is."""
        path = self.write("single.json", {"model": "single", "arrivals": A_DOC})
        code, out, _ = self.run_cli("analyze", path, "--order", "512", "--rmax", "300")
        self.assertEqual(code, 0)
        frame = pd.read_csv(io.StringIO(out))
        self.assertEqual(len(frame), 301)
        self.assertTrue(frame["exact"].iloc[:81].notna().all())
        self.assertTrue(frame["exact"].iloc[-1:].isna().all())
        self.assertGreater(frame["exact"].min(), 0.0)
        code, log = self.run_cli_logged("oracle", path, "--order", "512", "--rmax", "300")
        self.assertEqual(code, 2)
        self.assertIn("truncation", log)

    def test_priority_at_low_order(self):
        """Mass past order 96 is not a normalization error."""
        path = self.write("priority.json", {"model": "priority", "arrivals": A_DOC, "arrivals_b": B_DOC})
        code, out, _ = self.run_cli("analyze", path, "--order", "96", "--rmax", "40")
        self.assertEqual(code, 0)
        self.assertEqual(len(pd.read_csv(io.StringIO(out))), 41)

    def test_unstable_scenario(self):
        """Inadmissible models exit with 3."""
        path = self.write("hot.json", {"model": "single", "arrivals": {"type": "bimodal", "p": 0.2, "m": 6}})
        code, log = self.run_cli_logged("analyze", path)
        self.assertEqual(code, 3)
        self.assertIn("Unstable", log)

    def test_bad_input(self):
        """Broken JSON, missing files and unknown fields exit with 2."""
        broken = self.write("broken.json", "{")
        unknown = self.write("unknown.json", {"model": "single", "arrivals": A_DOC, "colour": 1})
        for path in (broken, unknown, os.path.join(self.temp_dir.name, "missing.json")):
            with self.subTest(path=path):
                code, _ = self.run_cli_logged("analyze", path)
                self.assertEqual(code, 2)

    def test_missing_config_file(self):
        """An explicitly named configuration must exist."""
        path = self.write("single.json", {"model": "single", "arrivals": A_DOC})
        with self.assertLogs("src.cli", level="ERROR"), redirect_stdout(io.StringIO()):
            code = main(["analyze", path, "--config", os.path.join(self.temp_dir.name, "nope.yaml")])
        self.assertEqual(code, 2)

    def test_several_scenarios_need_output_dir(self):
        """Two tables cannot share standard output."""
        path = self.write("single.json", {"model": "single", "arrivals": A_DOC})
        code, log = self.run_cli_logged("analyze", path, path)
        self.assertEqual(code, 2)
        self.assertIn("--output-dir", log)

    def test_output_dir(self):
        """One CSV per scenario named <stem>.<command>.csv."""
        first = self.write("single.json", {"model": "single", "arrivals": A_DOC})
        second = self.write("random.json", {"model": "random_service", "arrivals": A_DOC, "service_p": 0.9})
        target = os.path.join(self.temp_dir.name, "tables")
        code, out, _ = self.run_cli("analyze", first, second, "--output-dir", target, "--jobs", "2")
        self.assertEqual(code, 0)
        self.assertEqual(out, "")
        self.assertEqual(sorted(os.listdir(target)), ["random.analyze.csv", "single.analyze.csv"])
        frame = pd.read_csv(os.path.join(target, "random.analyze.csv"))
        self.assertEqual(list(frame.columns), ANALYTIC_COLUMNS)
        self.assertEqual(len(frame), 41)


class TestOracleCommands(CliTestCase):
    def test_oracle_table(self):
        """R,oracle on stdout, diagnostics on stderr."""
        path = self.write("single.json", {"model": "single", "arrivals": A_DOC})
        code, out, err = self.run_cli("oracle", path, "--rmax", "20", "--truncation", "80", "--tol", "1e-10")
        self.assertEqual(code, 0)
        self.assertEqual(out.splitlines()[0], ",".join(ORACLE_COLUMNS))
        self.assertEqual(len(out.splitlines()), 22)
        self.assertRegex(err, r"single: iterations=\d+ final_tv=\S+ clipped_mass_rate=\S+")

    def test_compare_table(self):
        """ratio = oracle / asymptotic, close to 1 once R is large."""
        path = self.write("single.json", {"model": "single", "arrivals": A_DOC})
        code, out, _ = self.run_cli("compare", path, "--rmax", "60", "--order", "128")
        self.assertEqual(code, 0)
        frame = pd.read_csv(io.StringIO(out))
        self.assertEqual(list(frame.columns), COMPARE_COLUMNS)
        np.testing.assert_allclose(frame["ratio"], frame["oracle"] / frame["asymptotic"], rtol=1e-12)
        self.assertTrue(np.all(np.abs(frame["ratio"].iloc[40:] - 1.0) < 0.01))

    def test_no_convergence(self):
        """An iteration cap that is too small exits with 4."""
        path = self.write("slow.json", {"model": "single", "arrivals": A_DOC, "max_iterations": 3})
        code, log = self.run_cli_logged("oracle", path)
        self.assertEqual(code, 4)
        self.assertIn("NoConvergence", log)


class TestGwCommand(CliTestCase):
    def setUp(self):
        super().setUp()
        self.offspring = self.write("offspring.json", A_DOC)
        self.affine = self.write("affine.json", B_DOC)

    def test_series(self):
        """n,coefficient for the affine offspring: 0.6 * 0.4^(n-1)."""
        code, out, _ = self.run_cli("gw", self.affine, "--series", "8")
        self.assertEqual(code, 0)
        frame = pd.read_csv(io.StringIO(out))
        self.assertEqual(list(frame.columns), ["n", "coefficient"])
        n = np.arange(1, 9)
        np.testing.assert_allclose(frame["coefficient"].iloc[1:], 0.6 * 0.4 ** (n - 1), rtol=1e-13)
        self.assertEqual(frame["coefficient"].iloc[0], 0.0)

    def test_beta(self):
        """0.9 + 0.1u^2 has second fixed point 9."""
        path = self.write("quadratic.json", {"type": "bimodal", "p": 0.1, "m": 2})
        code, out, _ = self.run_cli("gw", path, "--beta")
        self.assertEqual(code, 0)
        self.assertAlmostEqual(float(out), 9.0, delta=1e-9)

    def test_eval_and_radius(self):
        """T_A(1) = 1 and tau^6 = 2.8."""
        code, out, _ = self.run_cli("gw", self.offspring, "--eval", "1.0")
        self.assertEqual(code, 0)
        self.assertAlmostEqual(float(out), 1.0, delta=1e-12)
        code, out, _ = self.run_cli("gw", self.offspring, "--radius")
        frame = pd.read_csv(io.StringIO(out))
        self.assertAlmostEqual(frame["tau"].iloc[0], 2.8 ** (1 / 6), delta=1e-10)
        self.assertAlmostEqual(frame["rho"].iloc[0], 2.8 ** (1 / 6) / 1.12, delta=1e-10)

    def test_inadmissible(self):
        """Affine offspring has beta = +inf; arguments past rho are refused."""
        code, log = self.run_cli_logged("gw", self.affine, "--beta")
        self.assertEqual(code, 3)
        self.assertIn("DegenerateLinear", log)
        code, _ = self.run_cli_logged("gw", self.offspring, "--eval", "2.0")
        self.assertEqual(code, 3)

    def test_mode_is_required(self):
        """argparse rejects a gw call without a mode."""
        with self.assertRaises(SystemExit) as ctx, redirect_stderr(io.StringIO()):
            main(["gw", self.offspring])
        self.assertEqual(ctx.exception.code, 2)


if __name__ == '__main__':
    unittest.main()
