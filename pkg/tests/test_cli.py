"""
Tests de bout en bout de la ligne de commande et des fichiers exportés.
"""

import contextlib
import io
import json
import tempfile
import unittest
from pathlib import Path

import pandas as pd

import cli

HALVES = {
    "marginal": {"kind": "uniform"}, "dim": 1,
    "fibres": [
        {"cell": [0.0, 0.5], "weight": 0.5, "points": [{"x": [0.0], "w": 1.0}]},
        {"cell": [0.5, 1.0], "weight": 0.5, "points": [{"x": [1.0], "w": 1.0}]},
    ],
}
CONSTANT = {
    "marginal": {"kind": "uniform"}, "dim": 1,
    "fibres": [{"cell": [0.0, 1.0], "weight": 1.0, "points": [{"x": [0.5], "w": 1.0}]}],
}
SKEWED = {
    "marginal": {"kind": "power", "exponent": 2.0}, "dim": 1,
    "fibres": [{"cell": [0.0, 1.0], "weight": 1.0, "points": [{"x": [0.5], "w": 1.0}]}],
}
EXPERIMENT = {
    "experiment": "linear_demo",
    "model": {"type": "linear", "a": -1.0, "b": 0.5},
    "marginal": {"kind": "uniform"},
    "initial": {"type": "step", "breaks": [0.0, 0.3, 1.0],
                "fibres": [{"points": [[0.0]]}, {"points": [[1.0], [2.0]]}]},
    "T": 0.5,
    "steps": 5,
    "simulation": {"n": 2, "m": 3},
}


class CliTestCase(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, name, data):
        path = self.root / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)

    def run_cli(self, *argv):
        """Exécute la ligne de commande et renvoie (code de sortie, sortie standard)."""
        out = io.StringIO()
        with contextlib.redirect_stdout(out), self.assertRaises(SystemExit) as context:
            cli.main(list(argv))
        return context.exception.code, out.getvalue()

    def experiment(self, name="experiment.json", **changes):
        data = dict(EXPERIMENT)
        data.update(changes)
        return self.write(name, data)


class TestMetricCommand(CliTestCase):

    def test_fibred_distance(self):
        code, output = self.run_cli("metric", self.write("a.json", HALVES), self.write("b.json", CONSTANT))
        self.assertEqual(code, 0)
        self.assertEqual(output.strip(), "0.5")

    def test_classical_distance(self):
        code, output = self.run_cli("metric", self.write("a.json", HALVES), self.write("b.json", CONSTANT),
                                    "--metric", "classical")
        self.assertEqual(code, 0)
        self.assertLessEqual(float(output.strip()), 0.5 + 1e-9)

    def test_plan_export(self):
        out_dir = self.root / "plans"
        code, _ = self.run_cli("metric", self.write("a.json", HALVES), self.write("b.json", CONSTANT),
                               "--plan", "--out", str(out_dir))
        self.assertEqual(code, 0)
        document = json.loads((out_dir / "plan.json").read_text(encoding="utf-8"))
        self.assertEqual(document["metadata"]["export_type"], "PlanExporter")
        self.assertEqual(len(document["data"]["pieces"]), 2)

    def test_incomparable_marginals(self):
        code, output = self.run_cli("metric", self.write("a.json", CONSTANT), self.write("b.json", SKEWED))
        self.assertEqual(code, 2)
        self.assertIn("Erreur", output)

    def test_missing_file(self):
        code, _ = self.run_cli("metric", str(self.root / "nowhere.json"), self.write("b.json", CONSTANT))
        self.assertEqual(code, 1)


class TestSimulateCommand(CliTestCase):

    def test_exports(self):
        out_dir = self.root / "run"
        code, _ = self.run_cli("simulate", "--config", self.experiment(), "--out", str(out_dir))
        self.assertEqual(code, 0)

        frame = pd.read_csv(out_dir / "trajectories.csv")
        self.assertEqual(list(frame.columns), ["t", "particle_id", "cell_k", "x_0"])
        self.assertEqual(len(frame), 6 * 6)

        curve = json.loads((out_dir / "curve.json").read_text(encoding="utf-8"))
        self.assertEqual(curve["metadata"]["experiment"], "linear_demo")
        self.assertNotIn("export_date", curve["metadata"])
        self.assertEqual(len(curve["data"]["measures"]), 6)
        self.assertTrue((out_dir / "run_report.json").exists())

    def test_outputs_are_reproducible(self):
        config = self.experiment()
        self.run_cli("simulate", "--config", config, "--out", str(self.root / "first"), "--seed", "4")
        self.run_cli("simulate", "--config", config, "--out", str(self.root / "second"), "--seed", "4")
        for name in ("trajectories.csv", "curve.json"):
            self.assertEqual((self.root / "first" / name).read_bytes(), (self.root / "second" / name).read_bytes())

    def test_invalid_config(self):
        code, _ = self.run_cli("simulate", "--config", self.experiment(integrator="leapfrog"))
        self.assertEqual(code, 1)


class TestConvergeCommand(CliTestCase):

    def test_records(self):
        config = self.experiment(
            sweep={"n": [1, 2], "m_rule": "explicit", "m": 2},
            reference={"n_ref": 8, "m_ref": 4},
            seeds=2,
            constants={"C_d": 1.0},
        )
        out_dir = self.root / "sweep"
        code, _ = self.run_cli("converge", "--config", config, "--out", str(out_dir), "--threads", "2")
        self.assertEqual(code, 0)

        records = pd.read_csv(out_dir / "records.csv")
        self.assertEqual(list(records.columns), ["N", "n", "m", "seed", "sup_t_error"])
        self.assertEqual(list(records["N"]), [2, 2, 4, 4])
        self.assertTrue((records["sup_t_error"] >= 0.0).all())

        summary = json.loads((out_dir / "summary.json").read_text(encoding="utf-8"))["data"]
        self.assertIsNone(summary["fit"])
        self.assertEqual(summary["reference"]["N_ref"], 32)

    def test_invalid_threads(self):
        code, _ = self.run_cli("converge", "--config", self.experiment(), "--threads", "0")
        self.assertEqual(code, 1)


class TestValidateCommand(CliTestCase):

    def test_passing_suite(self):
        out_dir = self.root / "checks"
        config = self.experiment(validation={"suites": ["approximation"]})
        code, output = self.run_cli("validate", "--config", config, "--out", str(out_dir))
        self.assertEqual(code, 0)
        self.assertIn("Toutes les vérifications sont satisfaites.", output)
        document = json.loads((out_dir / "validation.json").read_text(encoding="utf-8"))
        self.assertTrue(document["data"]["all_passed"])

    def test_failing_suite(self):
        config = self.experiment(
            model={"type": "linear", "a": 1.0, "b": 1.0, "growth": {"m": 0.1}},
            validation={"suites": ["dynamics"], "n": 2, "m": 2, "hypotheses_samples": 4},
        )
        code, output = self.run_cli("validate", "--config", config, "--out", str(self.root / "checks"))
        self.assertEqual(code, 2)
        self.assertIn("declared_growth", output)

    def test_unknown_suite(self):
        config = self.experiment(validation={"suites": ["telepathy"]})
        code, _ = self.run_cli("validate", "--config", config, "--out", str(self.root / "checks"))
        self.assertEqual(code, 2)


if __name__ == "__main__":
    unittest.main()
