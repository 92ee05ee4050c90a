"""
Tests de la lecture et de la validation des configurations d'expérience.
"""

import json
import tempfile
import unittest
from pathlib import Path

from numpy.testing import assert_allclose

from config.experiment import ExperimentConfig, load_config
from measures.io import load_measure
from transport.fibred import classical_w_product, fibred_w
from utils.exceptions import ConfigError, ParseError

MINIMAL = {
    "experiment": "demo",
    "model": {"type": "linear", "a": -1.0, "b": 0.5},
    "marginal": {"kind": "uniform"},
    "initial": {"type": "product", "points": [[-1.0], [1.0]]},
}


def with_keys(**changes):
    data = dict(MINIMAL)
    data.update(changes)
    return data


class TestExperimentConfig(unittest.TestCase):

    def test_defaults(self):
        config = ExperimentConfig.from_dict(MINIMAL)
        self.assertEqual(config.T, 1.0)
        self.assertEqual(config.integrator, "rk4")
        self.assertEqual(config.sweep.n, (2, 4, 8, 16))
        self.assertEqual(config.sweep.m_for(4), 16)
        self.assertEqual(config.reference.m, 64 * 64)
        self.assertEqual(config.simulation_size, (2, 4))
        self.assertEqual(config.seeds, (0,))
        self.assertEqual(config.to_dict()["sweep"]["n"], [2, 4, 8, 16])

    def test_builders(self):
        config = ExperimentConfig.from_dict(with_keys(T=2.0, steps=10))
        self.assertEqual(config.build_field().name, "linear")
        mu0 = config.build_initial()
        assert_allclose(mu0.points[:, 0], [-1.0, 1.0])
        self.assertEqual(config.grid().dt, 0.2)

    def test_explicit_sizes(self):
        config = ExperimentConfig.from_dict(with_keys(
            sweep={"n": [2, 4], "m_rule": "explicit", "m": 10},
            simulation={"n": 3, "m": 5, "N": 15},
            seeds=3,
        ))
        self.assertEqual(config.sweep.m_for(4), 10)
        self.assertEqual(config.simulation_size, (3, 5))
        self.assertEqual(config.seeds, (0, 1, 2))

    def test_invalid_documents(self):
        invalid = [
            {k: v for k, v in MINIMAL.items() if k != "model"},
            with_keys(T=0.0),
            with_keys(T="long"),
            with_keys(integrator="leapfrog"),
            with_keys(p=3),
            with_keys(steps=0),
            with_keys(sweep={"n": []}),
            with_keys(sweep={"m_rule": "cubic"}),
            with_keys(sweep={"m_rule": "explicit"}),
            with_keys(sweep={"n": [32]}),
            with_keys(reference={"mode": "analytic"}),
            with_keys(seeds=[-1]),
            with_keys(output={"format": "xml"}),
            with_keys(constants={"C_d": 0.0}),
            with_keys(simulation={"n": 2, "m": 4, "N": 9}),
            with_keys(master_seed=-2),
        ]
        for data in invalid:
            with self.assertRaises(ConfigError, msg=str(data)):
                ExperimentConfig.from_dict(data)
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_dict(["not", "a", "dict"])

    def test_invalid_components(self):
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_dict(with_keys(marginal={"kind": "gamma"})).build_marginal()
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_dict(with_keys(initial={"type": "gaussian"})).build_initial()
        with self.assertRaises(ConfigError):
            ExperimentConfig.from_dict(with_keys(model={"type": "boids"})).build_field()

    def test_unknown_keys_are_logged(self):
        with self.assertLogs("config.experiment", level="WARNING"):
            ExperimentConfig.from_dict(with_keys(colour="blue"))

    def test_overrides(self):
        config = ExperimentConfig.from_dict(MINIMAL)
        changed = config.with_overrides(out="/tmp/elsewhere", seed=9)
        self.assertEqual(changed.output.dir, Path("/tmp/elsewhere"))
        self.assertEqual(changed.master_seed, 9)
        self.assertEqual(config.master_seed, 0)
        self.assertIs(config.with_overrides(), config)
        with self.assertRaises(ConfigError):
            config.with_overrides(seed=-1)

    def test_run_seeds(self):
        config = ExperimentConfig.from_dict(MINIMAL)
        self.assertEqual(config.run_seed(4, 1), config.run_seed(4, 1))
        self.assertNotEqual(config.run_seed(4, 1), config.run_seed(4, 2))
        self.assertNotEqual(config.run_seed(4, 1), config.with_overrides(seed=1).run_seed(4, 1))


class TestLoadConfig(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_relative_paths(self):
        path = self.root / "demo.json"
        path.write_text(json.dumps(with_keys(output={"dir": "out", "format": "csv"})), encoding="utf-8")
        config = load_config(path)
        self.assertEqual(config.output.dir, self.root.resolve() / "out")
        self.assertEqual(config.output.format, "csv")
        self.assertEqual(config.base_dir, self.root.resolve())

    def test_initial_measure_file(self):
        measure = {
            "marginal": {"kind": "uniform"}, "dim": 1,
            "fibres": [{"cell": [0.0, 1.0], "weight": 1.0, "points": [{"x": [2.0], "w": 1.0}]}],
        }
        (self.root / "mu0.json").write_text(json.dumps(measure), encoding="utf-8")
        path = self.root / "demo.json"
        path.write_text(json.dumps(with_keys(initial={"type": "file", "path": "mu0.json"})), encoding="utf-8")
        mu0 = load_config(path).build_initial()
        assert_allclose(mu0.points[:, 0], [2.0])

    def test_unreadable_files(self):
        with self.assertRaises(ParseError):
            load_config(self.root / "missing.json")
        broken = self.root / "broken.json"
        broken.write_text("{\"experiment\": ", encoding="utf-8")
        with self.assertRaises(ParseError):
            load_config(broken)
        binary = self.root / "binary.json"
        binary.write_bytes(b"\xff\xfe\xfa")
        with self.assertRaises(ParseError):
            load_config(binary)


class TestShippedFiles(unittest.TestCase):

    def setUp(self):
        self.root = Path(__file__).resolve().parent.parent

    def test_configs_build(self):
        paths = sorted((self.root / "configs").glob("*.json"))
        self.assertGreaterEqual(len(paths), 7)
        for path in paths:
            config = load_config(path)
            marginal = config.build_marginal()
            mu0 = config.build_initial(marginal)
            field = config.build_field()
            self.assertEqual(mu0.dim, field.dim, path.name)
            self.assertEqual(config.output.dir.resolve().parent, self.root / "exports")

    def test_label_swap_fixtures(self):
        mu = load_measure(self.root / "fixtures" / "label_swap_a.json")
        nu = load_measure(self.root / "fixtures" / "label_swap_b.json")
        self.assertAlmostEqual(fibred_w(mu, nu, 1), 5.0, delta=1e-10)
        self.assertAlmostEqual(classical_w_product(mu, nu, 1), 0.5, delta=1e-10)


if __name__ == "__main__":
    unittest.main()
