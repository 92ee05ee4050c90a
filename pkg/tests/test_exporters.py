"""
Tests des exporters: enveloppe de métadonnées, conversion numpy et écriture CSV.
"""

import json
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pandas as pd

from analysis.bounds import BoundReport
from analysis.rates import ConvergenceRecord
from analysis.validation import SuiteResult, ValidationSummary
from exporters.convergence_exporter import ConvergenceExporter
from exporters.validation_exporter import ValidationExporter
from utils.exceptions import ConfigError


class TestExporters(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def test_unknown_format(self):
        with self.assertRaises(ConfigError):
            ValidationExporter(self.root, "xml")

    def test_json_envelope(self):
        summary = ValidationSummary([SuiteResult("metric", [BoundReport.compare("x", np.float64(0.5), 1.0)],
                                                 {"values": np.arange(3)})])
        stats = ValidationExporter(self.root, "json", {"experiment": "demo", "master_seed": np.int64(3)}).export(summary)
        self.assertTrue(stats["all_passed"])
        document = json.loads(Path(stats["filepath"]).read_text(encoding="utf-8"))
        self.assertEqual(document["metadata"], {"export_type": "ValidationExporter",
                                                "experiment": "demo", "master_seed": 3})
        self.assertEqual(document["data"]["suites"][0]["details"]["values"], [0, 1, 2])

    def test_validation_table(self):
        summary = ValidationSummary([SuiteResult("metric", [BoundReport.compare("x", 0.5, 1.0, 0.25)])])
        stats = ValidationExporter(self.root, "csv").export(summary)
        frame = pd.read_csv(stats["filepath"])
        self.assertEqual(list(frame.columns), ["suite", "name", "lhs", "rhs", "slack", "passed", "t"])
        self.assertEqual(frame.loc[0, "suite"], "metric")

    def test_records_are_sorted_without_runtime(self):
        records = [ConvergenceRecord(8, 2, 4, 1, 0.2, 3.0), ConvergenceRecord(8, 2, 4, 0, 0.1, 5.0),
                   ConvergenceRecord(2, 1, 2, 0, 0.4, 1.0)]
        stats = ConvergenceExporter(self.root).export(records, {"fit": None, "points": [[1, 2]]})
        frame = pd.read_csv(stats["filepath"])
        self.assertEqual(list(frame["N"]), [2, 8, 8])
        self.assertEqual(list(frame["seed"]), [0, 0, 1])
        self.assertNotIn("runtime_seconds", frame.columns)
        self.assertEqual(stats["count"], 3)

    def test_nested_columns_become_json(self):
        exporter = ValidationExporter(self.root, "csv")
        path = exporter.save_to_csv([{"name": "a", "points": [1, 2]}], "nested")
        frame = pd.read_csv(path)
        self.assertEqual(json.loads(frame.loc[0, "points"]), [1, 2])


if __name__ == "__main__":
    unittest.main()
