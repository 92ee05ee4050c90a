"""
Exporter pour les rapports de validation.
"""

from typing import Any, Dict

from analysis.validation import ValidationSummary
from exporters.base_exporter import BaseExporter


class ValidationExporter(BaseExporter):
    """
    Exporter des suites de validation: document JSON complet, ou table des rapports
    (une ligne par borne) en CSV.
    """

    def export(self, summary: ValidationSummary) -> Dict[str, Any]:
        print("Exportation des rapports de validation...")
        if self.export_format == "csv":
            rows = [{"suite": suite.name, **report.to_dict()}
                    for suite in summary.suites for report in suite.reports]
            filepath = self.save_to_csv(rows, self.filename("validation"))
        else:
            filepath = self.save_to_json(summary.to_dict(), self.filename("validation"))
        print(f"Rapports exportés avec succès: {filepath}")

        return {
            "type": "validation",
            "suites": len(summary.suites),
            "reports": sum(len(s.reports) for s in summary.suites),
            "all_passed": summary.all_passed,
            "filepath": filepath,
        }
