"""
Exporter pour les plans de transport optimaux.
"""

from typing import Any, Dict

from exporters.base_exporter import BaseExporter


class PlanExporter(BaseExporter):
    """
    Exporter du plan optimal d'un calcul de distance (toujours en JSON).
    """

    def export(self, plan: Dict[str, Any]) -> Dict[str, Any]:
        filepath = self.save_to_json(plan, self.filename("plan"))
        print(f"Plan de transport exporté: {filepath}")
        return {"type": "plan", "metric": plan.get("metric"), "filepath": filepath}
