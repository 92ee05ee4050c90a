"""
Exporter pour les expériences de convergence: enregistrements et résumé.
"""

from typing import Any, Dict, Sequence

from analysis.rates import ConvergenceRecord
from exporters.base_exporter import BaseExporter


class ConvergenceExporter(BaseExporter):
    """
    Exporter des enregistrements (N, n, m, graine, erreur) et du résumé (pente ajustée,
    bornes, constantes, résolution de la référence).

    Les durées d'exécution ne sont pas écrites ici: elles vont dans le rapport d'exécution.
    """

    def export(self, records: Sequence[ConvergenceRecord], summary: Dict[str, Any]) -> Dict[str, Any]:
        """
        Exporte les enregistrements en CSV et le résumé en JSON.

        Args:
            records: Enregistrements triés par (N, graine)
            summary: Résumé de l'expérience

        Returns:
            Statistiques de l'export
        """
        print("Exportation des enregistrements de convergence...")
        rows = [r.to_dict(with_runtime=False) for r in sorted(records, key=lambda r: (r.N, r.seed))]
        records_filepath = self.save_to_csv(rows, self.filename("records"))
        summary_filepath = self.save_to_json(summary, self.filename("summary"))
        print(f"Enregistrements exportés avec succès: {records_filepath}")
        print(f"Résumé exporté avec succès: {summary_filepath}")

        return {
            "type": "convergence",
            "count": len(rows),
            "filepath": records_filepath,
            "summary_filepath": summary_filepath,
        }
