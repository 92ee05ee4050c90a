"""
Exporter pour les trajectoires particulaires et les courbes de mesures.
"""

from typing import Any, Dict, Optional

import pandas as pd

from dynamics.curves import MeasureCurve, TrajectoryEnsemble
from exporters.base_exporter import BaseExporter


def curve_table(curve: MeasureCurve) -> pd.DataFrame:
    """Résumé par noeud: rayon du support, moment fibré d'ordre 1 et barycentre global."""
    frame = pd.DataFrame({
        "t": curve.grid.nodes,
        "support_radius": curve.radii(),
        "moment": curve.moments(),
    })
    barycentres = curve.barycentres()
    for j in range(barycentres.shape[1]):
        frame[f"barycentre_{j}"] = barycentres[:, j]
    return frame


class TrajectoryExporter(BaseExporter):
    """
    Exporter des résultats d'une simulation: table longue des trajectoires (toujours en
    CSV) et courbe de mesures empiriques (JSON, ou résumé par noeud en CSV).
    """

    def export(self, traj: TrajectoryEnsemble, curve: Optional[MeasureCurve] = None) -> Dict[str, Any]:
        """
        Exporte les trajectoires et, si elle est fournie, la courbe de mesures.

        Args:
            traj: Trajectoires du système de particules
            curve: Courbe des mesures empiriques associée

        Returns:
            Statistiques de l'export
        """
        print("Exportation des trajectoires...")
        trajectories_filepath = self.save_to_csv(traj.to_frame(), self.filename("trajectories"))
        print(f"Trajectoires exportées avec succès: {trajectories_filepath}")

        export_stats = {
            "type": "trajectories",
            "particles": traj.N,
            "nodes": len(traj.grid),
            "filepath": trajectories_filepath,
        }

        if curve is not None:
            if self.export_format == "csv":
                curve_filepath = self.save_to_csv(curve_table(curve), self.filename("curve"))
            else:
                curve_filepath = self.save_to_json(curve.to_dict(), self.filename("curve"))
            print(f"Courbe de mesures exportée avec succès: {curve_filepath}")
            export_stats["curve_filepath"] = curve_filepath

        return export_stats
