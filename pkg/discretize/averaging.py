"""
Champs moyennés par cellule v_i^N(t, μ, x) = (1/π(Ω_i)) ∫_{Ω_i} v(t, μ, ω, x) dπ(ω).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from config.settings import DEFAULT_QUADRATURE_NODES
from discretize.partition import Partition
from discretize.quadrature import LabelQuadrature
from fields.base_field import VectorField
from measures.fibred_measure import FibredMeasure


@dataclass(eq=False)
class CellFieldFamily:
    """
    Famille des N champs moyennés sur les cellules d'une partition.

    Attributes:
        field: Champ macroscopique
        partition: Partition des labels
        quad: Quadrature dont la ligne i est la cellule i
    """

    field: VectorField
    partition: Partition
    quad: LabelQuadrature

    def __len__(self) -> int:
        return len(self.partition)

    @property
    def exact(self) -> bool:
        """Moyennes exactes (dépendance en label constante par morceaux sur des ruptures connues)."""
        return self.field.piecewise_constant

    def velocities(self, t: float, mu: FibredMeasure, cell_of: np.ndarray, x: np.ndarray) -> np.ndarray:
        """Vitesses v_{cell_of[p]}(t, μ, x_p) pour toutes les particules."""
        return self.field.cell_velocities(t, mu, self.quad, np.asarray(cell_of, dtype=np.int64), x)

    def __call__(self, i: int, t: float, mu: FibredMeasure, x) -> np.ndarray:
        points = np.asarray(x, dtype=float)
        single = points.ndim == 1
        points = points.reshape(1, -1) if single else points
        values = self.velocities(t, mu, np.full(len(points), i), points)
        return values[0] if single else values


def average_field(v: VectorField, part: Partition, q: Optional[int] = DEFAULT_QUADRATURE_NODES) -> CellFieldFamily:
    """
    Moyenne un champ sur les cellules d'une partition.

    Les noeuds sont placés aux quantiles de π dans chaque cellule; lorsque la dépendance
    en label est constante par morceaux sur une grille connue, chaque morceau reçoit un
    noeud pondéré par sa masse et la moyenne est exacte.

    Args:
        v: Champ de vecteurs
        part: Partition des labels
        q: Noeuds de quadrature par morceau

    Returns:
        La famille des champs moyennés
    """
    return CellFieldFamily(v, part, v.quadrature(part.cells, part.marginal, q or DEFAULT_QUADRATURE_NODES))
