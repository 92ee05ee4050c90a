"""
Dynamique fermée des barycentres des fibres pour un champ linéaire:
dX̄_k/dt = A_k X̄_k + Σ_c B_kc X̄_c.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import expm

from config.settings import DEFAULT_QUADRATURE_NODES
from dynamics.time_grid import TimeGrid
from fields.linear_field import LinearField
from measures.fibred_measure import FibredMeasure
from utils.exceptions import ValidationError


@dataclass(eq=False)
class BarycentricCurve:
    """
    Barycentres des fibres (S+1, C, d) sur les cellules de la donnée initiale.
    """

    grid: TimeGrid
    barycentres: np.ndarray
    weights: np.ndarray

    def global_barycentre(self) -> np.ndarray:
        """Barycentre global (S+1, d)."""
        return np.einsum("k,skd->sd", self.weights, self.barycentres)


def barycentric_curve(field: LinearField, mu0: FibredMeasure, grid: TimeGrid,
                      q: Optional[int] = DEFAULT_QUADRATURE_NODES) -> BarycentricCurve:
    """
    Intègre exactement (exponentielle de matrice) le système linéaire des barycentres,
    les noyaux a et b étant moyennés sur les cellules de μ⁰.

    Raises:
        ValidationError: Si le champ n'est pas linéaire
    """
    if not isinstance(field, LinearField):
        raise ValidationError("La réduction barycentrique exige un champ linéaire")
    quad = field.quadrature(mu0.cells, mu0.marginal, q or DEFAULT_QUADRATURE_NODES)
    cells, marginal = mu0.cells, mu0.marginal
    own = field.a.apply(quad, cells, marginal, np.ones(len(cells)))
    coupling = field.b.mean_matrix(quad, cells, marginal)
    generator = np.diag(own) + coupling

    start = np.add.reduceat(mu0.points * mu0.point_weights[:, None], mu0.offsets[:-1], axis=0)
    barycentres = np.array([expm(t * generator) @ start for t in grid.nodes])
    return BarycentricCurve(grid, barycentres, np.asarray(mu0.weights))
