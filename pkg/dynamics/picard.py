"""
Point fixe sur les flots caractéristiques: l'itération de Picard de l'opérateur Λ
reproduit la solution comme image de μ⁰ par le flot.
"""

import logging
import dataclasses
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from analysis.constants import r_big
from config.settings import DEFAULT_INTEGRATOR, DEFAULT_QUADRATURE_NODES, PICARD_MAX_ITER, PICARD_TOL
from dynamics.curves import MeasureCurve
from dynamics.euler import moved
from dynamics.particles import STEPPERS, blowup_threshold, check_state
from dynamics.time_grid import TimeGrid
from fields.base_field import VectorField
from measures.fibred_measure import FibredMeasure, support_radius
from utils.exceptions import NoConvergenceError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class FlowTable:
    """
    Flots Φ_(0,t_s)(ω, x) des points du support de μ⁰ et historique des résidus.

    Attributes:
        grid: Grille de temps
        flows: Positions (S+1, K, d) des K points du support
        cell_index: Cellule de chaque point
        residuals: Résidus pondérés successifs
        radius: Rayon R_r utilisé pour la pondération
    """

    grid: TimeGrid
    flows: np.ndarray
    cell_index: np.ndarray
    residuals: List[float] = dataclasses.field(default_factory=list)
    radius: float = 0.0

    @property
    def iterations(self) -> int:
        return len(self.residuals)

    def contraction_ratios(self) -> np.ndarray:
        """Rapports entre résidus successifs (non nuls)."""
        r = np.asarray(self.residuals, dtype=float)
        if len(r) < 2:
            return np.zeros(0)
        prev, nxt = r[:-1], r[1:]
        keep = prev > 0.0
        return nxt[keep] / prev[keep]


def _characteristics(field: VectorField, mu0: FibredMeasure, quad, flows: np.ndarray,
                     grid: TimeGrid, integrator: str, threshold: float) -> np.ndarray:
    """
    Intègre ẋ = v(t, Φ♯μ⁰, ω, x) pour un flot Φ donné (interpolé linéairement entre noeuds).
    """
    rows = np.asarray(mu0.cell_index)
    nodes, dt = grid.nodes, grid.dt
    step = STEPPERS[integrator]
    result = np.empty_like(flows)
    result[0] = mu0.points
    for s in range(grid.steps):
        t0 = float(nodes[s])

        def rhs(t: float, x: np.ndarray) -> np.ndarray:
            theta = (t - t0) / dt
            frozen = moved(mu0, (1.0 - theta) * flows[s] + theta * flows[s + 1])
            return field.cell_velocities(t, frozen, quad, rows, x)

        result[s + 1] = step(rhs, t0, result[s], dt)
        check_state(result[s + 1], s + 1, threshold)
    return result


def flow_picard(field: VectorField, mu0: FibredMeasure, grid: TimeGrid, tol: float = PICARD_TOL,
                max_iter: int = PICARD_MAX_ITER, integrator: str = DEFAULT_INTEGRATOR,
                q: Optional[int] = DEFAULT_QUADRATURE_NODES) -> Tuple[MeasureCurve, FlowTable]:
    """
    Itération de Picard sur les flots caractéristiques.

    À partir des trajectoires constantes, chaque itération intègre les caractéristiques
    du champ évalué le long de l'image de μ⁰ par le flot précédent. L'arrêt porte sur
    sup_{t, x} exp(−2∫₀ᵗ L_{R_r}) |Φ^{(j+1)} − Φ^{(j)}| < tol. Un champ local converge
    en une itération.

    Args:
        field: Champ de vecteurs
        mu0: Donnée initiale à support fini
        grid: Grille de temps
        tol: Seuil d'arrêt
        max_iter: Nombre maximum d'itérations
        integrator: "rk4" ou "euler"
        q: Noeuds de quadrature par cellule

    Returns:
        La courbe μ(t_s) = Φ_(0,t_s)♯μ⁰ et la table des flots

    Raises:
        NoConvergenceError: Si le seuil n'est pas atteint en max_iter itérations
    """
    if integrator not in STEPPERS:
        raise ValidationError(f"Intégrateur inconnu: {integrator}")
    if max_iter < 1:
        raise ValidationError(f"Nombre d'itérations invalide: {max_iter}")
    r = support_radius(mu0)
    radius = r_big(r, field.growth.m_norm(grid.T))
    weight = np.exp(-2.0 * field.growth.cumulative_lipschitz(radius, grid.nodes))
    quad = field.quadrature(mu0.cells, mu0.marginal, q or DEFAULT_QUADRATURE_NODES)
    threshold = blowup_threshold(field, r, grid.T)

    flows = np.broadcast_to(np.asarray(mu0.points, dtype=float), (len(grid),) + mu0.points.shape).copy()
    table = FlowTable(grid, flows, np.asarray(mu0.cell_index), radius=radius)
    for j in range(max_iter):
        updated = _characteristics(field, mu0, quad, flows, grid, integrator, threshold)
        gaps = np.linalg.norm(updated - flows, axis=2).max(axis=1)
        residual = float((weight * gaps).max())
        table.residuals.append(residual)
        flows = updated
        logger.debug(f"Picard itération {j + 1}: résidu {residual:.3e}")
        if field.local or residual < tol:
            break
    else:
        logger.warning(f"Picard non convergé après {max_iter} itérations (résidu {table.residuals[-1]:.3e})")
        raise NoConvergenceError(
            f"Itération de Picard non convergée en {max_iter} itérations",
            table.residuals[-1], {"residuals": table.residuals}
        )

    table.flows = flows
    measures = [moved(mu0, flows[s]) for s in range(len(grid))]
    curve = MeasureCurve(grid, measures, field.period,
                         meta={"scheme": "picard", "iterations": table.iterations})
    return curve, table
