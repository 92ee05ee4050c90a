"""
Schéma d'Euler explicite à retard: le champ est gelé sur la mesure μ(t − T/n).
"""

import logging
from typing import Optional

import numpy as np

from config.settings import DEFAULT_QUADRATURE_NODES
from dynamics.curves import MeasureCurve
from dynamics.particles import blowup_threshold, check_state
from dynamics.time_grid import TimeGrid
from fields.base_field import VectorField
from measures.fibred_measure import FibredMeasure, support_radius
from utils.exceptions import ValidationError

logger = logging.getLogger(__name__)


def moved(mu0: FibredMeasure, x: np.ndarray) -> FibredMeasure:
    """Mesure de mêmes fibres que μ⁰ dont les points sont déplacés en x."""
    return FibredMeasure.from_arrays(
        mu0.marginal, mu0.cells, mu0.weights, x, mu0.cell_index, mu0.point_weights,
        merge=False, validate=False
    )


def delayed_euler_curve(field: VectorField, mu0: FibredMeasure, grid: TimeGrid, n_delay: int,
                        q: Optional[int] = DEFAULT_QUADRATURE_NODES) -> MeasureCurve:
    """
    Transporte les points du support de μ⁰ par le champ évalué sur la mesure retardée
    μ(t_s − T/n_delay), avec μ(s) = μ⁰ pour s ≤ 0, par pas d'Euler explicites.

    Chaque fibre est transportée par le champ moyenné sur sa cellule.

    Args:
        field: Champ de vecteurs
        mu0: Donnée initiale à support fini
        grid: Grille de temps (S multiple de n_delay)
        n_delay: Nombre de fenêtres de retard sur [0, T]
        q: Noeuds de quadrature par cellule

    Raises:
        ValidationError: Si la grille ne se découpe pas en n_delay fenêtres
        BlowUpError: Si une trajectoire explose
    """
    if n_delay < 1 or grid.steps % n_delay:
        raise ValidationError(f"{grid.steps} pas ne se découpent pas en {n_delay} fenêtres de retard")
    lag = grid.steps // n_delay
    quad = field.quadrature(mu0.cells, mu0.marginal, q or DEFAULT_QUADRATURE_NODES)
    rows = np.asarray(mu0.cell_index)
    threshold = blowup_threshold(field, support_radius(mu0), grid.T)

    nodes, dt = grid.nodes, grid.dt
    x = np.array(mu0.points, dtype=float)
    measures = [mu0]
    for s in range(grid.steps):
        frozen = measures[max(s - lag, 0)]
        x = x + dt * field.cell_velocities(float(nodes[s]), frozen, quad, rows, x)
        check_state(x, s + 1, threshold)
        measures.append(moved(mu0, x))
    logger.debug(f"Schéma à retard: {n_delay} fenêtres de {lag} pas")
    return MeasureCurve(grid, measures, field.period, meta={"scheme": "delayed_euler", "n_delay": n_delay})
