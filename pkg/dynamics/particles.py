"""
Systèmes de particules non échangeables: système fin (un champ moyenné par particule)
et système auxiliaire (un champ moyenné par cellule grossière).
"""

import logging
from typing import Callable, Optional

import numpy as np

from analysis.constants import r_big
from config.settings import BLOWUP_FACTOR, DEFAULT_INTEGRATOR, DEFAULT_QUADRATURE_NODES, INTEGRATORS
from discretize.averaging import average_field
from discretize.partition import Partition
from discretize.sampling import InitialSample
from dynamics.curves import TrajectoryEnsemble, empirical_measure
from dynamics.time_grid import TimeGrid
from fields.base_field import VectorField
from utils.exceptions import BlowUpError, ValidationError

logger = logging.getLogger(__name__)

Rhs = Callable[[float, np.ndarray], np.ndarray]


def euler_step(rhs: Rhs, t: float, x: np.ndarray, dt: float) -> np.ndarray:
    return x + dt * rhs(t, x)


def rk4_step(rhs: Rhs, t: float, x: np.ndarray, dt: float) -> np.ndarray:
    k1 = rhs(t, x)
    k2 = rhs(t + 0.5 * dt, x + 0.5 * dt * k1)
    k3 = rhs(t + 0.5 * dt, x + 0.5 * dt * k2)
    k4 = rhs(t + dt, x + dt * k3)
    return x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


STEPPERS = {"euler": euler_step, "rk4": rk4_step}


def blowup_threshold(field: VectorField, radius: float, T: float) -> float:
    """Seuil d'abandon 10³·max(R_r, 1)."""
    return BLOWUP_FACTOR * max(r_big(radius, field.growth.m_norm(T)), 1.0)


def check_state(x: np.ndarray, step: int, threshold: float) -> None:
    """
    Raises:
        BlowUpError: Si une coordonnée est non finie ou dépasse le seuil
    """
    finite = np.all(np.isfinite(x))
    largest = float(np.abs(x).max()) if finite else float("inf")
    if largest > threshold:
        details = {"step": step, "max_abs": largest, "threshold": threshold}
        logger.warning(f"Explosion au pas {step}: |x| = {largest:.3e} > {threshold:.3e}")
        raise BlowUpError(f"Explosion de la trajectoire au pas {step}", step, details)


def integrate(rhs: Rhs, x0: np.ndarray, grid: TimeGrid, integrator: str = DEFAULT_INTEGRATOR,
              threshold: float = np.inf) -> np.ndarray:
    """
    Intègre ẋ = rhs(t, x) sur la grille.

    Returns:
        États (S+1,) + x0.shape
    """
    if integrator not in STEPPERS:
        raise ValidationError(f"Intégrateur inconnu: {integrator} (disponibles: {INTEGRATORS})")
    step = STEPPERS[integrator]
    nodes, dt = grid.nodes, grid.dt
    states = np.empty((len(nodes),) + x0.shape)
    states[0] = x0
    for s in range(grid.steps):
        states[s + 1] = step(rhs, float(nodes[s]), states[s], dt)
        check_state(states[s + 1], s + 1, threshold)
    return states


def _initial_points(x0) -> np.ndarray:
    points = x0.points if isinstance(x0, InitialSample) else x0
    return np.array(points, dtype=float).reshape(len(points), -1)


def _cell_assignment(x0, coarse: Partition, N: int) -> np.ndarray:
    if isinstance(x0, InitialSample):
        return np.asarray(x0.cell_of, dtype=np.int64)
    if N % len(coarse):
        raise ValidationError(f"{N} particules ne se répartissent pas sur {len(coarse)} cellules")
    return np.repeat(np.arange(len(coarse)), N // len(coarse))


def solve_particles(field: VectorField, fine: Partition, coarse: Partition, x0, grid: TimeGrid,
                    integrator: str = DEFAULT_INTEGRATOR,
                    q: Optional[int] = DEFAULT_QUADRATURE_NODES) -> TrajectoryEnsemble:
    """
    Résout ẋ_i = v_i^N(t, μ^{n,m}(t), x_i), i = 1, ..., N = n·m.

    La particule i porte le champ moyenné sur la i-ème cellule fine; la mesure empirique
    est reconstruite depuis l'état courant à chaque évaluation (y compris aux étapes
    intermédiaires de Runge-Kutta).

    Args:
        field: Champ macroscopique
        fine: Partition fine en N cellules, raffinement de coarse
        coarse: Partition grossière en n cellules
        x0: Échantillon initial (ou positions (N, d) rangées par cellule grossière)
        grid: Grille de temps
        integrator: "rk4" ou "euler"
        q: Noeuds de quadrature par cellule

    Returns:
        L'ensemble des trajectoires

    Raises:
        BlowUpError: Si une trajectoire explose
    """
    points = _initial_points(x0)
    N = len(points)
    if len(fine) != N:
        raise ValidationError(f"{N} particules pour une partition fine de {len(fine)} cellules")
    if fine.parent is not None and fine.parent is not coarse:
        raise ValidationError("La partition fine doit raffiner la partition grossière")
    cell_of = _cell_assignment(x0, coarse, N)
    family = average_field(field, fine, q)
    rows = np.arange(N)

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        return family.velocities(t, empirical_measure(x, cell_of, coarse), rows, x)

    threshold = blowup_threshold(field, float(np.linalg.norm(points, axis=1).max()), grid.T)
    logger.info(f"Système de {N} particules ({len(coarse)} cellules), {grid.steps} pas {integrator}")
    states = integrate(rhs, points, grid, integrator, threshold)
    return TrajectoryEnsemble(grid, states, cell_of, coarse, fine, field.name, field.period)


def solve_auxiliary(field: VectorField, coarse: Partition, x0, grid: TimeGrid,
                    integrator: str = DEFAULT_INTEGRATOR,
                    q: Optional[int] = DEFAULT_QUADRATURE_NODES) -> TrajectoryEnsemble:
    """
    Système auxiliaire: toutes les particules de la cellule k suivent v_k^n.
    """
    points = _initial_points(x0)
    cell_of = _cell_assignment(x0, coarse, len(points))
    family = average_field(field, coarse, q)

    def rhs(t: float, x: np.ndarray) -> np.ndarray:
        return family.velocities(t, empirical_measure(x, cell_of, coarse), cell_of, x)

    threshold = blowup_threshold(field, float(np.linalg.norm(points, axis=1).max()), grid.T)
    states = integrate(rhs, points, grid, integrator, threshold)
    return TrajectoryEnsemble(grid, states, cell_of, coarse, None, field.name, field.period)
