"""
Enveloppe de Grönwall entre deux solutions: vérification noeud par noeud.
"""

import logging
from typing import List, Optional

import numpy as np

from analysis.bounds import BoundReport
from analysis.constants import r_big
from config.settings import BOUND_SLACK_TOL, DEFAULT_QUADRATURE_NODES
from dynamics.curves import MeasureCurve
from fields.base_field import VectorField
from measures.fibred_measure import FibredMeasure, support_radius
from transport.fibred import fibred_w
from utils.exceptions import PreconditionError, ValidationError

logger = logging.getLogger(__name__)


def field_gap(v: VectorField, w: VectorField, t: float, mu: FibredMeasure, nu: FibredMeasure,
              q: int = DEFAULT_QUADRATURE_NODES) -> float:
    """
    ∫_Ω ‖v(t, μ, ω) − w(t, ν, ω)‖_{∞; ν_ω} dπ(ω), la norme sup portant sur le support de
    chaque fibre de ν (champs moyennés sur les cellules de ν).
    """
    rows = np.asarray(nu.cell_index)
    x = np.asarray(nu.points)
    quad_v = v.quadrature(nu.cells, nu.marginal, q)
    quad_w = quad_v if w is v else w.quadrature(nu.cells, nu.marginal, q)
    diff = np.linalg.norm(
        v.cell_velocities(t, mu, quad_v, rows, x) - w.cell_velocities(t, nu, quad_w, rows, x), axis=1
    )
    worst = np.maximum.reduceat(diff, nu.offsets[:-1])
    return float(nu.weights @ worst)


def stability_envelope(curve_mu: MeasureCurve, curve_nu: MeasureCurve, v: VectorField,
                       w: Optional[VectorField] = None, q: int = DEFAULT_QUADRATURE_NODES,
                       tol: float = BOUND_SLACK_TOL) -> List[BoundReport]:
    """
    Vérifie à chaque noeud
    W_{π,1}(μ(t), ν(t)) ≤ (W_{π,1}(μ⁰, ν⁰) + ∫₀ᵗ gap(s) ds)·exp(∫₀ᵗ L_{R_r}),
    où gap est l'écart des champs évalué sur le support de ν(s) et L le profil de v.

    L'intégrale en temps majore le trapèze par la plus grande valeur aux extrémités de
    chaque pas.

    Args:
        curve_mu: Courbe engendrée par v
        curve_nu: Courbe engendrée par w
        v: Champ de μ
        w: Champ de ν (v par défaut)
        q: Noeuds de quadrature par cellule
        tol: Tolérance sur l'écart

    Returns:
        Un rapport par noeud

    Raises:
        PreconditionError: Si un support sort de la boule B(0, R_r)
    """
    w = w or v
    if curve_mu.grid != curve_nu.grid:
        raise ValidationError("Les deux courbes doivent partager leur grille")
    times = curve_mu.grid.nodes
    T = curve_mu.grid.T
    r = max(support_radius(curve_mu[0]), support_radius(curve_nu[0]))
    radius = r_big(r, max(v.growth.m_norm(T), w.growth.m_norm(T)))
    largest = max(curve_mu.radii().max(), curve_nu.radii().max())
    if largest > radius + tol:
        raise PreconditionError(
            f"Support de rayon {largest:.6g} hors de B(0, R_r = {radius:.6g})",
            {"radius": largest, "R_r": radius}
        )

    gaps = np.array([field_gap(v, w, float(t), mu, nu, q)
                     for t, mu, nu in zip(times, curve_mu.measures, curve_nu.measures)])
    steps = np.diff(times) * np.maximum(gaps[:-1], gaps[1:])
    integral = np.concatenate([[0.0], np.cumsum(steps)])
    growth = np.exp(v.growth.cumulative_lipschitz(radius, times))
    start = fibred_w(curve_mu[0], curve_nu[0], 1)

    reports = []
    for s, t in enumerate(times):
        lhs = start if s == 0 else fibred_w(curve_mu[s], curve_nu[s], 1)
        reports.append(BoundReport.compare("stability", lhs, (start + integral[s]) * growth[s], float(t), tol))
    return reports
