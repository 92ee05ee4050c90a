"""
Rapports de bornes: estimations a priori le long d'une dynamique.
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional

import numpy as np

from analysis.constants import ac_constant, moment_constant, r_big
from config.settings import BOUND_SLACK_TOL
from dynamics.curves import MeasureCurve, TrajectoryEnsemble
from fields.base_field import VectorField
from measures.fibred_measure import fibre_moments, fibred_moment, support_radius
from transport.fibred import fibred_w

logger = logging.getLogger(__name__)


@dataclass
class BoundReport:
    """
    Comparaison lhs ≤ rhs.

    Attributes:
        name: Nom de l'estimation
        lhs: Quantité mesurée
        rhs: Borne
        slack: rhs − lhs
        passed: slack ≥ −tolérance
        t: Temps du pire écart, le cas échéant
    """

    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool
    t: Optional[float] = None

    @classmethod
    def compare(cls, name: str, lhs: float, rhs: float, t: Optional[float] = None,
                tol: float = BOUND_SLACK_TOL) -> "BoundReport":
        slack = float(rhs) - float(lhs)
        report = cls(name, float(lhs), float(rhs), slack, bool(slack >= -tol), t)
        if not report.passed:
            logger.warning(f"Borne '{name}' violée: {lhs:.6e} > {rhs:.6e} (écart {slack:.3e})")
        return report

    @classmethod
    def worst(cls, name: str, lhs: np.ndarray, rhs: np.ndarray, times: np.ndarray,
              tol: float = BOUND_SLACK_TOL) -> "BoundReport":
        """Rapport au noeud de plus petit écart."""
        s = int(np.argmin(np.asarray(rhs) - np.asarray(lhs)))
        return cls.compare(name, lhs[s], rhs[s], float(times[s]), tol)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def marginal_invariance_report(curve: MeasureCurve) -> BoundReport:
    """Écart maximal entre les masses des fibres et π(cellule) le long de la courbe."""
    worst, at = 0.0, 0.0
    for t, mu in zip(curve.grid.nodes, curve.measures):
        lo = np.array([c.a for c in mu.cells])
        hi = np.array([c.b for c in mu.cells])
        gap = float(np.abs(mu.marginal.mass_between(lo, hi) - mu.weights).max())
        if not mu.marginal.same_as(curve.marginal, 1e-12):
            gap = np.inf
        if gap > worst:
            worst, at = gap, float(t)
    return BoundReport.compare("marginal_invariance", worst, 0.0, at, tol=1e-12)


def apriori_reports(curve: MeasureCurve, field: VectorField,
                    traj: Optional[TrajectoryEnsemble] = None) -> List[BoundReport]:
    """
    Estimations a priori le long d'une courbe issue du champ donné.

    Vérifie le rayon du support (≤ R_r), le moment de chaque fibre, l'estimation de
    continuité absolue entre noeuds consécutifs et depuis l'instant initial,
    l'invariance de la marginale et, si les trajectoires sont fournies, la borne
    uniforme sur les particules.

    Args:
        curve: Courbe de mesures
        field: Champ ayant engendré la courbe (profil de croissance déclaré)
        traj: Trajectoires particulaires associées

    Returns:
        Les rapports, un par estimation (au pire noeud)
    """
    times = curve.grid.nodes
    cum_m = field.growth.cumulative_m(times)
    m_norm = float(cum_m[-1])
    mu0 = curve[0]
    r = support_radius(mu0)
    M0 = fibred_moment(mu0, 1)
    reports = []

    radius = r_big(r, m_norm)
    reports.append(BoundReport.worst("support_radius", curve.radii(), np.full(len(times), radius), times))

    K = moment_constant(M0, m_norm)
    forcing = 1.0 if field.growth.moment_free else 1.0 + K
    start = fibre_moments(mu0, 1)
    lhs, rhs = np.empty(len(times)), np.empty(len(times))
    for s, mu in enumerate(curve.measures):
        bound = (start + forcing * cum_m[s]) * np.exp(cum_m[s])
        gaps = bound - fibre_moments(mu, 1)
        k = int(np.argmin(gaps))
        lhs[s], rhs[s] = bound[k] - gaps[k], bound[k]
    reports.append(BoundReport.worst("fibre_moment", lhs, rhs, times))

    factor = (1.0 + M0) * (1.0 + ac_constant(M0, m_norm))
    ac_lhs, ac_rhs, ac_t = [], [], []
    for s in range(1, len(times)):
        for origin in {0, s - 1}:
            ac_lhs.append(fibred_w(curve[origin], curve[s], 1))
            ac_rhs.append(factor * (cum_m[s] - cum_m[origin]))
            ac_t.append(times[s])
    if ac_lhs:
        reports.append(BoundReport.worst("absolute_continuity", np.array(ac_lhs), np.array(ac_rhs), np.array(ac_t)))

    reports.append(marginal_invariance_report(curve))

    if traj is not None:
        x0 = float(np.linalg.norm(traj.states[0], axis=1).max())
        bound = r_big(x0, m_norm)
        reports.append(BoundReport.worst("particle_max", traj.max_norms(), np.full(len(times), bound), times))
    return reports
