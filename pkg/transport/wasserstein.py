"""
Distances de Wasserstein exactes entre mesures discrètes.

Trois voies: la formule des quantiles en dimension 1, le simplexe de réseau de POT
pour les supports finis de dimension quelconque, et la formule de la médiane pondérée
pour W₁ sur le cercle.
"""

import logging
import warnings
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np
import ot
from scipy import sparse
from scipy.spatial.distance import cdist

from config.settings import PLAN_TOL, SOLVER_ITER_MAX, SOLVER_MAX_SUPPORT
from measures.fibred_measure import check_order
from utils.exceptions import BudgetError, ValidationError
from utils.solver_utils import solver_retry

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TransportPlanResult:
    """
    Résultat d'un transport optimal exact.

    Attributes:
        cost: Coût total Σ γ_ij c_ij avec c_ij = d(x_i, y_j)^p
        plan: Plan optimal (matrice creuse)
        primal_feasibility_residual: Écart maximal des sommes de lignes et colonnes aux poids
        p: Ordre de la distance
    """

    cost: float
    plan: sparse.coo_matrix
    primal_feasibility_residual: float
    p: int = 1

    @property
    def distance(self) -> float:
        """W_p = coût^{1/p}."""
        return max(self.cost, 0.0) ** (1.0 / self.p)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "p": self.p,
            "cost": self.cost,
            "distance": self.distance,
            "primal_feasibility_residual": self.primal_feasibility_residual,
            "plan": [
                [int(i), int(j), float(m)]
                for i, j, m in zip(self.plan.row, self.plan.col, self.plan.data)
            ],
        }


def w_1d(mu, nu, p: int = 1) -> float:
    """
    W_p exacte entre deux mesures discrètes de ℝ par intégration des quantiles
    sur la subdivision commune des fonctions de répartition.

    Args:
        mu: Mesure discrète (ou fibre) de dimension 1
        nu: Mesure discrète (ou fibre) de dimension 1
        p: Ordre (1 ou 2)

    Returns:
        La distance W_p
    """
    check_order(p)
    if mu.points.shape[1] != 1 or nu.points.shape[1] != 1:
        raise ValidationError("w_1d exige des mesures de dimension 1")
    xa, cum_a = _sorted_cdf(mu)
    xb, cum_b = _sorted_cdf(nu)

    u = np.union1d(cum_a, cum_b)
    u = np.concatenate([[0.0], u[u < 1.0], [1.0]])
    du = np.diff(u)
    keep = du > 0.0
    mids = 0.5 * (u[:-1] + u[1:])[keep]
    qa = xa[np.minimum(np.searchsorted(cum_a, mids, side="left"), len(xa) - 1)]
    qb = xb[np.minimum(np.searchsorted(cum_b, mids, side="left"), len(xb) - 1)]
    return float(du[keep] @ np.abs(qa - qb) ** p) ** (1.0 / p)


def _sorted_cdf(measure) -> Tuple[np.ndarray, np.ndarray]:
    order = np.argsort(measure.points[:, 0], kind="stable")
    return measure.points[order, 0], np.cumsum(measure.weights[order])


@solver_retry()
def _solve_emd(a: np.ndarray, b: np.ndarray, costs: np.ndarray,
               num_iter_max: int = SOLVER_ITER_MAX) -> Tuple[np.ndarray, Optional[str]]:
    """
    Appel du simplexe de réseau; renvoie le plan et l'avertissement éventuel du solveur.
    """
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        plan, log = ot.emd(a, b, costs, numItermax=num_iter_max, log=True)
    return plan, log.get("warning")


def w_discrete(mu, nu, p: int = 1, ground: Optional[np.ndarray] = None) -> TransportPlanResult:
    """
    Transport optimal exact entre deux mesures discrètes.

    Args:
        mu: Mesure source
        nu: Mesure cible
        p: Ordre (1 ou 2)
        ground: Matrice des distances de base d(x_i, y_j) (euclidienne par défaut)

    Returns:
        Coût optimal, plan et résidu de faisabilité

    Raises:
        BudgetError: Si un support dépasse la taille autorisée
        ValidationError: Si les poids ne forment pas deux probabilités
    """
    check_order(p)
    if len(mu.weights) > SOLVER_MAX_SUPPORT or len(nu.weights) > SOLVER_MAX_SUPPORT:
        raise BudgetError(
            f"Supports de tailles {len(mu.weights)} et {len(nu.weights)}: "
            f"le solveur exact accepte au plus {SOLVER_MAX_SUPPORT} points"
        )
    a = np.asarray(mu.weights, dtype=np.float64)
    b = np.asarray(nu.weights, dtype=np.float64)
    if np.any(a < 0.0) or np.any(b < 0.0) or abs(a.sum() - b.sum()) > PLAN_TOL:
        raise ValidationError("Poids infaisables pour un plan de transport")
    a, b = a / a.sum(), b / b.sum()

    if ground is None:
        if mu.points.shape[1] != nu.points.shape[1]:
            raise ValidationError("Les deux mesures doivent avoir la même dimension")
        ground = cdist(mu.points, nu.points, metric="euclidean")
    costs = np.ascontiguousarray(np.asarray(ground, dtype=np.float64) ** p)

    plan = _solve_emd(a, b, costs)
    residual = float(max(np.abs(plan.sum(axis=1) - a).max(), np.abs(plan.sum(axis=0) - b).max()))
    if residual > PLAN_TOL:
        logger.warning(f"Résidu de faisabilité élevé: {residual:.3e}")
    plan = np.where(plan > 0.0, plan, 0.0)
    return TransportPlanResult(
        cost=float(np.sum(plan * costs)),
        plan=sparse.coo_matrix(plan),
        primal_feasibility_residual=residual,
        p=p
    )


def w_circle_1d(mu, nu, period: float = 2.0 * np.pi) -> float:
    """
    W₁ exacte sur le cercle ℝ/(period·ℤ) par la médiane pondérée de F_μ − F_ν.

    Args:
        mu: Mesure discrète de dimension 1 (angles non nécessairement réduits)
        nu: Mesure discrète de dimension 1
        period: Longueur du cercle
    """
    xa = np.mod(mu.points[:, 0], period)
    xb = np.mod(nu.points[:, 0], period)
    z = np.unique(np.concatenate([[0.0], xa, xb, [period]]))
    lengths = np.diff(z)
    left = z[:-1]

    def cdf(x, w):
        order = np.argsort(x, kind="stable")
        cum = np.concatenate([[0.0], np.cumsum(w[order])])
        return cum[np.searchsorted(x[order], left, side="right")]

    gap = cdf(xa, mu.weights) - cdf(xb, nu.weights)
    order = np.argsort(gap, kind="stable")
    cum = np.cumsum(lengths[order])
    alpha = gap[order][np.searchsorted(cum, 0.5 * cum[-1])]
    return float(lengths @ np.abs(gap - alpha))
