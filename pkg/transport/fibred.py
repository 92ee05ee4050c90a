"""
Distance de Wasserstein fibrée, distance classique sur le produit Ω×ℝᵈ et
évaluation de la formule duale de Kantorovich-Rubinstein fibre par fibre.
"""

import logging
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist, pdist

from config.settings import CLASSICAL_LABEL_NODES, LIPSCHITZ_TOL, SOLVER_MAX_SUPPORT
from measures.fibred_measure import (
    DiscreteMeasure, Fibre, FibredMeasure, RefinementPiece, check_order,
    common_refinement, merge_duplicates
)
from transport.wasserstein import TransportPlanResult, w_1d, w_circle_1d, w_discrete
from utils.exceptions import InvalidPotentialError, ValidationError

logger = logging.getLogger(__name__)

Potential = Callable[[np.ndarray], np.ndarray]


def sorted_refinement(mu: FibredMeasure, nu: FibredMeasure) -> List[RefinementPiece]:
    """
    Raffinement commun trié par cellule, identique pour (μ, ν) et (ν, μ) aux indices près.
    """
    return sorted(common_refinement(mu, nu), key=lambda piece: piece.cell)


def fibre_distance(f: Fibre, g: Fibre, p: int = 1, period: Optional[float] = None) -> float:
    """
    W_p entre deux fibres: formule des quantiles en dimension 1, formule circulaire
    si une période est donnée, simplexe de réseau sinon.
    """
    if period is not None:
        if p != 1 or f.points.shape[1] != 1:
            raise ValidationError("La distance sur le cercle n'est disponible que pour p=1 et d=1")
        return w_circle_1d(f, g, period)
    if f.points.shape[1] == 1:
        return w_1d(f, g, p)
    return w_discrete(f, g, p).distance


def fibred_w(mu: FibredMeasure, nu: FibredMeasure, p: int = 1, period: Optional[float] = None) -> float:
    """
    Distance de Wasserstein fibrée W_{π,p}(μ, ν) = (Σ_k π(C_k) W_p(μ_k, ν_k)^p)^{1/p}
    sur le raffinement commun des cellules.

    Args:
        mu: Première mesure fibrée
        nu: Seconde mesure fibrée
        p: Ordre (1 ou 2)
        period: Période de l'espace des états (distance sur le cercle, p=1)

    Returns:
        La distance fibrée

    Raises:
        IncomparableMarginalsError: Si les marginales diffèrent
    """
    check_order(p)
    if mu.dim != nu.dim:
        raise ValidationError(f"Dimensions différentes: {mu.dim} et {nu.dim}")
    cache = {}
    total = 0.0
    for piece in sorted_refinement(mu, nu):
        key = (piece.mu_index, piece.nu_index)
        if key not in cache:
            cache[key] = fibre_distance(mu.fibre(piece.mu_index), nu.fibre(piece.nu_index), p, period)
        total += piece.mass * cache[key] ** p
    return total ** (1.0 / p)


def _lift(mu: FibredMeasure, items: Sequence[Tuple], label_nodes: int) -> DiscreteMeasure:
    """
    Représente une mesure fibrée comme mesure discrète de ℝ^{1+d}: chaque cellule est
    remplacée par ses noeuds en label (exacts pour les atomes).
    """
    lifted, masses = [], []
    for cell, mass, fibre in items:
        nodes, node_weights = mu.marginal.cell_nodes(cell, label_nodes)
        count = len(fibre.points)
        lifted.append(np.column_stack([
            np.repeat(nodes, count),
            np.tile(fibre.points, (len(nodes), 1))
        ]))
        masses.append(mass * np.outer(node_weights, fibre.weights).ravel())
    points, weights, _ = merge_duplicates(np.vstack(lifted), np.concatenate(masses))
    return DiscreteMeasure(points, weights / weights.sum())


def classical_label_nodes(*item_lists: Sequence[Tuple], nodes: int = CLASSICAL_LABEL_NODES) -> int:
    """
    Plus grand nombre de noeuds par cellule d'intervalle (au plus ``nodes``) pour lequel
    chaque relevé tient dans la taille du solveur exact; au moins 1.
    """
    for items in item_lists:
        atoms = sum(len(fibre.points) for cell, _, fibre in items if cell.is_atom)
        spread = sum(len(fibre.points) for cell, _, fibre in items if not cell.is_atom)
        if spread:
            nodes = min(nodes, (SOLVER_MAX_SUPPORT - atoms) // spread)
    return max(1, nodes)


def classical_plan(mu: FibredMeasure, nu: FibredMeasure, p: int = 1,
                   label_nodes: Optional[int] = None,
                   q: float = 2.0) -> Tuple[TransportPlanResult, DiscreteMeasure, DiscreteMeasure]:
    """
    Plan optimal sur Ω×ℝᵈ entre les relevés discrets des deux mesures.

    Returns:
        Le résultat du simplexe et les deux mesures relevées (colonne 0: label)
    """
    check_order(p)
    if mu.dim != nu.dim:
        raise ValidationError(f"Dimensions différentes: {mu.dim} et {nu.dim}")
    if mu.marginal.same_as(nu.marginal):
        pieces = sorted_refinement(mu, nu)
        items_mu = [(pc.cell, pc.mass, mu.fibre(pc.mu_index)) for pc in pieces]
        items_nu = [(pc.cell, pc.mass, nu.fibre(pc.nu_index)) for pc in pieces]
    else:
        items_mu = [(f.cell, f.weight, f) for f in mu.fibres]
        items_nu = [(f.cell, f.weight, f) for f in nu.fibres]
    if label_nodes is None:
        label_nodes = classical_label_nodes(items_mu, items_nu)
    elif label_nodes < 1:
        raise ValidationError(f"Nombre de noeuds en label invalide: {label_nodes}")
    lifted_mu = _lift(mu, items_mu, label_nodes)
    lifted_nu = _lift(nu, items_nu, label_nodes)

    label_gap = cdist(lifted_mu.points[:, :1], lifted_nu.points[:, :1])
    space_gap = cdist(lifted_mu.points[:, 1:], lifted_nu.points[:, 1:])
    if q == 2.0:
        ground = np.hypot(label_gap, space_gap)
    else:
        ground = (label_gap ** q + space_gap ** q) ** (1.0 / q)
    result = w_discrete(lifted_mu, lifted_nu, p, ground=ground)
    return result, lifted_mu, lifted_nu


def classical_w_product(mu: FibredMeasure, nu: FibredMeasure, p: int = 1,
                        label_nodes: Optional[int] = None, q: float = 2.0) -> float:
    """
    Distance de Wasserstein classique sur Ω×ℝᵈ muni de la métrique produit
    d((ω,x),(θ,y)) = (|ω−θ|^q + |x−y|^q)^{1/q}.

    Les atomes de π sont représentés exactement; une cellule d'intervalle est représentée
    par ``label_nodes`` noeuds placés aux quantiles de π. Lorsque les deux marginales
    coïncident, les noeuds sont pris sur le raffinement commun.

    La valeur est exacte lorsque π est atomique. Sur les cellules d'intervalle, c'est
    la distance entre relevés discrets, qui converge vers W_p quand ``label_nodes`` croît;
    avec un seul noeud par cellule aucun transport en label n'est possible et l'on retrouve
    la distance fibrée.

    Args:
        mu: Première mesure fibrée
        nu: Seconde mesure fibrée
        p: Ordre (1 ou 2)
        label_nodes: Noeuds en label par cellule d'intervalle (par défaut
            CLASSICAL_LABEL_NODES, réduit pour tenir dans SOLVER_MAX_SUPPORT)
        q: Exposant de la métrique produit (2 pour la métrique euclidienne)

    Returns:
        La distance W_p sur le produit

    Raises:
        BudgetError: Si les supports relevés dépassent la taille du solveur
    """
    result, _, _ = classical_plan(mu, nu, p, label_nodes, q)
    return result.distance


def fibred_plans(mu: FibredMeasure, nu: FibredMeasure, p: int = 1) -> List[Dict[str, Any]]:
    """
    Plans optimaux fibre par fibre, un par cellule du raffinement commun.

    Returns:
        Liste de {"cell", "mass", "mu_fibre", "nu_fibre", "plan"}
    """
    check_order(p)
    plans = []
    for piece in sorted_refinement(mu, nu):
        f, g = mu.fibre(piece.mu_index), nu.fibre(piece.nu_index)
        plans.append({
            "cell": piece.cell.to_list(),
            "mass": float(piece.mass),
            "mu_fibre": int(piece.mu_index),
            "nu_fibre": int(piece.nu_index),
            "plan": w_discrete(f, g, p).to_dict(),
        })
    return plans


# ---------------------------------------------------------------------- dualité

def certify_lipschitz(points: np.ndarray, values: np.ndarray, tol: float = LIPSCHITZ_TOL) -> float:
    """
    Vérifie que des valeurs échantillonnées sont 1-lipschitziennes sur les points donnés.

    Args:
        points: Points (K, d)
        values: Valeurs (K,)
        tol: Tolérance absolue sur chaque pente

    Returns:
        Le plus grand excès |φ(x)−φ(y)| − |x−y| (négatif ou nul si certifié)

    Raises:
        InvalidPotentialError: Si une paire viole la condition
    """
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float).reshape(-1)
    if len(points) != len(values):
        raise InvalidPotentialError("Une valeur de potentiel par point est attendue")
    if not np.all(np.isfinite(values)):
        raise InvalidPotentialError("Le potentiel prend des valeurs non finies")
    if len(points) < 2:
        return 0.0
    excess = pdist(values[:, None], "cityblock") - pdist(points, "euclidean")
    worst = float(excess.max())
    if worst > tol:
        raise InvalidPotentialError(
            f"Potentiel non 1-lipschitzien: excès de pente {worst:.3e}", {"excess": worst}
        )
    return worst


def kr_dual_value(mu: FibredMeasure, nu: FibredMeasure, potentials: Sequence[Potential]) -> float:
    """
    Valeur duale Σ_k π(C_k) ∫ φ_k d(μ_k − ν_k) pour une famille de potentiels
    1-lipschitziens, un par cellule du raffinement commun (trié par cellule).

    La valeur est toujours un minorant de W_{π,1}(μ, ν).

    Raises:
        InvalidPotentialError: Si un potentiel n'est pas 1-lipschitzien sur les supports
        IncomparableMarginalsError: Si les marginales diffèrent
    """
    pieces = sorted_refinement(mu, nu)
    if len(potentials) != len(pieces):
        raise ValidationError(
            f"{len(pieces)} potentiels attendus (un par cellule du raffinement), {len(potentials)} reçus"
        )
    total = 0.0
    for piece, phi in zip(pieces, potentials):
        f, g = mu.fibre(piece.mu_index), nu.fibre(piece.nu_index)
        support = np.vstack([f.points, g.points])
        values = np.asarray(phi(support), dtype=float).reshape(-1)
        certify_lipschitz(support, values)
        split = len(f.points)
        total += piece.mass * (f.weights @ values[:split] - g.weights @ values[split:])
    return float(total)


def _fibre_potential(f: Fibre, g: Fibre) -> Potential:
    z = np.union1d(f.points[:, 0], g.points[:, 0])

    def cdf(fibre):
        order = np.argsort(fibre.points[:, 0], kind="stable")
        cum = np.concatenate([[0.0], np.cumsum(fibre.weights[order])])
        return cum[np.searchsorted(fibre.points[order, 0], z[:-1], side="right")]

    if len(z) == 1:
        return lambda x: np.zeros(len(np.atleast_2d(x)))
    slopes = -np.sign(cdf(f) - cdf(g))
    phi = np.concatenate([[0.0], np.cumsum(slopes * np.diff(z))])
    return lambda x: np.interp(np.atleast_2d(x)[:, 0], z, phi)


def cdf_dual_potentials(mu: FibredMeasure, nu: FibredMeasure) -> List[Potential]:
    """
    Potentiels optimaux en dimension 1: φ_k(x) = −∫ signe(F_{μ_k} − F_{ν_k}), affines par
    morceaux, qui réalisent l'égalité dans la formule duale.

    Returns:
        Un potentiel par cellule du raffinement commun, dans l'ordre de kr_dual_value
    """
    if mu.dim != 1 or nu.dim != 1:
        raise ValidationError("Les potentiels par fonctions de répartition exigent d=1")
    return [
        _fibre_potential(mu.fibre(piece.mu_index), nu.fibre(piece.nu_index))
        for piece in sorted_refinement(mu, nu)
    ]
