"""
Variation totale des applications de label et re-découpage des mesures fibrées.
"""

from typing import Callable, Optional

import numpy as np

from discretize.partition import Partition
from measures.fibred_measure import FibredMeasure, overlap_table
from transport.fibred import fibre_distance

Distance = Callable[[np.ndarray, np.ndarray], float]


def _norm_distance(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float)))


def total_variation(f: Callable[[float], np.ndarray], part: Partition,
                    distance: Optional[Distance] = None) -> float:
    """
    Variation Σ_i d(f(ω_{i+1}), f(ω_i)) sur les représentants des cellules, rangés par ω
    croissant: minorant de la variation de f.

    Args:
        f: Application du label dans un espace normé
        part: Partition dont les cellules fournissent les représentants
        distance: Distance de l'espace d'arrivée (norme euclidienne par défaut)
    """
    distance = distance or _norm_distance
    labels = sorted(part.marginal.representative(cell) for cell in set(part.cells))
    values = [f(omega) for omega in labels]
    return float(sum(distance(a, b) for a, b in zip(values[:-1], values[1:])))


def measure_variation(mu: FibredMeasure, period: Optional[float] = None) -> float:
    """
    Variation exacte de ω ↦ μ_ω pour une mesure constante par cellule:
    somme des sauts W₁ entre fibres consécutives.
    """
    return float(sum(
        fibre_distance(mu.fibre(k), mu.fibre(k + 1), 1, period) for k in range(len(mu.cells) - 1)
    ))


def split_measure(mu: FibredMeasure, part: Partition) -> FibredMeasure:
    """
    Réexprime μ sur les intersections de ses cellules avec celles d'une partition plus fine,
    chaque morceau recevant une copie de la fibre qui le contient.
    """
    table = overlap_table(mu.marginal, sorted(set(part.cells)), mu.cells)
    counts = np.diff(mu.offsets)[table.cols]
    source = np.concatenate([np.arange(mu.offsets[c], mu.offsets[c + 1]) for c in table.cols])
    cells = [table.cell(k) for k in range(len(table))]
    return FibredMeasure.from_arrays(
        mu.marginal, cells, table.masses, mu.points[source],
        np.repeat(np.arange(len(table)), counts), mu.point_weights[source]
    )
