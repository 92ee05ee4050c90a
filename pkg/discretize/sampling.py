"""
Tirages initiaux i.i.d. selon les fibres moyennées de la donnée initiale.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from discretize.partition import Partition
from measures.fibred_measure import FibredMeasure, overlap_table
from utils.exceptions import ValidationError

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class InitialSample:
    """
    Positions initiales x^{0,n,m}: m particules par cellule grossière, rangées par cellule.

    Attributes:
        points: Positions (n·m, d)
        cell_of: Cellule grossière de chaque particule (k pour les indices k·m, ..., (k+1)·m − 1)
        coarse: Partition grossière
        m: Particules par cellule
        seed: Graine maîtresse
    """

    points: np.ndarray
    cell_of: np.ndarray
    coarse: Partition
    m: int
    seed: int

    def __len__(self) -> int:
        return len(self.points)


def averaged_fibre(mu0: FibredMeasure, part: Partition, k: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Fibre moyennée (1/π(Ω_k)) ∫_{Ω_k} μ_ω⁰ dπ(ω): mélange fini des fibres rencontrant Ω_k.

    Returns:
        Couple (points, poids)
    """
    table = overlap_table(mu0.marginal, [part.cells[k]], mu0.cells)
    total = table.masses.sum()
    points, weights = [], []
    for col, mass in zip(table.cols, table.masses):
        lo, hi = mu0.offsets[col], mu0.offsets[col + 1]
        points.append(mu0.points[lo:hi])
        weights.append(mu0.point_weights[lo:hi] * (mass / total))
    return np.concatenate(points), np.concatenate(weights)


def cell_stream(seed: int, k: int) -> np.random.Generator:
    """Flux aléatoire propre à la cellule k, indépendant de l'ordre de traitement."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(k)]))


def sample_initial(mu0: FibredMeasure, coarse: Partition, m: int, seed: int = 0) -> InitialSample:
    """
    Tire m points i.i.d. dans chaque cellule grossière selon la fibre moyennée.

    Chaque tirage choisit une fibre proportionnellement à sa masse d'intersection avec
    la cellule, puis un point de cette fibre selon son poids.

    Args:
        mu0: Donnée initiale
        coarse: Partition grossière (n cellules)
        m: Particules par cellule
        seed: Graine maîtresse

    Returns:
        L'échantillon initial de n·m particules
    """
    if m < 1:
        raise ValidationError(f"Nombre de particules par cellule invalide: {m}")
    table = overlap_table(mu0.marginal, coarse.cells, mu0.cells)
    cumulative = np.cumsum(mu0.point_weights)
    before = np.concatenate([[0.0], cumulative])[mu0.offsets[:-1]]

    blocks = []
    for k in range(len(coarse)):
        rng = cell_stream(seed, k)
        rows = table.rows == k
        cols, masses = table.cols[rows], table.masses[rows]
        fibres = rng.choice(cols, size=m, p=masses / masses.sum())
        targets = before[fibres] + rng.random(m)
        picks = np.searchsorted(cumulative, targets, side="right")
        blocks.append(np.clip(picks, mu0.offsets[fibres], mu0.offsets[fibres + 1] - 1))

    index = np.concatenate(blocks)
    cell_of = np.repeat(np.arange(len(coarse)), m)
    logger.debug(f"{len(index)} positions initiales tirées ({len(coarse)} cellules, graine {seed})")
    return InitialSample(np.array(mu0.points[index]), cell_of, coarse, m, seed)
