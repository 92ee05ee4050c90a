"""
Quadrature en label: noeuds aux quantiles de π à l'intérieur de chaque cellule.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
from scipy import sparse

from config.settings import DEFAULT_QUADRATURE_NODES, WEIGHT_TOL
from measures.fibred_measure import overlap_table
from measures.marginal import Cell, LabelMarginal
from utils.exceptions import DegenerateCellError


@dataclass(eq=False)
class LabelQuadrature:
    """
    Règle de quadrature sur une famille de cellules de labels.

    Attributes:
        nodes: Noeuds ω_ℓ (Q,)
        weights: Poids normalisés dans chaque cellule (Q,)
        owner: Cellule de chaque noeud (Q,), croissant
        n_cells: Nombre de cellules
        cell_masses: Masse π de chaque cellule (n_cells,)
    """

    nodes: np.ndarray
    weights: np.ndarray
    owner: np.ndarray
    n_cells: int
    cell_masses: np.ndarray
    cache: Dict = field(default_factory=dict, repr=False)

    @classmethod
    def pointwise(cls, omegas) -> "LabelQuadrature":
        """Une ligne par label: la moyenne sur la ligne est l'évaluation en ω."""
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        count = len(omegas)
        return cls(omegas, np.ones(count), np.arange(count), count, np.ones(count))

    @property
    def matrix(self) -> sparse.csr_matrix:
        """Matrice creuse (n_cells, Q) des poids de moyenne."""
        if "matrix" not in self.cache:
            self.cache["matrix"] = sparse.csr_matrix(
                (self.weights, (self.owner, np.arange(len(self.nodes)))),
                shape=(self.n_cells, len(self.nodes))
            )
        return self.cache["matrix"]

    def average(self, values: np.ndarray) -> np.ndarray:
        """Moyenne par cellule de valeurs données aux noeuds (Q,) ou (Q, d)."""
        return self.matrix @ values

    def __len__(self) -> int:
        return len(self.nodes)


def break_cells(breaks: Sequence[float]) -> list:
    """
    Cellules [β_a, β_{a+1}) d'une grille de ruptures; la dernière inclut sa borne droite.
    """
    breaks = np.asarray(breaks, dtype=float)
    upper = breaks[1:].copy()
    upper[-1] = np.nextafter(upper[-1], np.inf)
    return [Cell(float(a), float(b)) for a, b in zip(breaks[:-1], upper)]


def label_quadrature(cells: Sequence[Cell], marginal: LabelMarginal,
                     q: int = DEFAULT_QUADRATURE_NODES,
                     breaks: Optional[Sequence[float]] = None) -> LabelQuadrature:
    """
    Construit les noeuds de quadrature des cellules.

    Chaque cellule d'intervalle reçoit q noeuds placés aux quantiles de π (règle du point
    milieu en coordonnée de masse) plus les atomes qu'elle contient; une cellule atomique
    reçoit son atome. Si une grille de ruptures est donnée, chaque cellule est d'abord
    découpée selon la grille et chaque morceau est traité séparément, pondéré par sa masse:
    les moyennes de fonctions constantes par morceaux sur la grille sont alors exactes.

    Args:
        cells: Cellules de labels
        marginal: Marginale π
        q: Noeuds par morceau continu
        breaks: Ruptures connues de la dépendance en label

    Returns:
        La règle de quadrature

    Raises:
        DegenerateCellError: Si une cellule est de masse nulle
    """
    cells = list(cells)
    if breaks is not None:
        table = overlap_table(marginal, cells, break_cells(breaks))
        lo, hi, owner = table.lo, table.hi, table.rows
    else:
        lo = np.array([c.a for c in cells])
        hi = np.array([c.b for c in cells])
        owner = np.arange(len(cells))

    nodes, weights, owners = [], [], []
    is_atom = lo == hi
    if np.any(is_atom):
        nodes.append(lo[is_atom])
        weights.append(marginal.mass_between(lo[is_atom], hi[is_atom]))
        owners.append(owner[is_atom])

    spans = ~is_atom
    if marginal.continuous_mass > 0.0 and np.any(spans):
        fa = marginal.continuous_cdf(lo[spans])
        fb = marginal.continuous_cdf(hi[spans])
        offsets = (np.arange(q) + 0.5) / q
        u = fa[:, None] + offsets[None, :] * (fb - fa)[:, None]
        nodes.append(marginal.continuous_quantile(u).ravel())
        weights.append(np.repeat(marginal.continuous_mass * (fb - fa) / q, q))
        owners.append(np.repeat(owner[spans], q))

    for atom, mass in zip(marginal.atoms, marginal.atom_weights):
        inside = spans & (lo <= atom) & (atom < hi)
        if np.any(inside):
            nodes.append(np.full(int(inside.sum()), atom))
            weights.append(np.full(int(inside.sum()), mass))
            owners.append(owner[inside])

    nodes = np.concatenate(nodes)
    weights = np.concatenate(weights)
    owners = np.concatenate(owners)
    keep = weights > 0.0
    nodes, weights, owners = nodes[keep], weights[keep], owners[keep]

    order = np.lexsort((nodes, owners))
    nodes, weights, owners = nodes[order], weights[order], owners[order]
    masses = np.bincount(owners, weights=weights, minlength=len(cells))
    if np.any(masses <= WEIGHT_TOL):
        k = int(np.argmin(masses))
        raise DegenerateCellError(f"La cellule {cells[k]} est de masse nulle")
    return LabelQuadrature(nodes, weights / masses[owners], owners, len(cells), masses)
