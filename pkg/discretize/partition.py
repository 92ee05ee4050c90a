"""
Partitions de l'espace des labels: équipartitions canoniques par inversion de la
fonction de répartition, partitions à atomes séparés et raffinements.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from config.settings import MARGINAL_TOL, WEIGHT_TOL
from measures.marginal import Cell, LabelMarginal
from utils.exceptions import DegenerateCellError, NonatomicRequiredError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Partition:
    """
    Partition finie de (Ω, π) en cellules ordonnées.

    Attributes:
        marginal: Marginale des labels
        cells: Cellules triées (un atome peut être répété dans une partition raffinée)
        masses: Masse attribuée à chaque cellule
        parent: Partition grossière dont celle-ci est le raffinement
        factor: Nombre d'enfants par cellule du parent
    """

    marginal: LabelMarginal
    cells: Tuple[Cell, ...]
    masses: np.ndarray
    parent: Optional["Partition"] = None
    factor: int = 1
    _boundaries: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.cells = tuple(self.cells)
        self.masses = np.asarray(self.masses, dtype=float)
        if len(self.cells) != len(self.masses):
            raise ValidationError("Une masse par cellule est attendue")
        if np.any(self.masses <= WEIGHT_TOL):
            k = int(np.argmin(self.masses))
            raise DegenerateCellError(f"La cellule {self.cells[k]} est de masse nulle")
        if abs(self.masses.sum() - 1.0) > MARGINAL_TOL * max(len(self.cells), 1):
            raise ValidationError(f"Les masses de la partition somment à {self.masses.sum()}")
        self.masses.setflags(write=False)

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def count(self) -> int:
        return len(self.cells)

    @property
    def boundaries(self) -> np.ndarray:
        """Bornes des cellules d'intervalle, sans doublon, dans l'ordre croissant."""
        if self._boundaries is None:
            edges = [c.a for c in self.cells if not c.is_atom] + [c.b for c in self.cells if not c.is_atom]
            self._boundaries = np.unique(np.asarray(edges, dtype=float))
        return self._boundaries

    def locate(self, omega: float) -> int:
        """Indice de la première cellule contenant ω."""
        for k, cell in enumerate(self.cells):
            if cell.contains(omega):
                return k
        raise ValidationError(f"Aucune cellule ne contient le label {omega}")

    def children(self, k: int) -> range:
        """
        Indices, dans cette partition, des enfants de la cellule k du parent.
        """
        if self.parent is None:
            raise ValidationError("Cette partition n'est le raffinement d'aucune autre")
        return range(k * self.factor, (k + 1) * self.factor)

    def parent_index(self) -> np.ndarray:
        """Cellule du parent contenant chaque cellule."""
        return np.arange(len(self.cells)) // self.factor

    def coarsen(self, m: int) -> "Partition":
        """
        Regroupe les cellules par paquets consécutifs de m.

        Raises:
            ValidationError: Si le nombre de cellules n'est pas multiple de m ou si un paquet
                mélange atome et intervalle
        """
        if m < 1 or len(self.cells) % m:
            raise ValidationError(f"{len(self.cells)} cellules ne se regroupent pas par {m}")
        cells, masses = [], []
        for start in range(0, len(self.cells), m):
            group = self.cells[start:start + m]
            if all(c.is_atom for c in group) and len({c.a for c in group}) == 1:
                cells.append(group[0])
            elif not any(c.is_atom for c in group):
                cells.append(Cell(group[0].a, group[-1].b))
            else:
                raise ValidationError(f"Paquet de cellules non fusionnable: {group}")
            masses.append(float(self.masses[start:start + m].sum()))
        return Partition(self.marginal, cells, masses)

    def __repr__(self) -> str:
        return f"Partition(N={len(self.cells)}, factor={self.factor})"


def _continuous_split(marginal: LabelMarginal, a: float, b: float, count: int) -> np.ndarray:
    """
    Bornes découpant [a, b) en count morceaux de même masse continue; a et b conservés exactement.
    """
    fa, fb = marginal.continuous_cdf(a), marginal.continuous_cdf(b)
    u = fa + (fb - fa) * np.arange(count + 1) / count
    edges = marginal.continuous_quantile(u)
    edges[0], edges[-1] = a, b
    if np.any(np.diff(edges) <= 0.0):
        raise DegenerateCellError(f"Impossible de découper [{a}, {b}) en {count} cellules de même masse")
    return edges


def _interval_cells(edges: np.ndarray) -> List[Cell]:
    return [Cell(float(edges[j]), float(edges[j + 1])) for j in range(len(edges) - 1)]


def _masses(marginal: LabelMarginal, cells: Sequence[Cell]) -> np.ndarray:
    lo = np.array([c.a for c in cells])
    hi = np.array([c.b for c in cells])
    return marginal.mass_between(lo, hi)


def equipartition(pi: LabelMarginal, N: int) -> Partition:
    """
    Équipartition canonique Ω_i^N = [F⁻¹((i−1)/N), F⁻¹(i/N)).

    Args:
        pi: Marginale sans atome
        N: Nombre de cellules

    Returns:
        Partition en N cellules de masse 1/N

    Raises:
        NonatomicRequiredError: Si π a des atomes
    """
    if not pi.is_nonatomic:
        raise NonatomicRequiredError("L'équipartition exige une marginale sans atome")
    if N < 1:
        raise ValidationError(f"Nombre de cellules invalide: {N}")
    cells = _interval_cells(_continuous_split(pi, pi.lo, pi.hi, N))
    masses = _masses(pi, cells)
    worst = float(np.abs(masses - 1.0 / N).max())
    if worst > MARGINAL_TOL:
        logger.warning(f"Équipartition en {N} cellules: écart de masse {worst:.3e}")
    return Partition(pi, cells, masses)


def label_partition(pi: LabelMarginal, N: int) -> Partition:
    """
    Partition d'une marginale quelconque: chaque atome forme sa propre cellule et la
    partie continue est découpée en N cellules de même masse.

    Pour une marginale sans atome, coïncide avec l'équipartition.
    """
    if pi.is_nonatomic:
        return equipartition(pi, N)
    cells = pi.atom_cells()
    if pi.continuous_mass > 0.0:
        cells += _interval_cells(_continuous_split(pi, pi.lo, pi.hi, N))
    cells = sorted(cells)
    return Partition(pi, cells, _masses(pi, cells))


def refine(coarse: Partition, m: int) -> Partition:
    """
    Raffinement de facteur m: chaque cellule d'intervalle est découpée en m sous-cellules
    de même masse, les enfants de la cellule k ayant les indices k·m, ..., (k+1)·m − 1.
    Une cellule atomique est répétée m fois, chaque copie portant la masse w/m.

    Args:
        coarse: Partition grossière
        m: Facteur de raffinement

    Returns:
        Partition en n·m cellules
    """
    if m < 1:
        raise ValidationError(f"Facteur de raffinement invalide: {m}")
    pi = coarse.marginal
    cells: List[Cell] = []
    masses: List[np.ndarray] = []
    for cell, mass in zip(coarse.cells, coarse.masses):
        if cell.is_atom:
            cells.extend([cell] * m)
            masses.append(np.full(m, mass / m))
            continue
        children = _interval_cells(_continuous_split(pi, cell.a, cell.b, m))
        cells.extend(children)
        masses.append(_masses(pi, children))
    return Partition(pi, cells, np.concatenate(masses), parent=coarse, factor=m)
