"""
Mesures fibrées à support fini sur Ω×ℝᵈ et opérations associées.

Une mesure fibrée est stockée à plat: la liste ordonnée de ses cellules de labels
avec leurs masses π(cellule), puis tous les points du support triés par cellule,
chacun avec son poids à l'intérieur de sa fibre.
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from config.settings import MARGINAL_TOL, MERGE_TOL, SUM_TOL, WEIGHT_TOL
from measures.marginal import Cell, LabelMarginal
from utils.exceptions import DegenerateCellError, IncomparableMarginalsError, ValidationError

logger = logging.getLogger(__name__)


def merge_duplicates(points: np.ndarray, weights: np.ndarray, groups: Optional[np.ndarray] = None,
                     tol: float = MERGE_TOL) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Trie les points lexicographiquement et fusionne ceux qui coïncident à tol près par coordonnée.

    Args:
        points: Tableau (K, d)
        weights: Poids (K,)
        groups: Indice de groupe (cellule) de chaque point; la fusion ne traverse pas les groupes
        tol: Seuil de fusion par coordonnée

    Returns:
        Points fusionnés, poids sommés et indices de groupe
    """
    if groups is None:
        groups = np.zeros(len(points), dtype=np.int64)
    if len(points) == 0:
        return points, weights, groups
    keys = np.vstack([points.T[::-1], groups[None, :]])
    order = np.lexsort(keys)
    p, w, g = points[order], weights[order], groups[order]
    if len(p) == 1:
        return p, w, g
    new_group = (np.abs(np.diff(p, axis=0)).max(axis=1) > tol) | (np.diff(g) != 0)
    label = np.concatenate([[0], np.cumsum(new_group)])
    first = np.concatenate([[0], np.flatnonzero(new_group) + 1])
    return p[first], np.bincount(label, weights=w), g[first]


def _as_points(points, dim: Optional[int] = None) -> np.ndarray:
    array = np.asarray(points, dtype=float)
    if array.ndim == 1:
        array = array.reshape(-1, 1) if dim in (None, 1) else array.reshape(-1, dim)
    if array.ndim != 2:
        raise ValidationError("Les points doivent former un tableau (K, d)")
    return array


@dataclass(frozen=True)
class DiscreteMeasure:
    """
    Mesure de probabilité à support fini sur ℝᵈ.
    """

    points: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, points, weights=None, merge: bool = True) -> "DiscreteMeasure":
        """
        Construit une mesure discrète validée et renormalisée.

        Args:
            points: Points du support, tableau (K, d) ou (K,)
            weights: Poids (uniformes par défaut)
            merge: Fusionner les points dupliqués

        Raises:
            ValidationError: Poids négatifs, somme différente de 1 ou points non finis
        """
        pts = _as_points(points)
        w = np.full(len(pts), 1.0 / max(len(pts), 1)) if weights is None else np.asarray(weights, dtype=float)
        _check_weights(pts, w)
        if merge:
            pts, w, _ = merge_duplicates(pts, w)
        else:
            pts = pts.copy()
        w = w / w.sum()
        pts.setflags(write=False)
        w.setflags(write=False)
        return cls(pts, w)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return len(self.weights)

    def mean(self) -> np.ndarray:
        return self.weights @ self.points

    def moment(self, p: int = 1) -> float:
        return float(self.weights @ np.linalg.norm(self.points, axis=1) ** p) ** (1.0 / p)


def _check_weights(points: np.ndarray, weights: np.ndarray) -> None:
    if len(points) == 0:
        raise ValidationError("Une mesure de probabilité ne peut pas avoir un support vide")
    if weights.shape != (len(points),):
        raise ValidationError("Un poids par point est attendu")
    if not np.all(np.isfinite(points)):
        raise ValidationError("Tous les points doivent être finis")
    if np.any(weights <= 0.0) or not np.all(np.isfinite(weights)):
        raise ValidationError("Les poids doivent être strictement positifs")
    total = weights.sum()
    if abs(total - 1.0) > SUM_TOL:
        raise ValidationError(f"Les poids somment à {total} au lieu de 1")


@dataclass(frozen=True)
class Fibre:
    """
    Fibre μ_ω d'une mesure fibrée, constante sur une cellule de labels.
    """

    cell: Cell
    weight: float
    points: np.ndarray
    weights: np.ndarray

    @classmethod
    def build(cls, cell: Cell, weight: float, points, weights=None, merge: bool = True) -> "Fibre":
        measure = DiscreteMeasure.build(points, weights, merge=merge)
        return cls(cell, float(weight), measure.points, measure.weights)

    def discrete(self) -> DiscreteMeasure:
        return DiscreteMeasure(self.points, self.weights)

    @property
    def barycentre(self) -> np.ndarray:
        return self.weights @ self.points


class FibredMeasure:
    """
    Mesure de probabilité fibrée à support fini, de première marginale π.
    """

    def __init__(self, marginal: LabelMarginal, cells: Sequence[Cell], weights: np.ndarray,
                 points: np.ndarray, cell_index: np.ndarray, point_weights: np.ndarray):
        # Constructeur brut: les données sont supposées triées et validées.
        self.marginal = marginal
        self.cells = tuple(cells)
        self.weights = weights
        self.points = points
        self.cell_index = cell_index
        self.point_weights = point_weights
        self.offsets = np.searchsorted(cell_index, np.arange(len(self.cells) + 1), side="left")
        self._fibres: Optional[List[Fibre]] = None

    # ------------------------------------------------------------------ constructeurs

    @classmethod
    def from_fibres(cls, marginal: LabelMarginal, fibres: Sequence[Fibre]) -> "FibredMeasure":
        """
        Assemble une mesure fibrée à partir de ses fibres.
        """
        if not fibres:
            raise ValidationError("Une mesure fibrée doit avoir au moins une fibre")
        dims = {f.points.shape[1] for f in fibres}
        if len(dims) != 1:
            raise ValidationError(f"Dimensions incohérentes entre les fibres: {sorted(dims)}")
        points = np.concatenate([f.points for f in fibres])
        cell_index = np.concatenate([np.full(len(f.points), k) for k, f in enumerate(fibres)])
        point_weights = np.concatenate([f.weights for f in fibres])
        return cls.from_arrays(
            marginal, [f.cell for f in fibres], [f.weight for f in fibres],
            points, cell_index, point_weights
        )

    @classmethod
    def from_arrays(cls, marginal: LabelMarginal, cells: Sequence[Cell], weights,
                    points, cell_index, point_weights=None, merge: bool = True,
                    validate: bool = True) -> "FibredMeasure":
        """
        Construit une mesure fibrée à partir de tableaux à plat.

        Args:
            marginal: Marginale des labels
            cells: Cellules des fibres
            weights: Masse π de chaque cellule
            points: Points du support (K, d)
            cell_index: Cellule de chaque point (K,)
            point_weights: Poids de chaque point dans sa fibre (uniformes par défaut)
            merge: Fusionner les points dupliqués à l'intérieur de chaque fibre
            validate: Vérifier les invariants; les sommes de poids (par fibre et sur
                les cellules) sont acceptées à SUM_TOL = 1e-9 près puis renormalisées

        Returns:
            Mesure fibrée triée par cellule
        """
        cells = list(cells)
        weights = np.array(weights, dtype=float)
        points = _as_points(points)
        cell_index = np.asarray(cell_index, dtype=np.int64)
        if point_weights is None:
            counts = np.bincount(cell_index, minlength=len(cells))
            point_weights = 1.0 / counts[cell_index]
        point_weights = np.asarray(point_weights, dtype=float)

        order = sorted(range(len(cells)), key=lambda k: cells[k])
        if order != list(range(len(cells))):
            rank = np.empty(len(cells), dtype=np.int64)
            rank[order] = np.arange(len(cells))
            cells = [cells[k] for k in order]
            weights = weights[order]
            cell_index = rank[cell_index]

        if validate:
            _validate_fibred(marginal, cells, weights, points, cell_index, point_weights)

        if merge:
            points, point_weights, cell_index = merge_duplicates(points, point_weights, cell_index)
        elif np.any(np.diff(cell_index) < 0):
            order_pts = np.argsort(cell_index, kind="stable")
            points, point_weights, cell_index = points[order_pts], point_weights[order_pts], cell_index[order_pts]

        if validate:
            sums = np.bincount(cell_index, weights=point_weights, minlength=len(cells))
            point_weights = point_weights / sums[cell_index]
            weights = weights / weights.sum()

        if merge:
            for array in (weights, points, cell_index, point_weights):
                array.setflags(write=False)
        return cls(marginal, cells, weights, points, cell_index, point_weights)

    # ------------------------------------------------------------------ accès

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def masses(self) -> np.ndarray:
        """Masse totale portée par chaque point du support."""
        return self.weights[self.cell_index] * self.point_weights

    def __len__(self) -> int:
        return len(self.cells)

    @property
    def fibres(self) -> List[Fibre]:
        if self._fibres is None:
            self._fibres = [self.fibre(k) for k in range(len(self.cells))]
        return self._fibres

    def fibre(self, k: int) -> Fibre:
        lo, hi = self.offsets[k], self.offsets[k + 1]
        return Fibre(self.cells[k], float(self.weights[k]), self.points[lo:hi], self.point_weights[lo:hi])

    def fibre_at(self, omega: float) -> Fibre:
        """
        Fibre de la cellule contenant le label ω.
        """
        for k, cell in enumerate(self.cells):
            if cell.contains(omega):
                return self.fibre(k)
        raise ValidationError(f"Aucune cellule ne contient le label {omega}")

    def __repr__(self) -> str:
        return f"FibredMeasure(cells={len(self.cells)}, support={len(self.points)}, dim={self.dim})"


def _validate_fibred(marginal: LabelMarginal, cells: List[Cell], weights: np.ndarray,
                     points: np.ndarray, cell_index: np.ndarray, point_weights: np.ndarray) -> None:
    """
    Vérifie les invariants d'une mesure fibrée (cellules triées).
    """
    if not cells:
        raise ValidationError("Une mesure fibrée doit avoir au moins une fibre")
    if len(weights) != len(cells):
        raise ValidationError("Une masse par cellule est attendue")
    if len(points) != len(cell_index) or len(points) != len(point_weights):
        raise ValidationError("Points, cellules et poids de tailles différentes")
    if not np.all(np.isfinite(points)):
        raise ValidationError("Tous les points doivent être finis")
    if np.any(point_weights <= 0.0) or np.any(weights <= 0.0):
        raise ValidationError("Les poids doivent être strictement positifs")
    if len(cell_index) and (cell_index.min() < 0 or cell_index.max() >= len(cells)):
        raise ValidationError("Indice de cellule hors bornes")
    for prev, nxt in zip(cells[:-1], cells[1:]):
        if prev.intersect(nxt) is not None:
            raise ValidationError(f"Les cellules {prev} et {nxt} se recouvrent")

    sums = np.bincount(cell_index, weights=point_weights, minlength=len(cells))
    if np.any(np.abs(sums - 1.0) > SUM_TOL):
        raise ValidationError("Chaque fibre doit être une mesure de probabilité")
    if abs(weights.sum() - 1.0) > SUM_TOL:
        raise ValidationError(f"Les masses des fibres somment à {weights.sum()} au lieu de 1")

    lo = np.array([c.a for c in cells])
    hi = np.array([c.b for c in cells])
    expected = marginal.mass_between(lo, hi)
    gap = np.abs(expected - weights)
    if np.any(gap > MARGINAL_TOL):
        k = int(np.argmax(gap))
        raise ValidationError(
            f"La masse de la fibre {cells[k]} vaut {weights[k]} mais π(cellule) = {expected[k]}"
        )


# ---------------------------------------------------------------------- raffinement commun

@dataclass(frozen=True)
class Overlap:
    """
    Intersections non négligeables entre deux familles de cellules.
    """

    rows: np.ndarray
    cols: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    masses: np.ndarray

    def cell(self, k: int) -> Cell:
        return Cell(float(self.lo[k]), float(self.hi[k]))

    def __len__(self) -> int:
        return len(self.masses)


def _cells_of(part) -> List[Cell]:
    return list(part.cells) if hasattr(part, "cells") else list(part)


def overlap_table(marginal: LabelMarginal, cells_a: Sequence[Cell], cells_b: Sequence[Cell]) -> Overlap:
    """
    Calcule toutes les intersections de masse positive entre deux familles de cellules.

    Args:
        marginal: Marginale servant à mesurer les intersections
        cells_a: Première famille
        cells_b: Seconde famille

    Returns:
        Table des intersections (indices, bornes, masses)
    """
    a_lo = np.array([c.a for c in cells_a])[:, None]
    a_hi = np.array([c.b for c in cells_a])[:, None]
    b_lo = np.array([c.a for c in cells_b])[None, :]
    b_hi = np.array([c.b for c in cells_b])[None, :]
    a_atom, b_atom = a_lo == a_hi, b_lo == b_hi

    lo = np.maximum(a_lo, b_lo)
    hi = np.minimum(a_hi, b_hi)
    valid = (~a_atom & ~b_atom) & (lo < hi)

    atom_in_b = a_atom & ~b_atom & (b_lo <= a_lo) & (a_lo < b_hi)
    atom_in_a = b_atom & ~a_atom & (a_lo <= b_lo) & (b_lo < a_hi)
    both_atoms = a_atom & b_atom & (a_lo == b_lo)
    lo = np.where(atom_in_b | both_atoms, a_lo, np.where(atom_in_a, b_lo, lo))
    hi = np.where(atom_in_b | both_atoms | atom_in_a, lo, hi)
    valid = valid | atom_in_b | atom_in_a | both_atoms

    rows, cols = np.nonzero(valid)
    lo, hi = lo[rows, cols], hi[rows, cols]
    masses = marginal.mass_between(lo, hi)
    keep = masses > WEIGHT_TOL
    return Overlap(rows[keep], cols[keep], lo[keep], hi[keep], masses[keep])


@dataclass(frozen=True)
class RefinementPiece:
    """Cellule du raffinement commun de deux mesures fibrées."""

    cell: Cell
    mass: float
    mu_index: int
    nu_index: int


def common_refinement(mu: FibredMeasure, nu: FibredMeasure,
                      tol: float = MARGINAL_TOL) -> List[RefinementPiece]:
    """
    Raffinement commun des cellules de deux mesures fibrées de même marginale.

    Args:
        mu: Première mesure
        nu: Seconde mesure
        tol: Tolérance sur les masses des cellules

    Returns:
        Cellules du raffinement commun, avec les fibres de mu et nu correspondantes

    Raises:
        IncomparableMarginalsError: Si les marginales diffèrent
    """
    if not mu.marginal.same_as(nu.marginal, tol):
        raise IncomparableMarginalsError(
            f"Marginales incomparables: {mu.marginal!r} et {nu.marginal!r}"
        )
    table = overlap_table(mu.marginal, mu.cells, nu.cells)
    for own, index in ((mu.weights, table.rows), (nu.weights, table.cols)):
        covered = np.bincount(index, weights=table.masses, minlength=len(own))
        if np.any(np.abs(covered - own) > tol):
            raise IncomparableMarginalsError(
                "Les cellules ne se raffinent pas en masses identiques (marginales distinctes)"
            )
    return [
        RefinementPiece(table.cell(k), float(table.masses[k]), int(table.rows[k]), int(table.cols[k]))
        for k in range(len(table))
    ]


# ---------------------------------------------------------------------- opérations

def check_order(p: int) -> None:
    if p not in (1, 2):
        raise ValidationError(f"Ordre p non pris en charge: {p} (attendu 1 ou 2)")


def fibred_moment(mu: FibredMeasure, p: int = 1) -> float:
    """
    Moment fibré d'ordre p: (Σ_k π(C_k) Σ_j w_kj |x_kj|^p)^{1/p}.
    """
    check_order(p)
    norms = np.linalg.norm(mu.points, axis=1)
    return float(mu.masses @ norms ** p) ** (1.0 / p)


def fibre_moments(mu: FibredMeasure, p: int = 1) -> np.ndarray:
    """Moment d'ordre p de chaque fibre."""
    check_order(p)
    values = mu.point_weights * np.linalg.norm(mu.points, axis=1) ** p
    return np.add.reduceat(values, mu.offsets[:-1]) ** (1.0 / p)


def support_radius(mu: Union[FibredMeasure, DiscreteMeasure]) -> float:
    """Plus grande norme euclidienne d'un point du support."""
    return float(np.linalg.norm(mu.points, axis=1).max())


def space_marginal(mu: FibredMeasure) -> DiscreteMeasure:
    """
    Marginale en espace (𝔭_{ℝᵈ})♯μ, points dupliqués fusionnés.
    """
    return DiscreteMeasure.build(np.array(mu.points), mu.masses / mu.masses.sum())


def barycentres(mu: FibredMeasure) -> List[Tuple[Cell, np.ndarray]]:
    """
    Barycentre de chaque fibre.
    """
    weighted = mu.points * mu.point_weights[:, None]
    means = np.add.reduceat(weighted, mu.offsets[:-1], axis=0)
    return [(cell, means[k]) for k, cell in enumerate(mu.cells)]


def conditional_expectation(mu: FibredMeasure, part) -> FibredMeasure:
    """
    Espérance conditionnelle de μ sur une partition des labels.

    Chaque fibre de sortie sur une cellule A est le mélange π-pondéré des fibres de μ
    qui rencontrent A, normalisé par π(A).

    Args:
        mu: Mesure fibrée
        part: Partition (objet à attribut ``cells``) ou liste de cellules

    Returns:
        Mesure fibrée constante sur les cellules de la partition

    Raises:
        DegenerateCellError: Si une cellule de la partition est de masse nulle
    """
    cells = _cells_of(part)
    lo = np.array([c.a for c in cells])
    hi = np.array([c.b for c in cells])
    cell_masses = mu.marginal.mass_between(lo, hi)
    if np.any(cell_masses <= WEIGHT_TOL):
        k = int(np.argmin(cell_masses))
        raise DegenerateCellError(f"La cellule {cells[k]} de la partition est de masse nulle")

    table = overlap_table(mu.marginal, cells, mu.cells)
    covered = np.bincount(table.rows, weights=table.masses, minlength=len(cells))

    pieces_points, pieces_weights, pieces_cells = [], [], []
    for row, col, mass in zip(table.rows, table.cols, table.masses):
        lo_k, hi_k = mu.offsets[col], mu.offsets[col + 1]
        pieces_points.append(mu.points[lo_k:hi_k])
        pieces_weights.append(mu.point_weights[lo_k:hi_k] * (mass / covered[row]))
        pieces_cells.append(np.full(hi_k - lo_k, row))

    return FibredMeasure.from_arrays(
        mu.marginal, cells, cell_masses,
        np.concatenate(pieces_points), np.concatenate(pieces_cells), np.concatenate(pieces_weights)
    )


def pushforward(mu: FibredMeasure, fn: Callable[[np.ndarray], np.ndarray]) -> FibredMeasure:
    """
    Image de μ par une application x ↦ fn(x) appliquée fibre par fibre (labels inchangés).

    Args:
        mu: Mesure fibrée
        fn: Application vectorisée (K, d) -> (K, d')
    """
    image = _as_points(fn(np.array(mu.points)))
    if len(image) != len(mu.points):
        raise ValidationError("L'application doit renvoyer un point par point du support")
    return FibredMeasure.from_arrays(
        mu.marginal, mu.cells, mu.weights, image, mu.cell_index, mu.point_weights
    )


def graph_measure(marginal: LabelMarginal, cells: Sequence[Cell], values) -> FibredMeasure:
    """
    Mesure graphe (Id, x)♯π d'une application constante par cellule.

    Args:
        marginal: Marginale des labels
        cells: Cellules de la partition
        values: Valeur de l'application sur chaque cellule, tableau (n, d) ou (n,)
    """
    cells = list(cells)
    points = _as_points(values)
    lo = np.array([c.a for c in cells])
    hi = np.array([c.b for c in cells])
    return FibredMeasure.from_arrays(
        marginal, cells, marginal.mass_between(lo, hi), points, np.arange(len(cells)), np.ones(len(cells))
    )


def product_measure(marginal: LabelMarginal, points, weights=None,
                    cells: Optional[Sequence[Cell]] = None) -> FibredMeasure:
    """
    Mesure produit π×ρ: toutes les fibres égales à ρ.

    Args:
        marginal: Marginale des labels
        points: Support de ρ
        weights: Poids de ρ (uniformes par défaut)
        cells: Cellules à utiliser (partition grossière du support par défaut)
    """
    rho = DiscreteMeasure.build(points, weights)
    cells = list(cells) if cells is not None else marginal.base_cells()
    k = len(rho.points)
    fibres = [
        Fibre(cell, marginal.mass(cell), rho.points, rho.weights) for cell in cells
    ]
    logger.debug(f"Mesure produit sur {len(cells)} cellules, {k} points par fibre")
    return FibredMeasure.from_fibres(marginal, fibres)
