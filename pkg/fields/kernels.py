"""
Noyaux en label w(ω, θ) et fonctions de label, avec leurs moyennes sur des cellules.

Un noyau s'applique à des quantités par cellule G (une par fibre de la mesure):
apply renvoie, pour chaque ligne r de la quadrature,
    Σ_C [(1/π(R)) ∫_R ∫_C w(ω, θ) dπ(θ) dπ(ω)] G[C].
"""

import logging
import threading
from abc import ABC, abstractmethod
from collections import OrderedDict
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from config.settings import DEFAULT_QUADRATURE_NODES
from discretize.quadrature import LabelQuadrature, break_cells, label_quadrature
from measures.fibred_measure import overlap_table
from measures.marginal import Cell, LabelMarginal
from utils.exceptions import ValidationError

logger = logging.getLogger(__name__)

CACHE_SIZE = 8


def _check_breaks(breaks) -> np.ndarray:
    breaks = np.asarray(breaks, dtype=float)
    if breaks.ndim != 1 or len(breaks) < 2:
        raise ValidationError("Une grille de ruptures contient au moins deux valeurs")
    if breaks[0] != 0.0 or breaks[-1] != 1.0 or np.any(np.diff(breaks) <= 0.0):
        raise ValidationError(f"Ruptures invalides (croissantes de 0 à 1 attendues): {breaks}")
    return breaks


def step_index(breaks: np.ndarray, omega) -> np.ndarray:
    """Indice de l'intervalle [β_a, β_{a+1}) contenant chaque label (le dernier est fermé)."""
    idx = np.searchsorted(breaks, np.asarray(omega, dtype=float), side="right") - 1
    return np.clip(idx, 0, len(breaks) - 2)


def _cells_key(cells: Sequence[Cell]) -> Tuple[Cell, ...]:
    return tuple(cells)


class Kernel(ABC):
    """
    Classe abstraite de base pour les noyaux en label.
    """

    breaks: Optional[np.ndarray] = None

    def __init__(self):
        self._column_cache: "OrderedDict" = OrderedDict()
        self._cache_lock = threading.Lock()

    @abstractmethod
    def evaluate(self, omega, theta) -> np.ndarray:
        """Valeurs w(ω, θ), avec diffusion des dimensions."""
        pass

    @abstractmethod
    def sup_norm(self) -> float:
        pass

    @abstractmethod
    def apply(self, quad: LabelQuadrature, cells: Sequence[Cell], marginal: LabelMarginal,
              G: np.ndarray) -> np.ndarray:
        """
        Moyennes en ligne du noyau intégré contre G.

        Args:
            quad: Quadrature des lignes
            cells: Cellules des colonnes (fibres de la mesure)
            marginal: Marginale π
            G: Valeurs par colonne (C,) ou (C, d)

        Returns:
            Tableau (R,) ou (R, d)
        """
        pass

    @property
    def piecewise_constant(self) -> bool:
        return False

    def mean_matrix(self, quad: LabelQuadrature, cells: Sequence[Cell],
                    marginal: LabelMarginal) -> np.ndarray:
        """Matrice (R, C) des moyennes (1/π(R)) ∫_R ∫_C w dπ dπ."""
        return self.apply(quad, cells, marginal, np.eye(len(cells)))

    def label_variation(self, marginal: LabelMarginal, resolution: int = 256) -> float:
        """
        Variation de ω ↦ w(ω, ·) dans L¹(π), estimée sur une grille de quantiles.
        """
        cols = label_quadrature(marginal.base_cells(), marginal, resolution)
        col_w = cols.weights * cols.cell_masses[cols.owner]
        omegas = np.sort(cols.nodes)
        if len(omegas) < 2:
            return 0.0
        values = self.evaluate(omegas[:, None], cols.nodes[None, :])
        return float((np.abs(np.diff(values, axis=0)) @ col_w).sum())

    def _cached(self, cells: Sequence[Cell], builder: Callable[[], np.ndarray]) -> np.ndarray:
        key = _cells_key(cells)
        with self._cache_lock:
            if key in self._column_cache:
                self._column_cache.move_to_end(key)
                return self._column_cache[key]
        value = builder()
        with self._cache_lock:
            self._column_cache[key] = value
            if len(self._column_cache) > CACHE_SIZE:
                self._column_cache.popitem(last=False)
        return value


class ConstantKernel(Kernel):
    """Noyau constant w ≡ c."""

    def __init__(self, value: float = 1.0):
        super().__init__()
        self.value = float(value)

    def evaluate(self, omega, theta) -> np.ndarray:
        return np.full(np.broadcast(np.asarray(omega), np.asarray(theta)).shape, self.value)

    def sup_norm(self) -> float:
        return abs(self.value)

    @property
    def piecewise_constant(self) -> bool:
        return True

    def label_variation(self, marginal: LabelMarginal, resolution: int = 256) -> float:
        return 0.0

    def apply(self, quad, cells, marginal, G):
        lo = np.array([c.a for c in cells])
        hi = np.array([c.b for c in cells])
        total = self.value * (marginal.mass_between(lo, hi) @ G)
        return np.repeat(np.asarray(total)[None, ...], quad.n_cells, axis=0)

    def __repr__(self) -> str:
        return f"ConstantKernel({self.value:g})"


class StepKernel(Kernel):
    """
    Graphon en escalier: w(ω, θ) = V[a, b] pour ω ∈ [β_a, β_{a+1}) et θ ∈ [β_b, β_{b+1}).

    Les moyennes sur les cellules sont exactes (masses des intersections).
    """

    def __init__(self, breaks: Sequence[float], values):
        super().__init__()
        self.breaks = _check_breaks(breaks)
        self.values = np.asarray(values, dtype=float)
        size = len(self.breaks) - 1
        if self.values.shape != (size, size):
            raise ValidationError(f"Matrice de valeurs de forme {self.values.shape}, attendu ({size}, {size})")
        self._cells = break_cells(self.breaks)

    def evaluate(self, omega, theta) -> np.ndarray:
        return self.values[step_index(self.breaks, omega), step_index(self.breaks, theta)]

    def sup_norm(self) -> float:
        return float(np.abs(self.values).max())

    @property
    def piecewise_constant(self) -> bool:
        return True

    def column_masses(self, cells: Sequence[Cell], marginal: LabelMarginal) -> np.ndarray:
        """Matrice (C, B) des masses π(C ∩ I_b)."""
        def build():
            table = overlap_table(marginal, list(cells), self._cells)
            masses = np.zeros((len(cells), len(self._cells)))
            np.add.at(masses, (table.rows, table.cols), table.masses)
            return masses
        return self._cached(cells, build)

    def apply(self, quad, cells, marginal, G):
        reduced = self.values @ (self.column_masses(cells, marginal).T @ G)
        return quad.average(reduced[step_index(self.breaks, quad.nodes)])

    def label_variation(self, marginal: LabelMarginal, resolution: int = 256) -> float:
        """Σ_b π(I_b) Σ_a |V[a+1, b] − V[a, b]|."""
        lo = self.breaks[:-1]
        hi = np.array([c.b for c in self._cells])
        col_mass = marginal.mass_between(lo, hi)
        return float(np.abs(np.diff(self.values, axis=0)).sum(axis=0) @ col_mass)

    def __repr__(self) -> str:
        return f"StepKernel(blocks={len(self.breaks) - 1})"


class FunctionKernel(Kernel):
    """
    Noyau donné par une fonction vectorisée w(ω, θ), intégré par quadrature aux quantiles.
    """

    def __init__(self, fn: Callable[[np.ndarray, np.ndarray], np.ndarray], sup_norm: float,
                 q: int = DEFAULT_QUADRATURE_NODES, name: str = "function",
                 chunk_rows: int = 2048):
        super().__init__()
        self.fn = fn
        self._sup = float(sup_norm)
        self.q = q
        self.name = name
        self.chunk_rows = chunk_rows

    def evaluate(self, omega, theta) -> np.ndarray:
        return np.asarray(self.fn(np.asarray(omega, dtype=float), np.asarray(theta, dtype=float)), dtype=float)

    def sup_norm(self) -> float:
        return self._sup

    def _columns(self, cells, marginal) -> Tuple[np.ndarray, np.ndarray]:
        def build():
            cols = label_quadrature(cells, marginal, self.q)
            matrix = np.zeros((len(cells), len(cols.nodes)))
            matrix[cols.owner, np.arange(len(cols.nodes))] = cols.weights * cols.cell_masses[cols.owner]
            return cols.nodes, matrix
        return self._cached(cells, build)

    def _mean(self, quad: LabelQuadrature, cells, marginal) -> np.ndarray:
        key = ("mean", id(self), _cells_key(cells))
        if key in quad.cache:
            return quad.cache[key]
        col_nodes, col_matrix = self._columns(cells, marginal)
        starts = np.searchsorted(quad.owner, np.arange(quad.n_cells), side="left")
        bounds = np.append(starts, len(quad.nodes))
        mean = np.empty((quad.n_cells, len(cells)))
        for r0 in range(0, quad.n_cells, self.chunk_rows):
            r1 = min(quad.n_cells, r0 + self.chunk_rows)
            s0, s1 = bounds[r0], bounds[r1]
            values = self.evaluate(quad.nodes[s0:s1, None], col_nodes[None, :])
            weighted = (values * quad.weights[s0:s1, None]) @ col_matrix.T
            mean[r0:r1] = np.add.reduceat(weighted, starts[r0:r1] - s0, axis=0)
        quad.cache[key] = mean
        return mean

    def mean_matrix(self, quad, cells, marginal):
        return self._mean(quad, cells, marginal)

    def apply(self, quad, cells, marginal, G):
        return self._mean(quad, cells, marginal) @ G

    def __repr__(self) -> str:
        return f"FunctionKernel({self.name})"


# ---------------------------------------------------------------------- fonctions de label

class LabelFunction(ABC):
    """
    Fonction du label ω (à valeurs scalaires ou vectorielles).
    """

    breaks: Optional[np.ndarray] = None

    @abstractmethod
    def evaluate(self, omega) -> np.ndarray:
        pass

    @abstractmethod
    def sup_norm(self) -> float:
        pass

    @abstractmethod
    def minimum(self) -> float:
        pass

    @property
    def piecewise_constant(self) -> bool:
        return self.breaks is not None

    def __call__(self, omega) -> np.ndarray:
        return self.evaluate(omega)


class ConstantFunction(LabelFunction):
    """Fonction constante."""

    def __init__(self, value):
        self.value = np.asarray(value, dtype=float)

    def evaluate(self, omega):
        omega = np.asarray(omega, dtype=float)
        return np.broadcast_to(self.value, omega.shape + self.value.shape).copy()

    def sup_norm(self) -> float:
        return float(np.linalg.norm(np.atleast_1d(self.value)))

    def minimum(self) -> float:
        return float(np.min(self.value))

    @property
    def piecewise_constant(self) -> bool:
        return True


class StepFunction(LabelFunction):
    """Fonction constante sur les intervalles [β_a, β_{a+1})."""

    def __init__(self, breaks: Sequence[float], values):
        self.breaks = _check_breaks(breaks)
        self.values = np.asarray(values, dtype=float)
        if len(self.values) != len(self.breaks) - 1:
            raise ValidationError("Une valeur par intervalle de la grille est attendue")

    def evaluate(self, omega):
        return self.values[step_index(self.breaks, omega)]

    def sup_norm(self) -> float:
        flat = self.values.reshape(len(self.values), -1)
        return float(np.linalg.norm(flat, axis=1).max())

    def minimum(self) -> float:
        return float(self.values.min())


class CallableFunction(LabelFunction):
    """Fonction donnée par un callable vectorisé, avec ses bornes déclarées."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], sup_norm: float,
                 minimum: float = 0.0, breaks: Optional[Sequence[float]] = None):
        self.fn = fn
        self._sup = float(sup_norm)
        self._min = float(minimum)
        self.breaks = None if breaks is None else _check_breaks(breaks)

    def evaluate(self, omega):
        return np.asarray(self.fn(np.asarray(omega, dtype=float)), dtype=float)

    def sup_norm(self) -> float:
        return self._sup

    def minimum(self) -> float:
        return self._min

    @property
    def piecewise_constant(self) -> bool:
        return False
