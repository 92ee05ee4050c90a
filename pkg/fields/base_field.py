"""
Classe de base de tous les champs de vitesses v(t, μ, ω, x) et profils de croissance.
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import integrate

from config.settings import DEFAULT_QUADRATURE_NODES
from discretize.quadrature import LabelQuadrature, label_quadrature
from measures.fibred_measure import FibredMeasure
from measures.marginal import Cell, LabelMarginal
from utils.exceptions import ValidationError

logger = logging.getLogger(__name__)

TimeProfile = Union[float, Callable[[float], float]]
RadiusProfile = Union[float, Callable[[float, float], float]]


@dataclass(frozen=True)
class GrowthProfile:
    """
    Constantes de régularité déclarées d'un champ.

    Attributes:
        m: Taux de croissance sous-linéaire m(t), constant ou fonction du temps
        lipschitz: Constante de Lipschitz L_R(t), constante ou fonction (R, t)
        moment_free: Le champ est borné par m(t)(1+|x|) sans terme de moment
    """

    m: TimeProfile = 0.0
    lipschitz: RadiusProfile = 0.0
    moment_free: bool = False

    def m_at(self, t: float) -> float:
        return float(self.m(t)) if callable(self.m) else float(self.m)

    def m_integral(self, t0: float, t1: float) -> float:
        """∫_{t0}^{t1} m(s) ds."""
        if t1 <= t0:
            return 0.0
        if not callable(self.m):
            return float(self.m) * (t1 - t0)
        value, _ = integrate.quad(self.m_at, t0, t1, limit=200)
        return float(value)

    def m_norm(self, T: float) -> float:
        """‖m‖_{L¹(0,T)}."""
        return self.m_integral(0.0, T)

    def cumulative_m(self, times: np.ndarray) -> np.ndarray:
        """∫₀^{t_s} m pour chaque noeud d'une grille croissante."""
        times = np.asarray(times, dtype=float)
        if not callable(self.m):
            return float(self.m) * (times - times[0])
        pieces = [self.m_integral(a, b) for a, b in zip(times[:-1], times[1:])]
        return np.concatenate([[0.0], np.cumsum(pieces)])

    def lipschitz_at(self, R: float, t: float) -> float:
        return float(self.lipschitz(R, t)) if callable(self.lipschitz) else float(self.lipschitz)

    def lipschitz_integral(self, R: float, t0: float, t1: float) -> float:
        """∫_{t0}^{t1} L_R(s) ds."""
        if t1 <= t0:
            return 0.0
        if not callable(self.lipschitz):
            return float(self.lipschitz) * (t1 - t0)
        value, _ = integrate.quad(lambda s: self.lipschitz_at(R, s), t0, t1, limit=200)
        return float(value)

    def lipschitz_norm(self, R: float, T: float) -> float:
        """‖L_R‖_{L¹(0,T)}."""
        return self.lipschitz_integral(R, 0.0, T)

    def cumulative_lipschitz(self, R: float, times: np.ndarray) -> np.ndarray:
        times = np.asarray(times, dtype=float)
        if not callable(self.lipschitz):
            return float(self.lipschitz) * (times - times[0])
        pieces = [self.lipschitz_integral(R, a, b) for a, b in zip(times[:-1], times[1:])]
        return np.concatenate([[0.0], np.cumsum(pieces)])

    def __add__(self, other: "GrowthProfile") -> "GrowthProfile":
        if not callable(self.m) and not callable(other.m):
            m: TimeProfile = float(self.m) + float(other.m)
        else:
            m = lambda t: self.m_at(t) + other.m_at(t)
        if not callable(self.lipschitz) and not callable(other.lipschitz):
            lip: RadiusProfile = float(self.lipschitz) + float(other.lipschitz)
        else:
            lip = lambda R, t: self.lipschitz_at(R, t) + other.lipschitz_at(R, t)
        return GrowthProfile(m, lip, self.moment_free and other.moment_free)


def merge_breaks(*grids: Optional[Sequence[float]]) -> Optional[np.ndarray]:
    """Réunion de grilles de ruptures; None si aucune n'est connue."""
    known = [np.asarray(g, dtype=float) for g in grids if g is not None]
    if not known:
        return None
    return np.unique(np.concatenate(known + [np.array([0.0, 1.0])]))


class VectorField(ABC):
    """
    Classe abstraite de base pour tous les champs de vitesses.

    Un champ est évalué en moyenne sur des cellules de labels: chaque ligne d'une règle
    de quadrature représente une cellule (ou un label ponctuel), et chaque particule
    est rattachée à une ligne.
    """

    def __init__(self, dim: int, growth: GrowthProfile, name: str = "field",
                 local: bool = False, label_independent: bool = False,
                 label_breaks: Optional[Sequence[float]] = None,
                 piecewise_constant: bool = False, period: Optional[float] = None,
                 nonnegative_state: bool = False):
        """
        Initialise le champ.

        Args:
            dim: Dimension d de l'espace des états
            growth: Profil de croissance déclaré
            name: Nom du modèle
            local: Le champ ne dépend pas de la mesure
            label_independent: Le champ ne dépend pas du label ω
            label_breaks: Grille sur laquelle la dépendance en label est constante par morceaux
            piecewise_constant: Toute la dépendance en label est constante sur label_breaks
            period: Période des états (dynamique sur le tore)
            nonnegative_state: Le champ n'est défini que pour des états positifs
        """
        if dim < 1:
            raise ValidationError(f"Dimension invalide: {dim}")
        self.dim = dim
        self.growth = growth
        self.name = name
        self.local = local
        self.label_independent = label_independent
        self.label_breaks = None if label_breaks is None else np.asarray(label_breaks, dtype=float)
        self.piecewise_constant = piecewise_constant or label_independent
        self.period = period
        self.nonnegative_state = nonnegative_state

    @abstractmethod
    def cell_velocities(self, t: float, mu: FibredMeasure, quad: LabelQuadrature,
                        row_of: np.ndarray, x: np.ndarray) -> np.ndarray:
        """
        Vitesses moyennées en label.

        Args:
            t: Temps
            mu: Mesure fibrée argument du champ
            quad: Quadrature dont les lignes sont les cellules de moyenne
            row_of: Ligne de chaque particule (P,)
            x: Positions des particules (P, d)

        Returns:
            Tableau (P, d) des vitesses Σ_ℓ ν_ℓ v(t, μ, ω_ℓ, x_p) sur la ligne de chaque particule
        """
        pass

    def quadrature(self, cells: Sequence[Cell], marginal: LabelMarginal,
                   q: int = DEFAULT_QUADRATURE_NODES) -> LabelQuadrature:
        """
        Quadrature de moyenne adaptée au champ: découpée selon les ruptures connues, et
        réduite à un noeud par morceau lorsque la dépendance en label y est constante.
        """
        nodes = 1 if self.piecewise_constant else q
        return label_quadrature(cells, marginal, nodes, breaks=self.label_breaks)

    def evaluate(self, t: float, mu: FibredMeasure, omega: float, x) -> np.ndarray:
        """
        Évaluation ponctuelle v(t, μ, ω, x) pour un point (d,) ou plusieurs (P, d).
        """
        points = np.asarray(x, dtype=float)
        single = points.ndim == 1
        points = points.reshape(1, -1) if single else points
        quad = LabelQuadrature.pointwise([omega])
        values = self.cell_velocities(t, mu, quad, np.zeros(len(points), dtype=np.int64), points)
        return values[0] if single else values

    def evaluate_many(self, t: float, mu: FibredMeasure, omegas, x) -> np.ndarray:
        """
        Évaluation ponctuelle aux couples (ω_p, x_p).
        """
        omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
        points = np.asarray(x, dtype=float).reshape(len(omegas), -1)
        quad = LabelQuadrature.pointwise(omegas)
        return self.cell_velocities(t, mu, quad, np.arange(len(omegas)), points)

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}(name={self.name!r}, dim={self.dim})"


def column_pairs(mu: FibredMeasure, q: int, breaks: Optional[Sequence[float]] = None):
    """
    Développe l'intégrale ∫ h(θ, y) dμ(θ, y) sur des couples (noeud en label, point de la fibre).

    Returns:
        Triplet (θ_e, y_e, m_e) tel que ∫ h dμ ≈ Σ_e m_e h(θ_e, y_e), exact pour h constante
        par morceaux en θ sur la grille de ruptures
    """
    cols = label_quadrature(mu.cells, mu.marginal, q, breaks=breaks)
    counts = np.diff(mu.offsets)[cols.owner]
    node = np.repeat(np.arange(len(cols.nodes)), counts)
    before = np.concatenate([[0], np.cumsum(counts)[:-1]])
    point = np.repeat(mu.offsets[cols.owner] - before, counts) + np.arange(int(counts.sum()))
    masses = cols.weights[node] * cols.cell_masses[cols.owner[node]] * mu.point_weights[point]
    return cols.nodes[node], mu.points[point], masses
