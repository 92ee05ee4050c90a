"""
Ensembles de trajectoires particulaires, courbes de mesures et distances entre courbes.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from discretize.partition import Partition
from dynamics.time_grid import TimeGrid
from measures.fibred_measure import FibredMeasure, fibred_moment, support_radius
from measures.io import measure_to_dict
from measures.marginal import LabelMarginal
from transport.fibred import classical_w_product, fibred_w
from utils.exceptions import ValidationError

logger = logging.getLogger(__name__)

METRICS = ["fibred_w1", "classical_w1"]


def empirical_measure(x: np.ndarray, cell_of: np.ndarray, coarse: Partition,
                      merge: bool = False) -> FibredMeasure:
    """
    μ^{n,m} = Σ_k π_{⌞Ω_k} × (1/m_k) Σ_ℓ δ_{x_{k,ℓ}} pour des particules rangées par cellule.
    """
    return FibredMeasure.from_arrays(
        coarse.marginal, coarse.cells, coarse.masses, x, cell_of,
        merge=merge, validate=False
    )


@dataclass(eq=False)
class TrajectoryEnsemble:
    """
    Trajectoires x_i(t_s) d'un système de particules.

    Attributes:
        grid: Grille de temps
        states: Positions (S+1, N, d)
        cell_of: Cellule grossière de chaque particule
        coarse: Partition grossière
        fine: Partition fine (None pour le système auxiliaire)
        field_name: Nom du champ
        period: Période des états, le cas échéant
    """

    grid: TimeGrid
    states: np.ndarray
    cell_of: np.ndarray
    coarse: Partition
    fine: Optional[Partition] = None
    field_name: str = ""
    period: Optional[float] = None

    def __post_init__(self):
        if self.states.shape[0] != len(self.grid) or self.states.shape[1] != len(self.cell_of):
            raise ValidationError(f"Trajectoires de forme {self.states.shape} incompatibles")

    @property
    def N(self) -> int:
        return self.states.shape[1]

    @property
    def dim(self) -> int:
        return self.states.shape[2]

    def max_norms(self) -> np.ndarray:
        """max_i |x_i(t_s)| à chaque noeud."""
        return np.linalg.norm(self.states, axis=2).max(axis=1)

    def particle_weights(self) -> np.ndarray:
        counts = np.bincount(self.cell_of, minlength=len(self.coarse))
        return self.coarse.masses[self.cell_of] / counts[self.cell_of]

    def barycentres(self) -> np.ndarray:
        """Barycentre global de μ^{n,m}(t_s), tableau (S+1, d)."""
        return np.einsum("i,sid->sd", self.particle_weights(), self.states)

    def to_frame(self) -> pd.DataFrame:
        """Table longue: colonnes t, particle_id, cell_k, x_0, ..., x_{d−1}."""
        S1, N, d = self.states.shape
        frame = pd.DataFrame({
            "t": np.repeat(self.grid.nodes, N),
            "particle_id": np.tile(np.arange(N), S1),
            "cell_k": np.tile(self.cell_of, S1),
        })
        flat = self.states.reshape(S1 * N, d)
        for j in range(d):
            frame[f"x_{j}"] = flat[:, j]
        return frame


@dataclass(eq=False)
class MeasureCurve:
    """
    Courbe t_s ↦ μ(t_s) de mesures fibrées de même marginale.
    """

    grid: TimeGrid
    measures: List[FibredMeasure]
    period: Optional[float] = None
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.measures) != len(self.grid):
            raise ValidationError(f"{len(self.measures)} mesures pour {len(self.grid)} noeuds")
        first = self.measures[0].marginal
        for mu in self.measures[1:]:
            if not mu.marginal.same_as(first, 1e-12):
                raise ValidationError("Les mesures d'une courbe doivent partager leur marginale")

    @property
    def marginal(self) -> LabelMarginal:
        return self.measures[0].marginal

    def __len__(self) -> int:
        return len(self.measures)

    def __getitem__(self, s: int) -> FibredMeasure:
        return self.measures[s]

    def radii(self) -> np.ndarray:
        return np.array([support_radius(mu) for mu in self.measures])

    def moments(self) -> np.ndarray:
        return np.array([fibred_moment(mu, 1) for mu in self.measures])

    def barycentres(self) -> np.ndarray:
        """Barycentre global (S+1, d)."""
        return np.array([mu.masses @ mu.points for mu in self.measures])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "grid": self.grid.to_dict(),
            "times": [float(t) for t in self.grid.nodes],
            "meta": dict(self.meta),
            "measures": [measure_to_dict(mu) for mu in self.measures],
        }


def empirical_curve(traj: TrajectoryEnsemble, coarse: Optional[Partition] = None) -> MeasureCurve:
    """
    Courbe des mesures empiriques μ^{n,m}(t_s); la marginale des labels est celle de la
    partition à chaque noeud.
    """
    coarse = coarse or traj.coarse
    measures = [empirical_measure(traj.states[s], traj.cell_of, coarse, merge=True)
                for s in range(len(traj.grid))]
    return MeasureCurve(traj.grid, measures, traj.period,
                        meta={"field": traj.field_name, "N": traj.N, "n": len(coarse)})


def curve_distance(a: MeasureCurve, b: MeasureCurve, metric: str = "fibred_w1",
                   period: Optional[float] = None) -> Tuple[float, np.ndarray]:
    """
    Distances entre deux courbes à chaque noeud de leur grille commune.

    Args:
        a: Première courbe
        b: Seconde courbe
        metric: "fibred_w1" ou "classical_w1"
        period: Période des états pour la distance fibrée (celle de a par défaut)

    Returns:
        Couple (sup sur la grille, valeurs par noeud)

    Raises:
        ValidationError: Si les grilles diffèrent ou si la métrique est inconnue
        IncomparableMarginalsError: Si les marginales diffèrent (distance fibrée)
    """
    if a.grid != b.grid:
        raise ValidationError(f"Grilles différentes: {a.grid} et {b.grid}")
    if metric not in METRICS:
        raise ValidationError(f"Métrique inconnue: {metric} (disponibles: {METRICS})")
    period = period if period is not None else a.period
    if metric == "fibred_w1":
        values = np.array([fibred_w(mu, nu, 1, period) for mu, nu in zip(a.measures, b.measures)])
    else:
        values = np.array([classical_w_product(mu, nu, 1) for mu, nu in zip(a.measures, b.measures)])
    return float(values.max()), values
