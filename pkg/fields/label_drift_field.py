"""
Dérive locale dépendant du label: v(t, μ, ω, x) = c(ω).
"""

from typing import Sequence

import numpy as np

from discretize.quadrature import LabelQuadrature
from fields.base_field import GrowthProfile, VectorField
from fields.kernels import StepFunction, step_index
from measures.fibred_measure import FibredMeasure


class LabelDriftField(VectorField):
    """
    Champ local, indépendant de la mesure et de la position, constant par morceaux en label.
    """

    def __init__(self, drift: StepFunction):
        values = drift.values.reshape(len(drift.values), -1)
        super().__init__(
            values.shape[1],
            GrowthProfile(m=drift.sup_norm(), lipschitz=0.0, moment_free=True),
            name="label_drift", local=True,
            label_independent=bool(np.all(values == values[0])),
            label_breaks=drift.breaks, piecewise_constant=True
        )
        self.drift = drift
        self._values = values

    def cell_velocities(self, t: float, mu: FibredMeasure, quad: LabelQuadrature,
                        row_of: np.ndarray, x: np.ndarray) -> np.ndarray:
        node_values = self._values[step_index(self.drift.breaks, quad.nodes)]
        return quad.average(node_values)[row_of]


def label_drift_field(breaks: Sequence[float], values) -> LabelDriftField:
    """
    Dérive c(ω) = values[a] sur [breaks[a], breaks[a+1]).

    Profil déclaré: m = max|c|, L = 0, sans terme de moment.

    Args:
        breaks: Ruptures croissantes de 0 à 1
        values: Une valeur (scalaire ou vecteur) par intervalle
    """
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    return LabelDriftField(StepFunction(breaks, values))


def zero_field(dim: int = 1) -> LabelDriftField:
    """Champ identiquement nul."""
    return label_drift_field([0.0, 1.0], np.zeros((1, dim)))
