"""
Interaction de paires entremêlant labels et états: v(t, μ, ω, x) = ∫ Ψ(ω, θ, x, y) dμ(θ, y).
"""

from typing import Callable, Optional, Sequence

import numpy as np

from config.settings import DEFAULT_QUADRATURE_NODES
from discretize.quadrature import LabelQuadrature
from fields.base_field import GrowthProfile, VectorField, column_pairs
from measures.fibred_measure import FibredMeasure

PairwiseFn = Callable[[np.ndarray, np.ndarray, np.ndarray, np.ndarray], np.ndarray]


class PairwiseField(VectorField):
    """
    Champ de paires général, évalué par sommation directe sur les couples
    (noeud en label de la ligne, noeud en label de la colonne, point de la fibre).

    Ψ reçoit ω et θ de forme (..., 1) et x, y de forme (..., d), diffusables entre eux.
    """

    def __init__(self, psi: PairwiseFn, m: float, lipschitz: float, dim: int = 1,
                 breaks: Optional[Sequence[float]] = None, piecewise_constant: bool = False,
                 q: int = DEFAULT_QUADRATURE_NODES, chunk: int = 256):
        super().__init__(dim, GrowthProfile(m=m, lipschitz=lipschitz), name="pairwise",
                         label_breaks=breaks, piecewise_constant=piecewise_constant)
        self.psi = psi
        self.q = q
        self.chunk = chunk

    def cell_velocities(self, t: float, mu: FibredMeasure, quad: LabelQuadrature,
                        row_of: np.ndarray, x: np.ndarray) -> np.ndarray:
        theta, y, masses = column_pairs(mu, 1 if self.piecewise_constant else self.q, self.label_breaks)
        starts = np.searchsorted(quad.owner, np.arange(quad.n_cells), side="left")
        counts = np.diff(np.append(starts, len(quad.nodes)))[row_of]
        particle = np.repeat(np.arange(len(x)), counts)
        before = np.concatenate([[0], np.cumsum(counts)[:-1]])
        node = np.repeat(starts[row_of] - before, counts) + np.arange(int(counts.sum()))

        velocity = np.zeros((len(x), self.dim))
        for start in range(0, len(node), self.chunk):
            p, n = particle[start:start + self.chunk], node[start:start + self.chunk]
            values = self.psi(quad.nodes[n, None, None], theta[None, :, None],
                              x[p, None, :], y[None, :, :])
            contribution = np.einsum("e,ced->cd", masses, values) * quad.weights[n, None]
            np.add.at(velocity, p, contribution)
        return velocity


def pairwise_field(psi: PairwiseFn, m: float, L: float, dim: int = 1, **kwargs) -> PairwiseField:
    """
    Construit un champ de paires Ψ(ω, θ, x, y) avec ses constantes déclarées m et L.
    """
    return PairwiseField(psi, m, L, dim=dim, **kwargs)
