"""
Interactions de paires Ψ(x, y) et champs à noyau v(t, μ, ω, x) = Σ ∫ w(ω, θ) Ψ(x, y) dμ(θ, y).
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from discretize.quadrature import LabelQuadrature
from fields.base_field import GrowthProfile, VectorField, merge_breaks
from fields.kernels import ConstantKernel, Kernel
from measures.fibred_measure import FibredMeasure

logger = logging.getLogger(__name__)

PairFn = Callable[[np.ndarray, np.ndarray], np.ndarray]
Factor = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class Interaction:
    """
    Interaction de paires Ψ: ℝᵈ×ℝᵈ → ℝᵈ.

    Attributes:
        pair: Fonction vectorisée Ψ(x, y) (diffusion sur les dimensions de tête)
        lipschitz: Constante L telle que |Ψ(x,y) − Ψ(x',y')| ≤ L(|x−x'| + |y−y'|)
        origin_value: |Ψ(0, 0)|
        bound: sup |Ψ| lorsqu'elle est finie
        terms: Représentation séparable Ψ(x, y) = Σ_r f_r(x) ⊙ g_r(y)
        name: Nom de l'interaction
    """

    pair: PairFn
    lipschitz: float
    origin_value: float = 0.0
    bound: Optional[float] = None
    terms: Optional[Tuple[Tuple[Factor, Factor], ...]] = None
    name: str = "pair"

    def growth_constant(self) -> float:
        """Constante c telle que |Ψ(x, y)| ≤ c(1 + |x| + |y|)."""
        linear = self.origin_value + self.lipschitz
        return min(self.bound, linear) if self.bound is not None else linear

    def sup_on_ball(self, radius: float) -> float:
        """Majorant de |Ψ| sur B(0, R)²."""
        linear = self.origin_value + 2.0 * self.lipschitz * radius
        return min(self.bound, linear) if self.bound is not None else linear


def _ones(x: np.ndarray) -> np.ndarray:
    return np.ones_like(x)


def attraction(strength: float = 1.0) -> Interaction:
    """Ψ(x, y) = λ(y − x)."""
    lam = float(strength)
    return Interaction(
        pair=lambda x, y: lam * (y - x),
        lipschitz=abs(lam),
        terms=((lambda x: lam * np.ones_like(x), lambda y: y),
               (lambda x: -lam * x, _ones)),
        name="attraction"
    )


def sine_coupling(K: float = 1.0) -> Interaction:
    """Ψ(x, y) = K sin(y − x), séparée en K(sin y cos x − cos y sin x)."""
    K = float(K)
    return Interaction(
        pair=lambda x, y: K * np.sin(y - x),
        lipschitz=abs(K),
        bound=abs(K),
        terms=((lambda x: K * np.cos(x), np.sin),
               (lambda x: -K * np.sin(x), np.cos)),
        name="sine"
    )


def constant_interaction(value) -> Interaction:
    """Ψ ≡ c."""
    c = np.atleast_1d(np.asarray(value, dtype=float))
    norm = float(np.linalg.norm(c))
    return Interaction(
        pair=lambda x, y: np.broadcast_to(c, np.broadcast(x, y).shape).copy(),
        lipschitz=0.0,
        origin_value=norm,
        bound=norm,
        terms=((lambda x: np.broadcast_to(c, x.shape).copy(), _ones),),
        name="constant"
    )


def own_state(scale: float = 1.0) -> Interaction:
    """Ψ(x, y) = s·x."""
    s = float(scale)
    return Interaction(pair=lambda x, y: s * x + 0.0 * y, lipschitz=abs(s),
                       terms=((lambda x: s * x, _ones),), name="own_state")


def other_state(scale: float = 1.0) -> Interaction:
    """Ψ(x, y) = s·y."""
    s = float(scale)
    return Interaction(pair=lambda x, y: 0.0 * x + s * y, lipschitz=abs(s),
                       terms=((lambda x: np.ones_like(x), lambda y: s * y),), name="other_state")


def difference_function(psi: Callable[[np.ndarray], np.ndarray], lipschitz: float,
                        origin_value: float = 0.0, bound: Optional[float] = None,
                        name: str = "difference") -> Interaction:
    """Ψ(x, y) = ψ(x − y)."""
    return Interaction(pair=lambda x, y: psi(x - y), lipschitz=float(lipschitz),
                       origin_value=float(origin_value), bound=bound, name=name)


def fibre_sums(mu: FibredMeasure, g: Factor) -> np.ndarray:
    """G[k] = Σ_j w_kj g(y_kj) pour chaque fibre."""
    values = mu.point_weights[:, None] * g(mu.points)
    return np.add.reduceat(values, mu.offsets[:-1], axis=0)


class KernelField(VectorField):
    """
    Champ à noyau v(t, μ, ω, x) = Σ_terms ∫ w(ω, θ) Ψ(x, y) dμ(θ, y).

    Les interactions séparables sont évaluées en O(P + K) par cellule; les autres par
    sommation directe sur le support, par paquets de particules.
    """

    def __init__(self, terms: Sequence[Tuple[Kernel, Interaction]], dim: int = 1,
                 name: str = "graphon", period: Optional[float] = None, chunk: int = 256):
        """
        Initialise le champ.

        Args:
            terms: Couples (noyau, interaction)
            dim: Dimension des états
            name: Nom du modèle
            period: Période des états
            chunk: Taille des paquets de particules en sommation directe
        """
        self.terms: List[Tuple[Kernel, Interaction]] = list(terms)
        growth = GrowthProfile(
            m=sum(k.sup_norm() * psi.growth_constant() for k, psi in self.terms),
            lipschitz=sum(k.sup_norm() * psi.lipschitz for k, psi in self.terms)
        )
        kernels = [k for k, _ in self.terms]
        super().__init__(
            dim, growth, name=name,
            label_independent=all(isinstance(k, ConstantKernel) for k in kernels),
            label_breaks=merge_breaks(*[k.breaks for k in kernels]),
            piecewise_constant=all(k.piecewise_constant for k in kernels),
            period=period
        )
        self.chunk = chunk

    def cell_velocities(self, t: float, mu: FibredMeasure, quad: LabelQuadrature,
                        row_of: np.ndarray, x: np.ndarray) -> np.ndarray:
        velocity = np.zeros((len(x), self.dim))
        for kernel, psi in self.terms:
            if psi.terms is not None:
                for f, g in psi.terms:
                    averaged = kernel.apply(quad, mu.cells, mu.marginal, fibre_sums(mu, g))
                    velocity += f(x) * averaged[row_of]
            else:
                velocity += self._direct(kernel, psi, quad, mu, row_of, x)
        return velocity

    def _direct(self, kernel: Kernel, psi: Interaction, quad: LabelQuadrature,
                mu: FibredMeasure, row_of: np.ndarray, x: np.ndarray) -> np.ndarray:
        mean = kernel.mean_matrix(quad, mu.cells, mu.marginal)
        result = np.empty((len(x), self.dim))
        for start in range(0, len(x), self.chunk):
            stop = min(len(x), start + self.chunk)
            coef = mean[row_of[start:stop]][:, mu.cell_index] * mu.point_weights[None, :]
            pairs = psi.pair(x[start:stop, None, :], mu.points[None, :, :])
            result[start:stop] = np.einsum("pk,pkd->pd", coef, pairs)
        return result

