"""
Cinétique de Michaelis-Menten hétérogène:
v(t, μ, ω, x) = ∫ α(ω, θ) y/(k(ω, θ) + y) dμ(θ, y) + F(ω, ∫ β(θ) y dμ(θ, y)),
avec F(ω, r) = g(ω) r/(a(ω) + r). Le champ ne dépend pas de x.
"""

import logging
from typing import Optional

import numpy as np

from config.settings import DEFAULT_QUADRATURE_NODES
from discretize.quadrature import LabelQuadrature
from fields.base_field import GrowthProfile, VectorField, column_pairs, merge_breaks
from fields.kernels import ConstantKernel, Kernel, LabelFunction, StepKernel
from measures.fibred_measure import FibredMeasure
from utils.exceptions import DomainError, ValidationError

logger = logging.getLogger(__name__)


def kernel_minimum(kernel: Kernel) -> Optional[float]:
    """Minimum d'un noyau constant ou en escalier; None sinon."""
    if isinstance(kernel, ConstantKernel):
        return kernel.value
    if isinstance(kernel, StepKernel):
        return float(kernel.values.min())
    return None


class MichaelisMentenField(VectorField):
    """
    Champ de Michaelis-Menten à constantes hétérogènes, en dimension 1 et pour des états positifs.
    """

    def __init__(self, alpha: Kernel, k: Kernel, beta: LabelFunction, g: LabelFunction,
                 a: LabelFunction, strict: bool = True, k_min: Optional[float] = None,
                 q: int = DEFAULT_QUADRATURE_NODES, chunk: int = 512):
        """
        Initialise le champ.

        Args:
            alpha: Noyau des taux maximaux α(ω, θ) ≥ 0
            k: Noyau des constantes de Michaelis k(ω, θ) ≥ k_min > 0
            beta: Poids β(θ) ≥ 0 de l'entrée de rétroaction
            g: Gain g(ω) ≥ 0 de la rétroaction
            a: Constante a(ω) ≥ a_min > 0 de la rétroaction
            strict: Refuser les états négatifs (sinon ils sont ramenés à 0)
            k_min: Minorant de k lorsque k n'est ni constant ni en escalier
            q: Noeuds de quadrature par morceau
            chunk: Taille des paquets de noeuds en ligne

        Raises:
            ValidationError: Si k_min ou a_min n'est pas strictement positif, ou si α prend
                une valeur négative
        """
        alpha_min = kernel_minimum(alpha)
        if alpha_min is not None and alpha_min < 0.0:
            raise ValidationError(f"Les taux maximaux α doivent être positifs (minimum: {alpha_min:g})")
        k_min = kernel_minimum(k) if k_min is None else float(k_min)
        if k_min is None or k_min <= 0.0:
            raise ValidationError("Les constantes de Michaelis doivent être minorées par k_min > 0")
        a_min = a.minimum()
        if a_min <= 0.0:
            raise ValidationError("La constante a(ω) doit être minorée par a_min > 0")

        alpha_norm, g_norm, beta_norm = alpha.sup_norm(), g.sup_norm(), beta.sup_norm()
        growth = GrowthProfile(
            m=alpha_norm + g_norm,
            lipschitz=alpha_norm / k_min + g_norm * beta_norm / a_min
        )
        pieces = (alpha, k, beta, g, a)
        super().__init__(
            1, growth, name="michaelis_menten",
            label_breaks=merge_breaks(alpha.breaks, k.breaks, g.breaks, a.breaks),
            piecewise_constant=all(p.piecewise_constant for p in pieces),
            nonnegative_state=True
        )
        self.alpha, self.k, self.beta, self.g, self.a = pieces
        self.k_min, self.a_min = k_min, a_min
        self.strict = strict
        self.q = q
        self.chunk = chunk
        self._column_breaks = merge_breaks(alpha.breaks, k.breaks, beta.breaks)

    def _states(self, mu: FibredMeasure) -> np.ndarray:
        y = mu.points[:, 0]
        if np.any(y < 0.0):
            if self.strict:
                raise DomainError(f"État négatif {float(y.min()):g} pour un champ de Michaelis-Menten")
            logger.debug("États négatifs ramenés à 0")
            y = np.maximum(y, 0.0)
        return y

    def feedback_input(self, mu: FibredMeasure) -> float:
        """r = ∫ β(θ) y dμ(θ, y)."""
        theta, y, masses = column_pairs(mu, self._column_nodes(), self.beta.breaks)
        return float(masses @ (self.beta(theta) * np.maximum(y[:, 0], 0.0)))

    def _column_nodes(self) -> int:
        return 1 if self.piecewise_constant else self.q

    def cell_velocities(self, t: float, mu: FibredMeasure, quad: LabelQuadrature,
                        row_of: np.ndarray, x: np.ndarray) -> np.ndarray:
        self._states(mu)
        theta, y, masses = column_pairs(mu, self._column_nodes(), self._column_breaks)
        y = np.maximum(y[:, 0], 0.0)
        r = self.feedback_input(mu)

        nodes = quad.nodes
        saturation = np.empty(len(nodes))
        for start in range(0, len(nodes), self.chunk):
            omega = nodes[start:start + self.chunk, None]
            rate = self.alpha.evaluate(omega, theta[None, :])
            constant = self.k.evaluate(omega, theta[None, :])
            saturation[start:start + self.chunk] = (rate * y / (constant + y)) @ masses
        feedback = self.g(nodes) * r / (self.a(nodes) + r)
        return quad.average(saturation + feedback)[row_of][:, None]


def michaelis_menten_field(alpha: Kernel, k: Kernel, beta: LabelFunction, g: LabelFunction,
                           a: LabelFunction, strict: bool = True, **kwargs) -> MichaelisMentenField:
    """
    Construit le champ de Michaelis-Menten.

    Profil déclaré: m = ‖α‖_∞ + ‖g‖_∞, L = ‖α‖_∞/k_min + ‖g‖_∞‖β‖_∞/a_min.
    """
    return MichaelisMentenField(alpha, k, beta, g, a, strict=strict, **kwargs)
