"""
Dynamique couplée meneurs-suiveurs: les meneurs sont des atomes de π soumis à un champ
extérieur et à un contrôle, les suiveurs forment un intervalle de labels et interagissent.
"""

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from discretize.quadrature import LabelQuadrature
from fields.base_field import GrowthProfile, VectorField
from fields.interactions import Interaction, KernelField
from fields.kernels import StepKernel
from measures.fibred_measure import FibredMeasure
from utils.exceptions import ValidationError

Control = Callable[[float, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AffineDrift:
    """Champ extérieur v_ext(t, x) = c + λx."""

    offset: Tuple[float, ...]
    gain: float = 0.0

    def __call__(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.offset, dtype=float) + self.gain * x

    @property
    def growth(self) -> float:
        return float(np.linalg.norm(self.offset)) + abs(self.gain)


def constant_control(value, dim: int = 1) -> Tuple[Control, float]:
    """Contrôle u(t, ω) ≡ u₀ et sa norme."""
    u0 = np.broadcast_to(np.asarray(value, dtype=float), (dim,)).copy()
    return (lambda t, omega: np.tile(u0, (len(omega), 1))), float(np.linalg.norm(u0))


def follower_kernel(followers: Tuple[float, float]) -> StepKernel:
    """Noyau w(ω, θ) = 1_{[lo, hi)}(θ)."""
    lo, hi = followers
    breaks = np.unique([0.0, lo, hi, 1.0])
    size = len(breaks) - 1
    values = np.zeros((size, size))
    values[:, int(np.searchsorted(breaks, lo))] = 1.0
    return StepKernel(breaks, values)


class LeaderFollowerField(VectorField):
    """
    v(t, μ, ω, x) = 1_L(ω)(v_ext(t, x) + u(t, ω)) + ∫ 1_F(θ) Ψ(x, y) dμ(θ, y).
    """

    def __init__(self, psi: Interaction, v_ext: AffineDrift, control: Control, control_bound: float,
                 leaders: Sequence[float], followers: Tuple[float, float], dim: int = 1):
        """
        Initialise le champ.

        Args:
            psi: Interaction entre un agent et les suiveurs
            v_ext: Champ extérieur appliqué aux meneurs
            control: Contrôle u(t, ω) évalué aux labels (renvoie (Q, d))
            control_bound: Borne de |u|
            leaders: Labels atomiques des meneurs
            followers: Intervalle [lo, hi) des suiveurs
            dim: Dimension des états
        """
        lo, hi = float(followers[0]), float(followers[1])
        if not 0.0 <= lo < hi <= 1.0:
            raise ValidationError(f"Intervalle de suiveurs invalide: [{lo}, {hi})")
        leaders = np.asarray(leaders, dtype=float)
        if np.any((leaders >= lo) & (leaders <= hi)):
            raise ValidationError("Les meneurs doivent être hors de l'intervalle fermé des suiveurs")
        if len(np.atleast_1d(v_ext.offset)) != dim:
            raise ValidationError("Le champ extérieur doit être de la dimension des états")

        self.interaction = KernelField([(follower_kernel((lo, hi)), psi)], dim=dim, name="followers")
        growth = GrowthProfile(
            m=v_ext.growth + control_bound + psi.growth_constant(),
            lipschitz=abs(v_ext.gain) + psi.lipschitz
        )
        super().__init__(
            dim, growth, name="leader_follower",
            label_breaks=self.interaction.label_breaks, piecewise_constant=True
        )
        self.v_ext = v_ext
        self.control = control
        self.leaders = leaders
        self.followers = (lo, hi)

    def cell_velocities(self, t: float, mu: FibredMeasure, quad: LabelQuadrature,
                        row_of: np.ndarray, x: np.ndarray) -> np.ndarray:
        is_leader = np.isin(quad.nodes, self.leaders)
        share = quad.average(is_leader.astype(float))
        steering = quad.average(self.control(t, quad.nodes) * is_leader[:, None])
        velocity = share[row_of, None] * self.v_ext(t, x) + steering[row_of]
        return velocity + self.interaction.cell_velocities(t, mu, quad, row_of, x)


def leader_follower_field(psi: Interaction, v_ext: AffineDrift, u=0.0,
                          leaders: Sequence[float] = (1.0,),
                          followers: Tuple[float, float] = (0.0, 0.8),
                          dim: int = 1, control: Optional[Control] = None,
                          control_bound: Optional[float] = None) -> LeaderFollowerField:
    """
    Construit le champ meneurs-suiveurs.

    Profil déclaré: m = |c| + |λ| + sup|u| + (|Ψ(0,0)| + Lip Ψ), L = |λ| + Lip Ψ.

    Args:
        psi: Interaction avec les suiveurs
        v_ext: Champ extérieur des meneurs
        u: Contrôle constant (ignoré si control est fourni)
        leaders: Labels des meneurs
        followers: Intervalle des suiveurs
        dim: Dimension des états
        control: Contrôle u(t, ω) quelconque
        control_bound: Borne du contrôle quelconque
    """
    if control is None:
        control, control_bound = constant_control(u, dim)
    elif control_bound is None:
        raise ValidationError("Un contrôle quelconque exige sa borne")
    return LeaderFollowerField(psi, v_ext, control, control_bound, leaders, followers, dim)
