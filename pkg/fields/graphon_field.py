"""
Champ graphon (Ψ_w ⋆ μ)(ω, x) = ∫ w(ω, θ) Ψ(x, y) dμ(θ, y).
"""

from typing import Optional

from fields.interactions import Interaction, KernelField
from fields.kernels import Kernel


def graphon_field(w: Kernel, psi: Interaction, dim: int = 1,
                  period: Optional[float] = None) -> KernelField:
    """
    Construit le champ graphon d'un noyau et d'une interaction de paires.

    Profil déclaré: m = ‖w‖_∞·(|Ψ(0,0)| + Lip Ψ) (ou ‖w‖_∞·sup|Ψ| si Ψ est bornée)
    et L = ‖w‖_∞·Lip Ψ.

    Args:
        w: Noyau en label
        psi: Interaction de paires
        dim: Dimension des états
        period: Période des états, le cas échéant

    Returns:
        Le champ à noyau
    """
    return KernelField([(w, psi)], dim=dim, name="graphon", period=period)
