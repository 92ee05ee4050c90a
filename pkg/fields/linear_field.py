"""
Champ linéaire v(t, μ, ω, x) = ∫ (a(ω, θ)x + b(ω, θ)y) dμ(θ, y).
"""

from fields.interactions import KernelField, other_state, own_state
from fields.kernels import ConstantKernel, Kernel


class LinearField(KernelField):
    """
    Champ linéaire à noyaux bornés a et b.

    La dynamique des barycentres des fibres est alors fermée; voir
    dynamics.barycentric.barycentric_curve.
    """

    def __init__(self, a: Kernel, b: Kernel, dim: int = 1):
        super().__init__([(a, own_state()), (b, other_state())], dim=dim, name="linear")
        self.a = a
        self.b = b


def linear_field(a, b, dim: int = 1) -> LinearField:
    """
    Construit un champ linéaire; un nombre est converti en noyau constant.

    Profil déclaré: m = L = ‖a‖_∞ + ‖b‖_∞.
    """
    a = a if isinstance(a, Kernel) else ConstantKernel(float(a))
    b = b if isinstance(b, Kernel) else ConstantKernel(float(b))
    return LinearField(a, b, dim=dim)
