"""
Dynamique de type Kuramoto sur le tore.
"""

import numpy as np

from fields.interactions import KernelField, sine_coupling
from fields.kernels import Kernel


def kuramoto_field(K: float, w: Kernel) -> KernelField:
    """
    v(t, μ, ω, x) = ∫ w(ω, θ) K sin(y − x) dμ(θ, y).

    Les phases ne sont pas réduites modulo 2π; les distances utilisent la période 2π.
    """
    return KernelField([(w, sine_coupling(K))], dim=1, name="kuramoto", period=2.0 * np.pi)
