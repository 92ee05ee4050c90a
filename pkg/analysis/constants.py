"""
Constantes explicites des estimations a priori et de l'approximation particulaire.
"""

from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

import numpy as np

from utils.exceptions import ValidationError


def _nonnegative(**values: float) -> None:
    for name, value in values.items():
        if value < 0.0 or not np.isfinite(value):
            raise ValidationError(f"{name} doit être positif et fini (reçu {value})")


def r_big(r: float, m_norm: float) -> float:
    """Rayon R_r = (r + ‖m‖₁) exp(2‖m‖₁) contenant les supports jusqu'au temps T."""
    _nonnegative(r=r, m_norm=m_norm)
    return float((r + m_norm) * np.exp(2.0 * m_norm))


def moment_constant(M0: float, m_norm: float) -> float:
    """Majorant (𝓜⁰ + ‖m‖₁) exp(2‖m‖₁) du moment fibré le long de la courbe."""
    _nonnegative(M0=M0, m_norm=m_norm)
    return float((M0 + m_norm) * np.exp(2.0 * m_norm))


def ac_constant(M0: float, m_norm: float) -> float:
    """
    Constante C telle que W_{π,1}(μ(t₁), μ(t₂)) ≤ (1 + 𝓜⁰)(1 + C) ∫_{t₁}^{t₂} m.

    Avec un champ borné par m(1 + |x| + 𝓜_{π,1}(μ)), chaque point avance au plus de
    m(1 + |x| + 𝓜), d'où C = 2(𝓜⁰ + ‖m‖₁) exp(2‖m‖₁).
    """
    return 2.0 * moment_constant(M0, m_norm)


def lipschitz_exponential(L_norm: float) -> float:
    """exp(‖L_{R_r}‖₁)."""
    _nonnegative(L_norm=L_norm)
    return float(np.exp(L_norm))


def d_r(C_T: float, L_norm: float) -> float:
    """D_r = exp((1 + C_T + 2C_T²)‖L_{R_r}‖₁)."""
    _nonnegative(C_T=C_T, L_norm=L_norm)
    return float(np.exp((1.0 + C_T + 2.0 * C_T ** 2) * L_norm))


def fg_bound(r: float, d: int, m: float, C_d: float = 1.0) -> float:
    """
    Écart moyen entre une mesure de B(0, r) et la mesure empirique de m tirages:
    r·C_d·m^{-1/2}, avec un facteur ln(1 + m) en dimension 2.
    """
    if m < 1:
        raise ValidationError(f"Nombre de tirages invalide: {m}")
    _nonnegative(r=r, C_d=C_d)
    rate = m ** -0.5
    if d == 2:
        rate *= np.log(1.0 + m)
    return float(r * C_d * rate)


@dataclass(frozen=True)
class BoundConstants:
    """
    Constantes de l'enveloppe quantitative.

    Attributes:
        D_r: Facteur exponentiel de Grönwall
        C_d: Constante d'échantillonnage (calibrée)
        C_T: exp(‖L_{R_r}‖₁)
    """

    D_r: float
    C_d: float
    C_T: float = 1.0

    @classmethod
    def from_norms(cls, L_norm: float, C_d: float) -> "BoundConstants":
        C_T = lipschitz_exponential(L_norm)
        return cls(D_r=d_r(C_T, L_norm), C_d=C_d, C_T=C_T)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def quantitative_bound(var_mu0: float, var_V: float, r: float, d: int, N: int,
                       constants: BoundConstants, n: Optional[int] = None) -> float:
    """
    Enveloppe de l'erreur particulaire avec m = n²:
    D_r(2Var(𝒱_r) + Var(μ⁰))N^{-1/3} + r·C_d·D_r·N^{-1/3} (× ln(1 + N^{2/3}) en dimension 2).

    Args:
        var_mu0: Variation de la donnée initiale
        var_V: Variation du champ sur B(0, R_r)
        r: Rayon du support initial
        d: Dimension des états
        N: Nombre total de particules n·m
        constants: Constantes D_r, C_d
        n: Nombre de cellules grossières (N^{1/3} par défaut)
    """
    _nonnegative(var_mu0=var_mu0, var_V=var_V, r=r)
    if N < 1:
        raise ValidationError(f"Nombre de particules invalide: {N}")
    rate = 1.0 / n if n is not None else N ** (-1.0 / 3.0)
    sampling = rate if d != 2 else rate * np.log(1.0 + N ** (2.0 / 3.0))
    return float(constants.D_r * (2.0 * var_V + var_mu0) * rate
                 + r * constants.C_d * constants.D_r * sampling)
