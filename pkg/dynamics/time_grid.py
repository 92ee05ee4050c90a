"""
Grille de temps uniforme sur [0, T].
"""

from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from config.settings import DEFAULT_STEPS
from utils.exceptions import ValidationError


@dataclass(frozen=True)
class TimeGrid:
    """
    Noeuds t_s = s·Δt, s = 0, ..., S, avec Δt = T/S.
    """

    T: float
    steps: int = DEFAULT_STEPS

    def __post_init__(self):
        if not self.T > 0.0 or not np.isfinite(self.T):
            raise ValidationError(f"Horizon de temps invalide: {self.T}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValidationError(f"Nombre de pas invalide: {self.steps}")

    @property
    def dt(self) -> float:
        return self.T / self.steps

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.steps + 1)

    def __len__(self) -> int:
        return self.steps + 1

    def refine(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.T, self.steps * factor)

    def to_dict(self) -> Dict[str, Any]:
        return {"T": self.T, "steps": self.steps}
