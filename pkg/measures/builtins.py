"""
Mesures fibrées prédéfinies: paires à labels échangés, contre-exemple de stabilité,
suite de Rademacher, mesures étagées et construction depuis une configuration.
"""

from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np

from measures.fibred_measure import (
    FibredMeasure, Fibre, graph_measure, product_measure
)
from measures.io import load_measure
from measures.marginal import Cell, LabelMarginal
from utils.exceptions import ConfigError, ValidationError


def _vector(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float))


def label_swap_pair(omega1: float, omega2: float, x1, x2) -> Tuple[FibredMeasure, FibredMeasure]:
    """
    Paire de mesures empiriques dont les positions sont échangées entre deux labels:
    μ₁ = ½(δ_(ω₁,x₁) + δ_(ω₂,x₂)) et μ₂ = ½(δ_(ω₁,x₂) + δ_(ω₂,x₁)).

    La distance fibrée vaut |x₁ − x₂| tandis que la distance classique sur le produit
    vaut min{|ω₁ − ω₂|, |x₁ − x₂|}.
    """
    if omega1 == omega2:
        raise ValidationError("Les deux labels doivent être distincts")
    marginal = LabelMarginal.atomic([omega1, omega2], [0.5, 0.5])
    cells = [Cell.atom(omega1), Cell.atom(omega2)]
    x1, x2 = _vector(x1), _vector(x2)
    mu1 = graph_measure(marginal, cells, np.vstack([x1, x2]))
    mu2 = graph_measure(marginal, cells, np.vstack([x2, x1]))
    return mu1, mu2


def drift_counterexample(eps: float, t: float = 0.0) -> Tuple[FibredMeasure, FibredMeasure]:
    """
    Courbes explicites μ(t) = ½(δ_(0,0) + δ_(ε,1+t)) et ν(t) = ½(δ_(0,1) + δ_(ε,t)),
    solutions du champ local valant 0 au label 0 et 1 au label ε.
    """
    if not 0.0 < eps <= 1.0:
        raise ValidationError("ε doit appartenir à ]0,1]")
    marginal = LabelMarginal.atomic([0.0, eps], [0.5, 0.5])
    cells = [Cell.atom(0.0), Cell.atom(eps)]
    mu = graph_measure(marginal, cells, np.array([[0.0], [1.0 + t]]))
    nu = graph_measure(marginal, cells, np.array([[1.0], [t]]))
    return mu, nu


def rademacher_value(n: int, omega: np.ndarray) -> np.ndarray:
    """r_n(ω) = signe(sin(2ⁿπω))."""
    return np.sign(np.sin((2.0 ** n) * np.pi * np.asarray(omega, dtype=float)))


def rademacher_measure(n: int, marginal: Optional[LabelMarginal] = None) -> FibredMeasure:
    """
    Mesure graphe de la n-ième fonction de Rademacher sur les intervalles dyadiques.

    Args:
        n: Indice dans la suite
        marginal: Marginale des labels (uniforme par défaut)
    """
    marginal = marginal or LabelMarginal.uniform()
    if not marginal.is_nonatomic:
        raise ValidationError("La suite de Rademacher est définie pour une marginale sans atome")
    count = 2 ** n
    edges = np.linspace(0.0, 1.0, count + 1)
    cells = [Cell(float(edges[j]), float(edges[j + 1])) for j in range(count)]
    mids = 0.5 * (edges[:-1] + edges[1:])
    return graph_measure(marginal, cells, rademacher_value(n, mids))


def rademacher_limit(marginal: Optional[LabelMarginal] = None) -> FibredMeasure:
    """Limite étroite π × ½(δ₋₁ + δ₁) de la suite de Rademacher."""
    marginal = marginal or LabelMarginal.uniform()
    return product_measure(marginal, [[-1.0], [1.0]])


def step_measure(marginal: LabelMarginal, breaks: Sequence[float],
                 fibres: Sequence[Tuple[Any, Optional[Any]]]) -> FibredMeasure:
    """
    Mesure dont les fibres sont constantes sur les intervalles [breaks[i], breaks[i+1]).

    Args:
        marginal: Marginale des labels
        breaks: Bornes croissantes de 0 à 1
        fibres: Pour chaque intervalle, couple (points, poids ou None)
    """
    breaks = np.asarray(breaks, dtype=float)
    if len(breaks) != len(fibres) + 1:
        raise ValidationError("Il faut une fibre par intervalle")
    result = []
    for j, (points, weights) in enumerate(fibres):
        cell = Cell.interval(breaks[j], breaks[j + 1])
        result.append(Fibre.build(cell, marginal.mass(cell), points, weights))
    return FibredMeasure.from_fibres(marginal, result)


def build_initial_measure(spec: Dict[str, Any], marginal: LabelMarginal,
                          base_dir: Union[str, Path] = ".") -> FibredMeasure:
    """
    Construit la donnée initiale décrite dans une configuration d'expérience.

    Types reconnus: "file", "product", "step", "graph", "rademacher".

    Raises:
        ConfigError: Si le type est inconnu ou si un paramètre manque
    """
    kind = spec.get("type")
    try:
        if kind == "file":
            mu = load_measure(Path(base_dir) / spec["path"])
            if not mu.marginal.same_as(marginal):
                raise ConfigError("La marginale du fichier initial diffère de celle de la configuration")
            return mu
        if kind == "product":
            return product_measure(marginal, spec["points"], spec.get("weights"))
        if kind == "step":
            fibres = [(f["points"], f.get("weights")) for f in spec["fibres"]]
            return step_measure(marginal, spec["breaks"], fibres)
        if kind == "graph":
            breaks = np.asarray(spec["breaks"], dtype=float)
            cells = [Cell.interval(breaks[j], breaks[j + 1]) for j in range(len(breaks) - 1)]
            return graph_measure(marginal, cells, spec["values"])
        if kind == "rademacher":
            return rademacher_measure(int(spec["n"]), marginal)
    except KeyError as e:
        raise ConfigError(f"Paramètre manquant pour la donnée initiale '{kind}': {e}") from e
    raise ConfigError(f"Type de donnée initiale inconnu: {kind}")
