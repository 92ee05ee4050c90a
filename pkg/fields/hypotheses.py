"""
Vérification par échantillonnage des hypothèses de régularité déclarées par un champ:
croissance sous-linéaire et estimation lipschitzienne en (μ, x).
"""

import logging
from dataclasses import asdict, dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from discretize.partition import label_partition
from discretize.quadrature import label_quadrature
from fields.base_field import VectorField
from measures.fibred_measure import FibredMeasure, fibred_moment, support_radius
from measures.marginal import LabelMarginal
from transport.fibred import fibred_w

logger = logging.getLogger(__name__)

SamplePair = Tuple[FibredMeasure, FibredMeasure]


@dataclass
class HypothesesReport:
    """
    Pires rapports observés, à comparer aux constantes déclarées.

    Attributes:
        field: Nom du champ
        samples: Nombre de couples de mesures testés
        evaluations: Nombre d'évaluations ponctuelles
        growth_ratio: sup |v| / (1 + |x| + 𝓜_{π,1}(μ))
        lipschitz_ratio: sup |v(μ,ω,x) − v(ν,ω,x')| / (W_{π,1}(μ,ν) + |x − x'|)
        measure_lipschitz_ratio: Même rapport à x = x'
        declared_m: Plus grande valeur déclarée de m(t) aux temps testés
        declared_lipschitz: Plus grande valeur déclarée de L_R(t) aux rayons et temps testés
        growth_excess: Plus grand écart positif au profil déclaré (croissance)
        lipschitz_excess: Plus grand écart positif au profil déclaré (Lipschitz)
        lipschitz_monotone: R ↦ L_R(t) croissante sur la grille testée
    """

    field: str
    samples: int
    evaluations: int
    growth_ratio: float = 0.0
    lipschitz_ratio: float = 0.0
    measure_lipschitz_ratio: float = 0.0
    declared_m: float = 0.0
    declared_lipschitz: float = 0.0
    growth_excess: float = 0.0
    lipschitz_excess: float = 0.0
    lipschitz_monotone: bool = True

    def passed(self, tol: float = 1e-9) -> bool:
        return self.growth_excess <= tol and self.lipschitz_excess <= tol and self.lipschitz_monotone

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["passed"] = self.passed()
        return data


def random_measure(marginal: LabelMarginal, dim: int, rng: np.random.Generator,
                   radius: float = 2.0, cells: int = 4, points: int = 3,
                   nonnegative: bool = False) -> FibredMeasure:
    """
    Mesure fibrée aléatoire: points uniformes dans [−r, r]ᵈ (ou [0, r]ᵈ) sur une partition
    de la marginale, poids aléatoires dans chaque fibre.
    """
    part = label_partition(marginal, cells)
    low = 0.0 if nonnegative else -radius
    count = len(part.cells) * points
    xs = rng.uniform(low, radius, size=(count, dim))
    cell_index = np.repeat(np.arange(len(part.cells)), points)
    weights = rng.uniform(0.1, 1.0, size=count)
    weights /= np.bincount(cell_index, weights=weights)[cell_index]
    return FibredMeasure.from_arrays(marginal, part.cells, part.masses, xs, cell_index, weights)


def random_sample_pairs(field: VectorField, marginal: LabelMarginal, count: int = 20,
                        seed: int = 0, radius: float = 2.0, **kwargs) -> List[SamplePair]:
    """
    Couples (μ, ν) de mesures aléatoires de même marginale adaptés au domaine du champ.
    """
    rng = np.random.default_rng(seed)
    return [
        tuple(random_measure(marginal, field.dim, rng, radius,
                             nonnegative=field.nonnegative_state, **kwargs) for _ in range(2))
        for _ in range(count)
    ]


def hypotheses_check(field: VectorField, samples: Union[int, Sequence[SamplePair]],
                     marginal: Optional[LabelMarginal] = None, T: float = 1.0,
                     points_per_pair: int = 8, seed: int = 0, radius: float = 2.0) -> HypothesesReport:
    """
    Confronte un champ à son profil de croissance déclaré sur des entrées aléatoires.

    Pour chaque couple (μ, ν), des labels ω, des positions x, x' et un temps t sont tirés;
    on mesure la croissance |v|/(1+|x|+𝓜_{π,1}(μ)) et le rapport lipschitzien en
    (μ, x) pour la distance W_{π,1}×|·|, comparés à m(t) et L_R(t) avec R le rayon commun.
    Rapport seulement: aucune erreur n'est levée.

    Args:
        field: Champ à tester
        samples: Couples de mesures, ou leur nombre (tirés sur la marginale donnée)
        marginal: Marginale des tirages (uniforme par défaut)
        T: Horizon des temps tirés
        points_per_pair: Évaluations ponctuelles par couple
        seed: Graine des tirages
        radius: Rayon des positions tirées

    Returns:
        Le rapport des pires rapports observés
    """
    marginal = marginal or LabelMarginal.uniform()
    if isinstance(samples, int):
        samples = random_sample_pairs(field, marginal, samples, seed=seed, radius=radius)
    rng = np.random.default_rng(seed + 1)
    nodes = label_quadrature(marginal.base_cells(), marginal, 32).nodes
    report = HypothesesReport(field=field.name, samples=len(samples), evaluations=0)
    low = 0.0 if field.nonnegative_state else -radius

    for mu, nu in samples:
        t = float(rng.uniform(0.0, T))
        omegas = rng.choice(nodes, size=points_per_pair)
        x = rng.uniform(low, radius, size=(points_per_pair, field.dim))
        x2 = rng.uniform(low, radius, size=(points_per_pair, field.dim))

        v_mu = field.evaluate_many(t, mu, omegas, x)
        v_nu = field.evaluate_many(t, nu, omegas, x)
        v_nu2 = field.evaluate_many(t, nu, omegas, x2)
        report.evaluations += 3 * points_per_pair

        m_t = field.growth.m_at(t)
        growth = np.linalg.norm(v_mu, axis=1) / (1.0 + np.linalg.norm(x, axis=1) + fibred_moment(mu, 1))
        report.growth_ratio = max(report.growth_ratio, float(growth.max()))
        report.growth_excess = max(report.growth_excess, float((growth - m_t).max()))
        report.declared_m = max(report.declared_m, m_t)

        distance = fibred_w(mu, nu, 1)
        R = max(support_radius(mu), support_radius(nu),
                float(np.linalg.norm(x, axis=1).max()), float(np.linalg.norm(x2, axis=1).max()))
        L = field.growth.lipschitz_at(R, t)
        report.declared_lipschitz = max(report.declared_lipschitz, L)

        if distance > 0.0:
            ratio = float((np.linalg.norm(v_mu - v_nu, axis=1) / distance).max())
            report.measure_lipschitz_ratio = max(report.measure_lipschitz_ratio, ratio)
            report.lipschitz_excess = max(report.lipschitz_excess, ratio - L)
        gap = distance + np.linalg.norm(x - x2, axis=1)
        positive = gap > 0.0
        if np.any(positive):
            ratio = float((np.linalg.norm(v_mu - v_nu2, axis=1)[positive] / gap[positive]).max())
            report.lipschitz_ratio = max(report.lipschitz_ratio, ratio)
            report.lipschitz_excess = max(report.lipschitz_excess, ratio - L)

    radii = radius * np.array([0.5, 1.0, 2.0, 4.0, 8.0])
    for t in np.linspace(0.0, T, 5):
        profile = [field.growth.lipschitz_at(R, float(t)) for R in radii]
        if np.any(np.diff(profile) < 0.0):
            report.lipschitz_monotone = False

    if not report.passed():
        logger.warning(
            f"Champ {field.name}: profil déclaré dépassé "
            f"(croissance +{report.growth_excess:.3e}, Lipschitz +{report.lipschitz_excess:.3e})"
        )
    return report
