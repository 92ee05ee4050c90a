"""
Suites de validation: valeurs exactes des distances, contre-exemple de stabilité,
estimations a priori le long d'une dynamique, schémas de construction et
approximation par espérance conditionnelle.

Chaque suite renvoie des BoundReport; une suite passe si tous ses rapports passent.
"""

import logging
import dataclasses
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from analysis.bounds import BoundReport, apriori_reports
from analysis.rates import conditional_expectation_sweep, nested_partition
from analysis.stability import stability_envelope
from config.settings import DEFAULT_INTEGRATOR, DEFAULT_QUADRATURE_NODES
from discretize.partition import refine
from discretize.sampling import sample_initial
from dynamics.curves import curve_distance, empirical_curve
from dynamics.euler import delayed_euler_curve
from dynamics.particles import solve_particles
from dynamics.picard import flow_picard
from dynamics.time_grid import TimeGrid
from fields.base_field import VectorField
from fields.hypotheses import hypotheses_check, random_measure
from fields.label_drift_field import label_drift_field
from measures.builtins import drift_counterexample, label_swap_pair
from measures.fibred_measure import FibredMeasure
from measures.marginal import LabelMarginal
from transport.fibred import cdf_dual_potentials, classical_w_product, fibred_w, kr_dual_value

logger = logging.getLogger(__name__)

GOLDEN_TOL = 1e-10
TRAJECTORY_TOL = 1e-8
DUALITY_TOL = 1e-8
ORDERING_TOL = 1e-9
CONTRACTION_RATIO = 0.75


@dataclass
class SuiteResult:
    """
    Résultat d'une suite de validation.

    Attributes:
        name: Nom de la suite
        reports: Rapports de bornes produits
        details: Diagnostics complémentaires (sérialisables)
    """

    name: str
    reports: List[BoundReport]
    details: Dict[str, Any] = dataclasses.field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "reports": [r.to_dict() for r in self.reports],
            "details": self.details,
        }


@dataclass
class ValidationSummary:
    """Ensemble des suites exécutées."""

    suites: List[SuiteResult] = dataclasses.field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(s.passed for s in self.suites)

    def failures(self) -> List[Tuple[str, BoundReport]]:
        return [(s.name, r) for s in self.suites for r in s.reports if not r.passed]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "all_passed": self.all_passed,
            "suites": [s.to_dict() for s in self.suites],
        }


def _exact(name: str, value: float, expected: float, t: Optional[float] = None,
           tol: float = GOLDEN_TOL) -> BoundReport:
    return BoundReport.compare(name, abs(float(value) - float(expected)), 0.0, t, tol)


def metric_suite(configs: int = 20, ordering_pairs: int = 20, duality_pairs: int = 10,
                 seed: int = 0) -> SuiteResult:
    """
    Distances sur les paires à labels échangés (valeurs exactes), comparaison
    classique ≤ fibrée et égalité duale des potentiels par fonctions de répartition.

    Args:
        configs: Nombre de paires à labels échangés (d alterne entre 1 et 2)
        ordering_pairs: Nombre de couples aléatoires pour la comparaison des distances
        duality_pairs: Nombre de couples aléatoires en dimension 1 pour la dualité
        seed: Graine des tirages
    """
    rng = np.random.default_rng(seed)
    reports: List[BoundReport] = []

    for j in range(configs):
        d = 1 + j % 2
        omega1, omega2 = np.sort(rng.uniform(0.0, 1.0, size=2))
        x1, x2 = rng.normal(size=(2, d))
        mu1, mu2 = label_swap_pair(float(omega1), float(omega2), x1, x2)
        gap = float(np.linalg.norm(x1 - x2))
        reports.append(_exact("label_swap_fibred", fibred_w(mu1, mu2, 1), gap))
        reports.append(_exact("label_swap_classical", classical_w_product(mu1, mu2, 1),
                              min(float(omega2 - omega1), gap)))

    marginal = LabelMarginal.uniform()
    for _ in range(ordering_pairs):
        d = int(rng.integers(1, 3))
        mu = random_measure(marginal, d, rng, cells=int(rng.integers(2, 6)))
        nu = random_measure(marginal, d, rng, cells=int(rng.integers(2, 6)))
        reports.append(BoundReport.compare("metric_ordering", classical_w_product(mu, nu, 1),
                                           fibred_w(mu, nu, 1), tol=ORDERING_TOL))

    for _ in range(duality_pairs):
        mu = random_measure(marginal, 1, rng, cells=int(rng.integers(2, 6)))
        nu = random_measure(marginal, 1, rng, cells=int(rng.integers(2, 6)))
        dual = kr_dual_value(mu, nu, cdf_dual_potentials(mu, nu))
        reports.append(_exact("duality", dual, fibred_w(mu, nu, 1), tol=DUALITY_TOL))

    return SuiteResult("metric", reports, {"configs": configs, "seed": seed})


def counterexample_suite(eps: float = 0.3, times: Sequence[float] = (0.0, 0.5, 1.0),
                         steps: int = 200, integrator: str = DEFAULT_INTEGRATOR) -> SuiteResult:
    """
    Couple de solutions d'une dérive locale dépendant du label: la distance fibrée reste
    égale à 1 tandis que la distance classique vaut min{1, √(ε² + t²)}.

    Les deux solutions sont recalculées par itération sur les flots et comparées aux
    trajectoires exactes; l'enveloppe de stabilité doit être atteinte à chaque noeud.
    """
    reports: List[BoundReport] = []
    for t in times:
        mu, nu = drift_counterexample(eps, t)
        reports.append(_exact("counterexample_fibred", fibred_w(mu, nu, 1), 1.0, t))
        reports.append(_exact("counterexample_classical", classical_w_product(mu, nu, 1),
                              min(1.0, float(np.hypot(eps, t))), t))

    drift = label_drift_field([0.0, eps, 1.0], [0.0, 1.0])
    grid = TimeGrid(float(max(times)), steps)
    mu0, nu0 = drift_counterexample(eps, 0.0)
    curve_mu, _ = flow_picard(drift, mu0, grid, integrator=integrator)
    curve_nu, _ = flow_picard(drift, nu0, grid, integrator=integrator)
    for t in times:
        s = int(round(t / grid.dt))
        exact_mu, exact_nu = drift_counterexample(eps, t)
        error = max(fibred_w(curve_mu[s], exact_mu, 1), fibred_w(curve_nu[s], exact_nu, 1))
        reports.append(BoundReport.compare("counterexample_trajectory", error, 0.0, t, TRAJECTORY_TOL))

    envelope = stability_envelope(curve_mu, curve_nu, drift)
    reports.extend(envelope)
    worst = max(abs(r.rhs - r.lhs) for r in envelope)
    reports.append(BoundReport.compare("stability_tightness", worst, 0.0, tol=TRAJECTORY_TOL))
    return SuiteResult("counterexample", reports, {"eps": eps, "steps": steps})


def dynamics_suite(field: VectorField, mu0: FibredMeasure, n: int, m: int, grid: TimeGrid,
                   seed: int = 0, integrator: str = DEFAULT_INTEGRATOR,
                   q: int = DEFAULT_QUADRATURE_NODES, hypotheses_samples: int = 10) -> SuiteResult:
    """
    Simulation particulaire du modèle configuré, estimations a priori le long de la courbe
    empirique et confrontation du champ à son profil de croissance déclaré.

    Args:
        field: Champ du modèle
        mu0: Donnée initiale
        n: Nombre de cellules grossières
        m: Particules par cellule
        grid: Grille de temps
        seed: Graine de l'échantillon initial
        integrator: "rk4" ou "euler"
        q: Noeuds de quadrature par cellule
        hypotheses_samples: Couples de mesures tirés pour le profil déclaré
    """
    coarse = nested_partition(mu0.marginal, n)
    fine = refine(coarse, m)
    sample = sample_initial(mu0, coarse, m, seed)
    traj = solve_particles(field, fine, coarse, sample, grid, integrator, q)
    curve = empirical_curve(traj)
    reports = apriori_reports(curve, field, traj)

    hypotheses = hypotheses_check(field, hypotheses_samples, marginal=mu0.marginal, T=grid.T, seed=seed)
    reports.append(BoundReport.compare("declared_growth", hypotheses.growth_excess, 0.0, tol=1e-9))
    reports.append(BoundReport.compare("declared_lipschitz", hypotheses.lipschitz_excess, 0.0, tol=1e-9))
    reports.append(BoundReport.compare("lipschitz_monotone", 0.0 if hypotheses.lipschitz_monotone else 1.0, 0.0))
    return SuiteResult("dynamics", reports, {"field": field.name, "N": traj.N, "n": n, "m": m,
                                             "hypotheses": hypotheses.to_dict()})


def scheme_suite(field: VectorField, mu0: FibredMeasure, T: float, base_steps: int = 40,
                 base_delay: int = 10, levels: int = 3, min_ratio: float = 0.4,
                 max_ratio: float = 0.6, q: int = DEFAULT_QUADRATURE_NODES) -> SuiteResult:
    """
    Comparaison du schéma d'Euler retardé à l'itération sur les flots: l'écart
    sup_t W_{π,1} doit diminuer de moitié (à 20 % près) quand le pas et le retard sont
    divisés par deux, et les résidus de Picard doivent se contracter.
    """
    reports: List[BoundReport] = []
    gaps, ratios = [], []
    for level in range(levels):
        grid = TimeGrid(T, base_steps * 2 ** level)
        picard, table = flow_picard(field, mu0, grid, q=q)
        euler = delayed_euler_curve(field, mu0, grid, base_delay * 2 ** level, q)
        gap, _ = curve_distance(picard, euler, "fibred_w1")
        gaps.append(gap)
        contraction = table.contraction_ratios()
        if len(contraction):
            ratios.append(float(contraction.max()))
            reports.append(BoundReport.compare("picard_contraction", ratios[-1], CONTRACTION_RATIO))
    for previous, current in zip(gaps[:-1], gaps[1:]):
        if previous > 0.0:
            ratio = current / previous
            reports.append(BoundReport.compare("scheme_gap_ratio", ratio, max_ratio))
            reports.append(BoundReport.compare("scheme_gap_ratio_floor", min_ratio, ratio))
    return SuiteResult("schemes", reports, {"gaps": gaps, "contraction": ratios})


def approximation_suite(mu0: FibredMeasure, ns: Sequence[int] = tuple(2 ** k for k in range(1, 9)),
                        period: Optional[float] = None) -> SuiteResult:
    """
    W_{π,1}(μ⁰, E_{P_n}[μ⁰]) ≤ Var(μ⁰)/n le long d'une chaîne dyadique, avec décroissance.
    """
    steps = conditional_expectation_sweep(mu0, ns, period)
    reports = [BoundReport.compare("conditional_expectation", s.distance, s.bound, tol=1e-9) for s in steps]
    for previous, current in zip(steps[:-1], steps[1:]):
        reports.append(BoundReport.compare("conditional_monotone", current.distance, previous.distance, tol=1e-12))
    return SuiteResult("approximation", reports, {"steps": [s.to_dict() for s in steps]})
