"""
Taux de convergence: ajustement log-log, calibration de la constante d'échantillonnage,
expériences d'échantillonnage et d'espérance conditionnelle, variation des champs à noyau.
"""

import logging
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from analysis.constants import fg_bound
from config.settings import CALIBRATION_SAMPLE_SIZES, CALIBRATION_SEEDS, MIN_RATE_POINTS
from discretize.partition import Partition, equipartition, label_partition
from discretize.sampling import sample_initial
from discretize.variation import measure_variation
from dynamics.curves import empirical_measure
from fields.base_field import VectorField
from fields.interactions import KernelField
from fields.label_drift_field import LabelDriftField
from measures.fibred_measure import DiscreteMeasure, FibredMeasure, conditional_expectation
from measures.marginal import LabelMarginal
from transport.fibred import fibred_w
from transport.wasserstein import w_1d, w_discrete
from utils.exceptions import FitError, ValidationError

logger = logging.getLogger(__name__)


@dataclass
class ConvergenceRecord:
    """
    Erreur sup_t W_{π,1}(μ^{n,m}(t), μ_ref(t)) d'une exécution.
    """

    N: int
    n: int
    m: int
    seed: int
    sup_t_error: float
    runtime_seconds: float = 0.0

    def __post_init__(self):
        if self.N != self.n * self.m:
            raise ValidationError(f"N = {self.N} différent de n·m = {self.n * self.m}")
        if self.sup_t_error < 0.0:
            raise ValidationError("Une erreur est positive")

    def to_dict(self, with_runtime: bool = True) -> Dict[str, Any]:
        data = asdict(self)
        if not with_runtime:
            data.pop("runtime_seconds")
        return data


@dataclass
class RateFit:
    """Droite log y = intercept + slope·log x ajustée par moindres carrés."""

    slope: float
    intercept: float
    residual: float
    points: List[Tuple[float, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {"slope": self.slope, "intercept": self.intercept, "residual": self.residual,
                "points": [list(p) for p in self.points]}


def fit_power_law(xs: Sequence[float], ys: Sequence[float], min_points: int = 2) -> RateFit:
    """
    Ajuste y ≈ e^{intercept}·x^{slope}; le résidu est la moyenne quadratique des écarts en log.

    Raises:
        FitError: Trop peu d'abscisses distinctes ou valeurs non strictement positives
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if len(np.unique(xs)) < min_points:
        raise FitError(f"Au moins {min_points} abscisses distinctes sont nécessaires (reçu {len(np.unique(xs))})")
    if np.any(xs <= 0.0) or np.any(ys <= 0.0) or not np.all(np.isfinite(ys)):
        raise FitError("Les valeurs ajustées doivent être strictement positives et finies")
    lx, ly = np.log(xs), np.log(ys)
    fit = stats.linregress(lx, ly)
    residual = float(np.sqrt(np.mean((ly - (fit.intercept + fit.slope * lx)) ** 2)))
    return RateFit(float(fit.slope), float(fit.intercept), residual,
                   [(float(x), float(y)) for x, y in zip(xs, ys)])


def mean_errors(records: Sequence[ConvergenceRecord]) -> Dict[int, Tuple[float, float]]:
    """Moyenne et erreur standard des erreurs par valeur de N."""
    grouped: Dict[int, List[float]] = {}
    for record in records:
        grouped.setdefault(record.N, []).append(record.sup_t_error)
    summary = {}
    for N in sorted(grouped):
        values = np.asarray(grouped[N])
        sem = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
        summary[N] = (float(values.mean()), sem)
    return summary


def fit_rate(records: Sequence[ConvergenceRecord], min_points: int = MIN_RATE_POINTS) -> RateFit:
    """
    Pente de log E[sup_t erreur] en fonction de log N, les erreurs étant moyennées sur les graines.

    Raises:
        FitError: Moins de min_points valeurs de N ou erreurs nulles
    """
    summary = mean_errors(records)
    Ns = list(summary)
    return fit_power_law(Ns, [summary[N][0] for N in Ns], min_points)


@dataclass
class Calibration:
    """Constante C_d ajustée et écarts moyens mesurés."""

    d: int
    C_d: float
    radius: float
    gaps: List[Tuple[int, float]]

    def to_dict(self) -> Dict[str, Any]:
        return {"d": self.d, "C_d": self.C_d, "radius": self.radius, "gaps": [list(g) for g in self.gaps]}


def calibrate_c_d(d: int, ms: Sequence[int] = CALIBRATION_SAMPLE_SIZES,
                  seeds: int = CALIBRATION_SEEDS, seed: int = 0) -> Calibration:
    """
    Estime la constante d'échantillonnage C_d sur les mélanges uniformes de masses de Dirac
    aux sommets de [−1, 1]ᵈ: plus grand rapport entre l'écart moyen W₁(ρ_m, ρ) et r·m^{-1/2}
    (× ln(1 + m) en dimension 2).
    """
    corners = np.array(np.meshgrid(*[[-1.0, 1.0]] * d, indexing="ij")).reshape(d, -1).T
    target = DiscreteMeasure.build(corners)
    radius = float(np.sqrt(d))
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(d)]))
    gaps, ratios = [], []
    for m in ms:
        values = []
        for _ in range(seeds):
            counts = rng.multinomial(m, target.weights)
            keep = counts > 0
            empirical = DiscreteMeasure.build(corners[keep], counts[keep] / m)
            values.append(w_1d(empirical, target) if d == 1 else w_discrete(empirical, target).distance)
        gap = float(np.mean(values))
        gaps.append((int(m), gap))
        ratios.append(gap / fg_bound(radius, d, m, 1.0))
    C_d = float(max(ratios))
    logger.info(f"Constante d'échantillonnage calibrée: C_{d} = {C_d:.4f}")
    return Calibration(d, C_d, radius, gaps)


@dataclass
class SamplingRate:
    """Écart moyen W_{π,1}(μ^{0,n,m}, E_P[μ⁰]) en fonction de m, et pente ajustée."""

    gaps: List[Tuple[int, float]]
    fit: RateFit

    def to_dict(self) -> Dict[str, Any]:
        return {"gaps": [list(g) for g in self.gaps], "fit": self.fit.to_dict()}


def sampling_rate_experiment(mu0: FibredMeasure, part: Partition,
                             ms: Sequence[int] = (100, 1000, 10000), seeds: int = 50,
                             seed: int = 0) -> SamplingRate:
    """
    Mesure l'écart entre la mesure empirique des tirages initiaux et l'espérance
    conditionnelle de μ⁰ sur la partition, moyenné sur les graines.
    """
    target = conditional_expectation(mu0, part)
    gaps = []
    for m in ms:
        values = []
        for k in range(seeds):
            sample = sample_initial(mu0, part, int(m), seed=seed + k)
            values.append(fibred_w(empirical_measure(sample.points, sample.cell_of, part, merge=True), target, 1))
        gaps.append((int(m), float(np.mean(values))))
    fit = fit_power_law([g[0] for g in gaps], [g[1] for g in gaps])
    return SamplingRate(gaps, fit)


@dataclass
class ConditionalStep:
    """W_{π,1}(μ⁰, E_{P_n}[μ⁰]) comparée à Var(μ⁰)/n."""

    n: int
    distance: float
    bound: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def nested_partition(marginal: LabelMarginal, n: int) -> Partition:
    return equipartition(marginal, n) if marginal.is_nonatomic else label_partition(marginal, n)


def conditional_expectation_sweep(mu0: FibredMeasure, ns: Sequence[int] = tuple(2 ** k for k in range(1, 9)),
                                  period: Optional[float] = None) -> List[ConditionalStep]:
    """
    Distance entre μ⁰ et ses espérances conditionnelles sur les équipartitions successives.
    """
    variation = measure_variation(mu0, period)
    steps = []
    for n in ns:
        approx = conditional_expectation(mu0, nested_partition(mu0.marginal, n))
        steps.append(ConditionalStep(int(n), fibred_w(mu0, approx, 1, period), variation / n))
    return steps


def graphon_field_variation(field: VectorField, marginal: LabelMarginal, R: float) -> float:
    """
    Majorant de la variation de ω ↦ v(·, ·, ω, ·) en norme sup sur B(0, R):
    Σ_termes Var_π(w)·sup_{B(0,R)²}|Ψ| pour un champ à noyau.

    Raises:
        ValidationError: Pour un champ dont la variation n'est pas calculable
    """
    if field.label_independent:
        return 0.0
    if isinstance(field, KernelField):
        return float(sum(kernel.label_variation(marginal) * psi.sup_on_ball(R) for kernel, psi in field.terms))
    if isinstance(field, LabelDriftField):
        values = field.drift.values.reshape(len(field.drift.values), -1)
        return float(np.linalg.norm(np.diff(values, axis=0), axis=1).sum())
    raise ValidationError(f"Variation non prise en charge pour le champ {field.name}")
