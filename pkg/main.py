"""
Script principal des expériences.
Orchestre les calculs de distance, les simulations particulaires, les balayages de
convergence et les suites de validation.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from analysis.constants import BoundConstants, quantitative_bound, r_big
from analysis.bounds import BoundReport
from analysis.rates import (
    ConvergenceRecord, calibrate_c_d, fit_rate, graphon_field_variation, mean_errors, nested_partition
)
from analysis.validation import (
    ValidationSummary, approximation_suite, counterexample_suite, dynamics_suite, metric_suite,
    scheme_suite
)
from config.experiment import ExperimentConfig, load_config
from config.settings import EXPORT_DIR, EXPORT_STRUCTURE, MIN_RATE_POINTS
from discretize.partition import refine
from discretize.sampling import sample_initial
from discretize.variation import measure_variation
from dynamics.curves import MeasureCurve, TrajectoryEnsemble, curve_distance, empirical_curve
from dynamics.particles import solve_particles
from exporters.convergence_exporter import ConvergenceExporter
from exporters.plan_exporter import PlanExporter
from exporters.trajectory_exporter import TrajectoryExporter
from exporters.validation_exporter import ValidationExporter
from fields.base_field import VectorField
from measures.fibred_measure import FibredMeasure, support_radius
from measures.io import load_measure
from transport.fibred import classical_plan, classical_w_product, fibred_plans, fibred_w
from utils.exceptions import FibredError, ValidationError
from utils.file_utils import write_json_file

logger = logging.getLogger(__name__)

METRIC_CHOICES = ["fibred", "classical"]
VALIDATION_SUITES = ["metric", "counterexample", "dynamics", "approximation"]


def _metadata(config: ExperimentConfig, **extra: Any) -> Dict[str, Any]:
    return {"experiment": config.experiment, "master_seed": config.master_seed, **extra}


def write_run_report(export_dir: Union[str, Path], command: str, start_time: float,
                     stats: Dict[str, Any]) -> Path:
    """
    Écrit le rapport d'exécution (durées, chemins produits), seul fichier non déterministe.
    """
    execution_time = time.time() - start_time
    report = {
        "command": command,
        "execution_time_seconds": round(execution_time, 2),
        "stats": stats,
    }
    path = write_json_file(Path(export_dir) / EXPORT_STRUCTURE["run_report"], report)
    print(f"\n=== Terminé en {round(execution_time, 2)} secondes ===")
    print(f"Rapport d'exécution sauvegardé: {path}")
    return path


def compute_metric(file_a: Union[str, Path], file_b: Union[str, Path], p: int = 1,
                   metric: str = "fibred", plan_dir: Optional[Union[str, Path]] = None) -> Dict[str, Any]:
    """
    Distance entre deux mesures fibrées lues sur disque.

    Args:
        file_a: Première mesure (JSON)
        file_b: Seconde mesure (JSON)
        p: Ordre de la distance (1 ou 2)
        metric: "fibred" ou "classical"
        plan_dir: Si donné, répertoire où écrire le plan optimal

    Returns:
        Rapport {"metric", "p", "distance"} et, le cas échéant, le chemin du plan

    Raises:
        ParseError: Si un fichier est illisible
        IncomparableMarginalsError: Si les marginales diffèrent (distance fibrée)
    """
    if metric not in METRIC_CHOICES:
        raise ValidationError(f"Métrique inconnue: {metric} (disponibles: {METRIC_CHOICES})")
    mu = load_measure(file_a)
    nu = load_measure(file_b)
    report: Dict[str, Any] = {"metric": metric, "p": p}

    if metric == "fibred":
        report["distance"] = fibred_w(mu, nu, p)
    else:
        report["distance"] = classical_w_product(mu, nu, p)

    if plan_dir is not None:
        if metric == "fibred":
            plan = {"metric": metric, "p": p, "distance": report["distance"], "pieces": fibred_plans(mu, nu, p)}
        else:
            result, lifted_mu, lifted_nu = classical_plan(mu, nu, p)
            plan = {"metric": metric, "p": p, "distance": result.distance,
                    "source": lifted_mu.points, "target": lifted_nu.points, **result.to_dict()}
        stats = PlanExporter(plan_dir).export(plan)
        report["plan_filepath"] = stats["filepath"]
    return report


def particle_run(field: VectorField, mu0: FibredMeasure, config: ExperimentConfig, n: int, m: int,
                 seed: int) -> Tuple[TrajectoryEnsemble, MeasureCurve]:
    """
    Chaîne particulaire complète: partition en n cellules, raffinement en n·m cellules,
    tirage initial, intégration et courbe empirique.
    """
    coarse = nested_partition(mu0.marginal, n)
    fine = refine(coarse, m)
    sample = sample_initial(mu0, coarse, m, seed)
    traj = solve_particles(field, fine, coarse, sample, config.grid(), config.integrator, config.quadrature)
    return traj, empirical_curve(traj)


def run_simulation(config: ExperimentConfig) -> Dict[str, Any]:
    """
    Simule le système de particules de la configuration et exporte trajectoires et courbe.

    Returns:
        Rapport de la simulation
    """
    start_time = time.time()
    print(f"\n=== Simulation '{config.experiment}' ===\n")
    marginal = config.build_marginal()
    field = config.build_field()
    mu0 = config.build_initial(marginal)
    n, m = config.simulation_size
    seed = config.run_seed(n, m)

    print(f"--- Système de {n * m} particules ({n} cellules × {m}) ---")
    traj, curve = particle_run(field, mu0, config, n, m, seed)

    exporter = TrajectoryExporter(config.output.dir, config.output.format,
                                  _metadata(config, field=field.name, n=n, m=m, grid=config.grid().to_dict()))
    stats = exporter.export(traj, curve)
    report = {"experiment": config.experiment, "N": traj.N, "n": n, "m": m, "seed": seed, "stats": stats}
    write_run_report(config.output.dir, "simulate", start_time, report)
    return report


def _bound_summary(field: VectorField, mu0: FibredMeasure, config: ExperimentConfig,
                   errors: Dict[int, Tuple[float, float]], ns: Dict[int, int]) -> Dict[str, Any]:
    """
    Constantes et enveloppe quantitative évaluées aux N du balayage (règle m = n²).
    """
    T = config.T
    r = support_radius(mu0)
    radius = r_big(r, field.growth.m_norm(T))
    L_norm = field.growth.lipschitz_norm(radius, T)
    if "C_d" in config.constants:
        C_d, calibrated = config.constants["C_d"], False
    else:
        C_d, calibrated = calibrate_c_d(mu0.dim, seed=config.master_seed).C_d, True
    constants = BoundConstants.from_norms(L_norm, C_d)
    summary: Dict[str, Any] = {
        "constants": {"R_r": radius, "C_T": constants.C_T, "D_r": constants.D_r,
                      "C_d": C_d, "C_d_fitted": calibrated},
        "bounds": [],
    }
    if config.sweep.m_rule != "n_squared":
        logger.info("Enveloppe quantitative non évaluée: elle suppose m = n²")
        return summary
    try:
        var_V = graphon_field_variation(field, mu0.marginal, radius)
    except ValidationError as e:
        logger.warning(f"Enveloppe quantitative non évaluée: {e}")
        return summary
    var_mu0 = measure_variation(mu0, field.period)
    summary["constants"].update({"var_mu0": var_mu0, "var_V": var_V})
    for N, (mean, _) in errors.items():
        bound = quantitative_bound(var_mu0, var_V, r, mu0.dim, N, constants, n=ns[N])
        summary["bounds"].append({"N": N, **BoundReport.compare("quantitative_bound", mean, bound).to_dict()})
    return summary


def run_convergence(config: ExperimentConfig, threads: int = 1) -> Dict[str, Any]:
    """
    Balayage de convergence: une référence haute résolution, puis pour chaque (n, graine)
    l'erreur sup_t W_{π,1} entre la courbe empirique et la référence.

    Les points du balayage sont indépendants; ils sont exécutés en parallèle et agrégés
    dans l'ordre (N, graine).

    Args:
        config: Configuration de l'expérience
        threads: Nombre de threads

    Returns:
        Résumé de l'expérience (enregistrements, pente ajustée, bornes)
    """
    start_time = time.time()
    print(f"\n=== Convergence '{config.experiment}' ===\n")
    marginal = config.build_marginal()
    field = config.build_field()
    mu0 = config.build_initial(marginal)

    n_ref, m_ref = config.reference.n_ref, config.reference.m
    print(f"--- Référence haute résolution ({n_ref} cellules × {m_ref}) ---")
    _, reference = particle_run(field, mu0, config, n_ref, m_ref, config.run_seed(n_ref, m_ref))

    def point(n: int, seed: int) -> ConvergenceRecord:
        m = config.sweep.m_for(n)
        t0 = time.time()
        _, curve = particle_run(field, mu0, config, n, m, config.run_seed(n, seed))
        error, _ = curve_distance(curve, reference, "fibred_w1")
        logger.info(f"n={n}, m={m}, graine {seed}: erreur {error:.6e}")
        return ConvergenceRecord(n * m, n, m, seed, error, time.time() - t0)

    tasks = [(n, seed) for n in config.sweep.n for seed in config.seeds]
    print(f"--- Balayage de {len(tasks)} exécutions sur {threads} thread(s) ---")
    with ThreadPoolExecutor(max_workers=max(1, threads)) as executor:
        records: List[ConvergenceRecord] = list(executor.map(lambda task: point(*task), tasks))
    records.sort(key=lambda r: (r.N, r.seed))

    errors = mean_errors(records)
    ns = {r.N: r.n for r in records}
    if len(errors) >= MIN_RATE_POINTS:
        fit = fit_rate(records).to_dict()
    else:
        logger.warning(f"Pente non ajustée: {len(errors)} valeurs de N (au moins {MIN_RATE_POINTS} requises)")
        fit = None

    summary = {
        "experiment": config.experiment,
        "config": config.to_dict(),
        "reference": {"mode": config.reference.mode, "n_ref": n_ref, "m_ref": m_ref, "N_ref": n_ref * m_ref},
        "records": [r.to_dict(with_runtime=False) for r in records],
        "mean_errors": [{"N": N, "mean": mean, "sem": sem} for N, (mean, sem) in errors.items()],
        "fit": fit,
    }
    summary.update(_bound_summary(field, mu0, config, errors, ns))

    exporter = ConvergenceExporter(config.output.dir, config.output.format, _metadata(config))
    stats = exporter.export(records, summary)
    write_run_report(config.output.dir, "converge", start_time, {
        "stats": stats, "runtimes": [{"N": r.N, "seed": r.seed, "runtime_seconds": r.runtime_seconds}
                                     for r in records]
    })
    return summary


def run_validation(config: ExperimentConfig) -> ValidationSummary:
    """
    Exécute les suites de validation demandées par la clé "validation" de la configuration.

    Options reconnues: "suites" (liste parmi metric, counterexample, dynamics, schemes,
    approximation), "configs", "eps", "hypotheses_samples", "n", "m".

    Returns:
        Le résumé des suites
    """
    start_time = time.time()
    print(f"\n=== Validation '{config.experiment}' ===\n")
    options = config.validation
    requested = options.get("suites", VALIDATION_SUITES)
    marginal = config.build_marginal()
    field = config.build_field()
    mu0 = config.build_initial(marginal)
    summary = ValidationSummary()

    for name in requested:
        print(f"--- Suite '{name}' ---")
        if name == "metric":
            suite = metric_suite(int(options.get("configs", 20)), seed=config.master_seed)
        elif name == "counterexample":
            suite = counterexample_suite(float(options.get("eps", 0.3)), integrator=config.integrator)
        elif name == "dynamics":
            n = int(options.get("n", config.simulation_size[0]))
            m = int(options.get("m", config.simulation_size[1]))
            suite = dynamics_suite(field, mu0, n, m, config.grid(), config.run_seed(n, m),
                                   config.integrator, config.quadrature,
                                   int(options.get("hypotheses_samples", 10)))
        elif name == "schemes":
            suite = scheme_suite(field, mu0, config.T, q=config.quadrature)
        elif name == "approximation":
            suite = approximation_suite(mu0, period=field.period)
        else:
            raise ValidationError(f"Suite inconnue: {name}")
        summary.suites.append(suite)
        for report in suite.reports:
            status = "OK " if report.passed else "ÉCHEC"
            print(f"  [{status}] {report.name}: {report.lhs:.6e} ≤ {report.rhs:.6e}")

    exporter = ValidationExporter(config.output.dir, config.output.format, _metadata(config))
    stats = exporter.export(summary)
    write_run_report(config.output.dir, "validate", start_time, stats)
    return summary


def main():
    """
    Fonction principale: validation de la configuration de démonstration.
    """
    try:
        config = load_config(Path(__file__).resolve().parent / "configs" / "kuramoto.json")
        run_validation(config.with_overrides(out=EXPORT_DIR))
    except FibredError as e:
        print(f"Erreur lors de la validation: {e}")
        raise


if __name__ == "__main__":
    main()
