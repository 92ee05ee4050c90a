#!/usr/bin/env python
"""
Interface en ligne de commande: distances fibrées, simulations particulaires,
balayages de convergence et suites de validation.
"""

import os
import sys
import argparse
import logging

# Charger les variables d'environnement avant tout import
import dotenv
if os.path.exists(".env"):
    dotenv.load_dotenv(".env")

from config.experiment import load_config
from config.settings import EXPORT_DIR
from main import METRIC_CHOICES, compute_metric, run_convergence, run_simulation, run_validation
from utils.exceptions import ConfigError, FibredError
from utils.solver_utils import set_log_level

logger = logging.getLogger(__name__)

EXIT_VALIDATION_FAILED = 2


def parse_arguments(argv=None):
    """
    Parse les arguments de la ligne de commande.

    Returns:
        Arguments parsés
    """
    parser = argparse.ArgumentParser(
        description="Transport fibré et approximation particulaire d'équations de continuité structurées."
    )
    parser.add_argument(
        "--log-level",
        type=str,
        help="Niveau de journalisation (remplace la variable d'environnement FIBRED_LOG_LEVEL)"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)

    metric = subparsers.add_parser("metric", help="Distance entre deux mesures fibrées")
    metric.add_argument("file_a", type=str, help="Première mesure (JSON)")
    metric.add_argument("file_b", type=str, help="Seconde mesure (JSON)")
    metric.add_argument("--p", type=int, choices=[1, 2], default=1, help="Ordre de la distance (par défaut: 1)")
    metric.add_argument("--metric", choices=METRIC_CHOICES, default="fibred",
                        help="Distance fibrée ou classique sur le produit (par défaut: fibred)")
    metric.add_argument("--plan", action="store_true", help="Écrit le plan optimal dans le répertoire d'export")
    metric.add_argument("--out", type=str, help=f"Répertoire d'export (par défaut: {EXPORT_DIR})")

    for name, help_text in (("simulate", "Simulation du système de particules"),
                            ("converge", "Balayage de convergence"),
                            ("validate", "Suites de validation")):
        sub = subparsers.add_parser(name, help=help_text)
        sub.add_argument("--config", type=str, required=True, help="Configuration de l'expérience (JSON)")
        sub.add_argument("--out", type=str, help="Répertoire d'export (remplace output.dir)")
        sub.add_argument("--seed", type=int, help="Graine maîtresse (remplace master_seed)")
        sub.add_argument("--threads", type=int, default=1, help="Nombre de threads (par défaut: 1)")

    return parser.parse_args(argv)


def check_requirements():
    """
    Vérifie que toutes les dépendances sont installées.

    Returns:
        True si toutes les dépendances sont installées, False sinon
    """
    try:
        import numpy
        import scipy
        import pandas
        import ot
        return True
    except ImportError as e:
        print(f"Erreur: Dépendance manquante - {e}")
        print("Veuillez installer les dépendances requises avec:")
        print("pip install -r requirements.txt")
        return False


def run_command(args) -> int:
    """
    Exécute la sous-commande demandée.

    Returns:
        Code de sortie
    """
    if args.command == "metric":
        report = compute_metric(args.file_a, args.file_b, args.p, args.metric,
                                plan_dir=(args.out or EXPORT_DIR) if args.plan else None)
        print(f"{report['distance']:.12g}")
        return 0

    if args.threads < 1:
        raise ConfigError(f"Nombre de threads invalide: {args.threads}")
    config = load_config(args.config).with_overrides(out=args.out, seed=args.seed)

    if args.command == "simulate":
        run_simulation(config)
        return 0
    if args.command == "converge":
        summary = run_convergence(config, threads=args.threads)
        if summary["fit"] is not None:
            print(f"Pente ajustée: {summary['fit']['slope']:.12g}")
        return 0

    summary = run_validation(config)
    failures = summary.failures()
    for suite, report in failures:
        print(f"Échec: {suite}/{report.name} (écart {report.slack:.6e})")
    print("Toutes les vérifications sont satisfaites." if summary.all_passed
          else f"{len(failures)} vérification(s) en échec.")
    return 0 if summary.all_passed else EXIT_VALIDATION_FAILED


def main(argv=None):
    """
    Fonction principale de l'interface en ligne de commande.
    """
    # Vérifier les dépendances
    if not check_requirements():
        sys.exit(1)

    args = parse_arguments(argv)
    if args.log_level:
        set_log_level(args.log_level)

    try:
        code = run_command(args)
    except FibredError as e:
        print(f"Erreur: {e}")
        sys.exit(e.exit_code)
    except Exception as e:
        logger.exception(f"Erreur inattendue: {e}")
        sys.exit(1)
    sys.exit(code)


if __name__ == "__main__":
    main()
