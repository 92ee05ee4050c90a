"""
Fichier de configuration pour les calculs de transport fibré et les simulations particulaires.
"""

import os
from pathlib import Path

# Répertoire de base pour l'export des résultats
BASE_DIR = Path(__file__).resolve().parent.parent
EXPORT_DIR = BASE_DIR / "exports"

# Niveau de journalisation (seule variable d'environnement lue par le projet)
LOG_LEVEL = os.environ.get("FIBRED_LOG_LEVEL", "INFO").upper()

# Tolérances numériques
WEIGHT_TOL = 1e-12          # masses et renormalisation des poids
MERGE_TOL = 1e-12           # fusion des points dupliqués (par coordonnée)
SUM_TOL = 1e-9              # écart accepté sur la somme des poids à la lecture
MARGINAL_TOL = 1e-10        # égalité des marginales après raffinement commun
PLAN_TOL = 1e-9             # faisabilité des plans de transport
LIPSCHITZ_TOL = 1e-9        # certification des potentiels duaux
BOUND_SLACK_TOL = 1e-6      # tolérance d'intégration sur les bornes a priori

# Marginale des labels
CDF_GRID_SIZE = 4096        # nombre de points de la grille de la fonction de répartition

# Quadrature en label
DEFAULT_QUADRATURE_NODES = 8
CLASSICAL_LABEL_NODES = 8   # noeuds par cellule d'intervalle pour la distance classique (plafonnés par SOLVER_MAX_SUPPORT)

# Solveur de transport exact (simplexe de réseau)
SOLVER_MAX_SUPPORT = 512
SOLVER_ITER_MAX = 100000
SOLVER_RETRY_ATTEMPTS = 3
SOLVER_BACKOFF_FACTOR = 10.0

# Dynamique
DEFAULT_STEPS = 200
DEFAULT_INTEGRATOR = "rk4"
INTEGRATORS = ["rk4", "euler"]
PICARD_TOL = 1e-8
PICARD_MAX_ITER = 50
BLOWUP_FACTOR = 1e3

# Analyse
MIN_RATE_POINTS = 4
CALIBRATION_SAMPLE_SIZES = [100, 1000]
CALIBRATION_SEEDS = 20

# Formats d'export disponibles
EXPORT_FORMATS = ["json", "csv"]
DEFAULT_EXPORT_FORMAT = "json"

# Noms des fichiers produits (relatifs au répertoire d'export)
EXPORT_STRUCTURE = {
    "trajectories": "trajectories.csv",
    "curve": "curve.json",
    "records": "records.csv",
    "summary": "summary.json",
    "validation": "validation.json",
    "plan": "plan.json",
    "run_report": "run_report.json",
}
