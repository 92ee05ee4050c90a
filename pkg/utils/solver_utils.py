"""
Utilitaires pour les appels au solveur de transport exact.
"""

import logging
from functools import wraps
from typing import Any, Callable, Optional, Tuple, TypeVar

from config.settings import LOG_LEVEL, SOLVER_BACKOFF_FACTOR, SOLVER_ITER_MAX, SOLVER_RETRY_ATTEMPTS
from utils.exceptions import BudgetError, ValidationError

# Configurer le logger
logging.basicConfig(
    level=getattr(logging, LOG_LEVEL, logging.INFO),
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
)
logger = logging.getLogger(__name__)

# Type générique pour la fonction décorée
F = TypeVar('F', bound=Callable[..., Any])

# Messages du simplexe de réseau indiquant un arrêt prématuré
ITERATION_CAP_MARKERS = ("numItermax",)


def set_log_level(level: str) -> None:
    """
    Change le niveau de journalisation de tous les loggers du projet.

    Args:
        level: Nom du niveau (DEBUG, INFO, WARNING...)
    """
    logging.getLogger().setLevel(getattr(logging, level.upper(), logging.INFO))


def retry_on_solver_warning(
    func: Callable[[int], Tuple[Any, Optional[str]]],
    max_retries: int = SOLVER_RETRY_ATTEMPTS,
    num_iter_max: int = SOLVER_ITER_MAX,
    backoff_factor: float = SOLVER_BACKOFF_FACTOR
) -> Any:
    """
    Réessaie un appel au solveur tant qu'il s'arrête sur son plafond d'itérations.

    Args:
        func: Fonction prenant le plafond d'itérations et renvoyant (résultat, avertissement)
        max_retries: Nombre maximum de tentatives
        num_iter_max: Plafond initial d'itérations
        backoff_factor: Facteur multiplicatif appliqué au plafond entre deux tentatives

    Returns:
        Le résultat du solveur

    Raises:
        BudgetError: Si toutes les tentatives s'arrêtent sur le plafond
        ValidationError: Si le solveur signale un problème infaisable
    """
    attempt = 0
    current_cap = int(num_iter_max)

    while True:
        result, warning = func(current_cap)
        if warning is None:
            return result

        if any(marker in warning for marker in ITERATION_CAP_MARKERS):
            attempt += 1
            if attempt >= max_retries:
                logger.error(f"Échec du solveur après {max_retries} tentatives: {warning}")
                raise BudgetError(
                    f"Le simplexe de réseau n'a pas convergé en {current_cap} itérations",
                    {"num_iter_max": current_cap}
                )
            next_cap = int(current_cap * backoff_factor)
            logger.warning(
                f"Plafond d'itérations atteint ({current_cap}), tentative {attempt}/{max_retries}. "
                f"Nouvelle tentative avec {next_cap} itérations."
            )
            current_cap = next_cap
        else:
            logger.error(f"Erreur non récupérable du solveur: {warning}")
            raise ValidationError(f"Problème de transport infaisable: {warning}")


def solver_retry(max_retries: int = SOLVER_RETRY_ATTEMPTS,
                 backoff_factor: float = SOLVER_BACKOFF_FACTOR) -> Callable[[F], F]:
    """
    Décorateur pour relancer un solveur exact sur plafond d'itérations.

    La fonction décorée reçoit un argument nommé ``num_iter_max`` et renvoie
    le couple (résultat, avertissement).

    Args:
        max_retries: Nombre maximum de tentatives
        backoff_factor: Facteur multiplicatif du plafond

    Returns:
        Fonction décorée renvoyant seulement le résultat
    """
    def decorator(func: F) -> F:
        @wraps(func)
        def wrapper(*args, **kwargs):
            initial_cap = kwargs.pop("num_iter_max", SOLVER_ITER_MAX)
            return retry_on_solver_warning(
                lambda cap: func(*args, num_iter_max=cap, **kwargs),
                max_retries=max_retries,
                num_iter_max=initial_cap,
                backoff_factor=backoff_factor
            )
        return wrapper  # type: ignore
    return decorator
