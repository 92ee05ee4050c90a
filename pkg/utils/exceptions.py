"""
Hiérarchie des erreurs du projet.

Chaque erreur porte un code de sortie utilisé par l'interface en ligne de commande:
1 pour les erreurs de lecture ou de configuration, 2 pour les violations de contrat
du domaine, 3 pour les échecs numériques.
"""

from typing import Any, Dict, Optional


class FibredError(Exception):
    """
    Erreur de base de toutes les erreurs du projet.
    """

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.details = details or {}


class ParseError(FibredError):
    """Fichier illisible ou mal formé."""

    exit_code = 1


class ConfigError(FibredError):
    """Configuration d'expérience invalide."""

    exit_code = 1


class DomainContractError(FibredError):
    """Violation d'un contrat du domaine (mesure invalide, marginales incompatibles...)."""

    exit_code = 2


class ValidationError(DomainContractError):
    """Mesure, marginale ou plan de transport invalide."""


class IncomparableMarginalsError(DomainContractError):
    """Les deux mesures fibrées n'ont pas la même marginale en label."""


class DegenerateCellError(DomainContractError):
    """Cellule de masse nulle."""


class NonatomicRequiredError(DomainContractError):
    """L'opération exige une marginale sans atome."""


class BudgetError(DomainContractError):
    """Support trop grand pour le solveur exact."""


class InvalidPotentialError(DomainContractError):
    """Potentiel dual non 1-lipschitzien sur le support."""


class DomainError(DomainContractError):
    """État hors du domaine de définition d'un champ."""


class PreconditionError(DomainContractError):
    """Précondition d'une estimation non satisfaite."""


class FitError(DomainContractError):
    """Ajustement d'une pente impossible (données dégénérées)."""


class NumericalError(FibredError):
    """Échec numérique."""

    exit_code = 3


class BlowUpError(NumericalError):
    """
    Explosion d'une trajectoire pendant l'intégration.

    Args:
        message: Description de l'explosion
        step: Indice du pas de temps fautif
        details: Diagnostics complémentaires
    """

    def __init__(self, message: str, step: int, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.step = step


class NoConvergenceError(NumericalError):
    """
    Itération de point fixe non convergée.

    Args:
        message: Description de l'échec
        residual: Dernier résidu atteint
    """

    def __init__(self, message: str, residual: float, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, details)
        self.residual = residual
