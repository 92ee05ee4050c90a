"""
Utilitaires pour la gestion des fichiers d'entrée et d'export.
"""

import json
from pathlib import Path
from typing import Any, Dict, Union

from utils.exceptions import ParseError


def ensure_directory(directory: Union[str, Path]) -> Path:
    """
    S'assure qu'un répertoire existe, le crée si nécessaire.

    Args:
        directory: Chemin du répertoire

    Returns:
        Objet Path du répertoire
    """
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    return path


def load_json_file(filepath: Union[str, Path]) -> Dict[str, Any]:
    """
    Charge un fichier JSON.

    Args:
        filepath: Chemin du fichier JSON

    Returns:
        Données JSON chargées

    Raises:
        ParseError: Si le fichier est absent, n'est pas en UTF-8 ou n'est pas un JSON valide
    """
    filepath = Path(filepath)

    if not filepath.exists():
        raise ParseError(f"Fichier introuvable: {filepath}")

    with open(filepath, 'r', encoding='utf-8') as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as e:
            raise ParseError(f"JSON invalide dans {filepath}: {e}") from e
        except UnicodeDecodeError as e:
            raise ParseError(f"Fichier non UTF-8: {filepath} ({e.reason})") from e


def write_json_file(filepath: Union[str, Path], data: Any) -> Path:
    """
    Écrit un document JSON de façon déterministe (clés dans l'ordre d'insertion).

    Args:
        filepath: Chemin du fichier
        data: Données sérialisables

    Returns:
        Chemin du fichier écrit
    """
    filepath = Path(filepath)
    ensure_directory(filepath.parent)
    with open(filepath, 'w', encoding='utf-8') as f:
        json.dump(data, f, ensure_ascii=False, indent=2)
        f.write("\n")
    return filepath
