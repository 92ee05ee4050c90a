"""
Classe de base pour tous les exporters de résultats.
"""

import json
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from config.settings import DEFAULT_EXPORT_FORMAT, EXPORT_FORMATS, EXPORT_STRUCTURE
from utils.exceptions import ConfigError
from utils.file_utils import ensure_directory, write_json_file

Records = Union[pd.DataFrame, List[Dict[str, Any]]]


def _plain(value: Any) -> Any:
    """Convertit récursivement les scalaires et tableaux numpy en types JSON."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    return value


class BaseExporter(ABC):
    """
    Classe abstraite de base pour tous les exporters.
    Fournit l'écriture JSON avec enveloppe de métadonnées et l'écriture CSV via pandas.

    Les fichiers produits ne contiennent aucune donnée dépendant de l'horloge: deux
    exécutions identiques produisent des fichiers identiques octet par octet.
    """

    def __init__(self, export_dir: Union[str, Path], export_format: str = DEFAULT_EXPORT_FORMAT,
                 metadata: Optional[Dict[str, Any]] = None):
        """
        Initialise l'exporter.

        Args:
            export_dir: Répertoire d'export des résultats
            export_format: Format d'export (json ou csv)
            metadata: Métadonnées ajoutées à chaque document JSON (expérience, graine...)
        """
        self.export_format = export_format.lower()
        if self.export_format not in EXPORT_FORMATS:
            raise ConfigError(f"Format d'export inconnu: {export_format} (disponibles: {EXPORT_FORMATS})")
        self.export_dir = ensure_directory(export_dir)
        self.metadata = dict(metadata or {})

    @abstractmethod
    def export(self, *args, **kwargs) -> Dict[str, Any]:
        """
        Méthode principale d'export à implémenter par chaque sous-classe.

        Returns:
            Dictionnaire contenant les statistiques de l'export
        """
        pass

    @staticmethod
    def filename(key: str) -> str:
        """Nom de fichier (sans extension) d'un artefact de EXPORT_STRUCTURE."""
        return Path(EXPORT_STRUCTURE[key]).stem

    def save_to_json(self, data: Any, filename: str) -> str:
        """
        Sauvegarde les données au format JSON.

        Args:
            data: Données à sauvegarder
            filename: Nom du fichier (sans extension)

        Returns:
            Chemin du fichier sauvegardé
        """
        filepath = self.export_dir / f"{filename}.json"
        data_with_meta = {
            "metadata": {
                "export_type": self.__class__.__name__,
                **_plain(self.metadata)
            },
            "data": _plain(data)
        }
        write_json_file(filepath, data_with_meta)
        return str(filepath)

    def save_to_csv(self, data: Records, filename: str) -> str:
        """
        Sauvegarde les données au format CSV.

        Args:
            data: Table ou liste de dictionnaires
            filename: Nom du fichier (sans extension)

        Returns:
            Chemin du fichier sauvegardé
        """
        filepath = self.export_dir / f"{filename}.csv"
        df = data if isinstance(data, pd.DataFrame) else pd.DataFrame(_plain(data))

        # Les colonnes contenant des listes ou des dictionnaires sont écrites en JSON
        for col in df.columns:
            if df[col].apply(lambda x: isinstance(x, (dict, list))).any():
                df[col] = df[col].apply(lambda x: json.dumps(x, ensure_ascii=False) if isinstance(x, (dict, list)) else x)

        df.to_csv(filepath, index=False, encoding='utf-8', float_format="%.12g", lineterminator="\n")
        return str(filepath)

    def save_data(self, data: Union[Dict[str, Any], Records], filename: str) -> str:
        """
        Sauvegarde les données dans le format spécifié.

        Args:
            data: Données à sauvegarder
            filename: Nom du fichier (sans extension)

        Returns:
            Chemin du fichier sauvegardé
        """
        if self.export_format == "csv" and not isinstance(data, dict):
            return self.save_to_csv(data, filename)
        return self.save_to_json(data, filename)
