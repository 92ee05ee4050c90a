"""
Lecture et écriture des mesures fibrées au format JSON.

Format: {"marginal": {...}, "dim": d, "fibres": [{"cell": [a, b], "weight": w,
"points": [{"x": [...], "w": ...}]}]}. Une cellule atomique s'écrit [ω, ω].
"""

from pathlib import Path
from typing import Any, Dict, Union

import numpy as np

from measures.fibred_measure import FibredMeasure, Fibre
from measures.marginal import Cell, LabelMarginal
from utils.exceptions import ParseError
from utils.file_utils import load_json_file, write_json_file


def measure_to_dict(mu: FibredMeasure) -> Dict[str, Any]:
    """
    Sérialise une mesure fibrée.

    Args:
        mu: Mesure fibrée

    Returns:
        Dictionnaire JSON
    """
    fibres = []
    for fibre in mu.fibres:
        fibres.append({
            "cell": fibre.cell.to_list(),
            "weight": float(fibre.weight),
            "points": [
                {"x": [float(v) for v in x], "w": float(w)}
                for x, w in zip(fibre.points, fibre.weights)
            ],
        })
    return {"marginal": mu.marginal.to_dict(), "dim": mu.dim, "fibres": fibres}


def measure_from_dict(data: Dict[str, Any]) -> FibredMeasure:
    """
    Reconstruit une mesure fibrée depuis sa représentation JSON.

    Raises:
        ParseError: Si une clé manque ou a un type inattendu
        ValidationError: Si la mesure décrite viole un invariant
    """
    try:
        marginal = LabelMarginal.from_dict(data["marginal"])
        dim = int(data["dim"])
        fibres = []
        for entry in data["fibres"]:
            a, b = (float(v) for v in entry["cell"])
            cell = Cell.atom(a) if a == b else Cell.interval(a, b)
            points = np.array([[float(v) for v in p["x"]] for p in entry["points"]], dtype=float)
            weights = np.array([float(p["w"]) for p in entry["points"]], dtype=float)
            if points.ndim != 2 or points.shape[1] != dim:
                raise ParseError(f"Les points de la fibre {cell} ne sont pas de dimension {dim}")
            fibres.append(Fibre.build(cell, float(entry["weight"]), points, weights))
    except (KeyError, TypeError, ValueError) as e:
        raise ParseError(f"Fichier de mesure mal formé: {e!r}") from e
    return FibredMeasure.from_fibres(marginal, fibres)


def load_measure(filepath: Union[str, Path]) -> FibredMeasure:
    """
    Charge une mesure fibrée depuis un fichier JSON.
    """
    data = load_json_file(filepath)
    if not isinstance(data, dict):
        raise ParseError(f"{filepath}: un objet JSON est attendu")
    return measure_from_dict(data)


def save_measure(mu: FibredMeasure, filepath: Union[str, Path]) -> Path:
    """
    Écrit une mesure fibrée dans un fichier JSON.
    """
    return write_json_file(filepath, measure_to_dict(mu))
