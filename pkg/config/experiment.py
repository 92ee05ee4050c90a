"""
Configuration d'une expérience: un unique document JSON, validé à la lecture.

Exemple minimal:
    {"experiment": "kuramoto", "model": {"type": "kuramoto", "K": 1.0},
     "marginal": {"kind": "uniform"},
     "initial": {"type": "product", "points": [[-1.0], [1.0]]}}
"""

import dataclasses
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from config.settings import (
    DEFAULT_EXPORT_FORMAT, DEFAULT_INTEGRATOR, DEFAULT_QUADRATURE_NODES, DEFAULT_STEPS,
    EXPORT_DIR, EXPORT_FORMATS, INTEGRATORS
)
from dynamics.time_grid import TimeGrid
from fields.base_field import VectorField
from fields.catalogue import build_field
from measures.builtins import build_initial_measure
from measures.fibred_measure import FibredMeasure
from measures.marginal import LabelMarginal
from utils.exceptions import ConfigError, ValidationError
from utils.file_utils import load_json_file

logger = logging.getLogger(__name__)

M_RULES = ["n_squared", "explicit"]
REFERENCE_MODES = ["high_res"]
REFERENCE_FACTOR = 4

KNOWN_KEYS = {
    "experiment", "model", "marginal", "initial", "T", "steps", "integrator", "p",
    "quadrature", "sweep", "seeds", "reference", "output", "master_seed", "constants",
    "validation", "simulation",
}


def _positive_int(value: Any, name: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
        raise ConfigError(f"'{name}' doit être un entier strictement positif (reçu: {value!r})")
    return int(value)


@dataclass(frozen=True)
class SweepConfig:
    """
    Balayage des résolutions: n cellules grossières et m particules par cellule.

    Attributes:
        n: Valeurs de n
        m_rule: "n_squared" (m = n²) ou "explicit"
        m: Valeur de m pour la règle explicite
    """

    n: Tuple[int, ...] = (2, 4, 8, 16)
    m_rule: str = "n_squared"
    m: Optional[int] = None

    def m_for(self, n: int) -> int:
        return n * n if self.m_rule == "n_squared" else int(self.m)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SweepConfig":
        ns = data.get("n", list(cls.n))
        if isinstance(ns, int):
            ns = [ns]
        ns = tuple(_positive_int(v, "sweep.n") for v in ns)
        if not ns:
            raise ConfigError("'sweep.n' ne peut pas être vide")
        rule = data.get("m_rule", "n_squared")
        if rule not in M_RULES:
            raise ConfigError(f"Règle de m inconnue: {rule} (disponibles: {M_RULES})")
        m = data.get("m")
        if rule == "explicit":
            if m is None:
                raise ConfigError("La règle 'explicit' exige une valeur 'sweep.m'")
            m = _positive_int(m, "sweep.m")
        return cls(ns, rule, m)


@dataclass(frozen=True)
class ReferenceConfig:
    """Solution de référence: exécution haute résolution (n_ref, m_ref)."""

    mode: str = "high_res"
    n_ref: int = 64
    m_ref: Optional[int] = None

    @property
    def m(self) -> int:
        return self.m_ref if self.m_ref is not None else self.n_ref ** 2

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ReferenceConfig":
        mode = data.get("mode", "high_res")
        if mode not in REFERENCE_MODES:
            raise ConfigError(f"Mode de référence inconnu: {mode} (disponibles: {REFERENCE_MODES})")
        n_ref = _positive_int(data.get("n_ref", cls.n_ref), "reference.n_ref")
        m_ref = data.get("m_ref")
        return cls(mode, n_ref, None if m_ref is None else _positive_int(m_ref, "reference.m_ref"))


@dataclass(frozen=True)
class OutputConfig:
    dir: Path = EXPORT_DIR
    format: str = DEFAULT_EXPORT_FORMAT


@dataclass(frozen=True)
class ExperimentConfig:
    """
    Description complète d'une expérience.

    Attributes:
        experiment: Nom de l'expérience
        model: Description du champ (voir fields.catalogue)
        marginal: Description de la marginale des labels
        initial: Description de la donnée initiale
        T: Horizon
        steps: Nombre de pas de temps
        integrator: "rk4" ou "euler"
        p: Ordre de la distance
        quadrature: Noeuds de quadrature par cellule
        sweep: Balayage des résolutions
        seeds: Graines des répétitions
        reference: Solution de référence
        output: Répertoire et format d'export
        master_seed: Graine maîtresse
        constants: Constantes fournies (C_d)
        validation: Options des suites de validation
        simulation: Résolution (n, m) de la commande simulate
        base_dir: Répertoire de résolution des chemins relatifs
    """

    experiment: str
    model: Dict[str, Any]
    marginal: Dict[str, Any]
    initial: Dict[str, Any]
    T: float = 1.0
    steps: int = DEFAULT_STEPS
    integrator: str = DEFAULT_INTEGRATOR
    p: int = 1
    quadrature: int = DEFAULT_QUADRATURE_NODES
    sweep: SweepConfig = SweepConfig()
    seeds: Tuple[int, ...] = (0,)
    reference: ReferenceConfig = ReferenceConfig()
    output: OutputConfig = OutputConfig()
    master_seed: int = 0
    constants: Dict[str, float] = dataclasses.field(default_factory=dict)
    validation: Dict[str, Any] = dataclasses.field(default_factory=dict)
    simulation: Optional[Tuple[int, int]] = None
    base_dir: Path = Path(".")

    @classmethod
    def from_dict(cls, data: Dict[str, Any], base_dir: Union[str, Path] = ".") -> "ExperimentConfig":
        """
        Valide un document de configuration.

        Raises:
            ConfigError: Si une clé obligatoire manque ou si une valeur est invalide
        """
        if not isinstance(data, dict):
            raise ConfigError("La configuration doit être un objet JSON")
        for key in ("experiment", "model", "marginal", "initial"):
            if key not in data:
                raise ConfigError(f"Clé obligatoire manquante: '{key}'")
        unknown = sorted(set(data) - KNOWN_KEYS)
        if unknown:
            logger.warning(f"Clés de configuration ignorées: {unknown}")

        try:
            T = float(data.get("T", 1.0))
        except (TypeError, ValueError) as e:
            raise ConfigError(f"Horizon invalide: {data.get('T')!r}") from e
        if not np.isfinite(T) or T <= 0.0:
            raise ConfigError(f"L'horizon T doit être strictement positif (reçu: {T})")
        integrator = data.get("integrator", DEFAULT_INTEGRATOR)
        if integrator not in INTEGRATORS:
            raise ConfigError(f"Intégrateur inconnu: {integrator} (disponibles: {INTEGRATORS})")
        p = data.get("p", 1)
        if p not in (1, 2):
            raise ConfigError(f"Ordre de distance non pris en charge: {p}")

        sweep = SweepConfig.from_dict(data.get("sweep", {}))
        reference = ReferenceConfig.from_dict(data.get("reference", {}))
        if reference.n_ref < REFERENCE_FACTOR * max(sweep.n):
            raise ConfigError(
                f"La référence doit être au moins {REFERENCE_FACTOR} fois plus fine que le balayage "
                f"(n_ref={reference.n_ref}, max n={max(sweep.n)})"
            )

        seeds = data.get("seeds", [0])
        if isinstance(seeds, int):
            seeds = list(range(seeds))
        if not seeds or any(isinstance(s, bool) or not isinstance(s, int) or s < 0 for s in seeds):
            raise ConfigError(f"Graines invalides: {seeds!r}")

        output = data.get("output", {})
        export_format = output.get("format", DEFAULT_EXPORT_FORMAT)
        if export_format not in EXPORT_FORMATS:
            raise ConfigError(f"Format d'export inconnu: {export_format} (disponibles: {EXPORT_FORMATS})")
        out_dir = Path(output.get("dir", EXPORT_DIR))
        if not out_dir.is_absolute():
            out_dir = Path(base_dir) / out_dir

        try:
            constants = {k: float(v) for k, v in data.get("constants", {}).items()}
        except (TypeError, ValueError, AttributeError) as e:
            raise ConfigError(f"Constantes invalides: {e}") from e
        if constants.get("C_d", 1.0) <= 0.0:
            raise ConfigError("La constante C_d doit être strictement positive")

        simulation = None
        if "simulation" in data:
            sim = data["simulation"]
            n = _positive_int(sim.get("n"), "simulation.n")
            m = _positive_int(sim.get("m", n * n), "simulation.m")
            if "N" in sim and int(sim["N"]) != n * m:
                raise ConfigError(f"Incohérence: N={sim['N']} ≠ n·m = {n * m}")
            simulation = (n, m)

        master_seed = data.get("master_seed", 0)
        if isinstance(master_seed, bool) or not isinstance(master_seed, int) or master_seed < 0:
            raise ConfigError(f"Graine maîtresse invalide: {master_seed!r}")

        return cls(
            experiment=str(data["experiment"]),
            model=dict(data["model"]),
            marginal=dict(data["marginal"]),
            initial=dict(data["initial"]),
            T=T,
            steps=_positive_int(data.get("steps", DEFAULT_STEPS), "steps"),
            integrator=integrator,
            p=int(p),
            quadrature=_positive_int(data.get("quadrature", DEFAULT_QUADRATURE_NODES), "quadrature"),
            sweep=sweep,
            seeds=tuple(int(s) for s in seeds),
            reference=reference,
            output=OutputConfig(out_dir, export_format),
            master_seed=master_seed,
            constants=constants,
            validation=dict(data.get("validation", {})),
            simulation=simulation,
            base_dir=Path(base_dir),
        )

    def with_overrides(self, out: Optional[Union[str, Path]] = None,
                       seed: Optional[int] = None) -> "ExperimentConfig":
        """Applique les options --out et --seed de la ligne de commande."""
        config = self
        if out is not None:
            config = dataclasses.replace(config, output=OutputConfig(Path(out), config.output.format))
        if seed is not None:
            if seed < 0:
                raise ConfigError(f"Graine maîtresse invalide: {seed}")
            config = dataclasses.replace(config, master_seed=int(seed))
        return config

    @property
    def simulation_size(self) -> Tuple[int, int]:
        """(n, m) de la commande simulate: clé 'simulation' ou premier point du balayage."""
        if self.simulation is not None:
            return self.simulation
        n = self.sweep.n[0]
        return n, self.sweep.m_for(n)

    def run_seed(self, *keys: int) -> int:
        """Graine dérivée de la graine maîtresse, indépendante de l'ordre d'exécution."""
        sequence = np.random.SeedSequence([self.master_seed, *[int(k) for k in keys]])
        return int(sequence.generate_state(1, dtype=np.uint32)[0])

    def build_marginal(self) -> LabelMarginal:
        try:
            return LabelMarginal.from_dict(self.marginal)
        except ValidationError as e:
            raise ConfigError(f"Marginale invalide: {e}") from e

    def build_field(self) -> VectorField:
        return build_field(self.model)

    def build_initial(self, marginal: Optional[LabelMarginal] = None) -> FibredMeasure:
        marginal = marginal or self.build_marginal()
        try:
            return build_initial_measure(self.initial, marginal, self.base_dir)
        except ValidationError as e:
            raise ConfigError(f"Donnée initiale invalide: {e}") from e

    def grid(self) -> TimeGrid:
        return TimeGrid(self.T, self.steps)

    def to_dict(self) -> Dict[str, Any]:
        """Représentation déterministe (sans le répertoire de base)."""
        return {
            "experiment": self.experiment,
            "model": self.model,
            "marginal": self.marginal,
            "initial": self.initial,
            "T": self.T,
            "steps": self.steps,
            "integrator": self.integrator,
            "p": self.p,
            "quadrature": self.quadrature,
            "sweep": {"n": list(self.sweep.n), "m_rule": self.sweep.m_rule, "m": self.sweep.m},
            "seeds": list(self.seeds),
            "reference": {"mode": self.reference.mode, "n_ref": self.reference.n_ref,
                          "m_ref": self.reference.m},
            "master_seed": self.master_seed,
            "constants": self.constants,
        }


def load_config(filepath: Union[str, Path]) -> ExperimentConfig:
    """
    Charge et valide une configuration d'expérience.

    Args:
        filepath: Chemin du document JSON

    Returns:
        La configuration validée

    Raises:
        ParseError: Si le fichier est absent ou n'est pas un JSON valide
        ConfigError: Si le document est invalide
    """
    filepath = Path(filepath)
    data = load_json_file(filepath)
    config = ExperimentConfig.from_dict(data, base_dir=filepath.resolve().parent)
    logger.info(f"Configuration chargée: {config.experiment} ({filepath})")
    return config
