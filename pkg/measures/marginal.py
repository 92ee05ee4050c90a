"""
Marginale de référence π sur l'espace des labels [0,1] et cellules de labels.
"""

from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config.settings import CDF_GRID_SIZE, MARGINAL_TOL, SUM_TOL, WEIGHT_TOL
from utils.exceptions import DegenerateCellError, ValidationError


@dataclass(frozen=True, order=True)
class Cell:
    """
    Cellule de labels: intervalle semi-ouvert [a, b) ou atome {a} lorsque a == b.
    """

    a: float
    b: float

    @classmethod
    def atom(cls, omega: float) -> "Cell":
        return cls(float(omega), float(omega))

    @classmethod
    def interval(cls, a: float, b: float) -> "Cell":
        if not a < b:
            raise ValidationError(f"Intervalle de labels vide: [{a}, {b})")
        return cls(float(a), float(b))

    @property
    def is_atom(self) -> bool:
        return self.a == self.b

    def contains(self, omega: float) -> bool:
        if self.is_atom:
            return omega == self.a
        return self.a <= omega < self.b

    def intersect(self, other: "Cell") -> Optional["Cell"]:
        """
        Intersection de deux cellules, None si elle est vide.
        """
        if self.is_atom:
            return self if other.contains(self.a) else None
        if other.is_atom:
            return other if self.contains(other.a) else None
        lo, hi = max(self.a, other.a), min(self.b, other.b)
        return Cell(lo, hi) if lo < hi else None

    def to_list(self) -> List[float]:
        return [self.a, self.b]

    def __repr__(self) -> str:
        if self.is_atom:
            return f"{{{self.a:g}}}"
        return f"[{self.a:g}, {self.b:g})"


class LabelMarginal:
    """
    Mesure de probabilité π sur [0,1].

    Trois formes sont prises en charge: une densité (fonction de répartition strictement
    croissante échantillonnée sur une grille uniforme), une liste finie d'atomes, et un
    mélange des deux où la partie continue vit sur un sous-intervalle [lo, hi] ne
    contenant aucun atome.
    """

    def __init__(
        self,
        kind: str,
        cdf_values: Optional[Sequence[float]] = None,
        support: Tuple[float, float] = (0.0, 1.0),
        atoms: Optional[Sequence[float]] = None,
        atom_weights: Optional[Sequence[float]] = None,
        continuous_mass: Optional[float] = None,
        cdf_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        quantile_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        spec: Optional[Dict[str, Any]] = None
    ):
        """
        Initialise la marginale et vérifie ses invariants.

        Args:
            kind: "density", "atoms" ou "mixed"
            cdf_values: Fonction de répartition normalisée de la partie continue sur la grille
            support: Intervalle [lo, hi] portant la partie continue
            atoms: Positions des atomes
            atom_weights: Poids des atomes
            continuous_mass: Masse de la partie continue (1 pour une densité, 0 pour des atomes)
            cdf_fn: Forme fermée optionnelle de la fonction de répartition continue
            quantile_fn: Forme fermée optionnelle de son inverse
            spec: Description compacte utilisée pour la sérialisation
        """
        if kind not in ("density", "atoms", "mixed"):
            raise ValidationError(f"Type de marginale inconnu: {kind}")
        self.kind = kind
        self.spec = dict(spec) if spec else None
        self._cdf_fn = cdf_fn
        self._quantile_fn = quantile_fn

        if continuous_mass is None:
            continuous_mass = {"density": 1.0, "atoms": 0.0}.get(kind)
        if continuous_mass is None:
            raise ValidationError("Une marginale mixte exige la masse de sa partie continue")
        self.continuous_mass = float(continuous_mass)

        self.lo, self.hi = float(support[0]), float(support[1])
        if self.continuous_mass > 0.0:
            if not (0.0 <= self.lo < self.hi <= 1.0):
                raise ValidationError(f"Support continu invalide: [{self.lo}, {self.hi}]")
            if cdf_values is None:
                raise ValidationError("La partie continue exige une fonction de répartition")
            self.cdf_values = _checked_cdf(cdf_values)
            self.grid = np.linspace(self.lo, self.hi, len(self.cdf_values))
        else:
            self.cdf_values = np.zeros(0)
            self.grid = np.zeros(0)

        atoms = np.asarray(atoms if atoms is not None else [], dtype=float)
        weights = np.asarray(atom_weights if atom_weights is not None else [], dtype=float)
        order = np.argsort(atoms, kind="stable")
        self.atoms = atoms[order]
        self.atom_weights = weights[order]
        self._check_atoms()
        self._cum_atoms = np.concatenate([[0.0], np.cumsum(self.atom_weights)])

        for array in (self.cdf_values, self.grid, self.atoms, self.atom_weights):
            array.setflags(write=False)

    # ------------------------------------------------------------------ constructeurs

    @classmethod
    def uniform(cls, grid_size: int = CDF_GRID_SIZE) -> "LabelMarginal":
        """Mesure de Lebesgue sur [0,1]."""
        grid = np.linspace(0.0, 1.0, grid_size)
        return cls(
            "density", cdf_values=grid,
            cdf_fn=lambda w: w, quantile_fn=lambda u: u,
            spec={"kind": "uniform"}
        )

    @classmethod
    def power(cls, exponent: float, grid_size: int = CDF_GRID_SIZE) -> "LabelMarginal":
        """Densité de fonction de répartition F(ω) = ω^k."""
        k = float(exponent)
        if k <= 0.0:
            raise ValidationError("L'exposant de la fonction de répartition doit être positif")
        grid = np.linspace(0.0, 1.0, grid_size)
        return cls(
            "density", cdf_values=grid ** k,
            cdf_fn=lambda w: w ** k, quantile_fn=lambda u: u ** (1.0 / k),
            spec={"kind": "power", "exponent": k}
        )

    @classmethod
    def from_cdf(cls, cdf: Callable[[np.ndarray], np.ndarray], grid_size: int = CDF_GRID_SIZE,
                 support: Tuple[float, float] = (0.0, 1.0)) -> "LabelMarginal":
        """Densité donnée par une fonction de répartition échantillonnée sur la grille."""
        grid = np.linspace(support[0], support[1], grid_size)
        return cls("density", cdf_values=cdf(grid), support=support)

    @classmethod
    def atomic(cls, omegas: Sequence[float], weights: Sequence[float]) -> "LabelMarginal":
        """Marginale purement atomique."""
        return cls("atoms", atoms=omegas, atom_weights=weights)

    @classmethod
    def mixed(cls, omegas: Sequence[float], weights: Sequence[float], continuous_mass: float,
              support: Tuple[float, float], cdf_values: Optional[Sequence[float]] = None,
              grid_size: int = CDF_GRID_SIZE) -> "LabelMarginal":
        """Atomes plus une densité (uniforme par défaut) sur [lo, hi]."""
        lo, hi = support
        spec = None
        if cdf_values is None:
            cdf_values = np.linspace(0.0, 1.0, grid_size)
            spec = {
                "kind": "mixed",
                "atoms": [[float(o), float(w)] for o, w in zip(omegas, weights)],
                "continuous_mass": float(continuous_mass),
                "support": [float(lo), float(hi)],
            }
            return cls(
                "mixed", cdf_values=cdf_values, support=support, atoms=omegas,
                atom_weights=weights, continuous_mass=continuous_mass,
                cdf_fn=lambda w: (w - lo) / (hi - lo), quantile_fn=lambda u: lo + u * (hi - lo),
                spec=spec
            )
        return cls("mixed", cdf_values=cdf_values, support=support, atoms=omegas,
                   atom_weights=weights, continuous_mass=continuous_mass)

    # ------------------------------------------------------------------ validation

    def _check_atoms(self) -> None:
        expected = 1.0 - self.continuous_mass
        if self.kind == "density":
            if len(self.atoms):
                raise ValidationError("Une densité ne peut pas porter d'atomes")
            return
        if not len(self.atoms):
            raise ValidationError("La marginale déclare des atomes mais la liste est vide")
        if len(self.atoms) != len(self.atom_weights):
            raise ValidationError("Positions et poids des atomes de tailles différentes")
        if np.any(self.atom_weights <= 0.0):
            raise ValidationError("Les poids des atomes doivent être strictement positifs")
        if np.any((self.atoms < 0.0) | (self.atoms > 1.0)):
            raise ValidationError("Les atomes doivent appartenir à [0,1]")
        if np.any(np.diff(self.atoms) <= 0.0):
            raise ValidationError("Les atomes doivent être distincts")
        total = float(self.atom_weights.sum())
        if abs(total - expected) > SUM_TOL:
            raise ValidationError(f"La masse des atomes vaut {total}, attendu {expected}")
        self.atom_weights = self.atom_weights * (expected / total)
        if self.kind == "mixed":
            inside = (self.atoms >= self.lo) & (self.atoms < self.hi)
            if np.any(inside):
                raise ValidationError("Les atomes d'une marginale mixte doivent être hors du support continu")

    # ------------------------------------------------------------------ propriétés

    @property
    def has_atoms(self) -> bool:
        return len(self.atoms) > 0

    @property
    def is_nonatomic(self) -> bool:
        return self.kind == "density"

    def atom_cells(self) -> List[Cell]:
        return [Cell.atom(w) for w in self.atoms]

    def base_cells(self) -> List[Cell]:
        """
        Partition la plus grossière du support: un intervalle pour la partie continue,
        une cellule par atome.
        """
        cells = self.atom_cells()
        if self.continuous_mass > 0.0:
            cells.append(Cell(self.lo, self.hi))
        return sorted(cells)

    # ------------------------------------------------------------------ fonction de répartition

    def continuous_cdf(self, omega: np.ndarray) -> np.ndarray:
        """
        Fonction de répartition normalisée de la partie continue.
        """
        omega = np.clip(np.asarray(omega, dtype=float), self.lo, self.hi)
        if self._cdf_fn is not None:
            return np.clip(self._cdf_fn(omega), 0.0, 1.0)
        return np.interp(omega, self.grid, self.cdf_values)

    def continuous_quantile(self, u: np.ndarray) -> np.ndarray:
        """
        Inverse monotone de la fonction de répartition continue (interpolation linéaire).
        """
        u = np.clip(np.asarray(u, dtype=float), 0.0, 1.0)
        if self._quantile_fn is not None:
            return np.clip(self._quantile_fn(u), self.lo, self.hi)
        return np.interp(u, self.cdf_values, self.grid)

    def _atoms_below(self, x: np.ndarray, side: str) -> np.ndarray:
        return self._cum_atoms[np.searchsorted(self.atoms, x, side=side)]

    def mass_between(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        """
        Masse π des cellules [a, b) (ou {a} lorsque a == b), vectorisée.
        """
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        if self.continuous_mass > 0.0:
            continuous = self.continuous_mass * (self.continuous_cdf(b) - self.continuous_cdf(a))
        else:
            continuous = np.zeros(np.broadcast(a, b).shape)
        if not self.has_atoms:
            return continuous
        atom_mass = np.where(
            a == b,
            self._atoms_below(a, "right") - self._atoms_below(a, "left"),
            self._atoms_below(b, "left") - self._atoms_below(a, "left")
        )
        return continuous + atom_mass

    def mass(self, cell: Cell) -> float:
        return float(self.mass_between(cell.a, cell.b))

    def cell_nodes(self, cell: Cell, q: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Noeuds de quadrature d'une cellule placés aux quantiles de π (règle du point milieu
        en coordonnée de masse) et poids normalisés.

        Args:
            cell: Cellule de labels
            q: Nombre de noeuds pour la partie continue

        Returns:
            Couple (noeuds, poids) dont les poids somment à 1
        """
        if cell.is_atom:
            return np.array([cell.a]), np.array([1.0])

        nodes, weights = [], []
        if self.continuous_mass > 0.0:
            fa, fb = self.continuous_cdf(cell.a), self.continuous_cdf(cell.b)
            piece = self.continuous_mass * (fb - fa)
            if piece > WEIGHT_TOL:
                u = fa + (np.arange(q) + 0.5) / q * (fb - fa)
                nodes.append(self.continuous_quantile(u))
                weights.append(np.full(q, piece / q))
        if self.has_atoms:
            inside = (self.atoms >= cell.a) & (self.atoms < cell.b)
            nodes.append(self.atoms[inside])
            weights.append(self.atom_weights[inside])

        nodes = np.concatenate(nodes) if nodes else np.zeros(0)
        weights = np.concatenate(weights) if weights else np.zeros(0)
        total = weights.sum()
        if total <= WEIGHT_TOL:
            raise DegenerateCellError(f"La cellule {cell} est de masse nulle")
        return nodes, weights / total

    def representative(self, cell: Cell) -> float:
        """Point médian (en masse) d'une cellule."""
        nodes, weights = self.cell_nodes(cell, 1)
        return float(nodes[np.searchsorted(np.cumsum(weights), 0.5)])

    # ------------------------------------------------------------------ comparaison et sérialisation

    def same_as(self, other: "LabelMarginal", tol: float = MARGINAL_TOL) -> bool:
        """
        Teste l'égalité de deux marginales.
        """
        if self is other:
            return True
        if self.kind != other.kind or abs(self.continuous_mass - other.continuous_mass) > tol:
            return False
        if len(self.atoms) != len(other.atoms):
            return False
        if not (np.allclose(self.atoms, other.atoms, rtol=0.0, atol=tol)
                and np.allclose(self.atom_weights, other.atom_weights, rtol=0.0, atol=tol)):
            return False
        if self.continuous_mass == 0.0:
            return True
        if abs(self.lo - other.lo) > tol or abs(self.hi - other.hi) > tol:
            return False
        if self.spec is not None and self.spec == other.spec:
            return True
        probe = np.linspace(self.lo, self.hi, 257)
        return bool(np.allclose(self.continuous_cdf(probe), other.continuous_cdf(probe), rtol=0.0, atol=tol))

    def to_dict(self) -> Dict[str, Any]:
        """
        Représentation JSON de la marginale.
        """
        if self.spec is not None:
            return dict(self.spec)
        data: Dict[str, Any] = {"kind": self.kind}
        if self.has_atoms:
            data["atoms"] = [[float(o), float(w)] for o, w in zip(self.atoms, self.atom_weights)]
        if self.continuous_mass > 0.0:
            data["support"] = [self.lo, self.hi]
            data["cdf"] = [float(v) for v in self.cdf_values]
        if self.kind == "mixed":
            data["continuous_mass"] = self.continuous_mass
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LabelMarginal":
        """
        Reconstruit une marginale depuis sa représentation JSON.

        Raises:
            ValidationError: Si la description est incomplète ou invalide
        """
        kind = data.get("kind")
        try:
            if kind == "uniform":
                return cls.uniform()
            if kind == "power":
                return cls.power(float(data["exponent"]))
            atoms = data.get("atoms", [])
            omegas = [float(a[0]) for a in atoms]
            weights = [float(a[1]) for a in atoms]
            if kind == "atoms":
                return cls.atomic(omegas, weights)
            support = tuple(data.get("support", (0.0, 1.0)))
            if kind == "density":
                return cls("density", cdf_values=data["cdf"], support=support)
            if kind == "mixed":
                return cls.mixed(omegas, weights, float(data["continuous_mass"]), support,
                                 cdf_values=data.get("cdf"))
        except (KeyError, TypeError, IndexError, ValueError) as e:
            raise ValidationError(f"Marginale mal décrite: {e}") from e
        raise ValidationError(f"Type de marginale inconnu: {kind}")

    def __repr__(self) -> str:
        if self.spec is not None:
            return f"LabelMarginal({self.spec})"
        return f"LabelMarginal(kind={self.kind}, atoms={len(self.atoms)}, c={self.continuous_mass:g})"


def _checked_cdf(values: Sequence[float]) -> np.ndarray:
    """
    Vérifie F(lo)=0, F(hi)=1 et la croissance pas à pas, puis renvoie une copie monotone.
    """
    cdf = np.asarray(values, dtype=float).copy()
    if cdf.ndim != 1 or len(cdf) < 2:
        raise ValidationError("La fonction de répartition doit être échantillonnée sur au moins deux points")
    if not np.all(np.isfinite(cdf)):
        raise ValidationError("La fonction de répartition contient des valeurs non finies")
    if abs(cdf[0]) > WEIGHT_TOL or abs(cdf[-1] - 1.0) > WEIGHT_TOL:
        raise ValidationError(f"La fonction de répartition doit aller de 0 à 1 (reçu {cdf[0]} -> {cdf[-1]})")
    if np.any(np.diff(cdf) < -WEIGHT_TOL):
        raise ValidationError("La fonction de répartition doit être croissante")
    cdf[0], cdf[-1] = 0.0, 1.0
    return np.clip(np.maximum.accumulate(cdf), 0.0, 1.0)
