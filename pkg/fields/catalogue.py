"""
Catalogue des modèles: construction d'un champ depuis sa description JSON.

Exemple de description:
    {"type": "kuramoto", "K": 1.0,
     "kernel": {"type": "step", "breaks": [0, 0.5, 1], "values": [[1, 0.5], [0.5, 1]]}}
"""

import logging
from typing import Any, Callable, Dict

import numpy as np

from fields.base_field import GrowthProfile, VectorField
from fields.graphon_field import graphon_field
from fields.interactions import (
    Interaction, attraction, constant_interaction, difference_function, other_state, own_state,
    sine_coupling
)
from fields.kernels import (
    CallableFunction, ConstantFunction, ConstantKernel, FunctionKernel, Kernel,
    LabelFunction, StepFunction, StepKernel
)
from fields.kuramoto_field import kuramoto_field
from fields.label_drift_field import label_drift_field, zero_field
from fields.leader_follower_field import AffineDrift, leader_follower_field
from fields.linear_field import linear_field
from fields.michaelis_menten_field import michaelis_menten_field
from utils.exceptions import ConfigError, ValidationError

logger = logging.getLogger(__name__)

# Familles de noyaux en forme fermée: (fonction, norme sup) selon les paramètres
KERNEL_FAMILIES: Dict[str, Callable[[Dict[str, Any]], FunctionKernel]] = {
    "product": lambda p: FunctionKernel(
        lambda w, t, s=float(p.get("scale", 1.0)): s * w * t, abs(float(p.get("scale", 1.0))), name="product"),
    "exp_distance": lambda p: FunctionKernel(
        lambda w, t, ell=float(p.get("length", 1.0)): np.exp(-np.abs(w - t) / ell), 1.0, name="exp_distance"),
    "min": lambda p: FunctionKernel(lambda w, t: np.minimum(w, t), 1.0, name="min"),
}

INTERACTIONS: Dict[str, Callable[[Dict[str, Any]], Interaction]] = {
    "attraction": lambda p: attraction(float(p.get("strength", 1.0))),
    "sine": lambda p: sine_coupling(float(p.get("K", 1.0))),
    "constant": lambda p: constant_interaction(p.get("value", 0.0)),
    "own_state": lambda p: own_state(float(p.get("scale", 1.0))),
    "other_state": lambda p: other_state(float(p.get("scale", 1.0))),
    "bounded_attraction": lambda p: difference_function(
        lambda z, s=float(p.get("strength", 1.0)): -s * np.tanh(z), abs(float(p.get("strength", 1.0))),
        bound=abs(float(p.get("strength", 1.0))), name="bounded_attraction"),
}


def build_kernel(spec) -> Kernel:
    """
    Noyau en label: un nombre (constant), {"type": "constant"|"step"|"function", ...}.
    """
    if isinstance(spec, (int, float)):
        return ConstantKernel(float(spec))
    kind = spec.get("type")
    if kind == "constant":
        return ConstantKernel(float(spec.get("value", 1.0)))
    if kind == "step":
        return StepKernel(spec["breaks"], spec["values"])
    if kind == "function":
        family = spec.get("family")
        if family not in KERNEL_FAMILIES:
            raise ConfigError(f"Famille de noyau inconnue: {family} (disponibles: {sorted(KERNEL_FAMILIES)})")
        return KERNEL_FAMILIES[family](spec)
    raise ConfigError(f"Type de noyau inconnu: {kind}")


def build_label_function(spec) -> LabelFunction:
    """
    Fonction du label: un nombre, {"type": "step", ...} ou {"type": "affine", "c0", "c1"}.
    """
    if isinstance(spec, (int, float)):
        return ConstantFunction(float(spec))
    kind = spec.get("type")
    if kind == "constant":
        return ConstantFunction(float(spec.get("value", 0.0)))
    if kind == "step":
        return StepFunction(spec["breaks"], spec["values"])
    if kind == "affine":
        c0, c1 = float(spec.get("c0", 0.0)), float(spec.get("c1", 0.0))
        return CallableFunction(lambda w: c0 + c1 * w, sup_norm=max(abs(c0), abs(c0 + c1)),
                                minimum=min(c0, c0 + c1))
    raise ConfigError(f"Type de fonction de label inconnu: {kind}")


def build_interaction(spec: Dict[str, Any]) -> Interaction:
    kind = spec.get("type")
    if kind not in INTERACTIONS:
        raise ConfigError(f"Interaction inconnue: {kind} (disponibles: {sorted(INTERACTIONS)})")
    return INTERACTIONS[kind](spec)


def _graphon(spec):
    return graphon_field(build_kernel(spec.get("kernel", 1.0)), build_interaction(spec["interaction"]),
                         dim=int(spec.get("dim", 1)))


def _kuramoto(spec):
    return kuramoto_field(float(spec.get("K", 1.0)), build_kernel(spec.get("kernel", 1.0)))


def _michaelis_menten(spec):
    return michaelis_menten_field(
        build_kernel(spec.get("alpha", 1.0)), build_kernel(spec.get("k", 1.0)),
        build_label_function(spec.get("beta", 1.0)), build_label_function(spec.get("g", 0.0)),
        build_label_function(spec.get("a", 1.0)), strict=bool(spec.get("strict", True))
    )


def _leader_follower(spec):
    dim = int(spec.get("dim", 1))
    v_ext = spec.get("v_ext", {})
    drift = AffineDrift(tuple(np.broadcast_to(np.asarray(v_ext.get("offset", 0.0), dtype=float), (dim,))),
                        float(v_ext.get("gain", 0.0)))
    return leader_follower_field(
        build_interaction(spec.get("interaction", {"type": "attraction"})), drift,
        u=spec.get("u", 0.0), leaders=spec.get("leaders", [1.0]),
        followers=tuple(spec.get("followers", (0.0, 0.8))), dim=dim
    )


def _linear(spec):
    return linear_field(build_kernel(spec.get("a", 0.0)), build_kernel(spec.get("b", 0.0)),
                        dim=int(spec.get("dim", 1)))


def _label_drift(spec):
    return label_drift_field(spec["breaks"], spec["values"])


def _zero(spec):
    return zero_field(int(spec.get("dim", 1)))


MODELS: Dict[str, Callable[[Dict[str, Any]], VectorField]] = {
    "graphon": _graphon,
    "kuramoto": _kuramoto,
    "mm": _michaelis_menten,
    "leader_follower": _leader_follower,
    "linear": _linear,
    "label_drift": _label_drift,
    "zero": _zero,
}


def build_field(spec: Dict[str, Any]) -> VectorField:
    """
    Construit le champ décrit par la clé "model" d'une configuration.

    Une clé optionnelle "growth": {"m": ..., "lipschitz": ...} remplace les constantes
    déclarées du modèle (pour éprouver les estimations a priori).

    Raises:
        ConfigError: Si le modèle est inconnu, mal décrit ou incohérent
    """
    kind = spec.get("type")
    if kind not in MODELS:
        raise ConfigError(f"Modèle inconnu: {kind} (disponibles: {sorted(MODELS)})")
    try:
        field = MODELS[kind](spec)
        if "growth" in spec:
            declared = spec["growth"]
            field.growth = GrowthProfile(
                m=float(declared["m"]) if "m" in declared else field.growth.m,
                lipschitz=float(declared["lipschitz"]) if "lipschitz" in declared else field.growth.lipschitz,
                moment_free=field.growth.moment_free
            )
            logger.warning(f"Profil de croissance du modèle '{kind}' remplacé par la configuration")
    except KeyError as e:
        raise ConfigError(f"Paramètre manquant pour le modèle '{kind}': {e}") from e
    except (ValidationError, TypeError, ValueError, AttributeError) as e:
        raise ConfigError(f"Modèle '{kind}' invalide: {e}") from e
    logger.debug(f"Champ construit: {field!r}")
    return field
