"""
Model catalog.

Each model pairs a polynomial Hamiltonian with a Gaussian-polynomial trial state.
"""

from cmxprony.errors import ConfigError
from cmxprony.models.base import BaseModel, InlineModel
from cmxprony.models.coupled import CoupledModel
from cmxprony.models.double_well import DoubleWellBarrierModel, DoubleWellModel
from cmxprony.models.harmonic import HarmonicGaussianModel, HarmonicGroundModel, HarmonicKnowlesModel
from cmxprony.models.quartic import QuarticModel

# Registry of all catalog models
MODELS: dict[str, type[BaseModel]] = {
    "ho-knowles": HarmonicKnowlesModel,
    "ho-gaussian": HarmonicGaussianModel,
    "ho-ground": HarmonicGroundModel,
    "quartic": QuarticModel,
    "coupled": CoupledModel,
    "double-well": DoubleWellModel,
    "double-well-barrier": DoubleWellBarrierModel,
}


def get_model(name: str) -> BaseModel:
    try:
        return MODELS[name]()
    except KeyError:
        raise ConfigError(f"unknown model {name!r}; choose from {', '.join(MODELS)}", key="run.model") from None


__all__ = [
    "BaseModel",
    "InlineModel",
    "HarmonicKnowlesModel",
    "HarmonicGaussianModel",
    "HarmonicGroundModel",
    "QuarticModel",
    "CoupledModel",
    "DoubleWellModel",
    "DoubleWellBarrierModel",
    "MODELS",
    "get_model",
]
