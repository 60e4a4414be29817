from .mixture import (CategoricalProposal, EnumerableToyModel, MixtureModel,
                      MixtureProposal, simulate_mixture)
from .conjugate import ConjugateGaussianModel, GaussianProposal
from .poglm import Basis, PoglmModel, PoglmProposal, SpikeTrain, parameter_error
from .vae import VaeModel, VaeProposal

__all__ = [
    "MixtureModel", "MixtureProposal", "simulate_mixture",
    "EnumerableToyModel", "CategoricalProposal",
    "ConjugateGaussianModel", "GaussianProposal",
    "PoglmModel", "PoglmProposal", "Basis", "SpikeTrain", "parameter_error",
    "VaeModel", "VaeProposal",
]
