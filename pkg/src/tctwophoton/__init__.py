"""Two dipole-coupled atoms, nondegenerate two-photon coupling, two-mode thermal cavity field:
exact reduced dynamics and atom-atom negativity."""

__version__ = "0.1.0"

from .model import AtomPreparation, ModelParams, ThermalWeights, build_thermal_weights, initial_atomic_density  # noqa: E402
from .dynamics import NegativityTrace, ReducedState, evolve_reduced, negativity_series  # noqa: E402
from .entanglement import negativity, partial_transpose  # noqa: E402

__all__ = [
    "AtomPreparation", "ModelParams", "ThermalWeights", "build_thermal_weights", "initial_atomic_density",
    "NegativityTrace", "ReducedState", "evolve_reduced", "negativity_series", "negativity", "partial_transpose",
]
