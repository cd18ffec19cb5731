"""Two strongly driven atoms in a damped cavity: closed-form dynamics and numerical checks."""

__version__ = "0.1.0"

from .hilbert import (  # noqa: E402
    AtomicDensityMatrix, AtomicPreparation, FockSpace, ModelParams, TripartiteState,
    build_operator, change_basis, coherent_state_vector, partial_trace,
)
from .metrics import concurrence, entanglement_of_formation, fidelity, purity  # noqa: E402

__all__ = [
    "AtomicDensityMatrix", "AtomicPreparation", "FockSpace", "ModelParams", "TripartiteState",
    "build_operator", "change_basis", "coherent_state_vector", "partial_trace",
    "concurrence", "entanglement_of_formation", "fidelity", "purity",
]
