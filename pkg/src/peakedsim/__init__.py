"""Classical simulation of peaked shallow quantum circuits."""
from .circuit import Circuit, Gate, gate, unitary, lightcones, load, save
from .clifford import build_v_theta
from .peaked import approximate_state, estimate_output_probability, sample, select_params

__all__ = [
    "Circuit", "Gate", "gate", "unitary", "lightcones", "load", "save", "build_v_theta",
    "approximate_state", "estimate_output_probability", "sample", "select_params",
]
