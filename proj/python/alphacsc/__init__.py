"""Alpha-stable convolutional sparse coding."""

from ._alphacsc import (
    NumericalError,
    atom_distance,
    characteristic_function,
    estimate_weights,
    fit,
    generate_synthetic,
    reconstruct,
    sample_stable,
    weighted_objective,
)

__all__ = [
    "NumericalError",
    "atom_distance",
    "characteristic_function",
    "estimate_weights",
    "fit",
    "generate_synthetic",
    "reconstruct",
    "sample_stable",
    "weighted_objective",
]
