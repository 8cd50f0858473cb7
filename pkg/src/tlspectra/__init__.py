"""Lagrange spectra of translation surfaces via renormalization."""

__version__ = "0.1.0"

from .iet import Iet, PermutationPair, is_admissible
from .precision import precision_bits, set_precision, tolerance
from .rauzy import RauzyPath, matrix, rauzy_class
from .spectrum import enumerate_periodic_values, hurwitz_lower_bound, periodic_value
from .zippered import ZipperedDatum, canonical_tau, w_value

__all__ = [
    "Iet",
    "PermutationPair",
    "RauzyPath",
    "ZipperedDatum",
    "canonical_tau",
    "enumerate_periodic_values",
    "hurwitz_lower_bound",
    "is_admissible",
    "matrix",
    "periodic_value",
    "precision_bits",
    "rauzy_class",
    "set_precision",
    "tolerance",
    "w_value",
]
