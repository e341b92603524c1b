from nijkit.exterior.forms import (
    KForm,
    canonical_symplectic,
    change_form_coordinates,
    d,
    d_A,
    i_A,
    pullback,
    two_form_pullback_matrix,
    wedge,
)
from nijkit.exterior.operators import OperatorField, change_coordinates, jacobian

__all__ = [
    "KForm",
    "OperatorField",
    "canonical_symplectic",
    "change_coordinates",
    "change_form_coordinates",
    "d",
    "d_A",
    "i_A",
    "jacobian",
    "pullback",
    "two_form_pullback_matrix",
    "wedge",
]
