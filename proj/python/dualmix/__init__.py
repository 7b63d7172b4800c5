"""Dual-mixed finite elements for stationary Navier-Stokes in 2D.

The unknowns are the stress and the velocity gradient; velocity enters
through a trace-free gradient space. Three element families are shipped:
"peers", "afw" and "svrt1" (a composite second-order element on
barycentric refinements with static condensation support).
"""

from ._dualmix import (
    Triangulation,
    barycentric_refine,
    certify_macroelements,
    collinearity_margin,
    convergence_study,
    dof_counts,
    exact_norms,
    local_dims,
    solve,
    stability_study,
    uniform_square_mesh,
)

__all__ = [
    "Triangulation",
    "barycentric_refine",
    "certify_macroelements",
    "collinearity_margin",
    "convergence_study",
    "dof_counts",
    "exact_norms",
    "local_dims",
    "solve",
    "stability_study",
    "uniform_square_mesh",
]

__version__ = "0.1.0"
