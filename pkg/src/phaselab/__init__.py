"""phaselab: variable-selection solution paths, Hamming-error exponents, and
phase diagrams under block-correlated designs."""

from .geometry import (
    ConvexCell,
    HalfPlane,
    RegionSpec,
    d_rho_sq,
    min_on_line,
    region_distance_sq,
)
from .selectors import (
    METHODS,
    Tuning,
    en_coefficients,
    en_select,
    fb_select_bivariate,
    forward_select_bivariate,
    lasso_select,
    marginal_select,
    region_for,
    scad_select,
    select,
    threslasso_select,
)

__all__ = [
    "ConvexCell",
    "HalfPlane",
    "RegionSpec",
    "d_rho_sq",
    "min_on_line",
    "region_distance_sq",
    "METHODS",
    "Tuning",
    "en_coefficients",
    "en_select",
    "fb_select_bivariate",
    "forward_select_bivariate",
    "lasso_select",
    "marginal_select",
    "region_for",
    "scad_select",
    "select",
    "threslasso_select",
]

__version__ = "0.1.0"
