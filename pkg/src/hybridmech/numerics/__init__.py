from .grid import (Axis, ComplexField, DEFAULT_POINT_BUDGET, Field, Grid, GridError,
                   RealField, as_values, gaussian)
from .calculus import (default_scheme, derivative, integrate, integrate_over, l1_distance,
                       max_wavenumber, partial, sixth_difference)
from .poly import PHASE_VARS, PolyPhaseFn, exact, p, poisson_bracket, q, sample
from .io import export_csv, field_from_dict, field_to_dict, load_field, save_field

__all__ = [
    "Axis", "ComplexField", "DEFAULT_POINT_BUDGET", "Field", "Grid", "GridError", "RealField",
    "as_values", "gaussian", "default_scheme", "derivative", "integrate", "integrate_over",
    "l1_distance", "max_wavenumber", "partial", "sixth_difference", "PHASE_VARS", "PolyPhaseFn", "exact", "p",
    "poisson_bracket", "q", "sample", "export_csv", "field_from_dict", "field_to_dict",
    "load_field", "save_field",
]
