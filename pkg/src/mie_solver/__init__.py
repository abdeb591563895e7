"""Layered-sphere multipole solver."""

from src.mie_solver.coefficients import (
    LayerAmplitudes,
    LayeredSphere,
    MultipoleCoefficients,
    NearFieldSample,
    Shell,
)
from src.mie_solver.layered import (
    current_n1_solve,
    exterior_trace_solve,
    incident_trace,
    plane_wave_solve,
    wiscombe_cutoff,
)
from src.mie_solver.fields import (
    evaluate_fields,
    far_field,
    far_field_grid,
    far_field_via_surface_integral,
    incident_fields,
    near_field_trace,
    scattered_fields,
)
from src.mie_solver.energy import (
    CrossSections,
    EnergyBalance,
    cross_sections,
    energy_balance,
    extinction_from_coefficients,
)

__all__ = [
    'LayerAmplitudes',
    'LayeredSphere',
    'MultipoleCoefficients',
    'NearFieldSample',
    'Shell',
    'current_n1_solve',
    'exterior_trace_solve',
    'incident_trace',
    'plane_wave_solve',
    'wiscombe_cutoff',
    'evaluate_fields',
    'far_field',
    'far_field_grid',
    'far_field_via_surface_integral',
    'incident_fields',
    'near_field_trace',
    'scattered_fields',
    'CrossSections',
    'EnergyBalance',
    'cross_sections',
    'energy_balance',
    'extinction_from_coefficients',
]
