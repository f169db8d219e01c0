"""Isoflux curves, Meissner fields and first critical fields in the London limit."""
from .critfield import EnergyModel, hc1_band, hc1_zero, line_excess_energy, optimal_line_count, phase_table
from .currents import (MeridianCurve, Polyline3, StarNormEstimate, circulation, length, lift,
                       project_meridian, ratio, star_distance, stokes_flux)
from .domain import Ball, SolidOfRevolution, parse_domain
from .errors import IsofluxError
from .meissner import (AxisymField, BallField, MeissnerSummary, b0_ball, curl_b0_axisym,
                       curl_b0_ball_meridian, j0, solve_axisym_meissner)
from .nondegen import (NondegenReport, PerturbationSpec, check_length_control, check_tubular,
                       positivity_scan, sample_perturbations, verify_nondegeneracy)
from .optimize import (CurveCandidate, OptimizerConfig, diameter_curve, flux_gradient,
                       loop_supremum_probe, multistart_maximize, ratio_ascent, sector_competitors,
                       torus_field)

__version__ = "0.1.0"

__all__ = [
    "EnergyModel", "hc1_band", "hc1_zero", "line_excess_energy", "optimal_line_count",
    "phase_table", "MeridianCurve", "Polyline3", "StarNormEstimate", "circulation",
    "length", "lift", "project_meridian", "ratio", "star_distance", "stokes_flux", "Ball",
    "SolidOfRevolution", "parse_domain", "IsofluxError", "AxisymField", "BallField",
    "MeissnerSummary", "b0_ball", "curl_b0_axisym", "curl_b0_ball_meridian", "j0",
    "solve_axisym_meissner", "NondegenReport", "PerturbationSpec", "check_length_control",
    "check_tubular", "positivity_scan", "sample_perturbations", "verify_nondegeneracy",
    "CurveCandidate", "OptimizerConfig", "diameter_curve", "flux_gradient",
    "loop_supremum_probe", "multistart_maximize", "ratio_ascent", "sector_competitors",
    "torus_field",
]
