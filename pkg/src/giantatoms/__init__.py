"""Giant atoms coupled to a 1D waveguide: SLH networks, master equations,
dynamics, scattering and decoherence-free design."""

__version__ = "0.1.0"

from .cascade import (ScatteringResult, build_semi_infinite_slh, build_slh, build_waveguide_slh,
                      coefficients_from_triplet, derive_master_equation, slh_coefficients,
                      transmission_reflection)
from .coefficients import CoefficientSet, coefficient_set, two_atom_closed_form
from .designer import (DesignSolution, SignPattern, design_all_to_all, design_all_to_all_3,
                       design_all_to_all_3_free, design_chain, verify_decoherence_free)
from .geometry import (ConnectionPoint, Geometry, GeometryError, Setup, Topology, classify_pair,
                       from_order, from_positions, two_atom_setup, validate_geometry)
from .operators import MasterEquationGenerator, product_state
from .simulator import Trajectory, evolve, expectation, steady_state
from .slh import DriveSpec, SlhTriplet, attach_drive, concatenate, feedback, series

__all__ = [
    "CoefficientSet", "ConnectionPoint", "DesignSolution", "DriveSpec", "Geometry",
    "GeometryError", "MasterEquationGenerator", "ScatteringResult", "Setup", "SignPattern",
    "SlhTriplet", "Topology", "Trajectory", "attach_drive", "build_semi_infinite_slh",
    "build_slh", "build_waveguide_slh", "classify_pair", "coefficient_set",
    "coefficients_from_triplet", "concatenate", "derive_master_equation", "design_all_to_all",
    "design_all_to_all_3", "design_all_to_all_3_free", "design_chain", "evolve", "expectation",
    "feedback", "from_order", "from_positions", "product_state", "series", "slh_coefficients",
    "steady_state", "two_atom_closed_form", "transmission_reflection", "two_atom_setup",
    "validate_geometry", "verify_decoherence_free",
]
