"""Exact arithmetic, spectral analysis and Monte Carlo CLT checks for commuting toral endomorphisms."""

from .errors import ToralError
from .lattice import (IntMatrix, IntPolynomial, LatticeAction, char_poly, is_ergodic,
                      is_irreducible_over_Q, is_totally_ergodic, orbit_section,
                      action_from_json, action_to_json)
from .catalog import companion_matrix, units_pair, quartic_pair, block_action, named_example, EXAMPLES
from .trigpoly import TrigPolynomial
from .spectral import (spectral_density, variance, rotated_variance, barycenter_variance,
                       solve_coboundary, daka_estimate, certify_daka)
from .simulate import ExperimentConfig, run_clt_experiment

__version__ = "0.1.0"
