"""Genuine multiparticle entanglement in the transverse-field XY chain.

Analytic reduced density matrices of the ground state, the genuine
multiparticle negativity via semidefinite programming, randomized
biseparability certification, and finite-size scaling of the negativity
around the quantum phase transition.
"""

from .model import ModelParams, ModeData, dispersion, energy_density, ground_energy
from .correlators import CorrelatorTable, build_table, correlator_finite, correlator_thermo
from .wick import ABMonomial, PauliString, pauli_expectation, reduce_pauli_string, wick_determinant
from .templates import template_expectation
from .rdm import Arrangement, DensityMatrix, build_rdm, validate_state
from .ed_oracle import SpinGroundState, exact_ground_state, partial_trace
from .gmn import NegativityResult, genuine_negativity, partial_transpose, verify_witness
from .separability import (
    Inconclusive,
    SeparabilityCertificate,
    ball_check,
    certify_biseparable,
    filter_normal_form,
)
from .certcheck import check_certificate
from .concurrence import c4_mixed, c4_pure
from .scaling import derivative, fit_log_divergence, fit_shift_exponent, locate_pseudo_critical

__version__ = "0.1.0"

__all__ = [
    "ModelParams",
    "ModeData",
    "dispersion",
    "energy_density",
    "ground_energy",
    "CorrelatorTable",
    "build_table",
    "correlator_finite",
    "correlator_thermo",
    "ABMonomial",
    "PauliString",
    "pauli_expectation",
    "reduce_pauli_string",
    "wick_determinant",
    "template_expectation",
    "Arrangement",
    "DensityMatrix",
    "build_rdm",
    "validate_state",
    "SpinGroundState",
    "exact_ground_state",
    "partial_trace",
    "NegativityResult",
    "genuine_negativity",
    "partial_transpose",
    "verify_witness",
    "Inconclusive",
    "SeparabilityCertificate",
    "ball_check",
    "certify_biseparable",
    "filter_normal_form",
    "check_certificate",
    "c4_mixed",
    "c4_pure",
    "derivative",
    "fit_log_divergence",
    "fit_shift_exponent",
    "locate_pseudo_critical",
    "__version__",
]
