"""Carleman-matrix reconstruction of steady thermoelastic oscillations from Cauchy data."""

from .carleman import KernelSpec, QuadratureControls, phi_cap, phi_cap_dtau, phi_cone, phi_gradients, pi_matrix
from .errors import *  # noqa: F401,F403
from .fundsol import psi, psi_adjoint, psi_tilde
from .geometry import ConeSpec, make_cap_domain, make_cone_domain
from .medium import MediumParams, bundle, coupling_coefficients, make_medium, wave_numbers
from .reconstruct import CauchyData, ReconConfig, choose_tau, reconstruct_exact, reconstruct_noisy, represent_full, stability_bound

__version__ = "0.1.0"
