"""Qubit decoherence in two pictures.

A Pauli dephasing master equation for 2x2 density matrices, and the
equivalent diffusion of Kahler probability distributions on the Bloch sphere
generated by the deformed Laplacian 1/4 sum_k gamma_k X_k^2. Complete
positivity of the channel corresponds to ellipticity of that operator.
"""
from .cp1_geometry import (
    KahlerFunction,
    SpherePoint,
    apply_vector_field,
    density_from_distribution,
    distribution_from_density,
    hamiltonian_flow,
    integrate_sphere,
    kahler_from_operator,
    poisson_bracket,
)
from .deformed_laplacian import (
    DiffusionMatrix,
    EllipticityVerdict,
    apply_deformed_laplacian,
    diffusion_matrix,
    generator_harmonic_block,
    is_elliptic,
)
from .divisibility import Divisibility, DivisibilityReport, classify_schedule
from .harmonics import HarmonicField, analyze, evaluate, synthesize
from .pauli_channel import (
    Admissibility,
    BlochVector,
    DecoherenceRates,
    DensityMatrix,
    HamiltonianSpec,
    PauliMixture,
    RatesSchedule,
    apply_pauli_channel,
    bloch_from_density,
    density_from_bloch,
    evolve_bloch_closed_form,
    integrate_master_equation,
    lindblad_rhs,
    pauli_mixing_probabilities,
    rates_admissible,
)
from .quadrature import GridField, QuadratureRule, quadrature_rule
from .spectral_evolution import (
    EvolutionReport,
    evolve_anisotropic,
    evolve_axial,
    evolve_isotropic,
    evolve_kahler_closed_form,
    evolve_schedule,
    find_negativity,
)

__version__ = "0.1.0"
