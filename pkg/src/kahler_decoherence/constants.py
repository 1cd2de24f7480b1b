"""Numerical tolerances shared across the package."""

#: algebraic identities (Pauli algebra, closed forms, Gram matrices)
ALGEBRAIC_TOL = 1e-12
#: integrated trajectories (RK4 against closed forms)
TRAJECTORY_TOL = 1e-8
#: sign tests on rates (admissibility boundaries)
RATE_TOL = 1e-12
#: numeric symbol scans and grid minima
SCAN_TOL = 1e-9
#: mixture normalisation accepted by apply_pauli_channel
MIXTURE_TOL = 1e-9
#: distance from a pole at which diffusion-matrix evaluation is refused
POLE_TOL = 1e-6

DEFAULT_STEP = 1e-3
DEFAULT_N_THETA = 32
DEFAULT_N_PHI = 64
DEFAULT_L_MAX = 32
DEFAULT_SCAN = (64, 128)
