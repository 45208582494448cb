"""
Constants and default values for urlab

This module contains the numeric defaults, tolerances, tags and limits
used throughout the laboratory.
"""

# Boundary sample kinds
BOUNDARY_KINDS = [
    "plane",
    "low_dim_plane",
    "lipschitz_graph",
    "circle",
    "four_corner_cantor",
    "custom",
]

# Domain sides
SIDE_ONE_SIDE = "one_side"
SIDE_COMPLEMENT = "complement"
DOMAIN_SIDES = [SIDE_ONE_SIDE, SIDE_COMPLEMENT]

# Ahlfors-regularity window and flag thresholds
AHLFORS_MIN_RADIUS_SPACINGS = 10.0
AHLFORS_MAX_RADIUS_FRACTION = 0.25
AHLFORS_RATIO_FLOOR = 1e-3
AHLFORS_RATIO_CEILING = 1e3
AHLFORS_MAX_SLOPE = 0.25

# Corkscrew search and Harnack chains
CORKSCREW_GRID_DIVISIONS = 64
HARNACK_STEP_FRACTION = 0.5
HARNACK_MAX_STEPS = 100_000

# Dyadic cubes
CHRIST_CENTER_SEPARATION = 0.5
CHRIST_MIN_SPACINGS = 4.0
WHITNEY_LOWER = 20.0
# Separation ratio of the graded cubes used as quadrature cells
QUADRATURE_WHITNEY_RATIO = 2.0

# Smooth distance
DEFAULT_BETA = 1.0
DEFAULT_OPENING_ANGLE = 0.5
DEFAULT_TREE_TOLERANCE = 1e-9
TREE_LEAF_SIZE = 32
TREE_NEAR_ATOMS = 16
DIRECT_CHUNK = 4096
PROBE_MIN_SPACINGS = 2.0
PLANE_FIT_RADIUS = 100.0
C_BETA_RTOL = 1e-10

# Elliptic solver
DEFAULT_SOLVER_TOLERANCE = 1e-9
DEFAULT_MAX_ITERATIONS = 20_000
POLE_MIN_SPACINGS = 8.0
POLE_MASK_SPACINGS = 4.0
DERIVATIVE_MASK_SPACINGS = 2.0
GRADIENT_CHECK_SPACINGS = 4.0
CACCIOPPOLI_MIN_SPACINGS = 8.0

# Carleson functionals
INTEGRAND_TAGS = [
    "hess_u",
    "grad_abs_grad_u",
    "grad_sq_grad_u",
    "logratio_grad",
    "logratio_hess",
    "dkp_coeff",
    "dem_g1",
    "dem_g2",
    "dem_ind",
    "weight_div",
]
CENTER_COVERAGE_TARGET = 0.9
# Balls whose domain part comes within this fraction of r of a truncation face are absent
BALL_FACE_MARGIN = 0.25
BALL_SAMPLE_DIVISIONS = 8
BALL_SAMPLE_CHUNK = 1 << 18
TREND_BOUNDED_FACTOR = 1.5
TREND_RELATIVE_SLOPE = 0.02
TREND_DIVERGING_RATIO = 1.3
TREND_LOG_AGREEMENT = 0.2

# Coefficient profiles
COEFFICIENT_PROFILES = ["identity", "log_oscillating", "integrable_decay"]

# Beta numbers
BETA_LATTICE_DIVISIONS = 32
BETA_SEARCH_ITERATIONS = 200
BETA_ANGLE_STEP = 0.25
BETA_OFFSET_STEP_FRACTION = 0.25

# Convex-body distance Hessian
PROJECTION_STEP_TOLERANCE = 1e-10
PROJECTION_MAX_ITERATIONS = 100
HESSIAN_FD_STEP = 1e-3

# Eikonal check
EIKONAL_TOLERANCE = 0.02

# CLI exit codes
EXIT_SUCCESS = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

# File and directory naming
CONFIG_HASH_LENGTH = 12
FIELD_MAGIC = b"URLF"
FIELD_FORMAT_VERSION = 1
CSV_FLOAT_FORMAT = "%.12e"

# Output formats
SUPPORTED_REPORT_FORMATS = ["json", "yaml", "markdown"]

# DKP cutoff ladder and scales
DKP_CUTOFF_LADDER = [2.0**-k for k in range(5, 11)]
DKP_SCALES = [0.5, 0.25]
