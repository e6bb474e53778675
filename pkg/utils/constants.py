"""
Constants used throughout the toolkit.
Centralizing numerical thresholds and defaults makes them easy to audit and tune.
"""

# Boundary labels - label 0 is the optimizable part of the boundary
LABEL_OPTIMIZABLE = 0

# Square sides in loop order starting at the origin corner
SQUARE_SIDE_LABELS = (1, 2, 3, 4)  # bottom, right, top, left

# Geometry tolerances
DEGENERATE_AREA_FACTOR = 1e-14  # triangle area below this times h^2 is degenerate
SNAP_FRACTION = 0.25  # interface points this close (relative to edge length) snap to a vertex
MIN_ANGLE_DEG = 10.0  # splits producing smaller angles are reported
ZERO_PHI = 1e-13  # |phi| below this counts as lying on the interface
POINT_TOLERANCE = 1e-10  # point location tolerance (barycentric)

# Level-set evolution
CFL_NUMBER = 0.9
EXTENSION_WIDTH_EDGES = 5.0  # velocity extension width in mean boundary edge lengths
DEFAULT_EPS_TOP_FRACTION = 0.02  # insertion radius as a fraction of the perimeter
DELTA_EXCL_FACTOR = 3.0  # exclusion distance = factor * eps_top

# Robin smoothing
ROBIN_PREFACTOR_SCALED = "scaled"
ROBIN_PREFACTOR_UNSCALED = "unscaled"
ROBIN_PREFACTORS = [ROBIN_PREFACTOR_SCALED, ROBIN_PREFACTOR_UNSCALED]
ROBIN_CAP_NUMERATOR = 1e12  # coefficient cap = numerator / domain diameter

# Linear algebra
RESIDUAL_WARN = 1e-10
CONDITION_LIMIT = 1e14

# Physics models
MODEL_CONDUCTIVITY = "conductivity"
MODEL_HELMHOLTZ = "helmholtz"
MODEL_ELASTICITY = "elasticity"
MODELS = [MODEL_CONDUCTIVITY, MODEL_HELMHOLTZ, MODEL_ELASTICITY]

# Objective kinds
OBJECTIVE_J_OF_U = "j_of_u"
OBJECTIVE_J_OF_GRAD = "j_of_grad"
OBJECTIVE_MEAN_SQUARE = "mean_square"
OBJECTIVE_KINDS = [OBJECTIVE_J_OF_U, OBJECTIVE_J_OF_GRAD, OBJECTIVE_MEAN_SQUARE]

# Optimization problems
PROBLEM_CONDUCTIVITY = "conductivity"
PROBLEM_MIXER = "mixer"
PROBLEM_HELMHOLTZ = "helmholtz"
PROBLEM_SUPPORT = "elasticity-support"
PROBLEM_CLAMP = "clamp"
PROBLEMS = [PROBLEM_CONDUCTIVITY, PROBLEM_MIXER, PROBLEM_HELMHOLTZ, PROBLEM_SUPPORT, PROBLEM_CLAMP]

# Optimizer events
EVENT_GEOMETRIC = "geometric"
EVENT_TOPOLOGICAL = "topological"
EVENT_REJECTED = "rejected"
EVENT_ROLLBACK = "rollback"
EVENT_INITIAL = "initial"

# Optimizer defaults
BACKTRACK_FACTOR = 0.5
MAX_BACKTRACKS = 8
STAGNATION_WINDOW = 10
STAGNATION_TOLERANCE = 1e-6
LINE_SEARCH_SLACK = 1e-12
TOPO_GUARD_RATIO = 0.05

# Screen BEM
DEFAULT_QUADRATURE_ORDER = 4
NEAR_FIELD_FACTOR = 2.0  # centroid distance below this times h_max is near field
EQUILIBRIUM_INTEGRAL = 8.0
EQUILIBRIUM_CENTER = 4.0 / 3.141592653589793
ERROR_DISK_RADIUS = 0.9
ASSEMBLY_CHUNK = 256  # quadrature-point rows per far-field block

# Kernel kinds
KERNEL_LAPLACE3D = "laplace3d"
KERNEL_LAPLACE2D_LOG = "laplace2d_log"
KERNEL_KELVIN3D = "kelvin3d"
KERNEL_KELVIN2D = "kelvin2d"
KERNEL_MINDLIN3D = "mindlin3d"
KERNEL_MINDLIN2D = "mindlin2d"

# Output formatting
FLOAT_DIGITS = 17
CONFIG_HASH_LENGTH = 16

# Artifact formats
FORMAT_VTK = "vtk"
FORMAT_MEDIT = "medit"
FORMAT_CSV = "csv"
FORMAT_JSON = "json"
OUTPUT_FORMATS = [FORMAT_VTK, FORMAT_MEDIT, FORMAT_CSV, FORMAT_JSON]

# Exit codes
EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VALIDATION = 4
