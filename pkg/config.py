import os

DEFAULT_MASTER_SEED = int(os.environ.get("STEINLAB_MASTER_SEED", "20240718"))  # Seed used when none is given

ARTIFACT_NAME = "SingularSteinLab"
ARTIFACT_VERSION = "1.0.0"

# numeric tolerances
SYMMETRY_TOL = 1e-12  # relative, max-abs norm
F_FLOOR = 1e-12  # draws with F below this are resampled
SANDWICH_TOL = 1e-9
SCAN_VIOLATION_TOL = 1e-9
POISSON_TAIL_MASS = 1e-12

# monte carlo policy
REPLICATION_BLOCK = 1024  # replications sharing one counter-based stream
SE_MARGIN = 4  # estimate + SE_MARGIN * SE must stay below an analytic bound
STABILITY_SE = 5
VERDICT_SE = 2
AGREEMENT_TOL = 1e-5
AGREEMENT_FRACTION = 0.95
