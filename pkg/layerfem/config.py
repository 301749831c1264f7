import os
from pathlib import Path

LAYERFEM_REPOSITORY = os.environ.get("LAYERFEM_REPOSITORY", os.path.join(str(Path.home()), ".layerfem"))
LAYERFEM_REPORTS_DIR = os.path.join(LAYERFEM_REPOSITORY, "reports")

LAYERFEM_N_JOBS = int(os.environ.get("LAYERFEM_N_JOBS", 1))
LAYERFEM_LOG_LEVEL = os.environ.get("LAYERFEM_LOG_LEVEL", "INFO")

# backward error accepted from the band solver, ||Ax - b|| / (||A|| ||x|| + ||b||) in max norms
LAYERFEM_SOLVER_RTOL = float(os.environ.get("LAYERFEM_SOLVER_RTOL", 1e-10))
# uniform points per cell and direction added to the L-infinity sampling set
LAYERFEM_LINF_EXTRA_POINTS = int(os.environ.get("LAYERFEM_LINF_EXTRA_POINTS", 8))
