"""
Configuration for the contextuality toolkit
Centralizes tolerances, defaults, and paths
"""

from pathlib import Path
import math
import os

from dotenv import load_dotenv

TOOL_VERSION = "1.0.0"

# Paths
PROJECT_DIR = Path(__file__).parent.parent
DATA_DIR = PROJECT_DIR / "data"

# Local overrides (.env next to requirements.txt)
load_dotenv(PROJECT_DIR / ".env")

# Output location used when --out is not given
DEFAULT_OUTPUT_DIR = Path(
    os.environ.get("CONTEXTUALITY_OUTPUT_DIR", str(DATA_DIR / "runs"))
)

# Tolerances
NORMALIZATION_TOLERANCE = 1e-9
FEASIBILITY_TOLERANCE = 1e-7
VIOLATION_SLACK = 1e-12
UNIT_NORM_TOLERANCE = 1e-12
SYMMETRY_TOLERANCE = 0.03  # empirical tables -> pairwise probabilities

# Kolmogorov feasibility: 2^n variables
MAX_KOLMOGOROV_CONTEXTS = 12

# Monte Carlo
DEFAULT_SEED = 7
DEFAULT_POPULATION = 100_000
POLL_CHUNK_SIZE = int(os.environ.get("CONTEXTUALITY_POLL_CHUNK", "10000"))
POLL_WORKERS = int(os.environ.get("CONTEXTUALITY_POLL_WORKERS", "1"))

# Opinion poll geometry
POLL_EPSILON = math.sqrt(2) / 2
FAN_ADJACENT_DEGREES = 45.0

# Liar dynamics
DEFAULT_TAU = math.pi / 2
CONTRADICTION_THRESHOLD = 1 - 1e-6
LOG_BRANCH = "principal: eigenphases in (-pi, pi], phase pi mapped to +pi"
