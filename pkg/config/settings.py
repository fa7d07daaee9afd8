# config/settings.py
import os

from dotenv import load_dotenv

# Use absolute path to avoid working directory issues
_PROJECT_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
load_dotenv(os.path.join(_PROJECT_ROOT, ".env"))


def _env_int(name, default):
    return int(os.getenv(name, default))


def _env_float(name, default):
    return float(os.getenv(name, default))


# Paths
SCHEMA_DIR = os.path.join(_PROJECT_ROOT, "schemas")
PRESET_DIR = os.path.join(_PROJECT_ROOT, "demo_data", "presets")
OUTPUT_DIR = os.getenv("PME_OUTPUT_DIR", os.path.join(_PROJECT_ROOT, "runs"))

# Logging
LOG_LEVEL = os.getenv("PME_LOG_LEVEL", "INFO")
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

# Sampling
SAMPLES = _env_int("PME_SAMPLES", 1000)
SEED = _env_int("PME_SEED", 20230701)
SAMPLING_WORKERS = _env_int("PME_SAMPLING_WORKERS", 1)

# Dimensionality reduction
CONFIDENCE = _env_float("PME_CONFIDENCE", 0.95)
RANK_CUTOFF = 1e-12          # eigenvalues below RANK_CUTOFF * lambda_1 are numerical zeros
SELECTION_TOLERANCE = 1e-10  # relative slack when testing the retained-variance threshold
BOUND_MARGIN = 0.0           # fractional inflation of the latent box
DIRECT_SOLVE_CAP = _env_int("PME_DIRECT_SOLVE_CAP", 600)

# Optimization
PENALTY_C = _env_float("PME_PENALTY_C", 1000.0)
PSO_INERTIA = 0.721
PSO_COGNITIVE = 1.193
PSO_SOCIAL = 1.193
PSO_SWARM_FACTOR = 4
PSO_SWARM_CAP = 32
POLISH_EVERY = 10
ROUGHNESS_WEIGHT = 1e-6
BUDGETS = {"airfoil-bezier14": 500, "hull-ffd22": 1000}
# objective reductions, as a fraction of the baseline value, counted in the report
DROP_LEVELS = {"airfoil-bezier14": (0.25, 0.30, 0.35), "hull-ffd22": (0.05, 0.075, 0.10)}

# Geometry file format
FLOAT_FORMAT = "%.17g"
