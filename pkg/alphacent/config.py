import os
from pathlib import Path

LOG_LEVEL = os.getenv("ALPHACENT_LOG_LEVEL", "WARNING").upper()

# Estimation
TOL = float(os.getenv("ALPHACENT_TOL", "1e-10"))
MAX_ROUNDS = int(os.getenv("ALPHACENT_MAX_ROUNDS", "10000"))

# Consensus
CONSENSUS_TOL = float(os.getenv("ALPHACENT_CONSENSUS_TOL", "1e-10"))
CONSENSUS_MAX_ROUNDS = int(os.getenv("ALPHACENT_CONSENSUS_MAX_ROUNDS", "100000"))

# Control
ENUMERATION_LIMIT = int(os.getenv("ALPHACENT_ENUMERATION_LIMIT", "18"))
CONSTRAINT_TOL = float(os.getenv("ALPHACENT_CONSTRAINT_TOL", "1e-6"))

DENSE_EIGEN_LIMIT = int(os.getenv("ALPHACENT_DENSE_EIGEN_LIMIT", "500"))
CSV_DIGITS = int(os.getenv("ALPHACENT_CSV_DIGITS", "15"))
OUTPUT_DIR = Path(os.getenv("ALPHACENT_OUTPUT_DIR", "out"))

WORKERS = os.getenv("ALPHACENT_WORKERS")
if WORKERS is not None:
    WORKERS = int(WORKERS)
