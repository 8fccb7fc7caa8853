"""Core configuration and settings"""
import os

# Output Configuration
OUTPUT_DIR = os.getenv("PRAGUE_OUTPUT_DIR", "./results")
LOG_LEVEL = os.getenv("PRAGUE_LOG_LEVEL", "INFO")

# Partition schedule guards
MAX_SCHEDULE_ROUNDS = 100_000
FLOAT_CEIL_TOLERANCE = 1e-9

# Audit sampling
CLIQUE_SAMPLE_RETRY_CAP = 200
AUDIT_TOLERANCE_MULTIPLIER = 1.0

# Coloring
PALETTE_MAX_RETRIES = 8
DEFAULT_PALETTE_DELTA = 0.3

# Background jobs
MAX_FINISHED_JOBS = int(os.getenv("PRAGUE_MAX_FINISHED_JOBS", "200"))

# Lower-bound anchors for phi monotonicity witnesses
PHI_ANCHORS = (0.001, 0.5, 0.999)

# App Metadata
APP_TITLE = "Prague Dimension Lab"
APP_DESCRIPTION = "Clique partitions, greedy hypergraph coloring and certified product representations of random graphs"
APP_VERSION = "1.0.0"
