# /.../giant-emitter-lab/config.py
RUNS_ROOT = "runs"

TOOLKIT_VERSION = "0.4.0"
LOG_NAME = "giant_emitter"

# Timezone for the results browser. Manifests always store UTC
LOCAL_TZ = "UTC"   # e.g., "America/New_York", "Europe/Madrid", etc.

# Propagation (energies in units of J, times in units of 1/J)
DEFAULT_DT = 0.01
NORM_TOL   = 1e-9    # allowed |norm - 1| per unit tJ
J_MAX      = 64      # harmonic order for Floquet reconstruction checks

# Observables
N_BINS = 200

# Mode blocks for deterministic reductions; never depends on the thread count
BLOCK_SIZE = 16384

# Dense oracle refuses anything larger than N^d + 1 basis states
DENSE_MAX_DIM = 8001

# Output layout (families under each run directory)
LAYOUT = {
    "fields":   "fields",     # binary / pgm bath snapshots
    "series":   "series",     # time series and tables (CSV)
    "matrices": "matrices",   # collective J, gamma (CSV)
}
