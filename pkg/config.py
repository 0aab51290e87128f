import os

from dotenv import load_dotenv

load_dotenv()

__version__ = "1.0.0"


class Config:
    """Defaults for the simulator, the estimators and the CLI."""

    # Reports land here when --out is a bare file name
    OUTPUT_DIR = os.environ.get('TELEPROBE_OUTPUT_DIR', 'results')

    # Dense operators only: system + GHZ register must fit under this cap
    QUBIT_CAP = 14

    # 3^N settings x 2^N outcomes each; 8 qubits is ~1.7M probabilities
    TOMOGRAPHY_QUBIT_CAP = 8

    # Numeric policy
    PSD_TOL = 1e-10
    TRACE_TOL = 1e-12
    HERMITIAN_TOL = 1e-12
    IMAG_TOL = 1e-9
    NEGLIGIBLE_PROB = 1e-14

    # Sampling / parallelism
    SHOT_CHUNK = 65536
    N_JOBS = 1
    # joblib.Memory location for exact tomography distributions; unset disables caching
    CACHE_DIR = os.environ.get('TELEPROBE_CACHE_DIR') or None

    # Two-step scan
    POPULATION_THRESHOLD = 1e-3

    LOG_LEVEL = 'INFO'
