"""
Process-wide singletons, initialised by the CLI factory.

    numeric  - tolerances and the qubit caps (the global numeric-policy record)
    workers  - joblib-backed parallel map with deterministic result order
    cache    - joblib.Memory result cache (pass-through unless CACHE_DIR set)

Worker processes import their own copy of this module, so `workers.map` ships
the current policy with every job and restores it before the work runs.
"""

import functools
import logging

from joblib import Memory, Parallel, delayed

from config import Config

logger = logging.getLogger(__name__)


class NumericPolicy:
    def __init__(self, config=Config):
        self.init_app(config)

    def init_app(self, config):
        self.qubit_cap = int(getattr(config, 'QUBIT_CAP', Config.QUBIT_CAP))
        self.tomography_cap = int(getattr(config, 'TOMOGRAPHY_QUBIT_CAP', Config.TOMOGRAPHY_QUBIT_CAP))
        self.psd_tol = float(getattr(config, 'PSD_TOL', Config.PSD_TOL))
        self.trace_tol = float(getattr(config, 'TRACE_TOL', Config.TRACE_TOL))
        self.hermitian_tol = float(getattr(config, 'HERMITIAN_TOL', Config.HERMITIAN_TOL))
        self.imag_tol = float(getattr(config, 'IMAG_TOL', Config.IMAG_TOL))
        self.negligible_prob = float(getattr(config, 'NEGLIGIBLE_PROB', Config.NEGLIGIBLE_PROB))

    def as_dict(self):
        return {
            'qubit_cap': self.qubit_cap,
            'tomography_cap': self.tomography_cap,
            'psd_tol': self.psd_tol,
            'trace_tol': self.trace_tol,
            'hermitian_tol': self.hermitian_tol,
            'imag_tol': self.imag_tol,
            'negligible_prob': self.negligible_prob,
        }

    def restore(self, values):
        for name, value in values.items():
            setattr(self, name, value)


def _run_with_policy(policy, shot_chunk, func, item):
    numeric.restore(policy)
    workers.shot_chunk = shot_chunk
    return func(item)


class Workers:
    """Parallel map over independent work items; results come back in item order."""

    def __init__(self, config=Config):
        self.init_app(config)

    def init_app(self, config):
        self.n_jobs = int(getattr(config, 'N_JOBS', Config.N_JOBS))
        self.shot_chunk = int(getattr(config, 'SHOT_CHUNK', Config.SHOT_CHUNK))

    def map(self, func, items):
        items = list(items)
        if self.n_jobs == 1 or len(items) < 2:
            return [func(item) for item in items]
        logger.debug("Dispatching %d work items to %d jobs", len(items), self.n_jobs)
        policy = numeric.as_dict()
        return Parallel(n_jobs=self.n_jobs)(
            delayed(_run_with_policy)(policy, self.shot_chunk, func, item) for item in items)


class ResultCache:
    def __init__(self, config=Config):
        self.init_app(config)

    def init_app(self, config):
        self.location = getattr(config, 'CACHE_DIR', Config.CACHE_DIR)
        self._memory = Memory(location=self.location, verbose=0)

    def cached(self, func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            return self._memory.cache(func)(*args, **kwargs)
        return wrapper


numeric = NumericPolicy()
workers = Workers()
cache = ResultCache()


def init_extensions(config=Config):
    numeric.init_app(config)
    workers.init_app(config)
    cache.init_app(config)
