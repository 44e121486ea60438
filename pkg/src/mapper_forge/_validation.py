"""Input validation helpers shared by the estimators and functional API."""

import os

import numpy as np
from sklearn.utils import check_array

from .exceptions import ConfigurationError

THREADS_ENV = "MAPPER_FORGE_THREADS"


def check_points(X, *, allow_empty=False, name="X"):
    """Return ``X`` as a 2-D float64 array.

    Accepts anything array-like, including :class:`~mapper_forge.datasets.Dataset`.
    """
    if hasattr(X, "points") and not isinstance(X, np.ndarray):
        X = X.points
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        if X.size == 0 and allow_empty:
            return X.reshape(0, 1)
        X = X.reshape(-1, 1)
    if X.ndim == 2 and X.shape[0] == 0:
        if not allow_empty:
            raise ConfigurationError(f"{name} must contain at least one point")
        return X
    return check_array(X, dtype=np.float64, input_name=name)


def check_positive_int(value, name, minimum=1):
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
        raise ConfigurationError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ConfigurationError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_overlap(overlap_frac):
    g = float(overlap_frac)
    if not 0.0 <= g < 1.0:
        raise ConfigurationError(f"overlap_frac must lie in [0, 1), got {overlap_frac}")
    return g


def resolve_threads(n_jobs=None):
    """Worker count: explicit ``n_jobs``, else ``MAPPER_FORGE_THREADS``, else 1.

    ``0`` means one worker per CPU.
    """
    if n_jobs is None:
        raw = os.environ.get(THREADS_ENV, "").strip()
        if not raw:
            return 1
        try:
            n_jobs = int(raw)
        except ValueError:
            raise ConfigurationError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    if n_jobs < 0:
        raise ConfigurationError(f"thread count must be >= 0, got {n_jobs}")
    if n_jobs == 0:
        return os.cpu_count() or 1
    return n_jobs
