"""Backend selection for the numeric kernels.

Set ``SLAMRANK_DISABLE_NUMBA=1`` (or numba's own ``NUMBA_DISABLE_JIT=1``)
before importing slamrank to force the vectorized numpy path.
"""

import os

_TRUTHY = {"1", "true", "yes", "on"}


def _env_flag(name):
    return os.environ.get(name, "").strip().lower() in _TRUTHY


try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba ships with the test image
    HAVE_NUMBA = False

NUMBA_ENABLED = (
    HAVE_NUMBA
    and not _env_flag("SLAMRANK_DISABLE_NUMBA")
    and not _env_flag("NUMBA_DISABLE_JIT")
)

BACKEND = "numba" if NUMBA_ENABLED else "numpy"
