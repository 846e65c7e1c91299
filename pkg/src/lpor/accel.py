"""Optional numba acceleration for the numeric kernels.

The hot inner loops in :mod:`lpor.kernels` are plain Python functions over
numpy arrays.  When numba is available they are compiled with ``@njit``;
otherwise (or when disabled) the same functions run interpreted, so both
paths compute bit-identical results.

Selection is controlled by the ``LPOR_NUMBA`` environment variable, read
once at import time:

    unset / "auto"    use numba if it imports cleanly (default)
    "0", "off"        never use numba
    "1", "on"         require numba; raise if it is missing
"""

import os

_FLAG = os.environ.get("LPOR_NUMBA", "auto").strip().lower()

if _FLAG in ("0", "off", "false", "no"):
    NUMBA_ENABLED = False
elif _FLAG in ("1", "on", "true", "yes", "require"):
    import numba  # noqa: F401 -- fail loudly if requested but absent

    NUMBA_ENABLED = True
elif _FLAG in ("", "auto"):
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:
        NUMBA_ENABLED = False
else:
    raise ValueError(f"LPOR_NUMBA={_FLAG!r}: expected auto, 0/off or 1/on")


def maybe_njit(func):
    """Compile ``func`` with numba when enabled, else return it unchanged.

    fastmath stays off: reassociation would break the bit-for-bit match
    between the compiled and interpreted paths.
    """
    if NUMBA_ENABLED:
        from numba import njit

        return njit(cache=True)(func)
    return func
