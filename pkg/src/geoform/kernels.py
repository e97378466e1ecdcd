"""Backend selection for the geodesic kernels.

The compiled extension is used when it was built; set ``GEOFORM_PURE_PYTHON=1``
to force the pure-Python fallback.
"""
import os

if os.environ.get("GEOFORM_PURE_PYTHON", "") not in ("", "0"):
    from ._kernels_py import paraboloid_rhs, paraboloid_shoot, paraboloid_step

    BACKEND = "python"
else:
    try:
        from ._kernels import paraboloid_rhs, paraboloid_shoot, paraboloid_step

        BACKEND = "cython"
    except ImportError:  # extension not built
        from ._kernels_py import paraboloid_rhs, paraboloid_shoot, paraboloid_step

        BACKEND = "python"

__all__ = ["BACKEND", "paraboloid_rhs", "paraboloid_shoot", "paraboloid_step"]
