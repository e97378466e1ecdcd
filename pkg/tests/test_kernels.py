import importlib
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geoform import _kernels_py, kernels

compiled = pytest.importorskip("geoform._kernels")
DOMAIN = (0.0, 178.0, 0.0, 178.0)


def test_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_env_forces_python(monkeypatch):
    monkeypatch.setenv("GEOFORM_PURE_PYTHON", "1")
    mod = importlib.reload(kernels)
    try:
        assert mod.BACKEND == "python"
        assert mod.paraboloid_shoot is _kernels_py.paraboloid_shoot
    finally:
        monkeypatch.delenv("GEOFORM_PURE_PYTHON")
        importlib.reload(kernels)


@settings(max_examples=100, deadline=None)
@given(st.floats(10, 168), st.floats(10, 168), st.floats(0, 2 * math.pi),
       st.floats(0.0, 20.0), st.floats(0.0, 0.002))
def test_backends_agree(x, y, th, length, a):
    args = (x, y, math.cos(th), math.sin(th), a, 89.0, 89.0)
    assert np.allclose(compiled.paraboloid_rhs(*args), _kernels_py.paraboloid_rhs(*args),
                       rtol=1e-14, atol=1e-16)
    c = compiled.paraboloid_shoot(*args, length, 0.01, *DOMAIN)
    p = _kernels_py.paraboloid_shoot(*args, length, 0.01, *DOMAIN)
    assert np.allclose(c[:4], p[:4], rtol=1e-12, atol=1e-12)
    assert c[4] == p[4]
