import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from esisav import _kernels_py, kernels

compiled = pytest.importorskip("esisav._kernels")

shape = st.tuples(st.integers(1, 6), st.integers(1, 6))
real = st.floats(-5, 5)


@given(shape.flatmap(lambda s: arrays(np.float64, s, elements=real)), real, real)
def test_cubic_derivative(phi, q, a):
    np.testing.assert_allclose(compiled.cubic_derivative(phi, q, a), _kernels_py.cubic_derivative(phi, q, a),
                               rtol=1e-14, atol=1e-12)


@given(shape.flatmap(lambda s: arrays(np.float64, s, elements=real)), real, real, real)
def test_quartic_sum(phi, q, a, c):
    assert compiled.quartic_sum(phi, q, a, c) == pytest.approx(_kernels_py.quartic_sum(phi, q, a, c),
                                                               rel=1e-12, abs=1e-10)


@given(st.integers(1, 6), st.integers(1, 5), st.data())
def test_spectral_quadratic(nx, nh, data):
    sym = data.draw(arrays(np.float64, (nx, nh), elements=real))
    re = data.draw(arrays(np.float64, (nx, nh), elements=real))
    im = data.draw(arrays(np.float64, (nx, nh), elements=real))
    fh = re + 1j * im
    assert compiled.spectral_quadratic(sym, fh) == pytest.approx(_kernels_py.spectral_quadratic(sym, fh),
                                                                 rel=1e-12, abs=1e-10)


@given(st.integers(1, 6), st.integers(1, 5), st.data(), real)
def test_implicit_update(nx, nh, data, coef):
    draw = lambda: data.draw(arrays(np.float64, (nx, nh), elements=real))  # noqa: E731
    base = draw() + 1j * draw()
    forcing = draw() + 1j * draw()
    gsym = draw()
    denom = 1.0 + np.abs(draw())
    np.testing.assert_allclose(compiled.implicit_update(base, forcing, gsym, coef, denom),
                               _kernels_py.implicit_update(base, forcing, gsym, coef, denom), rtol=1e-13, atol=1e-13)


def test_spectral_quadratic_edge_weights():
    sym = np.ones((2, 3))
    fh = np.ones((2, 3), dtype=complex)
    # interior column counted twice, first and last once
    assert _kernels_py.spectral_quadratic(sym, fh) == 8.0
    assert compiled.spectral_quadratic(sym, fh) == 8.0


def test_backend_switch():
    start = kernels.BACKEND
    try:
        assert kernels.set_backend("python") == start
        assert kernels.BACKEND == "python"
        assert kernels.implicit_update is _kernels_py.implicit_update
        kernels.set_backend("cython")
        assert kernels.cubic_derivative is compiled.cubic_derivative
    finally:
        kernels.set_backend(start)
    with pytest.raises(ValueError):
        kernels.set_backend("fortran")


def test_full_run_identical_across_backends():
    from esisav import make_grid
    from esisav.models import cahn_hilliard
    from esisav.rng import rand_field
    from esisav.steppers import integrate

    g = make_grid(16, 16, 2 * np.pi, 2 * np.pi)
    m = cahn_hilliard(g, 0.1, 1.0)
    phi0 = 0.3 * rand_field(0, g.shape)
    start = kernels.BACKEND
    out = {}
    try:
        for name in ("python", "cython"):
            kernels.set_backend(name)
            out[name] = integrate(m, "bdf3", phi0, 0.05, 20)
    finally:
        kernels.set_backend(start)
    np.testing.assert_allclose(out["python"].phi, out["cython"].phi, atol=1e-13)
    assert out["python"].log_r == pytest.approx(out["cython"].log_r, rel=1e-13)
