import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from sho_rake.closed_form import BranchProfile, JointDensity
from sho_rake.errors import QuadratureError
from sho_rake.quadrature import QuadratureSettings, Region, quadrature_2d


def test_triangle_area():
    val, err = quadrature_2d(lambda y, w: np.ones_like(y), Region(1.0, 1.0, -1.0))
    assert val == pytest.approx(0.5, abs=1e-12)


def test_exponential_on_triangle():
    val, err = quadrature_2d(lambda y, w: np.exp(-y - w), Region(1.0, 1.0, -1.0))
    assert val == pytest.approx(1 - 2 * np.exp(-1), abs=1e-10)
    assert err <= 1e-9


def test_vector_valued_integrand():
    def f(y, w):
        return np.stack([np.ones_like(y), y, w * w], axis=1)

    val, err = quadrature_2d(f, Region(2.0, 1.0, 0.0))
    assert np.allclose(val, [2.0, 2.0, 2 / 3], rtol=1e-12)


@given(st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(-1.0, 1.0), st.floats(-2.0, 0.5), st.floats(-2.0, 0.5))
def test_polynomial_exponential_matches_scipy(ymax, g0, g1, a, b):
    if g0 + g1 * ymax < 0:
        return
    reg = Region(ymax, g0, g1)
    val, _ = quadrature_2d(lambda y, w: np.exp(a * y + b * w) * (1 + y * w), reg, QuadratureSettings(1e-10, 1e-13))
    ref = integrate.dblquad(
        lambda w, y: np.exp(a * y + b * w) * (1 + y * w), 0, ymax, 0, lambda y: g0 + g1 * y, epsabs=1e-13, epsrel=1e-12
    )[0]
    assert val == pytest.approx(ref, rel=1e-9, abs=1e-12)


def test_discontinuous_support_edge_converges():
    # joint density is zero above w = 2y (N_c=3, N_s=2): refinement must cope
    # with or without the kink hint
    J = JointDensity(BranchProfile((2.0, 1.3, 0.8, 0.4, 0.3)), 3, 2)
    ref = integrate.dblquad(lambda w, y: float(J.pdf(y, w)), 0, 2.0, 0, lambda y: min(2 * y, 2.0 - y), epsabs=1e-12)[0]
    for kinks in ((), J.kink_slopes()):
        val, err = quadrature_2d(lambda y, w: J.pdf(y, w), Region(2.0, 2.0, -1.0), kink_slopes=kinks)
        assert err <= 1e-6
        assert val == pytest.approx(ref, abs=2e-8)


def test_nonconvergence_carries_estimate():
    with pytest.raises(QuadratureError) as exc:
        quadrature_2d(lambda y, w: np.sqrt(np.abs(y - 0.3137)), Region(1.0, 1.0), QuadratureSettings(1e-15, 1e-18, 2))
    assert exc.value.value == pytest.approx(
        integrate.quad(lambda y: np.sqrt(abs(y - 0.3137)), 0, 1, points=[0.3137])[0], rel=1e-3
    )
    assert exc.value.error > 0


def test_empty_region_and_settings_validation():
    val, err = quadrature_2d(lambda y, w: np.ones_like(y), Region(0.0, 0.0, 0.0))
    assert val == 0.0
    with pytest.raises(ValueError):
        QuadratureSettings(rel_tol=0.0)
    with pytest.raises(ValueError):
        Region(1.0, 0.5, -1.0)
