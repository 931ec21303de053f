import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zerowindow.quadrature import QuadratureError, gauss_legendre, integrate
from zerowindow.testfunc import (
    TestFunctionH,
    build_phi,
    c_of_h,
    fejer,
    fourier_transform_numeric,
    h_integrals,
    is_monotone_decreasing,
    ratio_phihat0_phi0,
)


def test_gauss_legendre_exact_for_polynomials():
    x, w = gauss_legendre(10)
    assert np.dot(w, x**18) == pytest.approx(2 / 19, rel=1e-14)


def test_integrate_adaptive():
    assert integrate(np.sin, 0, math.pi) == pytest.approx(2.0, abs=1e-13)
    assert integrate(np.sqrt, 0, 1) == pytest.approx(2 / 3, abs=1e-11)
    with pytest.raises(QuadratureError):
        integrate(lambda x: 1 / x, 0, 1, max_evals=2000)


def test_h_integrals_exact():
    i1, i2, i3 = h_integrals(TestFunctionH.polynomial([1]))
    assert (i1, i2, i3) == (Fraction(2, 3), Fraction(8, 15), Fraction(-4, 3))
    assert c_of_h(TestFunctionH.polynomial([1])) == pytest.approx(math.sqrt(2 / 5), abs=1e-15)


def test_profile_validation():
    with pytest.raises(ValueError):
        TestFunctionH.bump(0)
    h = TestFunctionH.polynomial([1, -1])
    assert h(1.0) == 0.0 and h(0.0) == 1.0
    assert h.derivative(0.5, 2) == pytest.approx(float(sum(
        c * k * (k - 1) * 0.5 ** (k - 2) for k, c in enumerate(h.coeffs) if k >= 2)))
    assert TestFunctionH.from_json_dict(h.to_json_dict()) == h


def test_bump_derivatives_by_finite_difference():
    h = TestFunctionH.bump(Fraction(3, 4))
    x, eps = 0.37, 1e-5
    d1 = (h(x + eps) - h(x - eps)) / (2 * eps)
    d2 = (h(x + eps) - 2 * h(x) + h(x - eps)) / eps**2
    assert h.derivative(x, 1) == pytest.approx(d1, rel=1e-8)
    assert h.derivative(x, 2) == pytest.approx(d2, rel=1e-5)
    assert h(1.0) == 0.0


def test_monotone_check_and_warning():
    assert is_monotone_decreasing(TestFunctionH.polynomial([1]))
    bumpy = TestFunctionH.polynomial([1, 4])
    assert not is_monotone_decreasing(bumpy)
    with pytest.warns(UserWarning):
        build_phi(bumpy, 1.0, 1.0)


def test_ratio_limit_and_finite_tau():
    h = TestFunctionH.polynomial([1])
    assert ratio_phihat0_phi0(h, 1, None) == Fraction(6, 5)
    # phihat(0) vanishes exactly at tau_BSD
    tb = 1 / (math.pi * c_of_h(h))
    assert ratio_phihat0_phi0(h, 1.0, tb) == pytest.approx(0.0, abs=1e-14)


def test_phi_pieces_consistent():
    h = TestFunctionH.polynomial([1])
    phi = build_phi(h, 1.0, 0.7)
    # fhat(0) = sigma int_0^1 h
    assert float(phi.fhat(0.0)[0]) == pytest.approx(2 / 3, abs=1e-14)
    assert phi.phi_at(0.0) == pytest.approx(4 / 9, abs=1e-14)
    # g(0) = int f^2 = (sigma/2) * 2 int_0^1 h^2
    assert phi.g(0.0) == pytest.approx(8 / 15, abs=1e-12)
    assert phi.phihat_at(1.2) == 0.0
    assert phi.phihat_at(0.3) == phi.phihat_at(-0.3)


@given(st.floats(0.2, 2.0), st.floats(-3.0, 3.0))
@settings(max_examples=50)
def test_fejer_transform_pair(sigma, y):
    psi = fejer(sigma)
    assert float(psi.psihat_at(y)) >= 0.0
    if abs(y) >= sigma:
        assert float(psi.psihat_at(y)) == 0.0
    assert float(psi.psi_at(0.0)) == 1.0


def test_fejer_derivative():
    psi = fejer(0.6)
    x, eps = np.array([0.3, 1.1, 2.4]), 1e-6
    fd = (psi.psi_at(x + eps) - psi.psi_at(x - eps)) / (2 * eps)
    assert np.allclose(psi.psiprime_at(x), fd, atol=1e-8)
    assert float(psi.psiprime_at(0.0)) == 0.0


def test_fejer_numeric_transform():
    psi = fejer(1.0)
    got = fourier_transform_numeric(psi.psi_at, [0.25, 0.5, 1.5], 400.0, panels_per_unit=4)
    assert np.allclose(got, [0.75, 0.5, 0.0], atol=2e-3)
