import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heisids.ids import ids_magnetic, ids_sub
from heisids.kernels import (
    ComplexPoint,
    DimensionMismatch,
    HeisenbergPoint,
    KernelRequest,
    SpectrumPole,
    density_sub_reduced,
    group_inverse,
    group_multiply,
    hermitian_inner,
    laguerre_abel_sum,
    projection_kernel_magnetic,
    reduced_coordinates,
    resolvent_kernel_magnetic,
    resolvent_kernel_sub,
    resolvent_series_magnetic,
    resolvent_sub_reduced,
    resolvent_sub_spectral_reduced,
    spectral_density_kernel_sub,
)
from heisids.green import green_closed_reduced
from heisids.specfun import DomainError, gamma_psi, laguerre

coord = st.floats(-2.0, 2.0)
cplx = st.builds(complex, coord, coord)


def hpoint(n):
    return st.builds(HeisenbergPoint, st.lists(cplx, min_size=n, max_size=n), st.floats(-3.0, 3.0))


class TestPoints:
    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            hermitian_inner([1.0], [1.0, 2.0])

    def test_kernel_request_exclusive(self):
        p = HeisenbergPoint.identity(1)
        with pytest.raises(ValueError):
            KernelRequest(p, p)
        with pytest.raises(ValueError):
            KernelRequest(p, p, zeta=0.5)
        assert KernelRequest(p, p, lam=1.0).n == 1

    @given(hpoint(2), hpoint(2), hpoint(2))
    def test_group_associative(self, p, q, r):
        a = group_multiply(group_multiply(p, q), r)
        b = group_multiply(p, group_multiply(q, r))
        assert a.tau == pytest.approx(b.tau, abs=1e-12)
        np.testing.assert_allclose(a.z.array, b.z.array, atol=1e-14)

    @given(hpoint(2))
    def test_inverse(self, p):
        e = group_multiply(p, group_inverse(p))
        assert e.tau == pytest.approx(0.0, abs=1e-13)

    @given(hpoint(2), hpoint(2), hpoint(2))
    def test_reduced_coordinates_left_invariant(self, g, p, q):
        a = reduced_coordinates(p, q)
        b = reduced_coordinates(group_multiply(g, p), group_multiply(g, q))
        assert b.rho == pytest.approx(a.rho, abs=1e-11)
        assert b.theta == pytest.approx(a.theta, abs=1e-11)

    @given(hpoint(1), hpoint(1))
    def test_theta_is_center_of_quotient(self, p, q):
        d = group_multiply(group_inverse(q), p)
        assert reduced_coordinates(p, q).theta == pytest.approx(d.tau, abs=1e-12)


class TestMagnetic:
    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("lam", [0.0, 0.5, 3.2])
    def test_projection_diagonal_is_ids(self, n, lam):
        z = ComplexPoint([0.3 - 0.1j] * n)
        v = projection_kernel_magnetic(lam, z, z)
        # e^<z,z> is real; the diagonal of E_lam is N(lam) times e^|z|^2
        assert v.real * math.exp(-np.sum(np.abs(z.array) ** 2)) == pytest.approx(ids_magnetic(lam, n).value, rel=1e-13)

    @pytest.mark.parametrize("n", [1, 2, 3])
    @given(m=st.integers(0, 30), rho=st.floats(0.0, 8.0))
    def test_levels_telescope_to_projection(self, n, m, rho):
        # sum_{k<=m} L_k^(n-1)(rho) = L_m^(n)(rho): level kernels add up to E_lam
        total = math.fsum(laguerre(k, n - 1, rho) for k in range(m + 1))
        ref = laguerre(m, n, rho)
        assert abs(total - ref) <= 1e-12 * max(1.0, abs(ref), max(abs(laguerre(k, n - 1, rho)) for k in range(m + 1)))

    def test_projection_below_spectrum(self):
        assert projection_kernel_magnetic(-0.1, [0.0], [1.0]) == 0

    @given(st.lists(cplx, min_size=2, max_size=2), st.lists(cplx, min_size=2, max_size=2), st.floats(0, 6))
    def test_projection_hermitian(self, z, w, lam):
        a = projection_kernel_magnetic(lam, z, w)
        b = projection_kernel_magnetic(lam, w, z)
        assert a == pytest.approx(b.conjugate(), rel=1e-12, abs=1e-14)

    @pytest.mark.parametrize("zeta", [-0.3, -1.7, -0.5 + 0.8j])
    @pytest.mark.parametrize("z,w", [([0.3 + 0.2j], [-0.4j]), ([1.0, 0.5j], [0.2, -0.3])])
    def test_resolvent_two_routes(self, zeta, z, w):
        a = resolvent_kernel_magnetic(zeta, z, w)
        b = resolvent_series_magnetic(zeta, z, w)
        assert b == pytest.approx(a, rel=1e-6)

    def test_resolvent_hermitian_for_real_zeta(self):
        a = resolvent_kernel_magnetic(-0.8, [0.3 + 0.2j], [-0.4j])
        b = resolvent_kernel_magnetic(-0.8, [-0.4j], [0.3 + 0.2j])
        assert a == pytest.approx(b.conjugate(), rel=1e-12)

    @given(st.floats(0.1, 2.0), cplx)
    def test_resolvent_magnetic_translation(self, t, v):
        # with the Gaussian weight e^-(|z|^2 + |w|^2)/2 a common shift only
        # changes a phase
        z, w = np.array([0.4 + 0.1j]), np.array([-0.2 + 0.3j])

        def weighted(z, w):
            k = resolvent_kernel_magnetic(-t, z, w)
            return abs(k) * math.exp(-0.5 * float(np.sum(np.abs(z) ** 2 + np.abs(w) ** 2)))

        assert weighted(z + v, w + v) == pytest.approx(weighted(z, w), rel=1e-9)

    def test_landau_level_is_a_pole(self):
        with pytest.raises(SpectrumPole):
            resolvent_series_magnetic(2.0, [0.0], [1.0])

    def test_resolvent_diagonal_singular(self):
        with pytest.raises(DomainError):
            resolvent_kernel_magnetic(-1.0, [0.5], [0.5])

    @pytest.mark.parametrize("a,c,u", [(1.3, 2, 1.7), (0.6, 1, 0.4), (2.2, 3, 4.0)])
    def test_abel_laguerre_summation(self, a, c, u):
        r = laguerre_abel_sum(a, c, u)
        assert r.value == pytest.approx(gamma_psi(a, c, u), rel=1e-6)
        assert r.converged

    def test_abel_laguerre_beyond_integral_domain(self):
        # Re a < 0 is outside the integral route but still Abel-summable:
        # check the contiguity relation G(a,c) - G(a+1,c) = G(a,c-1) there
        a, u = -0.4, 1.2
        lhs = laguerre_abel_sum(a, 2, u).value - laguerre_abel_sum(a + 1, 2, u).value
        rhs = laguerre_abel_sum(a, 1, u).value
        assert lhs == pytest.approx(rhs, rel=1e-6)


class TestDensity:
    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_diagonal_is_ids(self, n):
        r = density_sub_reduced(1.7, n, 0.0, 0.0)
        assert r.value == pytest.approx(ids_sub(1.7, n).value, rel=1e-9)

    @given(hpoint(2), st.lists(cplx, min_size=2, max_size=2))
    def test_diagonal_constant(self, p, _):
        v = spectral_density_kernel_sub(1.3, p, p)
        assert v == pytest.approx(ids_sub(1.3, 2).value, rel=1e-9)

    @given(hpoint(1), hpoint(1), hpoint(1))
    def test_left_invariant(self, g, p, q):
        a = spectral_density_kernel_sub(0.9, p, q)
        b = spectral_density_kernel_sub(0.9, group_multiply(g, p), group_multiply(g, q))
        assert b == pytest.approx(a, rel=1e-8, abs=1e-12)

    @given(st.floats(0.2, 3.0), st.floats(0.05, 2.0), st.floats(-2.0, 2.0), st.floats(0.5, 2.0))
    def test_dilation(self, lam, rho, theta, r):
        a = density_sub_reduced(lam, 1, r * r * rho, r * r * theta).value
        b = density_sub_reduced(lam * r * r, 1, rho, theta).value
        assert a == pytest.approx(b / r ** 2, rel=1e-8, abs=1e-12)

    def test_zero_lambda(self):
        assert density_sub_reduced(0.0, 2, 0.3, 0.1).value == 0.0

    def test_nondecreasing_on_diagonal(self):
        vals = [density_sub_reduced(lam, 2, 0.0, 0.0).value for lam in (0.5, 1.0, 1.5)]
        assert vals == sorted(vals)


class TestSubResolvent:
    def test_real_for_real_zeta(self):
        r = resolvent_sub_reduced(-1.0, 1, 1.0, 0.4)
        assert isinstance(r.value, float) and r.value < 0

    def test_conjugation(self):
        a = resolvent_sub_reduced(-1.0 + 0.5j, 2, 0.5, 0.3).value
        b = resolvent_sub_reduced(-1.0 - 0.5j, 2, 0.5, 0.3).value
        assert a == pytest.approx(b.conjugate(), rel=1e-9)

    @given(st.floats(0.5, 2.0))
    def test_dilation(self, r):
        a = resolvent_sub_reduced(-1.0, 2, r * r * 0.5, r * r * 0.3).value
        b = resolvent_sub_reduced(-r * r, 2, 0.5, 0.3).value
        assert a == pytest.approx(b / r ** 4, rel=1e-8)

    @pytest.mark.parametrize("n,rho,theta", [(1, 0.5, 0.25), (2, 1.0, 1.0), (3, 2.0, 1.0)])
    def test_zero_limit_is_minus_green(self, n, rho, theta):
        r = resolvent_sub_reduced(-1e-9, n, rho, theta).value
        assert -r == pytest.approx(green_closed_reduced(n, rho, theta), rel=1e-6)

    def test_left_invariant(self):
        p = HeisenbergPoint([0.3 + 0.1j], 0.2)
        q = HeisenbergPoint([-0.5j], -0.4)
        g = HeisenbergPoint([1.0 - 0.3j], 0.7)
        a = resolvent_kernel_sub(-1.0, p, q)
        b = resolvent_kernel_sub(-1.0, group_multiply(g, p), group_multiply(g, q))
        assert b == pytest.approx(a, rel=1e-9)

    def test_rejects_spectrum(self):
        with pytest.raises(DomainError):
            resolvent_sub_reduced(0.5, 1, 1.0, 0.0)
        with pytest.raises(DomainError):
            resolvent_sub_reduced(-1.0, 1, 0.0, 0.0)

    @pytest.mark.slow
    @pytest.mark.parametrize("zeta,n,rho,theta", [(-1.0, 1, 1.0, 0.0), (-2.0, 2, 0.5, 0.3)])
    def test_spectral_route_is_half_scaled(self, zeta, n, rho, theta):
        # the term-wise spectral integral reproduces (1/2) R(zeta/2), not R(zeta);
        # see the acceptance suite for the unscaled comparison
        spec = resolvent_sub_spectral_reduced(zeta, n, rho, theta).value
        direct = resolvent_sub_reduced(zeta / 2.0, n, rho, theta).value
        assert spec == pytest.approx(0.5 * direct, rel=1e-3)
