import math

import pytest
from hypothesis import given, strategies as st

from heisids.ids import (
    Route,
    dos_magnetic_jumps,
    gamma_coefficient,
    gamma_partial_sum,
    gamma_tail_bound,
    ids_magnetic,
    ids_sub,
    ids_sub_via_kernel,
)
from heisids.numerics import NonConvergence, SeriesSpec

# mpmath nsum of the defining series at 30 digits
GAMMA_REF = {
    1: math.sqrt(math.pi) / 8,
    2: 0.011753949657244923,
    3: 0.0004981661648391702,
    4: 1.6971976997007406e-5,
}


class TestMagnetic:
    @pytest.mark.parametrize("lam", [0.0, 0.5, 0.999, 1.0, 7.3, 20.5])
    def test_n1_level_count(self, lam):
        assert ids_magnetic(lam, 1).value == pytest.approx((1 + math.floor(lam)) / math.pi, rel=1e-15)

    @given(st.integers(1, 5), st.integers(0, 20), st.floats(0.0, 0.999))
    def test_factorial_form(self, n, m, frac):
        expected = math.factorial(m + n) / (math.factorial(m) * math.factorial(n)) / math.pi ** n
        assert ids_magnetic(m + frac, n).value == expected

    def test_below_spectrum(self):
        assert ids_magnetic(-1e-12, 3).value == 0.0

    @given(st.integers(1, 4), st.floats(-1.0, 30.0), st.floats(0.0, 5.0))
    def test_monotone(self, n, lam, d):
        assert ids_magnetic(lam, n).value <= ids_magnetic(lam + d, n).value

    @given(st.integers(1, 4), st.floats(0.0, 25.0))
    def test_jumps_add_up(self, n, lam):
        total = math.fsum(j.weight for j in dos_magnetic_jumps(lam, n))
        assert total == pytest.approx(ids_magnetic(lam, n).value, rel=1e-13)

    def test_huge_level_uses_logs(self):
        v = ids_magnetic(3000.5, 300).value
        ref = math.exp(math.lgamma(3301) - math.lgamma(3001) - math.lgamma(301) - 300 * math.log(math.pi))
        assert v == pytest.approx(ref, rel=1e-9)

    def test_bad_dimension(self):
        with pytest.raises(ValueError):
            ids_magnetic(1.0, 0)


class TestSubLaplacian:
    @pytest.mark.parametrize("n", sorted(GAMMA_REF))
    def test_gamma_reference(self, n):
        g = gamma_coefficient(n)
        assert g.value == pytest.approx(GAMMA_REF[n], rel=1e-9)
        assert g.value > 0

    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("J", [10, 100, 1000, 10000])
    def test_tail_bound_is_honest(self, n, J):
        remainder = GAMMA_REF[n] - gamma_partial_sum(n, J)
        assert 0 < remainder <= gamma_tail_bound(n, J)

    @given(st.integers(1, 4), st.floats(0.01, 10.0), st.floats(0.2, 3.0))
    def test_homogeneity(self, n, lam, r):
        assert ids_sub(r * lam, n).value == pytest.approx(r ** n * ids_sub(lam, n).value, rel=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_two_routes(self, n):
        a = ids_sub(2.3, n)
        b = ids_sub_via_kernel(2.3, n)
        assert b.route is Route.KERNEL_DIAGONAL
        assert b.value == pytest.approx(a.value, rel=1e-8)

    def test_nonpositive_lambda(self):
        assert ids_sub(0.0, 2).value == 0.0
        assert ids_sub_via_kernel(-1.0, 2).value == 0.0

    def test_unreachable_tolerance(self):
        with pytest.raises(NonConvergence) as ei:
            gamma_coefficient(2, SeriesSpec(tol=1e-30))
        assert ei.value.result.converged is False
