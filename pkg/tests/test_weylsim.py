import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from heisids.weylsim import (
    STUDY_COLUMNS,
    DiscreteHamiltonian,
    GridSpec,
    GridTooSmall,
    SingularShift,
    convergence_study,
    count_below_dense,
    count_eigenvalues_below,
    discretize_magnetic_hamiltonian,
    empirical_ids,
    landau_ids,
)

SMALL = GridSpec(2.0, 12)


@pytest.fixture(scope="module", params=["peierls", "central"])
def small_h(request):
    return discretize_magnetic_hamiltonian(SMALL, request.param)


def test_grid_validation():
    with pytest.raises(GridTooSmall):
        GridSpec(1.0, 4)
    with pytest.raises(ValueError):
        GridSpec(-1.0, 10)
    with pytest.raises(ValueError):
        discretize_magnetic_hamiltonian(SMALL, "upwind")


def test_with_spacing():
    g = GridSpec.with_spacing(6.0, 0.1)
    assert g.h == pytest.approx(0.1)
    assert g.volume == 144.0


def test_hermitian(small_h):
    M = small_h.to_dense()
    assert np.array_equal(M, M.conj().T)


@pytest.mark.parametrize("lam", [-0.3, 0.1, 0.55, 1.4, 3.0])
def test_inertia_matches_eigensolve(small_h, lam):
    ev = np.linalg.eigvalsh(small_h.to_dense())
    expected = int(np.count_nonzero(ev < lam))
    assert count_eigenvalues_below(small_h, lam) == expected
    assert count_below_dense(small_h.to_dense(), lam) == expected


@given(st.floats(-1.0, 5.0))
def test_count_monotone_in_lambda(lam):
    H = discretize_magnetic_hamiltonian(SMALL)
    try:
        a = count_eigenvalues_below(H, lam)
        b = count_eigenvalues_below(H, lam + 0.25)
    except SingularShift:
        return
    assert a <= b


def test_singular_shift_block():
    N = 8
    g = GridSpec(1.0, N)
    diag = np.tile(np.arange(N, dtype=float), (N, 1))
    H = DiscreteHamiltonian(g, "peierls", diag, np.zeros((N, N - 1), complex), np.zeros((N - 1, N), complex))
    with pytest.raises(SingularShift) as ei:
        count_eigenvalues_below(H, 3.0)
    assert ei.value.retry == pytest.approx(3.0 + 1e-9)
    assert count_eigenvalues_below(H, ei.value.retry) == 4 * N


def test_singular_shift_dense():
    with pytest.raises(SingularShift):
        count_below_dense(np.diag([0.0, 1.0, 2.0]), 1.0)


def test_gauge_shift_leaves_counts():
    # moving the grid centre adds a constant vector potential: a lattice gauge
    # transformation, so the spectrum is unchanged
    a = discretize_magnetic_hamiltonian(GridSpec(2.5, 14))
    b = discretize_magnetic_hamiltonian(GridSpec(2.5, 14, 1.0, (0.7, -0.3)))
    np.testing.assert_allclose(np.linalg.eigvalsh(a.to_dense()), np.linalg.eigvalsh(b.to_dense()), atol=1e-9)


def test_weak_field_is_dirichlet_laplacian():
    g = GridSpec(3.0, 20, B=1e-12)
    H = discretize_magnetic_hamiltonian(g)
    k = np.arange(1, g.N + 1)
    s = np.sin(np.pi * k / (2 * (g.N + 1))) ** 2 / g.h ** 2
    ev = (s[:, None] + s[None, :]).ravel() - 0.5
    for lam in (0.2, 1.1, 4.0):
        assert count_eigenvalues_below(H, lam) == int(np.count_nonzero(ev < lam))


def test_landau_ids():
    assert landau_ids(-0.1) == 0.0
    assert landau_ids(0.0) == pytest.approx(1 / math.pi)
    assert landau_ids(0.5) == pytest.approx(1 / math.pi)
    assert landau_ids(1.0) == pytest.approx(2 / math.pi)
    assert landau_ids(2.0, B=2.0) == pytest.approx(2 / math.pi)


def test_landau_plateau():
    # counts barely move inside a gap and jump across a level
    H = discretize_magnetic_hamiltonian(GridSpec.with_spacing(6.0, 0.1))
    c = {lam: count_eigenvalues_below(H, lam) for lam in (0.3, 0.7, 0.8, 1.2)}
    gap, level = c[0.7] - c[0.3], c[1.2] - c[0.8]
    assert gap < 0.3 * level


def test_empirical_ids_and_study():
    g = GridSpec.with_spacing(4.0, 0.1)
    r = empirical_ids(g, 0.5)
    assert r.empirical_ids == r.count / g.volume
    rows = convergence_study(1.0, 0.5, [(4.0, g.N)])
    assert tuple(rows[0]) == STUDY_COLUMNS
    assert rows[0]["count"] == r.count
    assert rows[0]["rel_error"] == pytest.approx(abs(r.empirical_ids - 1 / math.pi) * math.pi)
