"""Spectral kernels, densities of states and Green functions for the magnetic
Laplacian on C^n and the sub-Laplacian on the Heisenberg group H_n."""

__version__ = "0.1.0"

from .numerics import (  # noqa: E402
    EvalResult,
    NonConvergence,
    NumericsError,
    QuadratureSpec,
    SeriesSpec,
    abel_sum,
    accelerate_alternating,
    integrate_adaptive,
    integrate_semi_infinite_oscillatory,
    richardson_inverse_power,
)
from .specfun import gamma_psi, gamma_psi_bessel, hyp1f1, laguerre, legendre_p, tricomi_psi  # noqa: E402
from .kernels import (  # noqa: E402
    ComplexPoint,
    HeisenbergPoint,
    density_sub_reduced,
    laguerre_abel_sum,
    projection_kernel_magnetic,
    reduced_coordinates,
    resolvent_kernel_magnetic,
    resolvent_kernel_sub,
    resolvent_series_magnetic,
    resolvent_sub_via_spectral,
    spectral_density_kernel_sub,
)
from .ids import dos_magnetic_jumps, gamma_coefficient, ids_magnetic, ids_sub, ids_sub_via_kernel  # noqa: E402
from .green import (  # noqa: E402
    folland_constant,
    folland_constant_appendix,
    folland_integral_representation,
    folland_solution,
    green_kernel_closed,
    green_kernel_integral,
    verify_chain,
)
from .weylsim import (  # noqa: E402
    GridSpec,
    convergence_study,
    count_eigenvalues_below,
    discretize_magnetic_hamiltonian,
    empirical_ids,
    landau_ids,
)
