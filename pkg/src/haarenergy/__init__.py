"""Statistics of the energy Tr[U rho U^dag H] over Haar-random unitaries U."""

__version__ = "0.1.0"

from .errors import (
    ConditionError,
    HaarEnergyError,
    ResourceCapError,
    SpectrumError,
    UnsupportedRegimeError,
)
from .perm_comb import CycleType, Permutation, partitions
from .spectral import (
    CenteredSpectrum,
    HamiltonianSpectrum,
    StateSpectrum,
    center_hamiltonian,
    center_state,
    energy_range,
    eta,
    fig1_spectra,
    load_spectra,
)
from .weingarten import WeingartenTable, weingarten, weingarten_table
from .moments import (
    MomentReport,
    central_moment,
    gaussian_moment,
    mean,
    moment_report,
    pure_central_moment,
    raw_moment,
    variance,
)
from .bounds import (
    BoundContext,
    f_general,
    f_pure,
    mgf_bound,
    moment_bound_rhs,
    n_star,
    t_window,
    validity_p_max,
)
from .montecarlo import SampleRun, haar_unitary, reproduce_fig1, sample_energy
