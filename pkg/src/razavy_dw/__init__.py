"""Exact spectra, wavepacket dynamics and entanglement for two coupled Razavy double wells."""

__version__ = "0.1.0"

from .coupled import (
    CoupledEigenstate,
    CoupledSpectrum,
    composite_potential,
    coupled_spectrum,
    eigenstate,
    energy_matrix,
    overlap_gamma,
)
from .dynamics import (
    PRESETS,
    GridSpec,
    TimingResult,
    WavepacketSpec,
    correlation,
    density,
    marginal_x1,
    mean_x1,
    timing,
)
from .entanglement import (
    ProductBasisState,
    SpeedBound,
    concurrence,
    concurrence_closed_form,
    speed_bound,
    to_product_basis,
)
from .numerics import QuadratureSpec, ScanSpec, find_first_root, integrate, refine_local_extremum
from .well import (
    PotentialParams,
    SingleWellBasis,
    build_basis,
    eigenfunction,
    potential,
    single_well_levels,
)
