"""Trapped-ion simulation of two- and three-generation neutrino oscillations."""

from .dirac1d import DiracParams, MomentumGrid, dirac_h, energy_spinor, gaussian_packet
from .encoding import (
    HamiltonianPair,
    NeutrinoEncoding,
    SchemeAParams,
    SchemeBParams,
    TwoGenParams,
    build_scheme_a,
    build_scheme_b,
    build_two_generation,
    mass_spectrum_of,
    params_for_masses,
)
from .engine import FockConfig, build_fock_h, evolve_fock, evolve_sector, packet_evolve
from .scenario import (
    ExperimentConfig,
    GaussianMomentum,
    MomentumEigenstate,
    OscillationRecord,
    compare_to_theory,
    measure_flavor,
    prepare_flavor_state,
    run,
)
from .theory import (
    MassSpectrum,
    MixingMatrix,
    dispersion,
    flavor_amplitudes,
    probability_exact,
    probability_ultra,
    rotation2,
    tribimaximal,
)

__version__ = "0.1.0"
