"""rydchirp: chirped two-photon control of Rydberg-atom chains.

Simulates a chain of three-level (g, e, r) atoms driven by two overlapping
chirped Gaussian pulses in the field-interaction frame, including full
Schrodinger propagation over the 3^N collective basis, an effective
two-level reduction of the ground/all-Rydberg passage, GHZ/W fidelity
observables, and 2D parameter sweeps.
"""
from ._kernels import KERNEL_BACKEND
from .analysis import (
    DressedAngles,
    EffectiveCalibration,
    EffectiveTwoLevel,
    SpectrumTrace,
    calibrate_effective_prefactor,
    crossing_times,
    degeneracy_classes,
    dressed_angles,
    effective_rabi,
    evolve_effective,
    resonance_time,
    spectrum_trace,
)
from .errors import (
    BasisSizeError,
    ConfigError,
    EntanglementUndefinedError,
    GeometryError,
    IntegrationDivergedError,
    NoCrossingError,
    ProtocolError,
    RydchirpError,
    SingularityError,
    ToleranceError,
)
from .model import (
    BASIS_CAP,
    BasisState,
    CollectiveBasis,
    HamiltonianFrame,
    LatticeSpec,
    PulseSpec,
    SystemSpec,
    bare_energy,
    build_hamiltonian,
    effective_detunings,
    enumerate_basis,
    hamiltonian_terms,
    interaction_shift,
    lattice_interactions,
    rabi_envelope,
)
from .observe import (
    TargetState,
    ghz_fidelity,
    population,
    population_difference,
    w_fidelity,
    w_population_sum,
)
from .propagate import (
    IntegratorConfig,
    StateVector,
    Trajectory,
    converge,
    evolve,
    ground_state,
    oracle_evolve,
)
from .sweep import (
    SweepGrid,
    SweepResult,
    equal_population_contour,
    equal_population_mask,
    run_sweep,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
