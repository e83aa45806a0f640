"""coldbell: impurity qubits in a Bose-Hubbard ring.

Evolve impurity qubits coupled to an ultracold lattice gas (exactly, or in the
quasiparticle approximation, or in a large-lattice continuum limit) and
quantify the Bell nonlocality, noise robustness and non-Markovianity of the
reduced qubit state.
"""

from .analysis import (
    BlpResult,
    CellResult,
    RateSignReport,
    SweepResult,
    SweepSpec,
    blp_measure,
    dephasing_rate_sign,
    depolarize,
    load_sweep_csv,
    pstar,
    sweep,
)
from .bell import (
    BellOptimum,
    MeasurementSettings,
    chsh_value,
    correlator,
    gtnl_value,
    horodecki,
    optimize_bell,
    wwzb_value,
)
from .bogoliubov import (
    c_coeff,
    effective_hamiltonian,
    gamma_finite,
    glauber_overlap,
    phi,
    reduced_state_bogoliubov,
)
from .continuum import (
    ContinuumConfig,
    c_coeff_continuum,
    gamma0,
    gamma_continuum,
    gamma_cross,
    gamma_pm,
    reduced_state_two_impurity_continuum,
)
from .exact import (
    FockBasis,
    build_bh_hamiltonian,
    build_fock_basis,
    conditional_hamiltonian,
    exact_reduced_state,
    exact_reduced_states,
    ground_state,
    propagate,
)
from .model import (
    BogoliubovMode,
    ConfigError,
    ImpurityConfig,
    LatticeConfig,
    Model,
    bogoliubov_modes,
    validate_config,
)

__version__ = "0.1.0"
