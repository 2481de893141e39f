"""Open-system dynamics of spin-1/2 ensembles in the block-diagonal
total-angular-momentum representation."""

from .blockspace import BlockSpace, block_index, build_block_space, multiplicity_int
from .channels import (
    LiouvillianSpec,
    apply_collective_lindblad,
    apply_liouvillian,
    apply_local_symmetric_lindblad,
    collective_depolarizing_channel,
    polarizing_channel,
    symmetric_depolarizing_channel,
)
from .dynamics import (
    DiagonalEvolution,
    IntegratorConfig,
    SparseLiouvillian,
    assemble_liouvillian,
    evolve,
    evolve_until_fraction,
    steady_state,
)
from .fitting import FitResult, extrapolate, fit_exponent
from .observables import (
    ObservableRecord,
    block_traces,
    expectation,
    log10_purity,
    log10_symmetric_overlap,
    polarization_fraction,
    record_observables,
    squeezing_parameter,
    symmetric_overlap,
    uncertainty,
    variance,
)
from .operators import (
    CollectiveOperator,
    SingleSpinOperator,
    coefficient,
    collective_from_single,
    collective_generator,
    counter_twisting_hamiltonian,
    spin_minus,
    spin_plus,
    spin_x,
    spin_y,
    spin_z,
)
from .scenarios import ScenarioConfig, config_from_file, run_scenario
from .states import (
    CollectiveState,
    coherent_state,
    mixed_collective_state,
    mixed_symmetric_state,
    random_state,
    rotate,
    state_from_vector,
    validate,
)

__version__ = "0.1.0"
