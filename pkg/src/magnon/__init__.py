"""One-excitation dynamics of a kicked Heisenberg chain."""
from .chain import (
    ChainConfig,
    ExcitationState,
    InvariantAlarm,
    Propagator,
    apply_step,
    bessel_kernel,
    build_single_excitation_hamiltonian,
    free_propagator,
    kick_operator,
)
from .control import (
    ExperimentTimeline,
    KickSchedule,
    StoppingParams,
    naive_schedule,
    reversed_J_step,
    run_schedule,
    run_timeline,
    sequence_operator,
    table1_schedule,
)
from .encoder import EncodingSubspace, max_diffusion_state, min_diffusion_state
from .analysis import fidelity, packet_summary, probability_profile

__version__ = "0.1.0"
