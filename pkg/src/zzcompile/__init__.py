"""zzcompile: compile sigma-z-string propagators into NMR pulse programs and
simulate the resulting experiments exactly."""

from .decompose import (
    DecompositionError,
    DecompositionReport,
    FourBodyTarget,
    compile_four_body,
    decompose_chain,
    p1_block,
    p2_block,
    prepare_sequence,
    verify_decomposition,
)
from .molecule import MoleculeError, SpinSystem, hamiltonian, load_molecule, spin_system
from .paulis import (
    PauliString,
    compose,
    equal_up_to_global_phase,
    pauli_coefficients,
    pauli_exponential,
    pauli_matrix,
)
from .refocus import TogglingPattern, refocus_block, toggling_patterns
from .sequence import (
    CouplingBlock,
    FreeDelay,
    Gradient,
    PulseSequence,
    Rotation,
    format_sequence,
    parse_sequence,
    sequence_duration,
    sequence_propagator,
)
from .simulate import (
    DeviationState,
    ErrorModel,
    apply_sequence,
    evolve_four_body,
    expectation,
    gradient_crush,
    prepare_initial_state,
    sweep_four_body,
    thermal_deviation_state,
)
from .spectra import (
    Fid,
    FitResult,
    Spectrum,
    fid_to_spectrum,
    fit_cosine,
    integrate_multiplet,
    synthesize_fid,
)

__version__ = "0.1.0"
