"""wigring: phase-space laboratory for entangled oscillator pairs.

Exact Wigner/transition functions of two-oscillator entangled eigenstates,
their crude semiclassical ring expressions, chord-based propagation under
cubic/quartic interactions of one subsystem, and convergence-audited scans
of the reduced-marginal difference delta W^1.
"""

from .chords import (
    Chord,
    FlowResult,
    InteractionSpec,
    ShiftPair,
    chord_from_phase,
    diagonal_phase_shift,
    evolved_branch_shift,
    evolved_diagonal_shift,
    flow_tips,
    phase_branch,
    phase_shift_cubic,
    phase_shift_pair,
    phase_shift_quartic,
)
from .errors import (
    ConvergenceError,
    DomainError,
    RangeError,
    TruncatedFlowError,
    TruncationError,
)
from .fock import (
    DiagonalCase,
    FockPair,
    TruncatedState,
    entangled_wigner_exact,
    exact_moyal,
    exact_wigner,
    hermite_psi,
    moyal_closed,
    position_power_matrix,
    wigner_closed,
    wigner_of_density,
)
from .grids import (
    CartesianGrid,
    PhaseSpaceField,
    PolarGrid,
    cart_to_polar,
    polar_to_cart,
    read_field,
    write_field,
)
from .propagate import (
    InteractionFlow,
    OscillatorFlow,
    ReducedField,
    SemiclassicalEvolution,
    default_x1_grid,
    delta_w1,
    liouville_evolve,
    quantum_evolve,
    reduced_wigner_exact,
    semiclassical_evolve,
)
from .quadrature import (
    QuadSpec,
    RingIntegralResult,
    StationaryReport,
    airy_ai,
    airy_reference,
    polar_integral,
    ring_integral,
    stationary_points,
    toy_integral,
)
from .semiclassic import (
    IntersectionResult,
    PhaseAmplitude,
    RingGeometry,
    amplitude,
    amplitude_D,
    caustic_layers,
    caustic_radii,
    circle_intersections,
    cross_term,
    phase_cosine,
    ring_phase_amplitude,
    semi_moyal,
    semi_wigner,
    symplectic_area_phi,
)
from .sweep import SweepConfig, convergence_report, emit, load_records, run_sweep

__version__ = "0.1.0"
