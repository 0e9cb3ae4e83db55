"""Numerical laboratory for the decoherent arrow of time.

Submodules
----------
hilbert
    States, density matrices, partial traces, Haar sampling.
entropy
    Von Neumann, factorization-relative entanglement and quantum Boltzmann entropy.
dynamics
    Closed-system evolution and the pure-dephasing spin bath.
caldeira_leggett
    Position-grid integrator for the Caldeira-Leggett master equation.
factorizations
    Factorization classes, entropy extremization and past-hypothesis verdicts.
experiments
    Seeded experiment runner, typicality study and CSV/JSON export.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConfigError,
    EntArrowError,
    FitError,
    IntegrationError,
    IoError,
    NoMacrostateError,
    PositivityError,
    UsageError,
)
from .hilbert import (  # noqa: E402
    DensityMatrix,
    HilbertSpace,
    PhysicalConstants,
    PureState,
    haar_sample,
    ket,
    partial_trace,
    purity,
    tensor,
)
from .entropy import (  # noqa: E402
    MacrostateDecomposition,
    entanglement_entropy,
    macrostate_of,
    quantum_boltzmann,
    von_neumann,
)
from .factorizations import (  # noqa: E402
    EphSpec,
    Factorization,
    FullUnitary,
    QubitPermutations,
    SingleFactorization,
    SpatialBlocks,
    apply,
    check_eph,
    enumerate_factorizations,
    extremize_entropy,
)
