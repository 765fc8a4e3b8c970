"""Two-mode squeezing gates and entanglement from the relativistic motion of a cavity."""

__version__ = "0.1.0"

from .bogoliubov import (  # noqa: E402
    BogoliubovBlock,
    FirstOrderCoeffs,
    compose,
    first_order_coefficients,
    free_evolution_block,
    invert,
    junction_coefficients_oracle,
    mean_excitations,
)
from .modes import CavityGeometry, SpacetimePoint  # noqa: E402
from .symplectic import (  # noqa: E402
    CovarianceMatrix,
    EntanglementReport,
    SymplecticOp,
    log_negativity,
    partial_transpose,
    squeezer_decompose,
    symplectic_eigenvalues,
)
from .trajectories import (  # noqa: E402
    SampleScenario,
    Trajectory,
    analyze,
    build_segment_symplectic,
    burn,
    coast,
    resonance_times,
)

__all__ = [
    "BogoliubovBlock", "FirstOrderCoeffs", "compose", "first_order_coefficients", "free_evolution_block",
    "invert", "junction_coefficients_oracle", "mean_excitations", "CavityGeometry", "SpacetimePoint",
    "CovarianceMatrix", "EntanglementReport", "SymplecticOp", "log_negativity", "partial_transpose",
    "squeezer_decompose", "symplectic_eigenvalues", "SampleScenario", "Trajectory", "analyze",
    "build_segment_symplectic", "burn", "coast", "resonance_times",
]
