"""Certifying outcome randomness of a targeted measurement setting.

One party holds a programmable measurement device, shares a bipartite state
with a remote receiver, and wants device-independent-style guarantees (on the
receiver's marginal alone) that the outcome of one targeted setting cannot be
predicted. The package provides the conic programs that quantify this:
guessing probabilities, star-compatibility tests, incompatibility weights,
and the see-saw search for the states an adversary would prepare.
"""

from .certify import (
    DualCertificate,
    EveAssemblageStrategy,
    EvePmdStrategy,
    IncompatibilityRay,
    WeightDecomposition,
    assemblage_guessing_dual,
    guessing_probability_assemblage,
    guessing_probability_pmd,
    is_star_compatible,
    is_star_unsteerable,
    lift_pmd_strategy,
    pmd_guessing_dual,
    star_incompatibility_weight,
    weight_dual,
    weight_lower_bound,
    witness_from_unsteerable,
)
from .experiments import (
    SweepRow,
    ThresholdReport,
    bisect_compatibility_threshold,
    eta_grid,
    gnuplot_script,
    read_sweep_csv,
    run_eta_sweep,
    write_sweep_csv,
)
from .instances import InstanceError, SharedState, load_instance, save_instance
from .linalg import SchmidtDecomposition, maximally_entangled, schmidt_decompose
from .objects import (
    Assemblage,
    Pmd,
    Povm,
    StarWitness,
    UnsteerableDecomposition,
    assemblage_from,
    pauli_pmd,
    random_pure_state,
    require_valid,
    validate,
)
from .sdp import ClarabelSolver, SolverError
from .seesaw import SeesawConfig, SeesawResult, seesaw_minimize, state_step, sweep_warm_start

__version__ = "0.1.0"

__all__ = [
    "Assemblage",
    "ClarabelSolver",
    "DualCertificate",
    "EveAssemblageStrategy",
    "EvePmdStrategy",
    "IncompatibilityRay",
    "InstanceError",
    "Pmd",
    "Povm",
    "SchmidtDecomposition",
    "SeesawConfig",
    "SeesawResult",
    "SharedState",
    "SolverError",
    "StarWitness",
    "SweepRow",
    "ThresholdReport",
    "UnsteerableDecomposition",
    "WeightDecomposition",
    "assemblage_from",
    "assemblage_guessing_dual",
    "bisect_compatibility_threshold",
    "eta_grid",
    "gnuplot_script",
    "guessing_probability_assemblage",
    "guessing_probability_pmd",
    "is_star_compatible",
    "is_star_unsteerable",
    "lift_pmd_strategy",
    "load_instance",
    "maximally_entangled",
    "pauli_pmd",
    "pmd_guessing_dual",
    "random_pure_state",
    "read_sweep_csv",
    "require_valid",
    "run_eta_sweep",
    "save_instance",
    "schmidt_decompose",
    "seesaw_minimize",
    "star_incompatibility_weight",
    "state_step",
    "sweep_warm_start",
    "validate",
    "weight_dual",
    "weight_lower_bound",
    "witness_from_unsteerable",
    "write_sweep_csv",
    "__version__",
]
