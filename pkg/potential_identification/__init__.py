"""Phase shifts of layered spherical potentials and their recovery from phase shifts."""
from potential_identification.errors import (
    ConfigurationError,
    DegeneratePoolError,
    DomainError,
    IdentificationError,
    LayerIndexError,
    OracleError,
    RiccatiRangeWarning,
    UnsupportedRegimeError,
)
from potential_identification.forward_solver import (
    PhaseShiftSet,
    TransferMatrix,
    oracle_phase_shift,
    oracle_phase_shifts,
    phase_shift,
    phase_shifts,
    shift_count,
    transfer_matrix,
)
from potential_identification.global_search import (
    IrrsParams,
    MinimizingSet,
    StabilityReport,
    Verdict,
    diameter,
    irrs,
    reduced_random_search,
    reduced_sample,
    run_irrs,
    verdict_for,
)
from potential_identification.local_search import LocalParams, SearchBox, SearchPoint, basic_powell, line_minimize, lmm, reduce
from potential_identification.objective import InverseProblem, NoiseSpec, add_noise, phi
from potential_identification.potential import (
    REFERENCE_POTENTIALS,
    AdmissibleSet,
    PotentialConfig,
    distance,
    l2_norm,
    make_potential,
    merge_layers,
    sample_uniform,
    scale_potential,
    zero_potential,
)
from potential_identification.special_functions import RiccatiPair, riccati_j, riccati_n, riccati_row, riccati_table

__all__ = [
    "AdmissibleSet",
    "ConfigurationError",
    "DegeneratePoolError",
    "DomainError",
    "IdentificationError",
    "InverseProblem",
    "IrrsParams",
    "LayerIndexError",
    "LocalParams",
    "MinimizingSet",
    "NoiseSpec",
    "OracleError",
    "PhaseShiftSet",
    "PotentialConfig",
    "REFERENCE_POTENTIALS",
    "RiccatiPair",
    "RiccatiRangeWarning",
    "SearchBox",
    "SearchPoint",
    "StabilityReport",
    "TransferMatrix",
    "UnsupportedRegimeError",
    "Verdict",
    "add_noise",
    "basic_powell",
    "diameter",
    "distance",
    "irrs",
    "l2_norm",
    "line_minimize",
    "lmm",
    "make_potential",
    "merge_layers",
    "oracle_phase_shift",
    "oracle_phase_shifts",
    "phase_shift",
    "phase_shifts",
    "phi",
    "reduce",
    "reduced_random_search",
    "reduced_sample",
    "riccati_j",
    "riccati_n",
    "riccati_row",
    "riccati_table",
    "run_irrs",
    "sample_uniform",
    "scale_potential",
    "shift_count",
    "transfer_matrix",
    "verdict_for",
    "zero_potential",
]
